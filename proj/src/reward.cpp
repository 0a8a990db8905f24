#include "damarl/reward.hpp"

#include <cmath>

#include "damarl/error.hpp"

namespace damarl {

void RewardWeights::validate() const {
    if (c == 0.0 || !std::isfinite(c)) throw ValidationError("reward: scaling coefficient C must be non-zero");
    if (!std::isfinite(w1) || !std::isfinite(w2) || !std::isfinite(w3) || !std::isfinite(collision_penalty)) {
        throw ValidationError("reward: weights must be finite");
    }
}

double compute_reward(double h, double v, double u, double h_star, double v_star, const RewardWeights& w) {
    const double dh = h - h_star;
    const double dv = v - v_star;
    return (w.w1 * dh * dh + w.w2 * dv * dv + w.w3 * u * u) / w.c;
}

} // namespace damarl
