#include "damarl/delay_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "damarl/error.hpp"

namespace damarl {

ActionTriple ActionBounds::clamp(const ActionTriple& a) const {
    return {std::clamp(a.alpha, 0.0, alpha_max), std::clamp(a.beta, 0.0, beta_max),
            std::clamp(a.u_hat, u_min, u_max)};
}

ActionBuffer::ActionBuffer(int k, const ActionTriple& fill) {
    if (k < 0) throw ValidationError("action buffer: negative delay " + std::to_string(k));
    queue_.assign(static_cast<std::size_t>(k), fill);
}

ActionTriple ActionBuffer::commit_and_pop(const ActionTriple& next) {
    if (queue_.empty()) return next;
    ActionTriple executed = queue_.front();
    queue_.pop_front();
    queue_.push_back(next);
    return executed;
}

std::vector<ActionTriple> ActionBuffer::planned_sequence() const {
    return {queue_.begin(), queue_.end()};
}

int delay_steps(double tau, double dt) {
    if (!(tau >= 0.0) || !(dt > 0.0)) throw ValidationError("delay_steps: need tau >= 0 and dt > 0");
    return static_cast<int>(std::floor(tau / dt + 1e-9));
}

void AugmentedObservation::flatten_into(std::span<double> out) const {
    if (static_cast<int>(out.size()) != dim()) throw ContractError("observation: output span has wrong size");
    std::copy(obs.begin(), obs.end(), out.begin());
    std::size_t j = kObsDim;
    for (const auto& a : planned) {
        out[j++] = a.alpha;
        out[j++] = a.beta;
        out[j++] = a.u_hat;
    }
}

std::vector<double> AugmentedObservation::flatten() const {
    std::vector<double> out(static_cast<std::size_t>(dim()));
    flatten_into(out);
    return out;
}

} // namespace damarl
