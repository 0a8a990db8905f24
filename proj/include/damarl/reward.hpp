#pragma once

namespace damarl {

/// Weights of the quadratic tracking reward
/// R = (w1 (h - h*)^2 + w2 (v - v*)^2 + w3 u^2) / C.
struct RewardWeights {
    double w1 = -1.0;
    double w2 = -1.0;
    double w3 = -0.2;
    double c = 15.0;
    /// Added (divided by c) to every agent's reward on a collision step.
    double collision_penalty = -1000.0;

    void validate() const;
};

double compute_reward(double h, double v, double u, double h_star, double v_star, const RewardWeights& w);

} // namespace damarl
