#include "damarl/stability_filter.hpp"

#include <algorithm>

namespace damarl {

double one_step_reward(double u, const FilterContext& ctx, const RewardWeights& w, const DynamicsConfig& cfg) {
    const VehicleState next = step_vehicle(ctx.self, ctx.v_pred, ctx.u_pred, u, cfg);
    return compute_reward(next.h, next.v, next.u, ctx.h_star, ctx.v_star_next, w);
}

FilterDecision filter_action(const ActionTriple& action, const FilterContext& ctx, const RewardWeights& w,
                             const DynamicsConfig& cfg) {
    FilterDecision d;
    d.candidate_ideal = ideal_acceleration(action.alpha, action.beta, ctx.self, ctx.v_pred, cfg);
    d.candidate_raw = std::clamp(action.u_hat, cfg.u_min, cfg.u_max);
    d.reward_ideal = one_step_reward(d.candidate_ideal, ctx, w, cfg);
    d.reward_raw = one_step_reward(d.candidate_raw, ctx, w, cfg);
    if (d.reward_ideal >= d.reward_raw) {
        d.picked = FilterPick::Ideal;
        d.chosen_u = d.candidate_ideal;
    } else {
        d.picked = FilterPick::Raw;
        d.chosen_u = d.candidate_raw;
    }
    return d;
}

} // namespace damarl
