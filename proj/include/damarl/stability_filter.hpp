#pragma once

#include "damarl/action.hpp"
#include "damarl/dynamics.hpp"
#include "damarl/reward.hpp"

namespace damarl {

enum class FilterPick { Ideal, Raw };

struct FilterDecision {
    double chosen_u = 0.0;
    double candidate_ideal = 0.0;
    double candidate_raw = 0.0;
    double reward_ideal = 0.0;
    double reward_raw = 0.0;
    FilterPick picked = FilterPick::Ideal;
};

/// What a vehicle knows when filtering: its own state, its predecessor's
/// current speed and acceleration, and the targets one step ahead.
struct FilterContext {
    VehicleState self;
    double v_pred = 0.0;
    double u_pred = 0.0;
    double h_star = 20.0;
    double v_star_next = 15.0; ///< reference speed at t + dt
};

/// Reward of applying `u` for one step from `ctx`.
double one_step_reward(double u, const FilterContext& ctx, const RewardWeights& w, const DynamicsConfig& cfg);

/// Chooses between the OVM ideal acceleration built from (alpha, beta) and the
/// raw policy acceleration by one-step reward; ties go to the ideal action.
FilterDecision filter_action(const ActionTriple& action, const FilterContext& ctx, const RewardWeights& w,
                             const DynamicsConfig& cfg);

} // namespace damarl
