#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "damarl/action.hpp"
#include "damarl/delay_pipeline.hpp"
#include "damarl/dynamics.hpp"
#include "damarl/reward.hpp"
#include "damarl/stability_filter.hpp"

namespace damarl {

enum class ScenarioKind { Catchup, Slowdown };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Catchup;
    int platoon_size = 5;
    int episode_steps = 600;
    double h_star = 20.0;
    /// Reference speed: Catchup holds v_final; Slowdown ramps linearly from
    /// v_start to v_final over ramp_time seconds and holds afterwards.
    double v_start = 30.0;
    double v_final = 15.0;
    double ramp_time = 30.0;
    Interval a_range{3.0, 4.0}; ///< Catchup leader headway multiplier
    Interval b_range{1.5, 2.5}; ///< Slowdown initial speed multiplier
    double delay_tau = 0.5;     ///< total delay [s]; k = floor(tau / dt)

    void validate() const;
};

/// Everything that defines an environment instance.
struct EnvConfig {
    ScenarioConfig scenario;
    DynamicsConfig dynamics;
    RewardWeights reward;
    ActionBounds bounds;
    /// Per-agent delay steps. Empty means every agent uses floor(tau / dt).
    std::vector<int> agent_delays;

    void validate() const;
    [[nodiscard]] std::vector<int> resolved_delays() const;
};

struct PlatoonState {
    std::vector<VehicleState> vehicles; ///< index 0 is the platoon leader
    int time_step = 0;
    bool done = false;
    bool collision = false;
};

double v_star(double t, const ScenarioConfig& cfg);

/// The five environment features of agent i:
/// [v / v_max, v_pred - v, v°(h) - v, (h + (v_pred - v) dt - h*) / h*, u / u_max].
/// The leader's predecessor is the virtual reference vehicle at v*(t).
std::array<double, kObsDim> build_features(int i, const PlatoonState& state, const EnvConfig& cfg);

struct StepInfo {
    std::vector<ActionTriple> executed;   ///< triples popped from the delay buffers
    std::vector<FilterDecision> decisions; ///< filter outcome per agent
};

struct StepResult {
    std::vector<AugmentedObservation> observations;
    std::vector<double> rewards;
    bool done = false;
    bool collision = false;
    StepInfo info;
};

/// Multi-agent CACC episode engine with per-agent delay buffers and the
/// stability filter on the execution path. Single-writer.
class CaccEnv {
public:
    explicit CaccEnv(EnvConfig cfg);

    std::vector<AugmentedObservation> reset(std::uint64_t seed);
    StepResult step(std::span<const ActionTriple> actions);

    [[nodiscard]] const PlatoonState& state() const { return state_; }
    [[nodiscard]] const EnvConfig& config() const { return cfg_; }
    [[nodiscard]] int num_agents() const { return cfg_.scenario.platoon_size; }
    [[nodiscard]] const std::vector<int>& delays() const { return delays_; }
    [[nodiscard]] std::vector<AugmentedObservation> observations() const;

private:
    EnvConfig cfg_;
    std::vector<int> delays_;
    PlatoonState state_;
    std::vector<ActionBuffer> buffers_;
    bool started_ = false;
};

/// Initial platoon for a scenario, drawing the Catchup/Slowdown multiplier
/// from a generator seeded with `seed`.
PlatoonState initial_state(const EnvConfig& cfg, std::uint64_t seed);

} // namespace damarl
