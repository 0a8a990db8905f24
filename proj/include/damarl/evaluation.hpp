#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "damarl/cacc_env.hpp"
#include "damarl/checkpoint.hpp"

namespace damarl {

/// Decentralized policy: agent index and all current observations in, the
/// agent's action out.
using PolicyFn = std::function<ActionTriple(int, std::span<const AugmentedObservation>)>;

/// Noise-free greedy policy backed by trained actors.
PolicyFn actor_policy(const PolicySet& policy);

struct TrialResult {
    int trial = 0;
    std::uint64_t seed = 0;
    int steps = 0;
    bool collision = false;
    long samples = 0;            ///< vehicle-steps entering the averages
    double avg_headway = 0.0;
    double avg_velocity = 0.0;
    double episode_return = 0.0; ///< per-agent return, averaged over agents
};

struct EvalReport {
    double avg_headway = 0.0;
    double avg_velocity = 0.0;
    int collision_count = 0;
    double avg_return = 0.0;
    int trials = 0;
    std::vector<TrialResult> rows;
};

/// Runs one episode; headway and velocity are averaged over all vehicles
/// after every step that did not end in a collision.
TrialResult run_trial(const PolicyFn& policy, const EnvConfig& env, std::uint64_t seed);

/// `trials` episodes with seeds derived from `seed`.
EvalReport evaluate(const PolicyFn& policy, const EnvConfig& env, int trials, std::uint64_t seed);
EvalReport evaluate(const PolicySet& policy, const EnvConfig& env, int trials, std::uint64_t seed);

/// Recomputes the report from its per-trial rows.
EvalReport aggregate(std::vector<TrialResult> rows);

void write_trials_csv(const std::string& path, const EvalReport& report);
void write_summary_csv(const std::string& path, const EvalReport& report);
std::vector<TrialResult> read_trials_csv(const std::string& path);

/// One per-vehicle row of a traced episode.
struct TraceRow {
    int step = 0;    ///< 1-based step index
    int vehicle = 0; ///< 1-based, 1 is the leader
    VehicleState state;
    double reward = 0.0;
    ActionTriple executed;
    double executed_u = 0.0;
    FilterPick picked = FilterPick::Ideal;
    std::array<double, 3> attention{}; ///< head-averaged weights: self, predecessor, follower
    bool collision = false;
};

std::vector<TraceRow> trace_episode(const PolicySet& policy, const EnvConfig& env, std::uint64_t seed);
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

} // namespace damarl
