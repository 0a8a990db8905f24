#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "damarl/agent_io.hpp"
#include "damarl/cacc_env.hpp"
#include "damarl/nn/params.hpp"
#include "damarl/policy_network.hpp"

namespace damarl {

/// Replay record for the centralized critics. Actions are the pre-filter
/// triples the actors emitted.
struct Transition {
    std::vector<double> x;
    std::vector<double> actions; ///< 3N: (alpha, beta, u_hat) per agent
    std::vector<double> rewards; ///< N
    std::vector<double> x_next;
    bool done = false;
};

/// Column-stacked minibatch.
struct Batch {
    Matrix x;       ///< state_dim x B
    Matrix actions; ///< 3N x B
    Matrix rewards; ///< N x B
    Matrix x_next;  ///< state_dim x B
    Eigen::RowVectorXd done; ///< 1 x B, 1.0 for terminal

    [[nodiscard]] Eigen::Index size() const { return x.cols(); }
};

Batch make_batch(std::span<const Transition> transitions);

/// Fixed-capacity ring store; the oldest transition is evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    /// i-th oldest stored transition.
    [[nodiscard]] const Transition& at(std::size_t i) const;

    /// Uniform sampling with replacement. Throws ContractError when fewer than
    /// `batch_size` transitions are stored.
    Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0; // index of the oldest entry once full
    std::vector<Transition> data_;
};

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
    int episodes = 100;
    int steps_per_episode = 600;  ///< episodes are cut at min(this, scenario episode_steps)
    long max_env_steps = 0;       ///< stop once this many steps ran; 0 = no cap
    int batch_size = 128;
    std::size_t replay_capacity = 200'000;
    long warmup_steps = 2'000;
    double gamma = 0.99;
    double actor_lr = 5.0e-4;
    double critic_lr = 2.5e-4;
    double kappa = 0.01;
    double noise_start = 0.1; ///< fraction of each action coordinate's range
    double noise_end = 0.01;
    double noise_decay_fraction = 0.5; ///< share of training over which noise decays
    double reward_scale = 1.0;         ///< multiplies rewards inside the critic targets
    OptimizerKind optimizer = OptimizerKind::Adam;
    bool use_planned_actions = true;
    int actor_hidden = 64;
    int attention_heads = 2;
    int head_dim = 64;
    int critic_hidden = 256;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Per-episode row of the training log.
struct EpisodeLog {
    int episode = 0;
    int steps = 0;
    long total_steps = 0;
    std::vector<double> agent_returns;
    double mean_return = 0.0;
    bool collision = false;
    double override_rate = 0.0; ///< share of agent-steps where the filter kept the ideal action
    double critic_loss = 0.0;   ///< mean over updates in the episode (0 when none ran)
};

/// One agent's online and target networks with their optimizers.
struct AgentNets {
    Actor actor;
    Actor target_actor;
    Critic critic;
    Critic target_critic;
    nn::Adam actor_opt;
    nn::Adam critic_opt;
};

/// Centralized-training / decentralized-execution deterministic policy
/// gradient learner over the delay-augmented platoon environment.
class Trainer {
public:
    Trainer(EnvConfig env_cfg, TrainConfig cfg);

    [[nodiscard]] const ObsLayout& layout() const { return layout_; }
    [[nodiscard]] const TrainConfig& config() const { return cfg_; }
    [[nodiscard]] const EnvConfig& env_config() const { return env_cfg_; }
    [[nodiscard]] int num_agents() const { return layout_.num_agents(); }
    AgentNets& agent(int i) { return agents_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const AgentNets& agent(int i) const { return agents_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const ReplayBuffer& replay() const { return replay_; }
    ReplayBuffer& replay() { return replay_; }

    /// Actor output for agent i plus Gaussian noise with standard deviation
    /// `noise` times each coordinate's range, clamped back into range.
    ActionTriple select_action(int i, std::span<const AugmentedObservation> obs, double noise);

    /// Target-actor actions mu'_j(o'_j) for every agent, stacked 3N x B.
    [[nodiscard]] Matrix target_actions(const Batch& batch) const;
    /// y = scale * r_i + gamma * (1 - done) * Q'_i(x', mu'_1(o'_1), ..., mu'_N(o'_N)).
    /// `next_actions` may carry a precomputed target_actions(batch).
    [[nodiscard]] Eigen::RowVectorXd td_targets(int i, const Batch& batch, const Matrix* next_actions = nullptr) const;
    /// Critic input [x; a_1; ...; a_N].
    [[nodiscard]] Matrix critic_input(const Matrix& x, const Matrix& actions) const;

    /// One TD step on agent i's critic; returns the pre-update loss.
    double critic_update(int i, const Batch& batch, const Matrix* next_actions = nullptr);
    /// One deterministic-policy-gradient step on agent i's actor; returns the
    /// gradient norm.
    double actor_update(int i, const Batch& batch);
    void soft_update(int i, double kappa);

    /// Noise level for a given global step under the linear decay schedule.
    [[nodiscard]] double noise_at(long step) const;

    std::vector<EpisodeLog> train(const std::function<void(const EpisodeLog&)>& on_episode = {});

    /// Online actors, one per agent.
    [[nodiscard]] std::vector<Actor> actors() const;

private:
    [[nodiscard]] long planned_steps() const;
    void apply(nn::Adam& opt, double lr, Vector& params, const Vector& grad);

    EnvConfig env_cfg_;
    TrainConfig cfg_;
    ObsLayout layout_;
    std::vector<AgentNets> agents_;
    ReplayBuffer replay_;
    std::mt19937_64 noise_rng_;
    std::mt19937_64 replay_rng_;
};

/// Writes the per-episode training log as CSV.
void write_training_log(const std::string& path, const std::vector<EpisodeLog>& rows, int num_agents);

} // namespace damarl
