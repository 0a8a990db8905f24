#include "damarl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "damarl/error.hpp"
#include "damarl/seeding.hpp"

namespace damarl {

Batch make_batch(std::span<const Transition> transitions) {
    if (transitions.empty()) throw ContractError("batch: no transitions");
    const auto& first = transitions.front();
    const auto n = static_cast<Eigen::Index>(transitions.size());
    Batch b;
    b.x.resize(static_cast<Eigen::Index>(first.x.size()), n);
    b.x_next.resize(b.x.rows(), n);
    b.actions.resize(static_cast<Eigen::Index>(first.actions.size()), n);
    b.rewards.resize(static_cast<Eigen::Index>(first.rewards.size()), n);
    b.done.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const auto& t = transitions[static_cast<std::size_t>(c)];
        if (t.x.size() != first.x.size() || t.x_next.size() != first.x.size() ||
            t.actions.size() != first.actions.size() || t.rewards.size() != first.rewards.size()) {
            throw ContractError("batch: inconsistent transition dimensions");
        }
        b.x.col(c) = Eigen::Map<const Vector>(t.x.data(), b.x.rows());
        b.x_next.col(c) = Eigen::Map<const Vector>(t.x_next.data(), b.x.rows());
        b.actions.col(c) = Eigen::Map<const Vector>(t.actions.data(), b.actions.rows());
        b.rewards.col(c) = Eigen::Map<const Vector>(t.rewards.data(), b.rewards.rows());
        b.done(c) = t.done ? 1.0 : 0.0;
    }
    return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("replay: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    for (double r : t.rewards) {
        if (!std::isfinite(r)) throw ValidationError("replay: non-finite reward");
    }
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
        return;
    }
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= data_.size()) throw ContractError("replay: index out of range");
    return data_[(head_ + i) % data_.size()];
}

Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
    if (batch_size == 0 || data_.size() < batch_size) {
        throw ContractError("replay: " + std::to_string(data_.size()) + " transitions stored, batch of " +
                            std::to_string(batch_size) + " requested");
    }
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<Transition> chosen;
    chosen.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) chosen.push_back(data_[pick(rng)]);
    return make_batch(chosen);
}

void TrainConfig::validate() const {
    if (episodes < 1) throw ValidationError("train: episodes must be >= 1");
    if (steps_per_episode < 1) throw ValidationError("train: steps_per_episode must be >= 1");
    if (max_env_steps < 0) throw ValidationError("train: max_env_steps must be >= 0");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (replay_capacity < static_cast<std::size_t>(batch_size)) {
        throw ValidationError("train: replay_capacity must hold at least one batch");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("train: gamma must lie in (0, 1)");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ValidationError("train: kappa must lie in (0, 1]");
    if (!(actor_lr >= 0.0) || !(critic_lr >= 0.0)) throw ValidationError("train: learning rates must be >= 0");
    if (!(noise_start >= 0.0) || !(noise_end >= 0.0)) throw ValidationError("train: noise levels must be >= 0");
    if (!(noise_decay_fraction > 0.0 && noise_decay_fraction <= 1.0)) {
        throw ValidationError("train: noise_decay_fraction must lie in (0, 1]");
    }
    if (!(reward_scale > 0.0)) throw ValidationError("train: reward_scale must be positive");
    if (actor_hidden < 1 || attention_heads < 1 || head_dim < 1 || critic_hidden < 1) {
        throw ValidationError("train: network sizes must be positive");
    }
}

Trainer::Trainer(EnvConfig env_cfg, TrainConfig cfg)
    : env_cfg_(std::move(env_cfg)), cfg_(cfg), replay_(cfg.replay_capacity),
      noise_rng_(derive_seed(cfg.seed, seed_stream::kNoise)),
      replay_rng_(derive_seed(cfg.seed, seed_stream::kReplay)) {
    env_cfg_.validate();
    cfg_.validate();
    layout_ = ObsLayout(env_cfg_.resolved_delays(), cfg_.use_planned_actions);

    const CriticArch critic_arch{layout_.critic_input_dim(), cfg_.critic_hidden};
    for (int i = 0; i < num_agents(); ++i) {
        ActorArch arch;
        arch.input_dim = layout_.actor_input_dim(i);
        arch.hidden = cfg_.actor_hidden;
        arch.heads = cfg_.attention_heads;
        arch.head_dim = cfg_.head_dim;
        arch.mix_dim = cfg_.actor_hidden;
        arch.bounds = env_cfg_.bounds;
        const auto ui = static_cast<std::uint64_t>(i);
        AgentNets a;
        a.actor = Actor(arch, derive_seed(cfg_.seed, seed_stream::kActor, ui));
        a.target_actor = a.actor;
        a.critic = Critic(critic_arch, derive_seed(cfg_.seed, seed_stream::kCritic, ui));
        a.target_critic = a.critic;
        a.actor_opt = nn::Adam(a.actor.params().size(), cfg_.actor_lr);
        a.critic_opt = nn::Adam(a.critic.params().size(), cfg_.critic_lr);
        agents_.push_back(std::move(a));
    }
}

ActionTriple Trainer::select_action(int i, std::span<const AugmentedObservation> obs, double noise) {
    const ActionTriple a = agent(i).actor.act(layout_.actor_batch(obs, i));
    if (noise <= 0.0) return a;
    const auto& b = env_cfg_.bounds;
    std::normal_distribution<double> gauss(0.0, 1.0);
    ActionTriple noisy = a;
    noisy.alpha += noise * b.alpha_max * gauss(noise_rng_);
    noisy.beta += noise * b.beta_max * gauss(noise_rng_);
    noisy.u_hat += noise * (b.u_max - b.u_min) * gauss(noise_rng_);
    return b.clamp(noisy);
}

Matrix Trainer::critic_input(const Matrix& x, const Matrix& actions) const {
    Matrix in(x.rows() + actions.rows(), x.cols());
    in << x, actions;
    return in;
}

Matrix Trainer::target_actions(const Batch& batch) const {
    Matrix out(kActionDim * num_agents(), batch.size());
    for (int j = 0; j < num_agents(); ++j) {
        out.middleRows(kActionDim * j, kActionDim) = agent(j).target_actor.forward(layout_.actor_batch(batch.x_next, j));
    }
    return out;
}

Eigen::RowVectorXd Trainer::td_targets(int i, const Batch& batch, const Matrix* next_actions) const {
    const Eigen::Index n = batch.size();
    const Matrix computed = next_actions ? Matrix() : target_actions(batch);
    const Matrix& a_next = next_actions ? *next_actions : computed;
    if (a_next.rows() != kActionDim * num_agents() || a_next.cols() != n) {
        throw ContractError("td_targets: next-action matrix has the wrong shape");
    }
    const Matrix q_next = agent(i).target_critic.forward(critic_input(batch.x_next, a_next));
    Eigen::RowVectorXd y(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const double r = cfg_.reward_scale * batch.rewards(i, c);
        y(c) = batch.done(c) != 0.0 ? r : r + cfg_.gamma * q_next(0, c);
    }
    return y;
}

void Trainer::apply(nn::Adam& opt, double lr, Vector& params, const Vector& grad) {
    if (lr == 0.0) return;
    if (cfg_.optimizer == OptimizerKind::Adam) {
        opt.step(params, grad);
    } else {
        params -= lr * grad;
    }
}

double Trainer::critic_update(int i, const Batch& batch, const Matrix* next_actions) {
    if (batch.size() == 0) throw ContractError("critic_update: empty batch");
    const Eigen::RowVectorXd y = td_targets(i, batch, next_actions);
    auto& a = agent(i);
    CriticTape tape;
    const Matrix q = a.critic.forward(critic_input(batch.x, batch.actions), &tape);
    const Eigen::RowVectorXd err = q.row(0) - y;
    const double n = static_cast<double>(batch.size());
    const double loss = err.squaredNorm() / n;
    Vector grad = a.critic.params().zeros();
    a.critic.backward(tape, (2.0 / n) * err, &grad, false);
    apply(a.critic_opt, cfg_.critic_lr, a.critic.params().values(), grad);
    return loss;
}

double Trainer::actor_update(int i, const Batch& batch) {
    if (batch.size() == 0) throw ContractError("actor_update: empty batch");
    auto& a = agent(i);
    ActorTape actor_tape;
    const Matrix own = a.actor.forward(layout_.actor_batch(batch.x, i), &actor_tape);
    Matrix actions = batch.actions;
    actions.middleRows(kActionDim * i, kActionDim) = own;

    CriticTape critic_tape;
    const Matrix q = a.critic.forward(critic_input(batch.x, actions), &critic_tape);
    const double n = static_cast<double>(batch.size());
    // ascend mean Q: the loss is -mean Q
    const Matrix d_q = Matrix::Constant(1, batch.size(), -1.0 / n);
    const Matrix d_own =
        a.critic.input_grad_rows(critic_tape, d_q, layout_.state_dim() + kActionDim * i, kActionDim);

    Vector grad = a.actor.params().zeros();
    a.actor.backward(actor_tape, d_own, grad);
    apply(a.actor_opt, cfg_.actor_lr, a.actor.params().values(), grad);
    return grad.norm();
}

void Trainer::soft_update(int i, double kappa) {
    auto& a = agent(i);
    nn::soft_update(a.target_actor.params().values(), a.actor.params().values(), kappa);
    nn::soft_update(a.target_critic.params().values(), a.critic.params().values(), kappa);
}

long Trainer::planned_steps() const {
    const int per_episode = std::min(cfg_.steps_per_episode, env_cfg_.scenario.episode_steps);
    const long by_episodes = static_cast<long>(cfg_.episodes) * per_episode;
    return cfg_.max_env_steps > 0 ? std::min(cfg_.max_env_steps, by_episodes) : by_episodes;
}

double Trainer::noise_at(long step) const {
    const double horizon = cfg_.noise_decay_fraction * static_cast<double>(planned_steps());
    const double frac = horizon > 0.0 ? std::min(1.0, static_cast<double>(step) / horizon) : 1.0;
    return cfg_.noise_start + (cfg_.noise_end - cfg_.noise_start) * frac;
}

std::vector<EpisodeLog> Trainer::train(const std::function<void(const EpisodeLog&)>& on_episode) {
    EnvConfig ecfg = env_cfg_;
    ecfg.scenario.episode_steps = std::min(cfg_.steps_per_episode, ecfg.scenario.episode_steps);
    CaccEnv env(ecfg);
    const int n = num_agents();
    const long update_start = std::max<long>(cfg_.warmup_steps, cfg_.batch_size);

    std::vector<EpisodeLog> log;
    long total = 0;
    for (int ep = 0; ep < cfg_.episodes; ++ep) {
        if (cfg_.max_env_steps > 0 && total >= cfg_.max_env_steps) break;
        auto obs = env.reset(derive_seed(cfg_.seed, seed_stream::kEpisode, static_cast<std::uint64_t>(ep)));
        EpisodeLog row;
        row.episode = ep;
        row.agent_returns.assign(static_cast<std::size_t>(n), 0.0);
        long ideal_picks = 0;
        double loss_sum = 0.0;
        long loss_count = 0;

        bool done = false;
        while (!done) {
            const double noise = noise_at(total);
            std::vector<ActionTriple> actions(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) actions[static_cast<std::size_t>(i)] = select_action(i, obs, noise);
            StepResult res = env.step(actions);

            Transition tr;
            const Vector x = layout_.flatten(obs);
            const Vector xn = layout_.flatten(res.observations);
            tr.x.assign(x.data(), x.data() + x.size());
            tr.x_next.assign(xn.data(), xn.data() + xn.size());
            for (const auto& a : actions) tr.actions.insert(tr.actions.end(), {a.alpha, a.beta, a.u_hat});
            tr.rewards = res.rewards;
            tr.done = res.done;
            replay_.push(std::move(tr));

            for (int i = 0; i < n; ++i) {
                row.agent_returns[static_cast<std::size_t>(i)] += res.rewards[static_cast<std::size_t>(i)];
                if (res.info.decisions[static_cast<std::size_t>(i)].picked == FilterPick::Ideal) ++ideal_picks;
            }
            ++row.steps;
            ++total;
            obs = std::move(res.observations);
            done = res.done;

            if (static_cast<long>(replay_.size()) >= update_start) {
                // one minibatch per step, shared by all agents; target actors
                // only change in the soft update below
                const Batch batch = replay_.sample(static_cast<std::size_t>(cfg_.batch_size), replay_rng_);
                const Matrix next_actions = target_actions(batch);
                for (int i = 0; i < n; ++i) {
                    loss_sum += critic_update(i, batch, &next_actions);
                    ++loss_count;
                    actor_update(i, batch);
                }
                for (int i = 0; i < n; ++i) soft_update(i, cfg_.kappa);
            }
            if (cfg_.max_env_steps > 0 && total >= cfg_.max_env_steps) break;
        }
        row.total_steps = total;
        row.collision = env.state().collision;
        row.override_rate = static_cast<double>(ideal_picks) / static_cast<double>(row.steps * n);
        row.critic_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        double sum = 0.0;
        for (double r : row.agent_returns) sum += r;
        row.mean_return = sum / n;
        if (on_episode) on_episode(row);
        log.push_back(std::move(row));
    }
    return log;
}

std::vector<Actor> Trainer::actors() const {
    std::vector<Actor> out;
    for (const auto& a : agents_) out.push_back(a.actor);
    return out;
}

void write_training_log(const std::string& path, const std::vector<EpisodeLog>& rows, int num_agents) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write training log: " + path);
    out << "episode,steps,total_steps,mean_return";
    for (int i = 1; i <= num_agents; ++i) out << ",return_" << i;
    out << ",collision,override_rate,critic_loss\n";
    out << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.episode << ',' << r.steps << ',' << r.total_steps << ',' << r.mean_return;
        for (double v : r.agent_returns) out << ',' << v;
        out << ',' << (r.collision ? 1 : 0) << ',' << r.override_rate << ',' << r.critic_loss << '\n';
    }
}

} // namespace damarl
