// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance                 run every criterion
//   acceptance --only 1,2,7    run a subset
//   acceptance --out DIR       where training/eval artifacts go

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "damarl/agent_io.hpp"
#include "damarl/allocator.hpp"
#include "damarl/cacc_env.hpp"
#include "damarl/commands.hpp"
#include "damarl/delay_pipeline.hpp"
#include "damarl/dynamics.hpp"
#include "damarl/evaluation.hpp"
#include "damarl/policy_network.hpp"
#include "damarl/reward.hpp"
#include "damarl/stability_filter.hpp"
#include "damarl/trainer.hpp"
#include "test_support.hpp"

using namespace damarl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome ovm_exactness() {
    const DynamicsConfig cfg; // h_s = 5, h_g = 35, v_max = 30
    const double at5 = ovm_velocity(5.0, cfg);
    const double at35 = ovm_velocity(35.0, cfg);
    const double at20 = ovm_velocity(20.0, cfg);
    const double err = std::max({std::abs(at5 - 0.0), std::abs(at35 - 30.0), std::abs(at20 - 15.0)});
    double jump = 0.0;
    for (double knee : {cfg.h_s, cfg.h_g}) {
        const double lo = ovm_velocity(std::nextafter(knee, -1e9), cfg);
        const double hi = ovm_velocity(std::nextafter(knee, 1e9), cfg);
        jump = std::max({jump, std::abs(lo - hi), std::abs(lo - ovm_velocity(knee, cfg))});
    }
    return {err <= 1e-12 && jump <= 1e-9, fmt("max value error %.3g, max knee jump %.3g", err, jump)};
}

Outcome reward_oracle() {
    const RewardWeights w;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> h(0.0, 80.0), v(0.0, 30.0), u(-2.0, 2.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double hh = h(rng), vv = v(rng), uu = u(rng), hs = h(rng), vs = v(rng);
        const double hand = (-1.0 * (hh - hs) * (hh - hs) + -1.0 * (vv - vs) * (vv - vs) + -0.2 * uu * uu) / 15.0;
        worst = std::max(worst, std::abs(compute_reward(hh, vv, uu, hs, vs, w) - hand));
    }
    const double at_target = compute_reward(20.0, 15.0, 0.0, 20.0, 15.0, w);
    return {worst <= 1e-12 && at_target == 0.0, fmt("max error %.3g over 100 draws, target reward %g", worst, at_target)};
}

// Deterministic stand-in policy: a smooth function of the agent's features.
ActionTriple probe_policy(int i, const std::array<double, kObsDim>& f) {
    return {0.5 + 0.45 * std::sin(3.0 * f[0] + i), 0.5 + 0.45 * std::cos(f[1] + 0.3 * i),
            2.0 * std::tanh(0.2 * f[2] - 2.0 * f[3] + 0.1 * i)};
}

Outcome delay_free_reduction() {
    EnvConfig cfg;
    cfg.scenario.platoon_size = 5;
    cfg.scenario.delay_tau = 0.0;
    const auto& dyn = cfg.dynamics;
    const auto& sc = cfg.scenario;
    long compared = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CaccEnv env(cfg);
        auto obs = env.reset(seed);
        // direct implementation: no buffers, policy output goes straight to the filter
        PlatoonState ref = initial_state(cfg, seed);
        for (int t = 0; t < sc.episode_steps; ++t) {
            std::vector<ActionTriple> env_actions, ref_actions;
            for (int i = 0; i < 5; ++i) {
                env_actions.push_back(probe_policy(i, obs[static_cast<std::size_t>(i)].obs));
                ref_actions.push_back(probe_policy(i, build_features(i, ref, cfg)));
            }
            const StepResult r = env.step(env_actions);

            const double now = v_star(t * dyn.dt, sc);
            const double next = v_star((t + 1) * dyn.dt, sc);
            std::vector<double> chosen(5);
            for (int i = 0; i < 5; ++i) {
                FilterContext ctx;
                ctx.self = ref.vehicles[static_cast<std::size_t>(i)];
                ctx.v_pred = i == 0 ? now : ref.vehicles[static_cast<std::size_t>(i - 1)].v;
                ctx.u_pred = i == 0 ? (next - now) / dyn.dt : ref.vehicles[static_cast<std::size_t>(i - 1)].u;
                ctx.h_star = sc.h_star;
                ctx.v_star_next = next;
                chosen[static_cast<std::size_t>(i)] = filter_action(ref_actions[static_cast<std::size_t>(i)], ctx, cfg.reward, dyn).chosen_u;
            }
            std::vector<VehicleState> moved(5);
            bool collision = false;
            for (int i = 0; i < 5; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const double vp = i == 0 ? now : ref.vehicles[ui - 1].v;
                const double up = i == 0 ? (next - now) / dyn.dt : chosen[ui - 1];
                moved[ui] = step_vehicle(ref.vehicles[ui], vp, up, chosen[ui], dyn);
                collision |= moved[ui].h < dyn.h_min;
            }
            ref.vehicles = moved;
            for (int i = 0; i < 5; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                double rew = compute_reward(moved[ui].h, moved[ui].v, moved[ui].u, sc.h_star, next, cfg.reward);
                if (collision) rew += cfg.reward.collision_penalty / cfg.reward.c;
                if (!(env.state().vehicles[ui] == moved[ui]) || r.rewards[ui] != rew || r.info.executed[ui] != env_actions[ui]) {
                    return {false, fmt("seed %llu step %d vehicle %d differs", static_cast<unsigned long long>(seed), t, i)};
                }
                ++compared;
            }
            ++ref.time_step;
            if (r.collision != collision) return {false, fmt("seed %llu step %d collision flag differs", static_cast<unsigned long long>(seed), t)};
            if (r.done) {
                if (!collision && t + 1 != sc.episode_steps) return {false, "episode ended early"};
                break;
            }
            obs = r.observations;
        }
    }
    return {true, fmt("%ld vehicle-steps bit-identical over 10 seeds", compared)};
}

Outcome buffer_shift_law() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    long checked = 0;
    for (int k = 1; k <= 8; ++k) {
        for (int rep = 0; rep < 25; ++rep) {
            const ActionTriple fill{d(rng), d(rng), d(rng)};
            ActionBuffer buf(k, fill);
            std::vector<ActionTriple> committed;
            for (int t = 0; t < 100; ++t) {
                committed.push_back({d(rng), d(rng), d(rng)});
                const ActionTriple out = buf.commit_and_pop(committed.back());
                const ActionTriple expect = t >= k ? committed[static_cast<std::size_t>(t - k)] : fill;
                if (!(out == expect) || buf.delay() != k) return {false, fmt("k=%d t=%d mismatch", k, t)};
                ++checked;
            }
        }
    }
    return {true, fmt("%ld executions exact for k = 1..8", checked)};
}

Outcome filter_argmax() {
    const DynamicsConfig cfg;
    const RewardWeights w;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int ties = 0, raw = 0;
    for (int k = 0; k < 10'000; ++k) {
        FilterContext ctx;
        ctx.self = {1.0 + 70.0 * unit(rng), 30.0 * unit(rng), -2.0 + 4.0 * unit(rng)};
        ctx.v_pred = 30.0 * unit(rng);
        ctx.u_pred = -2.0 + 4.0 * unit(rng);
        ctx.v_star_next = 15.0 + 15.0 * unit(rng);
        ActionTriple a{unit(rng), unit(rng), -2.0 + 4.0 * unit(rng)};
        if (k % 10 == 0) a.u_hat = ideal_acceleration(a.alpha, a.beta, ctx.self, ctx.v_pred, cfg);
        const FilterDecision d = filter_action(a, ctx, w, cfg);
        const double r_ideal = one_step_reward(d.candidate_ideal, ctx, w, cfg);
        const double r_raw = one_step_reward(d.candidate_raw, ctx, w, cfg);
        const double chosen = d.picked == FilterPick::Ideal ? r_ideal : r_raw;
        const double rejected = d.picked == FilterPick::Ideal ? r_raw : r_ideal;
        const double chosen_u = d.picked == FilterPick::Ideal ? d.candidate_ideal : d.candidate_raw;
        if (chosen < rejected || d.chosen_u != chosen_u) return {false, fmt("draw %d violates the argmax", k)};
        if (r_ideal == r_raw) {
            ++ties;
            if (d.picked != FilterPick::Ideal) return {false, fmt("draw %d: tie not given to Ideal", k)};
        }
        raw += d.picked == FilterPick::Raw;
    }
    return {true, fmt("10000 draws, %d ties (all Ideal), %d Raw picks", ties, raw)};
}

Outcome attention_normalization() {
    const Actor actor(ActorArch{}, 6);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> d(0.0, 2.0);
    double worst_sum = 0.0, min_w = 1.0;
    for (int mask = 0; mask < 4; ++mask) {
        const Eigen::Index n = 250; // 4 masks x 250 = 1000 inputs
        auto draw = [&] {
            Matrix m(20, n);
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
            return m;
        };
        const AttentionOutput out = actor.attend(actor.encode(draw()), actor.encode(draw()), actor.encode(draw()),
                                                 (mask & 1) != 0, (mask & 2) != 0);
        for (const auto& w : out.weights) {
            min_w = std::min(min_w, w.minCoeff());
            for (Eigen::Index c = 0; c < n; ++c) worst_sum = std::max(worst_sum, std::abs(w.col(c).sum() - 1.0));
        }
    }
    return {min_w >= 0.0 && worst_sum <= 1e-6, fmt("min weight %.3g, max |sum - 1| %.3g", min_w, worst_sum)};
}

Outcome gradient_checks() {
    using damarl::testing::block_errors;
    using damarl::testing::central_difference;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> d(0.0, 1.0);
    auto random = [&](int r, int c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
        return m;
    };
    double worst = 0.0;
    std::string worst_block;
    ActorArch arch;
    arch.input_dim = 8;
    arch.hidden = 6;
    arch.head_dim = 4;
    arch.mix_dim = 5;
    for (int mask = 0; mask < 4; ++mask) {
        Actor actor(arch, 70 + static_cast<std::uint64_t>(mask));
        for (Eigen::Index i = 0; i < actor.params().size(); ++i) actor.params().values()(i) = 0.6 * d(rng);
        ActorBatch b{random(8, 3), random(8, 3), random(8, 3), (mask & 1) != 0, (mask & 2) != 0};
        const Matrix up = random(3, 3);
        ActorTape tape;
        actor.forward(b, &tape);
        Vector g = actor.params().zeros();
        actor.backward(tape, up, g);
        const Vector num = central_difference(actor.params().values(), [&] { return up.cwiseProduct(actor.forward(b)).sum(); });
        for (const auto& e : block_errors(actor.params(), g, num)) {
            if (e.error > worst) worst = e.error, worst_block = "actor " + e.name;
        }
    }
    Critic critic({8, 7}, 71);
    for (Eigen::Index i = 0; i < critic.params().size(); ++i) critic.params().values()(i) = 0.5 * d(rng);
    const Matrix x = random(8, 3);
    const Matrix up = random(1, 3);
    CriticTape tape;
    critic.forward(x, &tape);
    Vector g = critic.params().zeros();
    critic.backward(tape, up, &g, false);
    const Vector num = central_difference(critic.params().values(), [&] { return up.cwiseProduct(critic.forward(x)).sum(); });
    for (const auto& e : block_errors(critic.params(), g, num)) {
        if (e.error > worst) worst = e.error, worst_block = "critic " + e.name;
    }
    return {worst < 1e-4, fmt("max block relative error %.3g (%s)", worst, worst_block.c_str())};
}

Outcome trainer_mechanics() {
    Vector target(1), online(1);
    target << 0.0;
    online << 1.0;
    nn::soft_update(target, online, 0.01);
    const bool soft_ok = target(0) == 0.01;
    Vector same = Vector::Constant(4, 0.25), moved = Vector::Constant(4, -3.0);
    nn::soft_update(same, moved, 1.0);
    Vector kept = Vector::Constant(4, 0.25);
    nn::soft_update(kept, moved, 0.0);
    const bool soft_edges = same == moved && kept == Vector::Constant(4, 0.25);

    EnvConfig env;
    env.scenario.platoon_size = 3;
    TrainConfig tc;
    tc.gamma = 0.97;
    tc.actor_hidden = 8;
    tc.head_dim = 4;
    tc.critic_hidden = 16;
    Trainer trainer(env, tc);
    CaccEnv sim(env);
    auto obs = sim.reset(3);
    std::vector<Transition> trs;
    for (int t = 0; t < 6; ++t) {
        std::vector<ActionTriple> a{{0.2, 0.7, 0.4}, {0.6, 0.1, -1.0}, {0.9, 0.5, 1.5}};
        const StepResult r = sim.step(a);
        Transition tr;
        const Vector x = trainer.layout().flatten(obs), xn = trainer.layout().flatten(r.observations);
        tr.x.assign(x.data(), x.data() + x.size());
        tr.x_next.assign(xn.data(), xn.data() + xn.size());
        for (const auto& ai : a) tr.actions.insert(tr.actions.end(), {ai.alpha, ai.beta, ai.u_hat});
        tr.rewards = r.rewards;
        trs.push_back(tr);
        obs = r.observations;
    }
    auto terminal = trs;
    for (auto& t : terminal) t.done = true;
    const Batch tb = make_batch(terminal);
    bool done_ok = true;
    for (int i = 0; i < 3; ++i) done_ok &= trainer.td_targets(i, tb) == tb.rewards.row(i);

    const Transition& one = trs.back();
    const Batch ob = make_batch(std::span(&one, 1));
    const ObsLayout& L = trainer.layout();
    const Vector xn = Eigen::Map<const Vector>(one.x_next.data(), static_cast<Eigen::Index>(one.x_next.size()));
    Vector in(L.critic_input_dim());
    in.head(L.state_dim()) = xn;
    for (int j = 0; j < 3; ++j) {
        ActorBatch b{xn.segment(L.offset(j), L.agent_dim(j)), Matrix::Zero(L.agent_dim(j), 1),
                     Matrix::Zero(L.agent_dim(j), 1), j > 0, j < 2};
        if (j > 0) b.predecessor.topRows(5) = xn.segment(L.offset(j - 1), 5);
        if (j < 2) b.follower.topRows(5) = xn.segment(L.offset(j + 1), 5);
        const ActionTriple a = trainer.agent(j).target_actor.act(b);
        in.segment(L.state_dim() + 3 * j, 3) << a.alpha, a.beta, a.u_hat;
    }
    double td_err = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double manual = one.rewards[static_cast<std::size_t>(i)] +
                              0.97 * damarl::testing::critic_oracle(trainer.agent(i).target_critic, in);
        td_err = std::max(td_err, std::abs(trainer.td_targets(i, ob)(0) - manual));
    }
    return {soft_ok && soft_edges && done_ok && td_err <= 1e-9,
            fmt("soft update %s, terminal targets %s, manual TD error %.3g", soft_ok && soft_edges ? "exact" : "WRONG",
                done_ok ? "exact" : "WRONG", td_err)};
}

// ---------------------------------------------------------------------------
// Desk-scale learning runs, shared by the learning and ablation criteria.

struct LearningRun {
    std::uint64_t seed = 0;
    bool planned = true;
    EvalReport untrained;
    EvalReport trained;
};

EnvConfig desk_env() {
    EnvConfig env;
    env.scenario.kind = ScenarioKind::Catchup;
    env.scenario.platoon_size = 5;
    env.scenario.delay_tau = 0.5; // k = 5
    return env;
}

TrainConfig desk_train(std::uint64_t seed, bool planned, long steps) {
    TrainConfig tc;
    tc.seed = seed;
    tc.use_planned_actions = planned;
    tc.max_env_steps = steps;
    tc.episodes = static_cast<int>((steps + 599) / 600);
    return tc;
}

PolicySet snapshot(const Trainer& t) {
    PolicySet p;
    p.layout = t.layout();
    for (int i = 0; i < t.num_agents(); ++i) p.actors.push_back(t.agent(i).actor);
    return p;
}

constexpr std::uint64_t kEvalSeed = 20'240'917;
constexpr int kEvalEpisodes = 10;

LearningRun learn(std::uint64_t seed, bool planned, long steps, const fs::path& out) {
    const auto start = std::chrono::steady_clock::now();
    const EnvConfig env = desk_env();
    Trainer trainer(env, desk_train(seed, planned, steps));
    LearningRun run{seed, planned, evaluate(snapshot(trainer), env, kEvalEpisodes, kEvalSeed), {}};
    const auto log = trainer.train([&](const EpisodeLog& row) {
        if (row.episode % 10 == 0) {
            std::cerr << "  [" << (planned ? "o_obs+o_act" : "o_obs only") << " seed " << seed << "] step "
                      << row.total_steps << " return " << row.mean_return << (row.collision ? " collision" : "") << '\n';
        }
    });
    run.trained = evaluate(snapshot(trainer), env, kEvalEpisodes, kEvalSeed);
    const std::string tag = std::string(planned ? "full" : "obs_only") + "_seed" + std::to_string(seed);
    write_training_log((out / ("train_log_" + tag + ".csv")).string(), log, trainer.num_agents());
    write_trials_csv((out / ("eval_untrained_" + tag + ".csv")).string(), run.untrained);
    write_trials_csv((out / ("eval_trained_" + tag + ".csv")).string(), run.trained);
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
    std::cerr << "  [" << tag << "] untrained " << run.untrained.avg_return << " trained " << run.trained.avg_return
              << " collisions " << run.trained.collision_count << "/" << kEvalEpisodes << " (" << minutes << " min)\n";
    return run;
}

Outcome desk_learning(const std::vector<LearningRun>& runs) {
    bool pass = true;
    std::ostringstream o;
    for (const auto& r : runs) {
        const int clean = r.trained.trials - r.trained.collision_count;
        pass &= r.trained.avg_return > r.untrained.avg_return && clean >= 9;
        o << fmt("seed %llu: %.2f -> %.2f, %d/10 clean; ", static_cast<unsigned long long>(r.seed),
                 r.untrained.avg_return, r.trained.avg_return, clean);
    }
    std::string s = o.str();
    s.resize(s.size() - 2);
    return {pass, s};
}

Outcome ablation(const std::vector<LearningRun>& full, const std::vector<LearningRun>& obs_only) {
    double a = 0.0, b = 0.0;
    for (const auto& r : full) a += r.trained.avg_return;
    for (const auto& r : obs_only) b += r.trained.avg_return;
    a /= static_cast<double>(full.size());
    b /= static_cast<double>(obs_only.size());
    return {a - b >= 0.0, fmt("with o_act %.3f, o_obs only %.3f, margin %+.3f", a, b, a - b)};
}

Outcome determinism(const fs::path& out) {
    const fs::path dir = out / "determinism";
    fs::create_directories(dir);
    const fs::path cfg = dir / "run.ini";
    std::ofstream(cfg) << "[scenario]\nkind = catchup\nplatoon_size = 5\ndelay_tau = 0.5\n"
                          "[train]\nseeds = 11, 12\nepisodes = 2\nwarmup_steps = 256\n";
    const auto a = run_training(cfg.string(), dir / "first");
    const auto b = run_training(cfg.string(), dir / "second");
    auto bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    bool same = true;
    for (std::size_t k = 0; k < a.logs.size(); ++k) {
        same &= bytes(a.logs[k]) == bytes(b.logs[k]) && !bytes(a.logs[k]).empty();
        same &= bytes(a.checkpoints[k]) == bytes(b.checkpoints[k]);
    }
    return {same, fmt("%zu seeds x 1200 steps: training CSVs and checkpoints %s", a.logs.size(),
                      same ? "byte-identical" : "DIFFER")};
}

} // namespace

int main(int argc, char** argv) {
    damarl::tune_allocator();
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    std::string out_dir = "acceptance_out";
    long steps = 50'000;
    app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
    app.add_option("--out", out_dir, "Artifact directory");
    app.add_option("--steps", steps, "Training budget for the learning criteria")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    const std::set<int> chosen(only.begin(), only.end());
    auto wanted = [&](int c) { return chosen.empty() || chosen.contains(c); };
    const fs::path out(out_dir);
    fs::create_directories(out);

    int failures = 0;
    std::ofstream summary(out / "summary.txt");
    auto report = [&](int id, const char* name, const Outcome& o) {
        const std::string line = "criterion " + std::to_string(id) + " " + name + ": " + (o.pass ? "PASS" : "FAIL") +
                                 " (" + o.detail + ")";
        std::cout << line << std::endl;
        summary << line << std::endl;
        failures += !o.pass;
    };
    auto run = [&](int id, const char* name, const std::function<Outcome()>& f) {
        if (!wanted(id)) return;
        try {
            report(id, name, f());
        } catch (const std::exception& e) {
            report(id, name, {false, std::string("threw: ") + e.what()});
        }
    };

    run(1, "ovm-exactness", ovm_exactness);
    run(2, "reward-oracle", reward_oracle);
    run(3, "delay-free-reduction", delay_free_reduction);
    run(4, "buffer-shift-law", buffer_shift_law);
    run(5, "filter-argmax", filter_argmax);
    run(6, "attention-normalization", attention_normalization);
    run(7, "gradient-checks", gradient_checks);
    run(8, "trainer-mechanics", trainer_mechanics);
    run(11, "determinism", [&] { return determinism(out); });

    if (wanted(9) || wanted(10)) {
        std::vector<LearningRun> full, obs_only;
        try {
            for (std::uint64_t seed : {1, 2, 3}) full.push_back(learn(seed, true, steps, out));
            if (wanted(10)) {
                for (std::uint64_t seed : {1, 2, 3}) obs_only.push_back(learn(seed, false, steps, out));
            }
        } catch (const std::exception& e) {
            std::cerr << "learning runs failed: " << e.what() << '\n';
        }
        const std::string budget = fmt(" [%ld steps]", steps);
        run(9, "desk-scale-learning", [&] {
            if (full.size() != 3) return Outcome{false, "training did not complete"};
            Outcome o = desk_learning(full);
            o.detail += budget;
            return o;
        });
        run(10, "delay-awareness-ablation", [&] {
            if (full.size() != 3 || obs_only.size() != 3) return Outcome{false, "training did not complete"};
            Outcome o = ablation(full, obs_only);
            o.detail += budget;
            return o;
        });
    }

    std::cout << (failures == 0 ? "all selected criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
    return failures == 0 ? 0 : 1;
}
