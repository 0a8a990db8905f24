#include "damarl/evaluation.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "damarl/error.hpp"
#include "damarl/seeding.hpp"

namespace damarl {

PolicyFn actor_policy(const PolicySet& policy) {
    return [&policy](int i, std::span<const AugmentedObservation> obs) {
        return policy.actors.at(static_cast<std::size_t>(i)).act(policy.layout.actor_batch(obs, i));
    };
}

TrialResult run_trial(const PolicyFn& policy, const EnvConfig& env_cfg, std::uint64_t seed) {
    CaccEnv env(env_cfg);
    auto obs = env.reset(seed);
    const int n = env.num_agents();
    TrialResult r;
    r.seed = seed;
    double headway = 0.0;
    double velocity = 0.0;
    double total_reward = 0.0;
    std::vector<ActionTriple> actions(static_cast<std::size_t>(n));
    while (!env.state().done) {
        for (int i = 0; i < n; ++i) actions[static_cast<std::size_t>(i)] = policy(i, obs);
        StepResult res = env.step(actions);
        ++r.steps;
        for (double x : res.rewards) total_reward += x;
        if (!res.collision) {
            for (const auto& v : env.state().vehicles) {
                headway += v.h;
                velocity += v.v;
                ++r.samples;
            }
        }
        obs = std::move(res.observations);
    }
    r.collision = env.state().collision;
    r.avg_headway = r.samples > 0 ? headway / static_cast<double>(r.samples) : 0.0;
    r.avg_velocity = r.samples > 0 ? velocity / static_cast<double>(r.samples) : 0.0;
    r.episode_return = total_reward / n;
    return r;
}

EvalReport aggregate(std::vector<TrialResult> rows) {
    EvalReport rep;
    rep.trials = static_cast<int>(rows.size());
    double headway = 0.0;
    double velocity = 0.0;
    double ret = 0.0;
    long samples = 0;
    for (const auto& r : rows) {
        headway += r.avg_headway * static_cast<double>(r.samples);
        velocity += r.avg_velocity * static_cast<double>(r.samples);
        samples += r.samples;
        ret += r.episode_return;
        if (r.collision) ++rep.collision_count;
    }
    if (samples > 0) {
        rep.avg_headway = headway / static_cast<double>(samples);
        rep.avg_velocity = velocity / static_cast<double>(samples);
    }
    if (rep.trials > 0) rep.avg_return = ret / rep.trials;
    rep.rows = std::move(rows);
    return rep;
}

EvalReport evaluate(const PolicyFn& policy, const EnvConfig& env, int trials, std::uint64_t seed) {
    if (trials < 1) throw ValidationError("evaluate: trials must be >= 1");
    std::vector<TrialResult> rows;
    for (int t = 0; t < trials; ++t) {
        TrialResult r = run_trial(policy, env, derive_seed(seed, seed_stream::kTrial, static_cast<std::uint64_t>(t)));
        r.trial = t;
        rows.push_back(r);
    }
    return aggregate(std::move(rows));
}

EvalReport evaluate(const PolicySet& policy, const EnvConfig& env, int trials, std::uint64_t seed) {
    require_compatible(policy, env.resolved_delays());
    return evaluate(actor_policy(policy), env, trials, seed);
}

void write_trials_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "trial,seed,steps,collision,samples,avg_headway,avg_velocity,return\n" << std::setprecision(17);
    for (const auto& r : report.rows) {
        out << r.trial << ',' << r.seed << ',' << r.steps << ',' << (r.collision ? 1 : 0) << ',' << r.samples << ','
            << r.avg_headway << ',' << r.avg_velocity << ',' << r.episode_return << '\n';
    }
}

void write_summary_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "trials,avg_headway,avg_velocity,collision_count,avg_return\n" << std::setprecision(17);
    out << report.trials << ',' << report.avg_headway << ',' << report.avg_velocity << ',' << report.collision_count
        << ',' << report.avg_return << '\n';
}

std::vector<TrialResult> read_trials_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<TrialResult> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> cells;
        while (std::getline(ss, f, ',')) cells.push_back(f);
        if (cells.size() != 8) throw ValidationError("trials csv: malformed row '" + line + "'");
        TrialResult r;
        r.trial = std::stoi(cells[0]);
        r.seed = std::stoull(cells[1]);
        r.steps = std::stoi(cells[2]);
        r.collision = cells[3] == "1";
        r.samples = std::stol(cells[4]);
        r.avg_headway = std::stod(cells[5]);
        r.avg_velocity = std::stod(cells[6]);
        r.episode_return = std::stod(cells[7]);
        rows.push_back(r);
    }
    return rows;
}

std::vector<TraceRow> trace_episode(const PolicySet& policy, const EnvConfig& env_cfg, std::uint64_t seed) {
    CaccEnv env(env_cfg);
    require_compatible(policy, env.delays());
    auto obs = env.reset(seed);
    const int n = env.num_agents();
    std::vector<TraceRow> rows;
    std::vector<ActionTriple> actions(static_cast<std::size_t>(n));
    std::vector<std::array<double, 3>> attention(static_cast<std::size_t>(n));
    while (!env.state().done) {
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            ActorTape tape;
            const Matrix a = policy.actors[ui].forward(policy.layout.actor_batch(obs, i), &tape);
            actions[ui] = {a(0, 0), a(1, 0), a(2, 0)};
            Matrix mean = Matrix::Zero(kSlots, 1);
            for (const auto& w : tape.weights) mean += w;
            mean /= static_cast<double>(tape.weights.size());
            attention[ui] = {mean(0, 0), mean(1, 0), mean(2, 0)};
        }
        StepResult res = env.step(actions);
        const auto& st = env.state();
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            TraceRow row;
            row.step = st.time_step;
            row.vehicle = i + 1;
            row.state = st.vehicles[ui];
            row.reward = res.rewards[ui];
            row.executed = res.info.executed[ui];
            row.executed_u = res.info.decisions[ui].chosen_u;
            row.picked = res.info.decisions[ui].picked;
            row.attention = attention[ui];
            row.collision = res.collision;
            rows.push_back(row);
        }
        obs = std::move(res.observations);
    }
    return rows;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "step,vehicle,h,v,u,reward,alpha,beta,u_hat,executed_u,picked,w_self,w_predecessor,w_follower,collision\n"
        << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.step << ',' << r.vehicle << ',' << r.state.h << ',' << r.state.v << ',' << r.state.u << ','
            << r.reward << ',' << r.executed.alpha << ',' << r.executed.beta << ',' << r.executed.u_hat << ','
            << r.executed_u << ',' << (r.picked == FilterPick::Ideal ? "Ideal" : "Raw") << ',' << r.attention[0]
            << ',' << r.attention[1] << ',' << r.attention[2] << ',' << (r.collision ? 1 : 0) << '\n';
    }
}

} // namespace damarl
