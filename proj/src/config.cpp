#include "damarl/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace damarl {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    [[nodiscard]] bool has(const std::string& key) const {
        known_.insert(key);
        return tree_.get_optional<std::string>(key).has_value();
    }

    /// Rejects keys the parser never asked for, so typos do not pass silently.
    void reject_unknown() const {
        for (const auto& [section, entries] : tree_) {
            if (section == "run") continue; // provenance written into snapshots
            if (entries.empty()) throw ConfigError(section, "expected a [section] header");
            for (const auto& [key, value] : entries) {
                const std::string full = section + "." + key;
                if (!known_.contains(full)) throw ConfigError(full, "unknown field");
            }
        }
    }

    [[nodiscard]] std::string raw(const std::string& key) const {
        known_.insert(key);
        auto v = tree_.get_optional<std::string>(key);
        if (!v) throw ConfigError(key, "missing required field");
        return trim(*v);
    }

    void read(const std::string& key, double& out) const {
        if (!has(key)) return;
        const std::string s = raw(key);
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key, "expected a number, got '" + s + "'");
        out = v;
    }

    template <class Int>
    void read_int(const std::string& key, Int& out) const {
        if (!has(key)) return;
        const std::string s = raw(key);
        Int v{};
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key, "expected an integer, got '" + s + "'");
        out = v;
    }

    void read(const std::string& key, bool& out) const {
        if (!has(key)) return;
        const std::string s = raw(key);
        if (s == "true" || s == "1" || s == "yes") {
            out = true;
        } else if (s == "false" || s == "0" || s == "no") {
            out = false;
        } else {
            throw ConfigError(key, "expected true/false, got '" + s + "'");
        }
    }

    template <class Int>
    [[nodiscard]] std::vector<Int> list(const std::string& key) const {
        std::vector<Int> out;
        std::stringstream ss(raw(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            Int v{};
            auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (ec != std::errc() || p != item.data() + item.size()) {
                throw ConfigError(key, "expected a comma-separated integer list, got '" + item + "'");
            }
            out.push_back(v);
        }
        return out;
    }

private:
    const pt::ptree& tree_;
    mutable std::set<std::string> known_;
};

template <class F>
void field(const std::string& key, F&& validate) {
    try {
        validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace

std::string to_string(ScenarioKind kind) { return kind == ScenarioKind::Catchup ? "catchup" : "slowdown"; }

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("<file>", e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    const Reader r(tree);
    RunConfig cfg;

    auto& sc = cfg.env.scenario;
    const std::string kind = r.raw("scenario.kind");
    if (kind == "catchup") {
        sc.kind = ScenarioKind::Catchup;
    } else if (kind == "slowdown") {
        sc.kind = ScenarioKind::Slowdown;
    } else {
        throw ConfigError("scenario.kind", "expected catchup or slowdown, got '" + kind + "'");
    }
    (void)r.raw("scenario.platoon_size");
    r.read_int("scenario.platoon_size", sc.platoon_size);
    r.read_int("scenario.episode_steps", sc.episode_steps);
    r.read("scenario.h_star", sc.h_star);
    r.read("scenario.v_start", sc.v_start);
    r.read("scenario.v_final", sc.v_final);
    r.read("scenario.ramp_time", sc.ramp_time);
    r.read("scenario.a_min", sc.a_range.lo);
    r.read("scenario.a_max", sc.a_range.hi);
    r.read("scenario.b_min", sc.b_range.lo);
    r.read("scenario.b_max", sc.b_range.hi);
    r.read("scenario.delay_tau", sc.delay_tau);
    if (r.has("scenario.agent_delays") && !r.raw("scenario.agent_delays").empty()) {
        cfg.env.agent_delays = r.list<int>("scenario.agent_delays");
    }

    auto& dyn = cfg.env.dynamics;
    r.read("dynamics.dt", dyn.dt);
    r.read("dynamics.h_min", dyn.h_min);
    r.read("dynamics.v_max", dyn.v_max);
    r.read("dynamics.u_min", dyn.u_min);
    r.read("dynamics.u_max", dyn.u_max);
    r.read("dynamics.h_s", dyn.h_s);
    r.read("dynamics.h_g", dyn.h_g);

    auto& w = cfg.env.reward;
    r.read("reward.w1", w.w1);
    r.read("reward.w2", w.w2);
    r.read("reward.w3", w.w3);
    r.read("reward.c", w.c);
    r.read("reward.collision_penalty", w.collision_penalty);

    auto& b = cfg.env.bounds;
    r.read("action.alpha_max", b.alpha_max);
    r.read("action.beta_max", b.beta_max);
    b.u_min = dyn.u_min;
    b.u_max = dyn.u_max;
    if (!(b.alpha_max > 0.0)) throw ConfigError("action.alpha_max", "must be positive");
    if (!(b.beta_max > 0.0)) throw ConfigError("action.beta_max", "must be positive");

    auto& tc = cfg.train;
    r.read_int("train.episodes", tc.episodes);
    r.read_int("train.steps_per_episode", tc.steps_per_episode);
    r.read_int("train.max_env_steps", tc.max_env_steps);
    r.read_int("train.batch_size", tc.batch_size);
    r.read_int("train.replay_capacity", tc.replay_capacity);
    r.read_int("train.warmup_steps", tc.warmup_steps);
    r.read("train.gamma", tc.gamma);
    r.read("train.actor_lr", tc.actor_lr);
    r.read("train.critic_lr", tc.critic_lr);
    r.read("train.kappa", tc.kappa);
    r.read("train.noise_start", tc.noise_start);
    r.read("train.noise_end", tc.noise_end);
    r.read("train.noise_decay_fraction", tc.noise_decay_fraction);
    r.read("train.reward_scale", tc.reward_scale);
    r.read("train.use_planned_actions", tc.use_planned_actions);
    r.read_int("train.actor_hidden", tc.actor_hidden);
    r.read_int("train.attention_heads", tc.attention_heads);
    r.read_int("train.head_dim", tc.head_dim);
    r.read_int("train.critic_hidden", tc.critic_hidden);
    if (r.has("train.optimizer")) {
        const std::string opt = r.raw("train.optimizer");
        if (opt == "adam") {
            tc.optimizer = OptimizerKind::Adam;
        } else if (opt == "sgd") {
            tc.optimizer = OptimizerKind::Sgd;
        } else {
            throw ConfigError("train.optimizer", "expected adam or sgd, got '" + opt + "'");
        }
    }
    if (r.has("train.seeds")) cfg.seeds = r.list<std::uint64_t>("train.seeds");
    if (!cfg.seeds.empty()) tc.seed = cfg.seeds.front();
    r.reject_unknown();

    field("scenario", [&] { sc.validate(); });
    field("dynamics", [&] { dyn.validate(); });
    field("reward", [&] { w.validate(); });
    field("scenario.agent_delays", [&] { cfg.env.validate(); });
    field("train", [&] { tc.validate(); });
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_ini(const RunConfig& cfg) {
    std::ostringstream o;
    const auto& sc = cfg.env.scenario;
    const auto& dyn = cfg.env.dynamics;
    const auto& w = cfg.env.reward;
    const auto& b = cfg.env.bounds;
    const auto& tc = cfg.train;
    const auto d = format_double;

    o << "[scenario]\n"
      << "kind = " << to_string(sc.kind) << '\n'
      << "platoon_size = " << sc.platoon_size << '\n'
      << "episode_steps = " << sc.episode_steps << '\n'
      << "h_star = " << d(sc.h_star) << '\n'
      << "v_start = " << d(sc.v_start) << '\n'
      << "v_final = " << d(sc.v_final) << '\n'
      << "ramp_time = " << d(sc.ramp_time) << '\n'
      << "a_min = " << d(sc.a_range.lo) << '\n'
      << "a_max = " << d(sc.a_range.hi) << '\n'
      << "b_min = " << d(sc.b_range.lo) << '\n'
      << "b_max = " << d(sc.b_range.hi) << '\n'
      << "delay_tau = " << d(sc.delay_tau) << '\n'
      << "agent_delays = ";
    for (std::size_t i = 0; i < cfg.env.agent_delays.size(); ++i) o << (i ? "," : "") << cfg.env.agent_delays[i];
    o << "\n\n[dynamics]\n"
      << "dt = " << d(dyn.dt) << '\n'
      << "h_min = " << d(dyn.h_min) << '\n'
      << "v_max = " << d(dyn.v_max) << '\n'
      << "u_min = " << d(dyn.u_min) << '\n'
      << "u_max = " << d(dyn.u_max) << '\n'
      << "h_s = " << d(dyn.h_s) << '\n'
      << "h_g = " << d(dyn.h_g) << '\n'
      << "\n[reward]\n"
      << "w1 = " << d(w.w1) << '\n'
      << "w2 = " << d(w.w2) << '\n'
      << "w3 = " << d(w.w3) << '\n'
      << "c = " << d(w.c) << '\n'
      << "collision_penalty = " << d(w.collision_penalty) << '\n'
      << "\n[action]\n"
      << "alpha_max = " << d(b.alpha_max) << '\n'
      << "beta_max = " << d(b.beta_max) << '\n'
      << "\n[train]\n"
      << "seeds = ";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) o << (i ? "," : "") << cfg.seeds[i];
    o << '\n'
      << "episodes = " << tc.episodes << '\n'
      << "steps_per_episode = " << tc.steps_per_episode << '\n'
      << "max_env_steps = " << tc.max_env_steps << '\n'
      << "batch_size = " << tc.batch_size << '\n'
      << "replay_capacity = " << tc.replay_capacity << '\n'
      << "warmup_steps = " << tc.warmup_steps << '\n'
      << "gamma = " << d(tc.gamma) << '\n'
      << "actor_lr = " << d(tc.actor_lr) << '\n'
      << "critic_lr = " << d(tc.critic_lr) << '\n'
      << "kappa = " << d(tc.kappa) << '\n'
      << "noise_start = " << d(tc.noise_start) << '\n'
      << "noise_end = " << d(tc.noise_end) << '\n'
      << "noise_decay_fraction = " << d(tc.noise_decay_fraction) << '\n'
      << "reward_scale = " << d(tc.reward_scale) << '\n'
      << "optimizer = " << (tc.optimizer == OptimizerKind::Adam ? "adam" : "sgd") << '\n'
      << "use_planned_actions = " << (tc.use_planned_actions ? "true" : "false") << '\n'
      << "actor_hidden = " << tc.actor_hidden << '\n'
      << "attention_heads = " << tc.attention_heads << '\n'
      << "head_dim = " << tc.head_dim << '\n'
      << "critic_hidden = " << tc.critic_hidden << '\n';
    return o.str();
}

} // namespace damarl
