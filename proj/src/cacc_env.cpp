#include "damarl/cacc_env.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "damarl/error.hpp"

namespace damarl {

namespace {

void check_interval(const Interval& r, const char* name) {
    if (!(r.lo > 0.0) || !(r.lo <= r.hi) || !std::isfinite(r.hi)) {
        throw ValidationError(std::string("scenario: invalid ") + name + " (need 0 < lo <= hi)");
    }
}

double draw(const Interval& r, std::mt19937_64& rng) {
    if (r.lo == r.hi) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

} // namespace

void ScenarioConfig::validate() const {
    if (platoon_size < 2) throw ValidationError("scenario: platoon_size must be >= 2");
    if (episode_steps < 1) throw ValidationError("scenario: episode_steps must be >= 1");
    if (!(h_star > 0.0)) throw ValidationError("scenario: h_star must be positive");
    if (!(v_final >= 0.0) || !(v_start >= 0.0)) throw ValidationError("scenario: reference speeds must be >= 0");
    if (!(ramp_time > 0.0)) throw ValidationError("scenario: ramp_time must be positive");
    if (!(delay_tau >= 0.0)) throw ValidationError("scenario: delay_tau must be >= 0");
    check_interval(a_range, "a_range");
    check_interval(b_range, "b_range");
}

void EnvConfig::validate() const {
    scenario.validate();
    dynamics.validate();
    reward.validate();
    if (!agent_delays.empty()) {
        if (static_cast<int>(agent_delays.size()) != scenario.platoon_size) {
            throw ValidationError("env: agent_delays must list one delay per vehicle");
        }
        for (int k : agent_delays) {
            if (k < 0) throw ValidationError("env: negative agent delay");
        }
    }
}

std::vector<int> EnvConfig::resolved_delays() const {
    if (!agent_delays.empty()) return agent_delays;
    return std::vector<int>(static_cast<std::size_t>(scenario.platoon_size),
                            delay_steps(scenario.delay_tau, dynamics.dt));
}

double v_star(double t, const ScenarioConfig& cfg) {
    if (cfg.kind == ScenarioKind::Catchup || t >= cfg.ramp_time) return cfg.v_final;
    const double frac = std::max(t, 0.0) / cfg.ramp_time;
    return cfg.v_start + (cfg.v_final - cfg.v_start) * frac;
}

std::array<double, kObsDim> build_features(int i, const PlatoonState& state, const EnvConfig& cfg) {
    const auto& dyn = cfg.dynamics;
    const double h_star = cfg.scenario.h_star;
    const VehicleState& me = state.vehicles.at(static_cast<std::size_t>(i));
    const double v_pred = i == 0 ? v_star(state.time_step * dyn.dt, cfg.scenario)
                                 : state.vehicles[static_cast<std::size_t>(i - 1)].v;
    const double v_diff = v_pred - me.v;
    return {me.v / dyn.v_max, v_diff, ovm_velocity(me.h, dyn) - me.v, (me.h + v_diff * dyn.dt - h_star) / h_star,
            me.u / dyn.u_max};
}

PlatoonState initial_state(const EnvConfig& cfg, std::uint64_t seed) {
    const auto& sc = cfg.scenario;
    std::mt19937_64 rng(seed);
    PlatoonState s;
    s.vehicles.resize(static_cast<std::size_t>(sc.platoon_size));
    if (sc.kind == ScenarioKind::Catchup) {
        const double v0 = v_star(0.0, sc);
        for (auto& veh : s.vehicles) veh = {sc.h_star, v0, 0.0};
        s.vehicles.front().h = draw(sc.a_range, rng) * sc.h_star;
    } else {
        const double b = draw(sc.b_range, rng);
        const double v0 = std::clamp(b * sc.v_final, 0.0, cfg.dynamics.v_max);
        for (auto& veh : s.vehicles) veh = {sc.h_star, v0, 0.0};
    }
    return s;
}

CaccEnv::CaccEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    delays_ = cfg_.resolved_delays();
}

std::vector<AugmentedObservation> CaccEnv::reset(std::uint64_t seed) {
    state_ = initial_state(cfg_, seed);
    buffers_.clear();
    for (int k : delays_) buffers_.emplace_back(k, kNeutralAction);
    started_ = true;
    return observations();
}

std::vector<AugmentedObservation> CaccEnv::observations() const {
    std::vector<AugmentedObservation> out(buffers_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].obs = build_features(static_cast<int>(i), state_, cfg_);
        out[i].planned = buffers_[i].planned_sequence();
    }
    return out;
}

StepResult CaccEnv::step(std::span<const ActionTriple> actions) {
    if (!started_) throw ContractError("env: step before reset");
    if (state_.done) throw ContractError("env: step on a finished episode");
    const int n = num_agents();
    if (static_cast<int>(actions.size()) != n) throw ContractError("env: expected one action per agent");

    const auto& dyn = cfg_.dynamics;
    const auto& sc = cfg_.scenario;
    const double t = state_.time_step * dyn.dt;
    const double ref_now = v_star(t, sc);
    const double ref_next = v_star(t + dyn.dt, sc);
    const double ref_accel = (ref_next - ref_now) / dyn.dt;

    StepResult res;
    res.info.executed.resize(static_cast<std::size_t>(n));
    res.info.decisions.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        res.info.executed[ui] = buffers_[ui].commit_and_pop(actions[ui]);
        FilterContext ctx;
        ctx.self = state_.vehicles[ui];
        ctx.v_pred = i == 0 ? ref_now : state_.vehicles[ui - 1].v;
        ctx.u_pred = i == 0 ? ref_accel : state_.vehicles[ui - 1].u;
        ctx.h_star = sc.h_star;
        ctx.v_star_next = ref_next;
        res.info.decisions[ui] = filter_action(res.info.executed[ui], ctx, cfg_.reward, dyn);
    }

    std::vector<VehicleState> next(static_cast<std::size_t>(n));
    res.rewards.resize(static_cast<std::size_t>(n));
    bool collision = false;
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double v_pred = i == 0 ? ref_now : state_.vehicles[ui - 1].v;
        const double u_pred = i == 0 ? ref_accel : res.info.decisions[ui - 1].chosen_u;
        next[ui] = step_vehicle(state_.vehicles[ui], v_pred, u_pred, res.info.decisions[ui].chosen_u, dyn);
        res.rewards[ui] = compute_reward(next[ui].h, next[ui].v, next[ui].u, sc.h_star, ref_next, cfg_.reward);
        if (next[ui].h < dyn.h_min) collision = true;
    }

    state_.vehicles = std::move(next);
    ++state_.time_step;
    if (collision) {
        for (auto& r : res.rewards) r += cfg_.reward.collision_penalty / cfg_.reward.c;
        state_.collision = true;
    }
    state_.done = collision || state_.time_step >= sc.episode_steps;

    res.done = state_.done;
    res.collision = state_.collision;
    res.observations = observations();
    return res;
}

} // namespace damarl
