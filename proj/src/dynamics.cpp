#include "damarl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "damarl/error.hpp"

namespace damarl {

void DynamicsConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dynamics: dt must be positive");
    if (!(h_s < h_g)) throw ValidationError("dynamics: h_s must be below h_g");
    if (!(u_min < 0.0 && 0.0 < u_max)) throw ValidationError("dynamics: need u_min < 0 < u_max");
    if (!(v_max > 0.0)) throw ValidationError("dynamics: v_max must be positive");
    if (!std::isfinite(h_min)) throw ValidationError("dynamics: h_min must be finite");
}

VehicleState step_vehicle(const VehicleState& state, double v_pred, double u_pred, double u_cmd,
                          const DynamicsConfig& cfg) {
    if (!std::isfinite(state.h) || !std::isfinite(state.v) || !std::isfinite(state.u) ||
        !std::isfinite(v_pred) || !std::isfinite(u_pred) || !std::isfinite(u_cmd)) {
        throw ValidationError("step_vehicle: non-finite input");
    }
    const double dt = cfg.dt;
    VehicleState next;
    next.u = std::clamp(u_cmd, cfg.u_min, cfg.u_max);
    next.h = state.h + (v_pred - state.v) * dt + 0.5 * (u_pred - next.u) * dt * dt;
    next.v = std::clamp(state.v + next.u * dt, 0.0, cfg.v_max);
    return next;
}

double ovm_velocity(double h, const DynamicsConfig& cfg) {
    if (!std::isfinite(h)) throw ValidationError("ovm_velocity: non-finite headway");
    if (h < cfg.h_s) return 0.0;
    if (h > cfg.h_g) return cfg.v_max;
    const double phase = std::numbers::pi * (h - cfg.h_s) / (cfg.h_g - cfg.h_s);
    return 0.5 * cfg.v_max * (1.0 - std::cos(phase));
}

double ideal_acceleration(double alpha, double beta, const VehicleState& state, double v_pred,
                          const DynamicsConfig& cfg) {
    const double u = alpha * (ovm_velocity(state.h, cfg) - state.v) + beta * (v_pred - state.v);
    return std::clamp(u, cfg.u_min, cfg.u_max);
}

std::vector<Violation> check_constraints(const VehicleState& state, const DynamicsConfig& cfg) {
    std::vector<Violation> out;
    if (!(state.h >= cfg.h_min)) out.push_back(Violation::Headway);
    if (!(state.v >= 0.0 && state.v <= cfg.v_max)) out.push_back(Violation::Velocity);
    if (!(state.u >= cfg.u_min && state.u <= cfg.u_max)) out.push_back(Violation::Acceleration);
    return out;
}

} // namespace damarl
