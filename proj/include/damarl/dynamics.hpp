#pragma once

#include <vector>

namespace damarl {

/// Longitudinal state of one vehicle. Headway is measured bumper-to-bumper to
/// the preceding vehicle; a value below h_min is representable and signals a
/// collision.
struct VehicleState {
    double h = 0.0; ///< headway [m]
    double v = 0.0; ///< velocity [m/s]
    double u = 0.0; ///< acceleration [m/s^2]

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct DynamicsConfig {
    double dt = 0.1;     ///< sampling interval [s]
    double h_min = 1.0;  ///< minimum safe headway [m]
    double v_max = 30.0; ///< [m/s]
    double u_min = -2.0; ///< [m/s^2]
    double u_max = 2.0;  ///< [m/s^2]
    double h_s = 5.0;    ///< stopped headway of the OVM [m]
    double h_g = 35.0;   ///< full-speed headway of the OVM [m]

    /// Throws ValidationError when the invariants dt > 0, h_s < h_g,
    /// u_min < 0 < u_max and v_max > 0 do not hold.
    void validate() const;
};

/// Advances one vehicle by dt against its predecessor.
///
/// The commanded acceleration is clamped to [u_min, u_max] first, the headway
/// is integrated exactly for piecewise-constant accelerations, and the new
/// velocity is clamped to [0, v_max] last.
VehicleState step_vehicle(const VehicleState& state, double v_pred, double u_pred, double u_cmd,
                          const DynamicsConfig& cfg);

/// Optimal-velocity map: 0 below h_s, raised-cosine ramp to v_max on
/// [h_s, h_g], v_max above.
double ovm_velocity(double h, const DynamicsConfig& cfg);

/// OVM ideal acceleration alpha*(v°(h) - v) + beta*(v_pred - v), clamped to
/// the actuator limits.
double ideal_acceleration(double alpha, double beta, const VehicleState& state, double v_pred,
                          const DynamicsConfig& cfg);

enum class Violation { Headway, Velocity, Acceleration };

std::vector<Violation> check_constraints(const VehicleState& state, const DynamicsConfig& cfg);

} // namespace damarl
