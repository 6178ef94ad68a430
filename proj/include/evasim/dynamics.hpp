#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "evasim/errors.hpp"

namespace evasim {

// Frame conventions used throughout the simulation:
//   x forward along the road, y positive to the RIGHT of the travel direction,
//   yaw positive clockwise seen from above (a rightward turn increases yaw,
//   steering-wheel angle and column torque are positive rightward).
// Lateral acceleration for analysis output uses the opposite (leftward
// positive) sign; see lateral_acceleration().

/// Parameters of the 2-DOF linear bicycle model plus the torque-driven
/// steering column. Defaults are typical mid-size sedan values.
struct VehicleParams {
    double mass = 1500.0;                      // kg
    double yaw_inertia = 2500.0;               // kg*m^2
    double dist_cg_front_axle = 1.1;           // m
    double dist_cg_rear_axle = 1.6;            // m
    double cornering_stiffness_front = 80000.0;  // N/rad
    double cornering_stiffness_rear = 80000.0;   // N/rad
    double steering_ratio = 16.0;              // steering-wheel angle per road-wheel angle
    double column_inertia = 0.05;              // kg*m^2
    double column_damping = 0.5;               // N*m*s/rad

    double wheelbase() const { return dist_cg_front_axle + dist_cg_rear_axle; }

    /// Understeer gradient K_us = (m/L)*(lr/Cf - lf/Cr).
    double understeer_gradient() const {
        return mass / wheelbase() *
               (dist_cg_rear_axle / cornering_stiffness_front -
                dist_cg_front_axle / cornering_stiffness_rear);
    }

    /// Steady-state yaw rate for a constant road-wheel angle at speed vx:
    /// r_ss = vx*delta / (L + K_us*vx^2).
    double steady_state_yaw_rate(double road_wheel_angle, double vx) const {
        return vx * road_wheel_angle / (wheelbase() + understeer_gradient() * vx * vx);
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string("VehicleParams: ") + name + " must be strictly positive");
        };
        positive(mass, "mass");
        positive(yaw_inertia, "yaw_inertia");
        positive(dist_cg_front_axle, "dist_cg_front_axle");
        positive(dist_cg_rear_axle, "dist_cg_rear_axle");
        positive(cornering_stiffness_front, "cornering_stiffness_front");
        positive(cornering_stiffness_rear, "cornering_stiffness_rear");
        positive(column_inertia, "column_inertia");
        positive(column_damping, "column_damping");
        if (!(steering_ratio >= 1.0))
            throw ConfigError("VehicleParams: steering_ratio must be >= 1");
    }
};

/// Planar pose, body-frame velocities and steering-column state.
/// vx is held constant by cruise control and must stay positive.
struct VehicleState {
    double x = 0.0;         // m, world frame
    double y = 0.0;         // m, world frame
    double yaw = 0.0;       // rad
    double vx = 0.0;        // m/s, body longitudinal
    double vy = 0.0;        // m/s, body lateral
    double yaw_rate = 0.0;  // rad/s
    double swa = 0.0;       // rad, steering wheel angle
    double swa_rate = 0.0;  // rad/s
};

/// Fixed-step simulation clock. The 120 Hz default puts the integration grid
/// on the measurement grid, so no resampling is needed anywhere downstream.
struct SimClock {
    std::int64_t step_index = 0;
    double dt = 1.0 / 120.0;

    double time() const { return static_cast<double>(step_index) * dt; }
};

namespace detail {

struct StateDerivative {
    double x_dot, y_dot, yaw_dot, vy_dot, yaw_rate_dot, swa_dot, swa_rate_dot;
};

inline StateDerivative vehicle_derivative(const VehicleState& s, const VehicleParams& p,
                                          double total_torque) {
    const double cf = p.cornering_stiffness_front;
    const double cr = p.cornering_stiffness_rear;
    const double lf = p.dist_cg_front_axle;
    const double lr = p.dist_cg_rear_axle;
    const double m = p.mass;
    const double iz = p.yaw_inertia;
    const double vx = s.vx;
    const double road_wheel = s.swa / p.steering_ratio;

    StateDerivative d;
    d.x_dot = vx * std::cos(s.yaw) - s.vy * std::sin(s.yaw);
    d.y_dot = vx * std::sin(s.yaw) + s.vy * std::cos(s.yaw);
    d.yaw_dot = s.yaw_rate;
    d.vy_dot = -(cf + cr) / (m * vx) * s.vy +
               (-vx - (cf * lf - cr * lr) / (m * vx)) * s.yaw_rate +
               cf / m * road_wheel;
    d.yaw_rate_dot = -(cf * lf - cr * lr) / (iz * vx) * s.vy -
                     (cf * lf * lf + cr * lr * lr) / (iz * vx) * s.yaw_rate +
                     cf * lf / iz * road_wheel;
    d.swa_dot = s.swa_rate;
    d.swa_rate_dot = (total_torque - p.column_damping * s.swa_rate) / p.column_inertia;
    return d;
}

inline VehicleState apply(const VehicleState& s, const StateDerivative& d, double h) {
    VehicleState out = s;
    out.x += h * d.x_dot;
    out.y += h * d.y_dot;
    out.yaw += h * d.yaw_dot;
    out.vy += h * d.vy_dot;
    out.yaw_rate += h * d.yaw_rate_dot;
    out.swa += h * d.swa_dot;
    out.swa_rate += h * d.swa_rate_dot;
    return out;
}

inline void check_finite(double v, const char* name, const char* where) {
    if (!std::isfinite(v))
        throw DivergenceError(std::string(where) + ": non-finite " + name);
}

}  // namespace detail

/// Advances the coupled steering-column + bicycle ODEs by one classical RK4
/// step. Driver and assist torques sum on the column; vx is untouched.
inline VehicleState step_vehicle(const VehicleState& state, const VehicleParams& params,
                                 double assist_torque, double driver_torque, double dt) {
    using detail::check_finite;
    check_finite(state.x, "x", "step_vehicle");
    check_finite(state.y, "y", "step_vehicle");
    check_finite(state.yaw, "yaw", "step_vehicle");
    check_finite(state.vx, "vx", "step_vehicle");
    check_finite(state.vy, "vy", "step_vehicle");
    check_finite(state.yaw_rate, "yaw_rate", "step_vehicle");
    check_finite(state.swa, "swa", "step_vehicle");
    check_finite(state.swa_rate, "swa_rate", "step_vehicle");
    check_finite(assist_torque, "assist_torque", "step_vehicle");
    check_finite(driver_torque, "driver_torque", "step_vehicle");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw ConfigError("step_vehicle: dt must be positive and finite");
    if (!(state.vx > 0.0))
        throw DivergenceError("step_vehicle: vx must stay positive (cruise control)");

    const double torque = assist_torque + driver_torque;
    const auto k1 = detail::vehicle_derivative(state, params, torque);
    const auto k2 = detail::vehicle_derivative(detail::apply(state, k1, 0.5 * dt), params, torque);
    const auto k3 = detail::vehicle_derivative(detail::apply(state, k2, 0.5 * dt), params, torque);
    const auto k4 = detail::vehicle_derivative(detail::apply(state, k3, dt), params, torque);

    VehicleState next = state;
    const double h = dt / 6.0;
    next.x += h * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
    next.y += h * (k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot);
    next.yaw += h * (k1.yaw_dot + 2.0 * k2.yaw_dot + 2.0 * k3.yaw_dot + k4.yaw_dot);
    next.vy += h * (k1.vy_dot + 2.0 * k2.vy_dot + 2.0 * k3.vy_dot + k4.vy_dot);
    next.yaw_rate += h * (k1.yaw_rate_dot + 2.0 * k2.yaw_rate_dot + 2.0 * k3.yaw_rate_dot + k4.yaw_rate_dot);
    next.swa += h * (k1.swa_dot + 2.0 * k2.swa_dot + 2.0 * k3.swa_dot + k4.swa_dot);
    next.swa_rate += h * (k1.swa_rate_dot + 2.0 * k2.swa_rate_dot + 2.0 * k3.swa_rate_dot + k4.swa_rate_dot);
    return next;
}

/// Body-frame state derivative at the current instant (useful for recording
/// vy_dot without an extra finite difference). Equals the RK4 k1 stage.
inline detail::StateDerivative state_derivative(const VehicleState& state,
                                                const VehicleParams& params,
                                                double assist_torque, double driver_torque) {
    return detail::vehicle_derivative(state, params, assist_torque + driver_torque);
}

/// Vehicle slip angle beta = atan(vy/vx) in degrees; sign follows vy.
inline double slip_angle(const VehicleState& state) {
    if (!(state.vx > 0.0))
        throw DivergenceError("slip_angle: undefined for vx <= 0");
    return std::atan(state.vy / state.vx) * 180.0 / std::numbers::pi;
}

/// Body-frame lateral acceleration a_y = vy_dot + vx*yaw_rate.
///
/// Inputs follow the analysis (leftward positive) convention: the result is
/// negative while the vehicle steers away from the pedestrian (rightward) and
/// positive while it counter-steers into the opposing lane.
inline double lateral_acceleration(const VehicleState& state, double state_derivative_vy,
                                   double yaw_rate) {
    detail::check_finite(state.vx, "vx", "lateral_acceleration");
    detail::check_finite(state_derivative_vy, "state_derivative_vy", "lateral_acceleration");
    detail::check_finite(yaw_rate, "yaw_rate", "lateral_acceleration");
    return state_derivative_vy + state.vx * yaw_rate;
}

}  // namespace evasim
