#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "evasim/dynamics.hpp"
#include "evasim/errors.hpp"

namespace evasim {

/// Gains of the shared-control torque law
///   T = a1*e_y + a2*Int(e_y dt) + a3*e_theta + a4*d/dt(e_theta),
/// with the output clamped to +-torque_limit.
struct ControllerGains {
    double a1 = 0.19;    // N*m per m
    double a2 = 0.019;   // N*m per m*s
    double a3 = 3.8;     // N*m per rad
    double a4 = 0.19;    // N*m*s per rad
    double torque_limit = 5.0;  // N*m

    ControllerGains scaled(double factor) const {
        return {a1 * factor, a2 * factor, a3 * factor, a4 * factor, torque_limit};
    }

    void validate() const {
        if (!(torque_limit > 0.0)) throw ConfigError("ControllerGains: torque_limit must be > 0");
    }
};

/// Near/far preview distances ahead of the CG along the vehicle heading.
struct PreviewConfig {
    double near_distance = 6.0;  // m
    double far_distance = 20.0;  // m

    void validate() const {
        if (!(0.0 < near_distance && near_distance < far_distance))
            throw ConfigError("PreviewConfig: require 0 < near_distance < far_distance");
    }
};

/// e_y positive means the vehicle sits LEFT of the target path (so a positive
/// torque steers it rightward, back toward the path). e_theta is the target
/// heading minus the vehicle yaw at the far point.
struct PreviewErrors {
    double e_y_near = 0.0;        // m
    double e_theta_far = 0.0;     // rad
    double e_theta_far_rate = 0.0;  // rad/s, backward difference
};

/// Running controller memory: the e_y integral and the previous far-point yaw
/// error for the backward difference. Reset at trajectory switches.
struct ControllerState {
    double integral_e_y = 0.0;     // m*s
    double prev_e_theta_far = 0.0;  // rad
    bool has_prev = false;
};

/// Target path as lateral offset and heading over longitudinal station.
class TargetTrajectory {
public:
    virtual ~TargetTrajectory() = default;
    virtual double begin_station() const = 0;
    virtual double end_station() const = 0;
    virtual double offset_at(double station) const = 0;   // m, rightward positive
    virtual double heading_at(double station) const = 0;  // rad
};

/// Constant-offset straight path (lane keeping).
class StraightLanePath final : public TargetTrajectory {
public:
    StraightLanePath(double lateral_offset, double begin_station, double end_station)
        : offset_(lateral_offset), begin_(begin_station), end_(end_station) {}

    double begin_station() const override { return begin_; }
    double end_station() const override { return end_; }
    double offset_at(double) const override { return offset_; }
    double heading_at(double) const override { return 0.0; }

private:
    double offset_, begin_, end_;
};

/// Two-point preview errors against a target trajectory. The far-point error
/// rate comes from a backward difference against ControllerState memory; the
/// first sample after a reset reports a zero rate.
inline PreviewErrors preview_errors(const VehicleState& state, const TargetTrajectory& traj,
                                    const PreviewConfig& preview, const ControllerState& cstate,
                                    double dt) {
    const double cos_yaw = std::cos(state.yaw);
    const double sin_yaw = std::sin(state.yaw);

    auto check_domain = [&](double station, const char* which) {
        if (station < traj.begin_station() || station > traj.end_station())
            throw ConfigError(std::string("preview_errors: ") + which + " preview station " +
                              std::to_string(station) + " outside trajectory domain [" +
                              std::to_string(traj.begin_station()) + ", " +
                              std::to_string(traj.end_station()) + "]");
    };

    const double near_station = state.x + preview.near_distance * cos_yaw;
    const double far_station = state.x + preview.far_distance * cos_yaw;
    check_domain(near_station, "near");
    check_domain(far_station, "far");

    const double near_y = state.y + preview.near_distance * sin_yaw;

    PreviewErrors e;
    e.e_y_near = traj.offset_at(near_station) - near_y;
    e.e_theta_far = traj.heading_at(far_station) - state.yaw;
    e.e_theta_far_rate =
        cstate.has_prev && dt > 0.0 ? (e.e_theta_far - cstate.prev_e_theta_far) / dt : 0.0;
    return e;
}

/// One evaluation of the torque law. The integral advances by e_y*dt before
/// use; while the output is saturated and e_y would push it further into the
/// limit the stored integral is frozen (conditional integration), so the
/// torque leaves saturation within one step of an error sign reversal.
inline std::pair<double, ControllerState> controller_torque(const PreviewErrors& errors,
                                                            const ControllerState& cstate,
                                                            const ControllerGains& gains,
                                                            double dt) {
    if (!(dt > 0.0)) throw ConfigError("controller_torque: dt must be > 0");

    const double advanced_integral = cstate.integral_e_y + errors.e_y_near * dt;
    const double raw = gains.a1 * errors.e_y_near + gains.a2 * advanced_integral +
                       gains.a3 * errors.e_theta_far + gains.a4 * errors.e_theta_far_rate;
    const double torque = std::clamp(raw, -gains.torque_limit, gains.torque_limit);

    const bool deepening_saturation = (raw > gains.torque_limit && errors.e_y_near > 0.0) ||
                                      (raw < -gains.torque_limit && errors.e_y_near < 0.0);

    ControllerState next = cstate;
    next.integral_e_y = deepening_saturation ? cstate.integral_e_y : advanced_integral;
    next.prev_e_theta_far = errors.e_theta_far;
    next.has_prev = true;
    return {torque, next};
}

/// Clears integral and derivative memory (applied at trajectory switches).
inline ControllerState reset(const ControllerState&) { return ControllerState{}; }

}  // namespace evasim
