#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "evasim/control.hpp"
#include "evasim/errors.hpp"
#include "evasim/scenario.hpp"

namespace evasim {

enum class Interface { MyoArmband, SteeringWheel, ManualTakeover };
enum class Phase { Automation, Manual, Evasion };
enum class ActivePath { LaneKeep, Avoidance };

inline const char* to_string(Interface i) {
    switch (i) {
        case Interface::MyoArmband: return "myo_armband";
        case Interface::SteeringWheel: return "steering_wheel";
        case Interface::ManualTakeover: return "manual_takeover";
    }
    return "?";
}

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::Automation: return "automation";
        case Phase::Manual: return "manual";
        case Phase::Evasion: return "evasion";
    }
    return "?";
}

/// Synthetic test-driver profile standing in for one human subject.
/// Deterministic given the seed it was drawn from.
struct SubjectProfile {
    int subject_id = 0;
    double reaction_time = 0.35;          // s
    double aggressiveness = 4.0;          // manual steering gain multiplier
    double anticipation_crosswalk = 1.2;  // extra multiplier when a crosswalk is present
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(reaction_time > 0.0)) throw ConfigError("SubjectProfile: reaction_time must be > 0");
        if (!(aggressiveness >= 1.0)) throw ConfigError("SubjectProfile: aggressiveness must be >= 1");
    }
};

/// Shared agent calibration knobs (all configurable; see config file).
struct AgentCalibration {
    double trigger_latency = 0.25;        // s, armband -> laptop -> host -> motor chain
    double arm_damping = 1.0;             // N*m*s/rad, grip impedance while steering manually
    double takeover_penalty = 0.30;       // s, motor reconfiguration after the mode switch
    double takeover_gain = 1.35;          // post-takeover abruptness (sharper path, higher gain)
    double human_torque_limit = 15.0;     // N*m, must exceed the assist cap
    double clear_margin = 8.0;            // m, humans aim to finish the swerve this far
                                          // before the crossing line
    double min_transition = 10.0;         // m, sharpest lane change a driver attempts

    double reaction_time_median = 0.35;   // lognormal median, s
    double reaction_time_sigma_log = 0.2;
    double aggressiveness_min = 1.5;
    double aggressiveness_max = 4.0;
    double anticipation_min = 0.9;
    double anticipation_max = 1.3;
    int num_subjects = 12;

    /// Explicit subject set; when non-empty it replaces the population that
    /// would otherwise be drawn from the master seed.
    std::vector<SubjectProfile> subjects;

    void validate() const {
        if (!(trigger_latency >= 0.0)) throw ConfigError("AgentCalibration: trigger_latency must be >= 0");
        if (!(arm_damping >= 0.0)) throw ConfigError("AgentCalibration: arm_damping must be >= 0");
        if (!(takeover_penalty >= 0.0)) throw ConfigError("AgentCalibration: takeover_penalty must be >= 0");
        if (!(takeover_gain >= 1.0)) throw ConfigError("AgentCalibration: takeover_gain must be >= 1");
        if (!(human_torque_limit > 0.0)) throw ConfigError("AgentCalibration: human_torque_limit must be > 0");
        if (!(clear_margin >= 0.0)) throw ConfigError("AgentCalibration: clear_margin must be >= 0");
        if (!(min_transition > 0.0)) throw ConfigError("AgentCalibration: min_transition must be > 0");
        if (!(reaction_time_median > 0.0)) throw ConfigError("AgentCalibration: reaction_time_median must be > 0");
        if (!(aggressiveness_min >= 1.0) || !(aggressiveness_max >= aggressiveness_min))
            throw ConfigError("AgentCalibration: aggressiveness range invalid");
        if (!(num_subjects >= 1)) throw ConfigError("AgentCalibration: num_subjects must be >= 1");
        for (const SubjectProfile& s : subjects) s.validate();
    }
};

struct AgentOutput {
    double driver_torque = 0.0;
    bool assist_enabled = false;
    ActivePath active_trajectory = ActivePath::LaneKeep;
    Phase phase = Phase::Automation;
};

/// Geometry handed to agents for building the avoidance path at trigger time.
struct PathSpec {
    double lane_keep_offset = -1.75;    // left-lane center
    double avoid_target_offset = 1.75;  // right-lane center
    double transition_length = 25.0;
    double begin_station = 0.0;
    double end_station = 220.0;
};

/// One steering interface driven step-by-step through a trial. Instances are
/// per-trial state machines; the trace loop owns exactly one.
class TrialAgent {
public:
    virtual ~TrialAgent() = default;
    virtual AgentOutput step(const WorldState& world, double dt) = 0;
    virtual Interface interface_mode() const = 0;

    /// Path the active controller (assist or driver) is tracking right now.
    const TargetTrajectory& active_path() const {
        return avoidance_ ? static_cast<const TargetTrajectory&>(*avoidance_) : lane_keep_;
    }

protected:
    TrialAgent(const SubjectProfile& profile, const ControllerGains& base_gains,
               const PreviewConfig& preview, const AgentCalibration& calib, const PathSpec& paths)
        : profile_(profile),
          base_gains_(base_gains),
          preview_(preview),
          calib_(calib),
          paths_(paths),
          lane_keep_(paths.lane_keep_offset, paths.begin_station, paths.end_station) {
        profile.validate();
        calib.validate();
    }

    /// Latches the first instant the pedestrian is seen.
    void observe(const WorldState& world) {
        if (!first_visible_ && world.pedestrian_visible) first_visible_ = world.time;
    }

    /// True once `delay` seconds have elapsed since first visibility, with a
    /// quarter-step tolerance so the switch lands on the intended grid point.
    bool elapsed_since_visible(const WorldState& world, double delay, double dt) const {
        return first_visible_ && world.time >= *first_visible_ + delay - 0.25 * dt;
    }

    /// Irreversibly switches the tracked path to the avoidance transition,
    /// anchored at the vehicle's current station. The assist keeps the
    /// engineered transition length; a human driver compresses the swerve so
    /// it completes clear_margin before the crossing line, which makes late
    /// reactions sharper.
    void switch_to_avoidance(const WorldState& world, double urgency) {
        if (avoidance_) return;
        double length = paths_.transition_length;
        if (urgency > 0.0 && world.event_time) {
            const double remaining = world.geom.crossing_station - world.vehicle.x;
            length = std::clamp((remaining - calib_.clear_margin) / urgency,
                                calib_.min_transition, length);
        }
        avoidance_.emplace(paths_.lane_keep_offset, paths_.avoid_target_offset, world.vehicle.x,
                           length, paths_.begin_station, paths_.end_station);
        driver_state_ = reset(driver_state_);
    }

    bool avoiding() const { return avoidance_.has_value(); }

    /// Manual steering through the same two-point law, gains inflated by the
    /// subject's aggressiveness (and crosswalk anticipation), arm torque cap.
    double manual_torque(const WorldState& world, double dt, double extra_scale = 1.0) {
        double factor = profile_.aggressiveness * extra_scale;
        if (world.crosswalk) factor *= profile_.anticipation_crosswalk;
        ControllerGains gains = base_gains_.scaled(factor);
        gains.torque_limit = calib_.human_torque_limit;
        const PreviewErrors errors =
            preview_errors(world.vehicle, active_path(), preview_, driver_state_, dt);
        auto [torque, next] = controller_torque(errors, driver_state_, gains, dt);
        driver_state_ = next;
        // The gripping arm also resists wheel spin (driver impedance).
        return torque - calib_.arm_damping * world.vehicle.swa_rate;
    }

    SubjectProfile profile_;
    ControllerGains base_gains_;
    PreviewConfig preview_;
    AgentCalibration calib_;
    PathSpec paths_;
    StraightLanePath lane_keep_;
    std::optional<AvoidancePath> avoidance_;
    ControllerState driver_state_;
    std::optional<double> first_visible_;
};

/// sEMG-triggered evasion: autopilot lane keeping until the (latched) trigger
/// fires at visibility + reaction + chain latency, then the assist executes
/// the avoidance path. The driver never applies torque in this mode.
class MyoAgent final : public TrialAgent {
public:
    MyoAgent(const SubjectProfile& profile, const ControllerGains& base_gains,
                const PreviewConfig& preview, const AgentCalibration& calib, const PathSpec& paths)
        : TrialAgent(profile, base_gains, preview, calib, paths) {}

    Interface interface_mode() const override { return Interface::MyoArmband; }

    AgentOutput step(const WorldState& world, double dt) override {
        observe(world);
        if (!avoiding() &&
            elapsed_since_visible(world, profile_.reaction_time + calib_.trigger_latency, dt))
            switch_to_avoidance(world, /*urgency=*/0.0);

        AgentOutput out;
        out.driver_torque = 0.0;
        out.assist_enabled = true;
        out.active_trajectory = avoiding() ? ActivePath::Avoidance : ActivePath::LaneKeep;
        out.phase = avoiding() ? Phase::Evasion : Phase::Automation;
        return out;
    }
};

/// Conventional steering wheel: manual throughout, no assist. Tracks the lane
/// until visibility + reaction, then steers along the avoidance path.
class ManualDriverAgent final : public TrialAgent {
public:
    ManualDriverAgent(const SubjectProfile& profile, const ControllerGains& base_gains,
                         const PreviewConfig& preview, const AgentCalibration& calib, const PathSpec& paths)
        : TrialAgent(profile, base_gains, preview, calib, paths) {}

    Interface interface_mode() const override { return Interface::SteeringWheel; }

    AgentOutput step(const WorldState& world, double dt) override {
        observe(world);
        if (!avoiding() && elapsed_since_visible(world, profile_.reaction_time, dt))
            switch_to_avoidance(world, /*urgency=*/1.0);

        AgentOutput out;
        out.assist_enabled = false;
        out.phase = Phase::Manual;
        out.active_trajectory = avoiding() ? ActivePath::Avoidance : ActivePath::LaneKeep;
        out.driver_torque = manual_torque(world, dt);
        return out;
    }
};

/// Manual takeover from automation: autopilot until the pedestrian starts
/// crossing, then steering switches to manual. The driver needs reaction time
/// plus a takeover penalty before applying any torque; the assist contributes
/// nothing from the switch instant on.
class TakeoverAgent final : public TrialAgent {
public:
    TakeoverAgent(const SubjectProfile& profile, const ControllerGains& base_gains,
                     const PreviewConfig& preview, const AgentCalibration& calib, const PathSpec& paths)
        : TrialAgent(profile, base_gains, preview, calib, paths) {}

    Interface interface_mode() const override { return Interface::ManualTakeover; }

    AgentOutput step(const WorldState& world, double dt) override {
        observe(world);
        if (world.pedestrian_position) manual_mode_ = true;
        if (!avoiding() &&
            elapsed_since_visible(world, profile_.reaction_time + calib_.takeover_penalty, dt))
            switch_to_avoidance(world, /*urgency=*/calib_.takeover_gain);

        AgentOutput out;
        if (!manual_mode_) {
            out.assist_enabled = true;
            out.driver_torque = 0.0;
            out.phase = Phase::Automation;
            out.active_trajectory = ActivePath::LaneKeep;
            return out;
        }
        out.assist_enabled = false;
        out.phase = Phase::Manual;
        out.active_trajectory = avoiding() ? ActivePath::Avoidance : ActivePath::LaneKeep;
        // Hands reach the wheel only after the takeover delay has elapsed.
        out.driver_torque =
            avoiding() ? manual_torque(world, dt, calib_.takeover_gain) : 0.0;
        return out;
    }

private:
    bool manual_mode_ = false;
};

inline std::unique_ptr<TrialAgent> make_agent(Interface mode, const SubjectProfile& profile,
                                              const ControllerGains& base_gains,
                                              const PreviewConfig& preview,
                                              const AgentCalibration& calib,
                                              const PathSpec& paths) {
    switch (mode) {
        case Interface::MyoArmband:
            return std::make_unique<MyoAgent>(profile, base_gains, preview, calib, paths);
        case Interface::SteeringWheel:
            return std::make_unique<ManualDriverAgent>(profile, base_gains, preview, calib, paths);
        case Interface::ManualTakeover:
            return std::make_unique<TakeoverAgent>(profile, base_gains, preview, calib, paths);
    }
    throw ConfigError("make_agent: unknown interface mode");
}

}  // namespace evasim
