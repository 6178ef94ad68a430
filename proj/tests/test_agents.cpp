#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "evasim/agents.hpp"

using namespace evasim;
using Catch::Approx;

namespace {

constexpr double kDt = 1.0 / 120.0;

SubjectProfile test_profile() {
    SubjectProfile p;
    p.subject_id = 1;
    p.reaction_time = 0.35;
    p.aggressiveness = 3.0;
    p.anticipation_crosswalk = 1.25;
    return p;
}

PathSpec test_paths() {
    PathSpec ps;
    ps.lane_keep_offset = -1.75;
    ps.avoid_target_offset = 1.75;
    ps.transition_length = 25.0;
    ps.begin_station = -10.0;
    ps.end_station = 400.0;
    return ps;
}

/// Synthetic world at grid step k: cruising on the lane center, pedestrian
/// visible from `visible_from` (absolute time), present from `event_time`.
WorldState world_at(int k, std::optional<double> event_time, double visible_from) {
    WorldState w;
    w.time = k * kDt;
    w.vehicle.x = 8.333 * w.time;
    w.vehicle.y = -1.75;
    w.vehicle.vx = 8.333;
    w.event_time = event_time;
    if (event_time && w.time >= *event_time)
        w.pedestrian_position = Vec2{60.0, -3.0};
    w.pedestrian_visible = w.pedestrian_position.has_value() && w.time >= visible_from;
    return w;
}

}  // namespace

TEST_CASE("armband agent without a pedestrian keeps lane under assist forever") {
    MyoAgent agent(test_profile(), ControllerGains{}, PreviewConfig{}, AgentCalibration{},
                   test_paths());
    for (int k = 0; k < 600; ++k) {
        const AgentOutput out = agent.step(world_at(k, std::nullopt, 1e9), kDt);
        REQUIRE(out.assist_enabled);
        REQUIRE(out.driver_torque == 0.0);
        REQUIRE(out.active_trajectory == ActivePath::LaneKeep);
        REQUIRE(out.phase == Phase::Automation);
    }
}

TEST_CASE("armband trigger fires on the exact grid step") {
    // Visibility at tv = 1.0 s, reaction 0.35 s + latency 0.10 s = 54 steps.
    SubjectProfile prof = test_profile();
    AgentCalibration calib;
    calib.trigger_latency = 0.10;
    MyoAgent agent(prof, ControllerGains{}, PreviewConfig{}, calib, test_paths());

    const double tv = 1.0;
    const int tv_step = 120;
    const int expected_switch = tv_step + 54;
    std::optional<int> switched_at;
    for (int k = 0; k < 400; ++k) {
        const AgentOutput out = agent.step(world_at(k, 0.5, tv), kDt);
        if (out.active_trajectory == ActivePath::Avoidance && !switched_at) switched_at = k;
        REQUIRE(out.driver_torque == 0.0);  // never any human torque in this mode
        REQUIRE(out.assist_enabled);
    }
    REQUIRE(switched_at.has_value());
    REQUIRE(*switched_at == expected_switch);
}

TEST_CASE("trigger latches: the trajectory never reverts") {
    MyoAgent agent(test_profile(), ControllerGains{}, PreviewConfig{}, AgentCalibration{},
                   test_paths());
    bool seen_avoidance = false;
    for (int k = 0; k < 600; ++k) {
        WorldState w = world_at(k, 0.5, 1.0);
        if (k > 300) w.pedestrian_visible = false;  // flickering sensor after the trigger
        const AgentOutput out = agent.step(w, kDt);
        if (out.active_trajectory == ActivePath::Avoidance) seen_avoidance = true;
        if (seen_avoidance) REQUIRE(out.active_trajectory == ActivePath::Avoidance);
    }
    REQUIRE(seen_avoidance);
}

TEST_CASE("manual driver tracks the lane with zero torque before anything happens") {
    ManualDriverAgent agent(test_profile(), ControllerGains{}, PreviewConfig{},
                            AgentCalibration{}, test_paths());
    const AgentOutput out = agent.step(world_at(0, std::nullopt, 1e9), kDt);
    REQUIRE_FALSE(out.assist_enabled);
    REQUIRE(out.phase == Phase::Manual);
    REQUIRE(out.driver_torque == Approx(0.0).margin(1e-12));
}

TEST_CASE("crosswalk anticipation scales the manual torque below the cap") {
    SubjectProfile prof = test_profile();
    auto torque_with_crosswalk = [&](bool crosswalk) {
        ManualDriverAgent agent(prof, ControllerGains{}, PreviewConfig{}, AgentCalibration{},
                                test_paths());
        WorldState w = world_at(0, std::nullopt, 1e9);
        w.crosswalk = crosswalk;
        w.vehicle.y = -2.05;  // 0.3 m left of the lane center
        return agent.step(w, kDt).driver_torque;
    };
    const double off = torque_with_crosswalk(false);
    const double on = torque_with_crosswalk(true);
    REQUIRE(off != 0.0);
    REQUIRE(on == Approx(off * prof.anticipation_crosswalk).epsilon(1e-12));
}

TEST_CASE("aggressiveness scales the manual torque below the cap") {
    auto torque_with_aggressiveness = [&](double aggressiveness) {
        SubjectProfile prof = test_profile();
        prof.aggressiveness = aggressiveness;
        ManualDriverAgent agent(prof, ControllerGains{}, PreviewConfig{}, AgentCalibration{},
                                test_paths());
        WorldState w = world_at(0, std::nullopt, 1e9);
        w.vehicle.y = -1.95;  // small error
        return agent.step(w, kDt).driver_torque;
    };
    const double t1 = torque_with_aggressiveness(1.0);
    const double t2 = torque_with_aggressiveness(2.0);
    REQUIRE(t2 == Approx(2.0 * t1).epsilon(1e-12));
}

TEST_CASE("manual torque respects the arm cap") {
    SubjectProfile prof = test_profile();
    prof.aggressiveness = 6.0;
    AgentCalibration calib;
    ManualDriverAgent agent(prof, ControllerGains{}, PreviewConfig{}, calib, test_paths());
    WorldState w = world_at(0, std::nullopt, 1e9);
    w.vehicle.y = -1.75 - 40.0;  // absurd error to force saturation
    const AgentOutput out = agent.step(w, kDt);
    REQUIRE(std::abs(out.driver_torque) == calib.human_torque_limit);
}

TEST_CASE("takeover switches authority at the spawn and delays the hands") {
    SubjectProfile prof = test_profile();
    AgentCalibration calib;
    calib.takeover_penalty = 0.30;
    TakeoverAgent agent(prof, ControllerGains{}, PreviewConfig{}, calib, test_paths());

    const double event_time = 0.5;
    const double tv = 1.0;
    std::optional<double> first_manual, first_torque;
    for (int k = 0; k < 600; ++k) {
        WorldState w = world_at(k, event_time, tv);
        w.vehicle.y = -1.80;  // small offset so manual torque is nonzero once active
        const AgentOutput out = agent.step(w, kDt);
        const double t = k * kDt;
        if (t < event_time) {
            REQUIRE(out.assist_enabled);
            REQUIRE(out.phase == Phase::Automation);
        } else {
            REQUIRE_FALSE(out.assist_enabled);  // assist is exactly off from the switch
            REQUIRE(out.phase == Phase::Manual);
            if (!first_manual) first_manual = t;
        }
        if (out.driver_torque != 0.0 && !first_torque) first_torque = t;
    }
    REQUIRE(first_manual.has_value());
    REQUIRE(*first_manual == Approx(event_time).margin(kDt));
    REQUIRE(first_torque.has_value());
    // No earlier than visibility + reaction + penalty.
    REQUIRE(*first_torque >= tv + prof.reaction_time + calib.takeover_penalty - 0.5 * kDt);
}

TEST_CASE("without a pedestrian, takeover and armband trials are identical") {
    MyoAgent myo(test_profile(), ControllerGains{}, PreviewConfig{}, AgentCalibration{},
                 test_paths());
    TakeoverAgent takeover(test_profile(), ControllerGains{}, PreviewConfig{}, AgentCalibration{},
                           test_paths());
    for (int k = 0; k < 600; ++k) {
        const WorldState w = world_at(k, std::nullopt, 1e9);
        const AgentOutput a = myo.step(w, kDt);
        const AgentOutput b = takeover.step(w, kDt);
        REQUIRE(a.driver_torque == b.driver_torque);
        REQUIRE(a.assist_enabled == b.assist_enabled);
        REQUIRE(a.active_trajectory == b.active_trajectory);
        REQUIRE(a.phase == b.phase);
    }
}

TEST_CASE("agents are deterministic state machines") {
    auto run_sequence = [&]() {
        ManualDriverAgent agent(test_profile(), ControllerGains{}, PreviewConfig{},
                                AgentCalibration{}, test_paths());
        std::vector<double> torques;
        for (int k = 0; k < 300; ++k) {
            WorldState w = world_at(k, 0.5, 1.0);
            w.vehicle.y = -1.75 + 0.01 * std::sin(0.05 * k);
            torques.push_back(agent.step(w, kDt).driver_torque);
        }
        return torques;
    };
    REQUIRE(run_sequence() == run_sequence());
}

TEST_CASE("profile validation") {
    SubjectProfile p = test_profile();
    p.reaction_time = 0.0;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
    p = test_profile();
    p.aggressiveness = 0.5;
    REQUIRE_THROWS_AS(p.validate(), ConfigError);
}
