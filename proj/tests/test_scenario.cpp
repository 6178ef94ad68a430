#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evasim/scenario.hpp"

using namespace evasim;
using Catch::Approx;

namespace {
constexpr double kDt = 1.0 / 120.0;

ScenarioConfig default_config() { return ScenarioConfig{}; }
}  // namespace

TEST_CASE("build_world implements the TTC construction") {
    SECTION("published TTC value puts the crossing line 2.5 m ahead of the front") {
        ScenarioConfig cfg = default_config();
        cfg.ttc_at_event = 0.3;
        cfg.vehicle_speed = 30.0 / 3.6;
        const WorldState w = build_world(cfg);
        REQUIRE(w.event_time.has_value());
        const double front_at_event =
            cfg.vehicle_speed * cfg.pre_event_cruise + 0.5 * cfg.vehicle_length;
        REQUIRE(w.geom.crossing_station - front_at_event == Approx(2.5).epsilon(1e-12));
    }
    SECTION("TTC consistency holds for arbitrary values") {
        for (double ttc : {0.3, 1.7, 4.0, 5.5}) {
            ScenarioConfig cfg = default_config();
            cfg.road_length = 200.0;
            cfg.ttc_at_event = ttc;
            const WorldState w = build_world(cfg);
            const double front_at_event =
                cfg.vehicle_speed * cfg.pre_event_cruise + 0.5 * cfg.vehicle_length;
            REQUIRE((w.geom.crossing_station - front_at_event) / cfg.vehicle_speed ==
                    Approx(ttc).margin(kDt));
        }
    }
    SECTION("no pedestrian means no event") {
        ScenarioConfig cfg = default_config();
        cfg.pedestrian_present = false;
        const WorldState w = build_world(cfg);
        REQUIRE_FALSE(w.event_time.has_value());
        REQUIRE_FALSE(w.pedestrian_position.has_value());
        const WorldState later = step_pedestrian(w, 100.0 * kDt);
        REQUIRE_FALSE(later.pedestrian_position.has_value());
    }
    SECTION("crosswalk flag changes nothing but the flag") {
        ScenarioConfig a = default_config();
        a.crosswalk = true;
        ScenarioConfig b = default_config();
        b.crosswalk = false;
        const WorldState wa = build_world(a);
        const WorldState wb = build_world(b);
        REQUIRE(wa.crosswalk != wb.crosswalk);
        REQUIRE(wa.geom.crossing_station == wb.geom.crossing_station);
        REQUIRE(wa.geom.ped_spawn_y == wb.geom.ped_spawn_y);
        REQUIRE(wa.vehicle.y == wb.vehicle.y);
    }
    SECTION("spawn station outside the road is a configuration error") {
        ScenarioConfig cfg = default_config();
        cfg.ttc_at_event = 60.0;
        REQUIRE_THROWS_AS(build_world(cfg), ConfigError);
    }
    SECTION("vehicle starts on the left-lane center") {
        const WorldState w = build_world(default_config());
        REQUIRE(w.vehicle.y == Approx(-1.75));
        REQUIRE(w.vehicle.yaw == 0.0);
        REQUIRE(w.vehicle.vx == Approx(30.0 / 3.6));
    }
}

TEST_CASE("pedestrian kinematics") {
    WorldState w;
    w.event_time = 1.0;
    w.geom.pedestrian_speed = 8.34;
    w.geom.crossing_station = 50.0;
    w.geom.ped_stop_y = -1.75;
    w.geom.ped_spawn_y = -1.75 - 2.0;  // two meters of lateral travel

    SECTION("absent before the event") {
        WorldState s = w;
        while (s.time + kDt < 1.0) {
            s = step_pedestrian(s, kDt);
            REQUIRE_FALSE(s.pedestrian_position.has_value());
        }
    }
    SECTION("arrives at the lane center after distance over speed, then holds") {
        WorldState s = w;
        const double arrival = 2.0 / 8.34;  // 0.2398 s after spawn
        std::optional<double> first_stopped;
        for (int i = 0; i < 400; ++i) {
            s = step_pedestrian(s, kDt);
            if (s.pedestrian_position && s.pedestrian_position->y == s.geom.ped_stop_y &&
                !first_stopped)
                first_stopped = s.time - *s.event_time;
        }
        REQUIRE(first_stopped.has_value());
        // First grid point at or after the crossing completes.
        REQUIRE(*first_stopped >= arrival - 1e-9);
        REQUIRE(*first_stopped <= arrival + kDt + 1e-9);
        REQUIRE(s.pedestrian_position->y == s.geom.ped_stop_y);
        REQUIRE(s.pedestrian_position->x == 50.0);
    }
    SECTION("piecewise-linear motion is insensitive to step splitting") {
        WorldState a = w;
        for (int i = 0; i < 1200; ++i) a = step_pedestrian(a, kDt / 4.0);
        WorldState b = w;
        for (int i = 0; i < 300; ++i) b = step_pedestrian(b, kDt);
        REQUIRE(a.pedestrian_position.has_value());
        REQUIRE(b.pedestrian_position.has_value());
        REQUIRE(a.pedestrian_position->y == Approx(b.pedestrian_position->y).margin(1e-12));
    }
}

TEST_CASE("occlusion by the parked vehicle") {
    WorldState w;
    w.geom.parked_vehicle = RectXY{40.0, 44.5, -5.4, -3.6};
    w.vehicle.x = 10.0;
    w.vehicle.y = -1.75;

    SECTION("pedestrian behind the rectangle is hidden") {
        w.pedestrian_position = Vec2{46.0, -5.6};
        REQUIRE_FALSE(visibility(w));
    }
    SECTION("pedestrian at the lane center is visible") {
        w.pedestrian_position = Vec2{46.0, -1.75};
        REQUIRE(visibility(w));
    }
    SECTION("no pedestrian means not visible") {
        REQUIRE_FALSE(visibility(w));
    }
    SECTION("grazing a corner counts as visible") {
        WorldState g;
        g.geom.parked_vehicle = RectXY{1.0, 2.0, 1.0, 2.0};
        g.vehicle.x = 0.0;
        g.vehicle.y = 2.0;
        g.pedestrian_position = Vec2{2.0, 0.0};  // sightline touches (1,1) only
        REQUIRE(visibility(g));
    }
}

TEST_CASE("vehicle-pedestrian distance against the oriented footprint") {
    WorldState w;
    w.geom.vehicle_length = 4.5;
    w.geom.vehicle_width = 1.8;
    w.vehicle.x = 0.0;
    w.vehicle.y = 0.0;

    SECTION("pedestrian at the CG means contact") {
        w.pedestrian_position = Vec2{0.0, 0.0};
        REQUIRE(vehicle_pedestrian_distance(w) == 0.0);
    }
    SECTION("three meters off the left flank midpoint") {
        w.pedestrian_position = Vec2{0.0, -(0.9 + 3.0)};
        REQUIRE(vehicle_pedestrian_distance(w) == Approx(3.0).epsilon(1e-12));
    }
    SECTION("corner distance for a yawed vehicle by independent construction") {
        w.vehicle.yaw = 0.3;
        const double cx = std::cos(0.3), sx = std::sin(0.3);
        // A point 1 m beyond the front-right corner along the body x axis.
        const double bx = 0.5 * 4.5 + 1.0, by = 0.5 * 1.8;
        w.pedestrian_position = Vec2{cx * bx - sx * by, sx * bx + cx * by};
        REQUIRE(vehicle_pedestrian_distance(w) == Approx(1.0).epsilon(1e-12));
    }
    SECTION("missing pedestrian is an error") {
        REQUIRE_THROWS_AS(vehicle_pedestrian_distance(w), ConfigError);
    }
    SECTION("straight pass two meters clear gives exactly two meters") {
        w.pedestrian_position = Vec2{30.0, -(0.9 + 2.0)};
        double min_d = 1e9;
        for (int i = 0; i < 1200; ++i) {
            w.vehicle.x = i * (8.333 * kDt);
            min_d = std::min(min_d, vehicle_pedestrian_distance(w));
        }
        REQUIRE(min_d == 2.0);  // flank-parallel pass: purely lateral clearance
    }
}

TEST_CASE("avoidance path is a C2 quintic ending one lane over") {
    const double lane = 3.5;
    const AvoidancePath path(-lane / 2.0, lane / 2.0, 40.0, 25.0, 0.0, 300.0);

    SECTION("endpoints and heading") {
        REQUIRE(path.offset_at(40.0) == -1.75);
        REQUIRE(path.offset_at(65.0) == 1.75);
        REQUIRE(path.offset_at(65.0) - path.offset_at(40.0) == lane);
        REQUIRE(path.heading_at(40.0) == 0.0);
        REQUIRE(path.heading_at(65.0) == 0.0);
        REQUIRE(path.offset_at(0.0) == -1.75);    // constant before the start
        REQUIRE(path.offset_at(200.0) == 1.75);   // constant after the end
    }
    SECTION("offset, slope and curvature are continuous at the joins") {
        const double h = 1e-4;
        for (double s : {40.0, 65.0}) {
            const double below = path.offset_at(s - h);
            const double above = path.offset_at(s + h);
            REQUIRE(above - below == Approx(0.0).margin(1e-6));
            const double slope_below = (path.offset_at(s) - path.offset_at(s - h)) / h;
            const double slope_above = (path.offset_at(s + h) - path.offset_at(s)) / h;
            REQUIRE(slope_above - slope_below == Approx(0.0).margin(1e-6));
            const double curv_below =
                (path.offset_at(s) - 2 * path.offset_at(s - h) + path.offset_at(s - 2 * h)) / (h * h);
            const double curv_above =
                (path.offset_at(s + 2 * h) - 2 * path.offset_at(s + h) + path.offset_at(s)) / (h * h);
            REQUIRE(curv_above - curv_below == Approx(0.0).margin(1e-2));
        }
    }
    SECTION("heading is consistent with the offset derivative") {
        const double h = 1e-6;
        for (double s = 41.0; s < 65.0; s += 2.0) {
            const double slope = (path.offset_at(s + h) - path.offset_at(s - h)) / (2 * h);
            REQUIRE(path.heading_at(s) == Approx(std::atan(slope)).margin(1e-6));
        }
    }
    SECTION("offset is monotone through the transition") {
        double prev = path.offset_at(40.0);
        for (double s = 40.5; s <= 65.0; s += 0.5) {
            const double cur = path.offset_at(s);
            REQUIRE(cur >= prev);
            prev = cur;
        }
    }
}
