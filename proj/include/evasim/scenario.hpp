#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "evasim/control.hpp"
#include "evasim/dynamics.hpp"
#include "evasim/errors.hpp"

namespace evasim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle in world coordinates.
struct RectXY {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;
};

// Road layout (SAE-style y-right frame): the road runs along +x, the travel
// lane ("left lane" for left-hand traffic) is centered at y = -lane_width/2,
// the opposing lane at y = +lane_width/2. The pedestrian enters from the left
// road edge (negative y) behind a parked vehicle and the evasion moves the
// car rightward (toward positive y).

/// Scenario parameters. The pedestrian spawn instant defines t = 0 for all
/// downstream analysis; at that instant the longitudinal gap from the vehicle
/// front to the crossing line equals vehicle_speed * ttc_at_event.
struct ScenarioConfig {
    double lane_width = 3.5;             // m
    double vehicle_speed = 30.0 / 3.6;   // m/s (30 km/h cruise)
    double pedestrian_speed = 8.34;      // m/s
    double ttc_at_event = 3.5;           // s, gap-to-crossing-line over speed at spawn
    bool crosswalk = false;
    bool pedestrian_present = true;
    double road_length = 120.0;          // m
    double pre_event_cruise = 5.0;       // s of straight driving before the spawn

    double vehicle_length = 4.5;         // m
    double vehicle_width = 1.8;          // m
    double parked_length = 4.5;          // m, occluding parked vehicle footprint
    double parked_width = 1.8;           // m
    double parked_gap_to_crossing = 0.75;  // m upstream of the crossing line
    double parked_edge_clearance = 0.1;    // m off the road edge
    double ped_spawn_margin = 0.2;       // m beyond the parked vehicle's far flank

    double transition_length = 23.0;     // m, avoidance lane-change length

    double left_lane_center_y() const { return -0.5 * lane_width; }
    double right_lane_center_y() const { return 0.5 * lane_width; }

    void validate() const {
        if (!(ttc_at_event > 0.0)) throw ConfigError("ScenarioConfig: ttc_at_event must be > 0");
        if (!(vehicle_speed > 0.0)) throw ConfigError("ScenarioConfig: vehicle_speed must be > 0");
        if (!(pedestrian_speed > 0.0)) throw ConfigError("ScenarioConfig: pedestrian_speed must be > 0");
        if (!(lane_width > vehicle_width))
            throw ConfigError("ScenarioConfig: lane_width must exceed vehicle_width");
        if (!(road_length > 0.0)) throw ConfigError("ScenarioConfig: road_length must be > 0");
        if (!(pre_event_cruise >= 0.0)) throw ConfigError("ScenarioConfig: pre_event_cruise must be >= 0");
        if (!(vehicle_length > 0.0) || !(vehicle_width > 0.0))
            throw ConfigError("ScenarioConfig: vehicle footprint must be positive");
        if (!(transition_length > 0.0)) throw ConfigError("ScenarioConfig: transition_length must be > 0");
    }
};

/// Geometry derived once by build_world and carried with the world state so
/// the per-step operations stay self-contained.
struct ScenarioGeometry {
    double lane_width = 3.5;
    double left_lane_center_y = -1.75;
    double right_lane_center_y = 1.75;
    double crossing_station = 0.0;  // pedestrian x
    double ped_spawn_y = 0.0;
    double ped_stop_y = 0.0;        // left-lane center; held once reached
    double pedestrian_speed = 8.34;
    RectXY parked_vehicle;
    double vehicle_length = 4.5;
    double vehicle_width = 1.8;
    double road_length = 120.0;
};

struct WorldState {
    double time = 0.0;
    VehicleState vehicle;
    std::optional<Vec2> pedestrian_position;  // absent before the spawn instant
    bool pedestrian_visible = false;
    std::optional<double> event_time;         // pedestrian spawn; t = 0 for analysis
    bool crosswalk = false;
    ScenarioGeometry geom;
};

/// Quintic lateral-offset lane change: offset, slope and curvature are all
/// continuous at both ends of the transition.
class AvoidancePath final : public TargetTrajectory {
public:
    AvoidancePath(double start_offset, double end_offset, double start_station,
                  double transition_length, double begin_station, double end_station)
        : y0_(start_offset),
          dy_(end_offset - start_offset),
          s0_(start_station),
          len_(transition_length),
          begin_(begin_station),
          end_(end_station) {}

    double begin_station() const override { return begin_; }
    double end_station() const override { return end_; }
    double start_station() const { return s0_; }
    double transition_length() const { return len_; }

    double offset_at(double s) const override {
        const double u = std::clamp((s - s0_) / len_, 0.0, 1.0);
        const double shape = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        return y0_ + dy_ * shape;
    }

    double heading_at(double s) const override {
        const double u = std::clamp((s - s0_) / len_, 0.0, 1.0);
        const double slope = dy_ / len_ * 30.0 * u * u * (1.0 - u) * (1.0 - u);
        return std::atan(slope);
    }

private:
    double y0_, dy_, s0_, len_, begin_, end_;
};

/// Station of the vehicle front (bounding-box leading edge center).
inline double vehicle_front_station(const VehicleState& v, double vehicle_length) {
    return v.x + 0.5 * vehicle_length * std::cos(v.yaw);
}

/// Places the vehicle on the left-lane center at road start and schedules the
/// pedestrian spawn so the TTC construction holds exactly.
inline WorldState build_world(const ScenarioConfig& config) {
    config.validate();

    WorldState w;
    w.crosswalk = config.crosswalk;
    w.geom.lane_width = config.lane_width;
    w.geom.left_lane_center_y = config.left_lane_center_y();
    w.geom.right_lane_center_y = config.right_lane_center_y();
    w.geom.pedestrian_speed = config.pedestrian_speed;
    w.geom.vehicle_length = config.vehicle_length;
    w.geom.vehicle_width = config.vehicle_width;
    w.geom.road_length = config.road_length;

    w.vehicle.x = 0.0;
    w.vehicle.y = config.left_lane_center_y();
    w.vehicle.yaw = 0.0;
    w.vehicle.vx = config.vehicle_speed;

    if (!config.pedestrian_present) return w;  // no event scheduled

    w.event_time = config.pre_event_cruise;
    const double front_at_event =
        config.vehicle_speed * config.pre_event_cruise + 0.5 * config.vehicle_length;
    w.geom.crossing_station = front_at_event + config.vehicle_speed * config.ttc_at_event;

    const double road_edge_y = -config.lane_width;  // left edge
    const double parked_near = road_edge_y - config.parked_edge_clearance;
    w.geom.parked_vehicle = RectXY{
        w.geom.crossing_station - config.parked_gap_to_crossing - config.parked_length,
        w.geom.crossing_station - config.parked_gap_to_crossing,
        parked_near - config.parked_width,
        parked_near,
    };
    w.geom.ped_spawn_y = parked_near - config.parked_width - config.ped_spawn_margin;
    w.geom.ped_stop_y = config.left_lane_center_y();

    if (w.geom.crossing_station <= 0.0 || w.geom.crossing_station >= config.road_length)
        throw ConfigError("build_world: pedestrian spawn station " +
                          std::to_string(w.geom.crossing_station) + " outside road [0, " +
                          std::to_string(config.road_length) + "]");
    return w;
}

/// Advances world time by dt and places the pedestrian from closed-form
/// piecewise-linear kinematics: spawned at the event instant, walking toward
/// the left-lane center, holding position permanently once there.
inline WorldState step_pedestrian(const WorldState& world, double dt) {
    if (!(dt > 0.0)) throw ConfigError("step_pedestrian: dt must be > 0");
    WorldState next = world;
    next.time = world.time + dt;
    if (!world.event_time || next.time < *world.event_time) {
        next.pedestrian_position.reset();
        return next;
    }
    const double travel = world.geom.pedestrian_speed * (next.time - *world.event_time);
    const double y = std::min(world.geom.ped_spawn_y + travel, world.geom.ped_stop_y);
    next.pedestrian_position = Vec2{world.geom.crossing_station, y};
    return next;
}

namespace detail {

/// True when the open segment interior between p0 and p1 passes through the
/// open interior of the rectangle. Boundary grazing does not count.
inline bool segment_crosses_rect_interior(const Vec2& p0, const Vec2& p1, const RectXY& r) {
    double t_enter = 0.0;
    double t_exit = 1.0;
    const double d[2] = {p1.x - p0.x, p1.y - p0.y};
    const double o[2] = {p0.x, p0.y};
    const double lo[2] = {r.x_min, r.y_min};
    const double hi[2] = {r.x_max, r.y_max};
    for (int axis = 0; axis < 2; ++axis) {
        if (d[axis] == 0.0) {
            if (o[axis] <= lo[axis] || o[axis] >= hi[axis]) return false;
        } else {
            double t1 = (lo[axis] - o[axis]) / d[axis];
            double t2 = (hi[axis] - o[axis]) / d[axis];
            if (t1 > t2) std::swap(t1, t2);
            t_enter = std::max(t_enter, t1);
            t_exit = std::min(t_exit, t2);
        }
    }
    return t_exit > t_enter;
}

}  // namespace detail

/// Sightline check from the vehicle CG to the pedestrian against the parked
/// vehicle. Rays that only graze the rectangle boundary count as visible.
inline bool visibility(const WorldState& world) {
    if (!world.pedestrian_position) return false;
    const Vec2 cg{world.vehicle.x, world.vehicle.y};
    return !detail::segment_crosses_rect_interior(cg, *world.pedestrian_position,
                                                  world.geom.parked_vehicle);
}

/// Euclidean distance from the nearest point of the vehicle's oriented
/// bounding rectangle to the pedestrian point; 0 means contact.
inline double vehicle_pedestrian_distance(const WorldState& world) {
    if (!world.pedestrian_position)
        throw ConfigError("vehicle_pedestrian_distance: no pedestrian in world");
    const VehicleState& v = world.vehicle;
    const double dx = world.pedestrian_position->x - v.x;
    const double dy = world.pedestrian_position->y - v.y;
    const double c = std::cos(v.yaw);
    const double s = std::sin(v.yaw);
    const double local_x = c * dx + s * dy;
    const double local_y = -s * dx + c * dy;
    const double ox = std::max(std::abs(local_x) - 0.5 * world.geom.vehicle_length, 0.0);
    const double oy = std::max(std::abs(local_y) - 0.5 * world.geom.vehicle_width, 0.0);
    return std::hypot(ox, oy);
}

}  // namespace evasim
