#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evasim/agents.hpp"
#include "evasim/control.hpp"
#include "evasim/dynamics.hpp"
#include "evasim/errors.hpp"
#include "evasim/scenario.hpp"

namespace evasim {

/// Epoch for the steering response-time measurement.
enum class ResponseEpoch { Spawn, TrialStart };

inline const char* to_string(ResponseEpoch e) {
    return e == ResponseEpoch::Spawn ? "spawn" : "trial-start";
}

inline ResponseEpoch response_epoch_from_string(const std::string& s) {
    if (s == "spawn") return ResponseEpoch::Spawn;
    if (s == "trial-start") return ResponseEpoch::TrialStart;
    throw ConfigError("unknown response epoch '" + s + "' (expected 'spawn' or 'trial-start')");
}

/// Every tunable of the experiment in one place. Defaults reproduce the
/// shipped calibration; any subset can be overridden from a JSON config file
/// (comments in the file are allowed and ignored).
struct HarnessConfig {
    VehicleParams vehicle;
    ControllerGains gains;
    PreviewConfig preview;
    ScenarioConfig scenario;
    AgentCalibration agents;
    double dt = 1.0 / 120.0;
    double alpha = 0.05;
    double response_threshold_deg = 5.0;
    ResponseEpoch epoch = ResponseEpoch::Spawn;

    void validate() const {
        vehicle.validate();
        gains.validate();
        preview.validate();
        scenario.validate();
        agents.validate();
        if (!(dt > 0.0)) throw ConfigError("HarnessConfig: dt must be > 0");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("HarnessConfig: alpha must be in (0,1)");
        if (!(response_threshold_deg > 0.0))
            throw ConfigError("HarnessConfig: response_threshold_deg must be > 0");
        if (!(agents.human_torque_limit > gains.torque_limit))
            throw ConfigError("HarnessConfig: human torque authority must exceed the assist cap");
    }
};

namespace config_detail {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

inline void unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& section, std::vector<std::string>& warnings) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (const char* k : known)
            if (it.key() == k) { found = true; break; }
        if (!found) warnings.push_back("unknown key '" + section + "." + it.key() + "'");
    }
}

}  // namespace config_detail

inline void to_json(nlohmann::json& j, const VehicleParams& p) {
    j = {{"mass", p.mass},
         {"yaw_inertia", p.yaw_inertia},
         {"dist_cg_front_axle", p.dist_cg_front_axle},
         {"dist_cg_rear_axle", p.dist_cg_rear_axle},
         {"cornering_stiffness_front", p.cornering_stiffness_front},
         {"cornering_stiffness_rear", p.cornering_stiffness_rear},
         {"steering_ratio", p.steering_ratio},
         {"column_inertia", p.column_inertia},
         {"column_damping", p.column_damping}};
}

inline void from_json(const nlohmann::json& j, VehicleParams& p) {
    using config_detail::read;
    read(j, "mass", p.mass);
    read(j, "yaw_inertia", p.yaw_inertia);
    read(j, "dist_cg_front_axle", p.dist_cg_front_axle);
    read(j, "dist_cg_rear_axle", p.dist_cg_rear_axle);
    read(j, "cornering_stiffness_front", p.cornering_stiffness_front);
    read(j, "cornering_stiffness_rear", p.cornering_stiffness_rear);
    read(j, "steering_ratio", p.steering_ratio);
    read(j, "column_inertia", p.column_inertia);
    read(j, "column_damping", p.column_damping);
}

inline void to_json(nlohmann::json& j, const ControllerGains& g) {
    j = {{"a1", g.a1}, {"a2", g.a2}, {"a3", g.a3}, {"a4", g.a4}, {"torque_limit", g.torque_limit}};
}

inline void from_json(const nlohmann::json& j, ControllerGains& g) {
    using config_detail::read;
    read(j, "a1", g.a1);
    read(j, "a2", g.a2);
    read(j, "a3", g.a3);
    read(j, "a4", g.a4);
    read(j, "torque_limit", g.torque_limit);
}

inline void to_json(nlohmann::json& j, const PreviewConfig& p) {
    j = {{"near_distance", p.near_distance}, {"far_distance", p.far_distance}};
}

inline void from_json(const nlohmann::json& j, PreviewConfig& p) {
    using config_detail::read;
    read(j, "near_distance", p.near_distance);
    read(j, "far_distance", p.far_distance);
}

inline void to_json(nlohmann::json& j, const ScenarioConfig& s) {
    j = {{"lane_width", s.lane_width},
         {"vehicle_speed", s.vehicle_speed},
         {"pedestrian_speed", s.pedestrian_speed},
         {"ttc_at_event", s.ttc_at_event},
         {"road_length", s.road_length},
         {"pre_event_cruise", s.pre_event_cruise},
         {"vehicle_length", s.vehicle_length},
         {"vehicle_width", s.vehicle_width},
         {"parked_length", s.parked_length},
         {"parked_width", s.parked_width},
         {"parked_gap_to_crossing", s.parked_gap_to_crossing},
         {"parked_edge_clearance", s.parked_edge_clearance},
         {"ped_spawn_margin", s.ped_spawn_margin},
         {"transition_length", s.transition_length}};
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& s) {
    using config_detail::read;
    read(j, "lane_width", s.lane_width);
    read(j, "vehicle_speed", s.vehicle_speed);
    read(j, "pedestrian_speed", s.pedestrian_speed);
    read(j, "ttc_at_event", s.ttc_at_event);
    read(j, "road_length", s.road_length);
    read(j, "pre_event_cruise", s.pre_event_cruise);
    read(j, "vehicle_length", s.vehicle_length);
    read(j, "vehicle_width", s.vehicle_width);
    read(j, "parked_length", s.parked_length);
    read(j, "parked_width", s.parked_width);
    read(j, "parked_gap_to_crossing", s.parked_gap_to_crossing);
    read(j, "parked_edge_clearance", s.parked_edge_clearance);
    read(j, "ped_spawn_margin", s.ped_spawn_margin);
    read(j, "transition_length", s.transition_length);
}

inline void to_json(nlohmann::json& j, const SubjectProfile& p) {
    j = {{"subject_id", p.subject_id},
         {"reaction_time", p.reaction_time},
         {"aggressiveness", p.aggressiveness},
         {"anticipation_crosswalk", p.anticipation_crosswalk},
         {"rng_seed", p.rng_seed}};
}

inline void from_json(const nlohmann::json& j, SubjectProfile& p) {
    using config_detail::read;
    read(j, "subject_id", p.subject_id);
    read(j, "reaction_time", p.reaction_time);
    read(j, "aggressiveness", p.aggressiveness);
    read(j, "anticipation_crosswalk", p.anticipation_crosswalk);
    read(j, "rng_seed", p.rng_seed);
}

inline void to_json(nlohmann::json& j, const AgentCalibration& a) {
    j = {{"trigger_latency", a.trigger_latency},
         {"arm_damping", a.arm_damping},
         {"takeover_penalty", a.takeover_penalty},
         {"takeover_gain", a.takeover_gain},
         {"clear_margin", a.clear_margin},
         {"min_transition", a.min_transition},
         {"human_torque_limit", a.human_torque_limit},
         {"reaction_time_median", a.reaction_time_median},
         {"reaction_time_sigma_log", a.reaction_time_sigma_log},
         {"aggressiveness_min", a.aggressiveness_min},
         {"aggressiveness_max", a.aggressiveness_max},
         {"anticipation_min", a.anticipation_min},
         {"anticipation_max", a.anticipation_max},
         {"num_subjects", a.num_subjects}};
    if (!a.subjects.empty()) j["subjects"] = a.subjects;
}

inline void from_json(const nlohmann::json& j, AgentCalibration& a) {
    using config_detail::read;
    read(j, "trigger_latency", a.trigger_latency);
    read(j, "arm_damping", a.arm_damping);
    read(j, "takeover_penalty", a.takeover_penalty);
    read(j, "takeover_gain", a.takeover_gain);
    read(j, "clear_margin", a.clear_margin);
    read(j, "min_transition", a.min_transition);
    read(j, "human_torque_limit", a.human_torque_limit);
    read(j, "reaction_time_median", a.reaction_time_median);
    read(j, "reaction_time_sigma_log", a.reaction_time_sigma_log);
    read(j, "aggressiveness_min", a.aggressiveness_min);
    read(j, "aggressiveness_max", a.aggressiveness_max);
    read(j, "anticipation_min", a.anticipation_min);
    read(j, "anticipation_max", a.anticipation_max);
    read(j, "num_subjects", a.num_subjects);
    read(j, "subjects", a.subjects);
}

inline void to_json(nlohmann::json& j, const HarnessConfig& c) {
    j = {{"vehicle", c.vehicle},
         {"controller", c.gains},
         {"preview", c.preview},
         {"scenario", c.scenario},
         {"agents", c.agents},
         {"dt", c.dt},
         {"alpha", c.alpha},
         {"response_threshold_deg", c.response_threshold_deg},
         {"response_epoch", std::string(to_string(c.epoch))}};
}

inline void from_json(const nlohmann::json& j, HarnessConfig& c) {
    using config_detail::read;
    read(j, "vehicle", c.vehicle);
    read(j, "controller", c.gains);
    read(j, "preview", c.preview);
    read(j, "scenario", c.scenario);
    read(j, "agents", c.agents);
    read(j, "dt", c.dt);
    read(j, "alpha", c.alpha);
    read(j, "response_threshold_deg", c.response_threshold_deg);
    if (j.contains("response_epoch"))
        c.epoch = response_epoch_from_string(j.at("response_epoch").get<std::string>());
}

/// Parses a config file over the built-in defaults. JSON with // and /* */
/// comments accepted.
inline HarnessConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
    HarnessConfig cfg;
    try {
        j.get_to(cfg);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config type error in '" + path + "': " + e.what());
    }
    return cfg;
}

/// Non-fatal config lint: reports keys that do not match any known option.
inline std::vector<std::string> lint_config_keys(const nlohmann::json& j) {
    using config_detail::unknown_keys;
    std::vector<std::string> warnings;
    unknown_keys(j,
                 {"vehicle", "controller", "preview", "scenario", "agents", "dt", "alpha",
                  "response_threshold_deg", "response_epoch"},
                 "", warnings);
    if (j.contains("vehicle"))
        unknown_keys(j["vehicle"],
                     {"mass", "yaw_inertia", "dist_cg_front_axle", "dist_cg_rear_axle",
                      "cornering_stiffness_front", "cornering_stiffness_rear", "steering_ratio",
                      "column_inertia", "column_damping"},
                     "vehicle", warnings);
    if (j.contains("controller"))
        unknown_keys(j["controller"], {"a1", "a2", "a3", "a4", "torque_limit"}, "controller", warnings);
    if (j.contains("preview"))
        unknown_keys(j["preview"], {"near_distance", "far_distance"}, "preview", warnings);
    if (j.contains("scenario"))
        unknown_keys(j["scenario"],
                     {"lane_width", "vehicle_speed", "pedestrian_speed", "ttc_at_event",
                      "road_length", "pre_event_cruise", "vehicle_length", "vehicle_width",
                      "parked_length", "parked_width", "parked_gap_to_crossing",
                      "parked_edge_clearance", "ped_spawn_margin", "transition_length"},
                     "scenario", warnings);
    if (j.contains("agents"))
        unknown_keys(j["agents"],
                     {"trigger_latency", "arm_damping", "takeover_penalty", "takeover_gain", "human_torque_limit", "clear_margin", "min_transition",
                      "reaction_time_median", "reaction_time_sigma_log", "aggressiveness_min",
                      "aggressiveness_max", "anticipation_min", "anticipation_max", "num_subjects", "subjects"},
                     "agents", warnings);
    return warnings;
}

/// FNV-1a over the canonical (key-sorted) JSON dump of the config.
inline std::string config_hash(const HarnessConfig& cfg) {
    const std::string dump = nlohmann::json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace evasim
