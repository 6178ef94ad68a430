#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "evasim/agents.hpp"
#include "evasim/config.hpp"
#include "evasim/control.hpp"
#include "evasim/dynamics.hpp"
#include "evasim/errors.hpp"
#include "evasim/metrics.hpp"
#include "evasim/rng.hpp"
#include "evasim/scenario.hpp"

namespace evasim {

/// One of the seven experimental conditions.
struct ConditionSpec {
    int condition_id = 1;
    Interface interface_mode = Interface::MyoArmband;
    bool crosswalk = false;
    bool pedestrian_present = true;
};

/// The full condition matrix: 1-2 armband, 3/5 wheel with/without crosswalk,
/// 4 wheel without any pedestrian, 6-7 takeover.
inline const std::array<ConditionSpec, 7>& condition_table() {
    static const std::array<ConditionSpec, 7> table{{
        {1, Interface::MyoArmband, true, true},
        {2, Interface::MyoArmband, false, true},
        {3, Interface::SteeringWheel, true, true},
        {4, Interface::SteeringWheel, false, false},
        {5, Interface::SteeringWheel, false, true},
        {6, Interface::ManualTakeover, true, true},
        {7, Interface::ManualTakeover, false, true},
    }};
    return table;
}

inline const ConditionSpec& condition_by_id(int id) {
    if (id < 1 || id > 7) throw ConfigError("condition id must be 1..7");
    return condition_table()[static_cast<std::size_t>(id - 1)];
}

/// n x n Latin square of 1-based symbols. Odd n uses the cyclic construction;
/// even n uses a Williams design, which additionally balances first-order
/// carryover (every ordered pair of symbols adjacent exactly once).
inline std::vector<std::vector<int>> latin_square(int n) {
    if (n < 1) throw ConfigError("latin_square: n must be >= 1");
    std::vector<int> base(static_cast<std::size_t>(n));
    if (n % 2 == 0) {
        base[0] = 0;
        for (int k = 1, pos = 1; pos < n; ++k) {
            base[static_cast<std::size_t>(pos++)] = k;
            if (pos < n) base[static_cast<std::size_t>(pos++)] = n - k;
        }
    } else {
        for (int c = 0; c < n; ++c) base[static_cast<std::size_t>(c)] = c;
    }
    std::vector<std::vector<int>> square(static_cast<std::size_t>(n),
                                         std::vector<int>(static_cast<std::size_t>(n)));
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            square[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                (base[static_cast<std::size_t>(c)] + r) % n + 1;
    return square;
}

/// Subjects and per-subject condition orders. The six avoidance conditions
/// are counterbalanced with a 6x6 balanced Latin square; the no-pedestrian
/// condition 4 sits in the fourth slot for every subject.
struct ExperimentPlan {
    std::uint64_t master_seed = 0;
    std::vector<SubjectProfile> subjects;
    std::vector<std::array<int, 7>> orders;
};

/// Draws the subject population from the master seed (fields per subject in
/// a fixed order: reaction, aggressiveness, anticipation, seed) and assigns
/// Latin-square rows cyclically.
inline ExperimentPlan build_plan(std::uint64_t master_seed, const AgentCalibration& calib) {
    calib.validate();
    ExperimentPlan plan;
    plan.master_seed = master_seed;

    if (!calib.subjects.empty()) {
        plan.subjects = calib.subjects;
    } else {
        Rng rng(master_seed);
        for (int i = 0; i < calib.num_subjects; ++i) {
            SubjectProfile p;
            p.subject_id = i + 1;
            p.reaction_time = rng.lognormal(std::log(calib.reaction_time_median),
                                            calib.reaction_time_sigma_log);
            p.aggressiveness = rng.uniform(calib.aggressiveness_min, calib.aggressiveness_max);
            p.anticipation_crosswalk = rng.uniform(calib.anticipation_min, calib.anticipation_max);
            p.rng_seed = rng.next_u64();
            p.validate();
            plan.subjects.push_back(p);
        }
    }

    static constexpr std::array<int, 6> avoidance_ids{1, 2, 3, 5, 6, 7};
    const auto square = latin_square(6);
    for (int i = 0; i < static_cast<int>(plan.subjects.size()); ++i) {
        const auto& row = square[static_cast<std::size_t>(i % 6)];
        std::array<int, 7> order{};
        int slot = 0;
        for (int c = 0; c < 6; ++c) {
            if (slot == 3) order[static_cast<std::size_t>(slot++)] = 4;  // fourth position
            order[static_cast<std::size_t>(slot++)] =
                avoidance_ids[static_cast<std::size_t>(row[static_cast<std::size_t>(c)] - 1)];
        }
        plan.orders.push_back(order);
    }
    return plan;
}

namespace harness_detail {

inline std::string describe_state(const VehicleState& v) {
    std::ostringstream os;
    os << "x=" << v.x << " y=" << v.y << " yaw=" << v.yaw << " vy=" << v.vy
       << " yaw_rate=" << v.yaw_rate << " swa=" << v.swa << " swa_rate=" << v.swa_rate;
    return os.str();
}

}  // namespace harness_detail

/// Runs one closed-loop trial: scenario step -> agent -> assist controller
/// (when enabled) -> vehicle step, recorded on the fixed grid. Avoidance
/// trials end the moment before the vehicle front passes the pedestrian's
/// station; no-pedestrian trials end at the road end.
inline TrialTrace run_trial(const ConditionSpec& condition, const SubjectProfile& profile,
                            const HarnessConfig& cfg) {
    cfg.validate();
    const double dt = cfg.dt;

    ScenarioConfig sc = cfg.scenario;
    sc.crosswalk = condition.crosswalk;
    sc.pedestrian_present = condition.pedestrian_present;
    // Pin the spawn instant to the simulation grid.
    const auto event_step = static_cast<std::int64_t>(std::llround(sc.pre_event_cruise / dt));
    sc.pre_event_cruise = static_cast<double>(event_step) * dt;

    WorldState world = build_world(sc);

    PathSpec paths;
    paths.lane_keep_offset = sc.left_lane_center_y();
    paths.avoid_target_offset = sc.right_lane_center_y();
    paths.transition_length = sc.transition_length;
    paths.begin_station = -sc.vehicle_length;
    paths.end_station = sc.road_length + cfg.preview.far_distance + 10.0;

    const auto agent =
        make_agent(condition.interface_mode, profile, cfg.gains, cfg.preview, cfg.agents, paths);

    TrialTrace trace;
    trace.dt = dt;
    trace.condition_id = condition.condition_id;
    trace.subject_id = profile.subject_id;
    trace.interface_mode = condition.interface_mode;
    trace.crosswalk = condition.crosswalk;
    trace.pedestrian_present = condition.pedestrian_present;
    trace.vehicle_length = sc.vehicle_length;
    if (world.event_time) {
        trace.event_time = *world.event_time;
        trace.crossing_station = world.geom.crossing_station;
    }

    ControllerState assist_state;
    ActivePath prev_path = ActivePath::LaneKeep;
    constexpr double rad2deg = 180.0 / std::numbers::pi;
    const auto max_steps =
        static_cast<std::int64_t>(std::ceil(sc.road_length / sc.vehicle_speed / dt)) + 8;

    auto divergence_context = [&](const char* what) {
        std::ostringstream os;
        os << what << " [condition " << condition.condition_id << ", subject "
           << profile.subject_id << ", t=" << world.time
           << ", state: " << harness_detail::describe_state(world.vehicle) << "]";
        if (!trace.t.empty()) {
            os << " last samples:";
            const std::size_t n = trace.size();
            for (std::size_t i = n > 3 ? n - 3 : 0; i < n; ++i)
                os << " (t=" << trace.t[i] << ", y=" << trace.y[i] << ", swa=" << trace.swa_deg[i]
                   << ")";
        }
        return DivergenceError(os.str());
    };

    try {
        for (std::int64_t step = 0; step <= max_steps; ++step) {
            world.time = static_cast<double>(step) * dt;
            const VehicleState& v = world.vehicle;

            const double front = vehicle_front_station(v, sc.vehicle_length);
            if (condition.pedestrian_present && front >= world.geom.crossing_station) break;
            if (front >= sc.road_length) break;

            world.pedestrian_visible = visibility(world);
            const AgentOutput out = agent->step(world, dt);

            if (out.active_trajectory != prev_path) {
                assist_state = reset(assist_state);  // anti-windup across the switch
                prev_path = out.active_trajectory;
            }

            double assist = 0.0;
            if (out.assist_enabled) {
                const PreviewErrors errors =
                    preview_errors(v, agent->active_path(), cfg.preview, assist_state, dt);
                auto [torque, next_state] = controller_torque(errors, assist_state, cfg.gains, dt);
                assist = torque;
                assist_state = next_state;
            }

            const auto deriv = state_derivative(v, cfg.vehicle, assist, out.driver_torque);

            trace.t.push_back(world.event_time
                                  ? static_cast<double>(step - event_step) * dt
                                  : world.time);
            trace.x.push_back(v.x);
            trace.y.push_back(v.y);
            trace.yaw.push_back(v.yaw);
            trace.vy.push_back(v.vy);
            trace.yaw_rate.push_back(v.yaw_rate);
            trace.beta_deg.push_back(slip_angle(v));
            // Analysis convention is leftward positive; the simulation frame
            // is rightward positive, hence the sign flips.
            trace.a_y.push_back(lateral_acceleration(v, -deriv.vy_dot, -v.yaw_rate));
            trace.swa_deg.push_back(v.swa * rad2deg);
            trace.assist_torque.push_back(assist);
            trace.driver_torque.push_back(out.driver_torque);
            if (world.pedestrian_position) {
                trace.ped_x.push_back(world.pedestrian_position->x);
                trace.ped_y.push_back(world.pedestrian_position->y);
                trace.ped_distance.push_back(vehicle_pedestrian_distance(world));
            } else {
                const double nan = std::numeric_limits<double>::quiet_NaN();
                trace.ped_x.push_back(nan);
                trace.ped_y.push_back(nan);
                trace.ped_distance.push_back(nan);
            }
            trace.ped_visible.push_back(world.pedestrian_visible ? 1 : 0);
            trace.phase.push_back(out.phase);

            world.vehicle = step_vehicle(v, cfg.vehicle, assist, out.driver_torque, dt);
            world = step_pedestrian(world, dt);
        }
    } catch (const DivergenceError& e) {
        throw divergence_context(e.what());
    } catch (const ConfigError& e) {
        // The configuration was validated up front; a mid-trial domain escape
        // (e.g. preview stations leaving the road) means the state went wild.
        throw divergence_context(e.what());
    }
    return trace;
}

/// Identifies one executed trial within an experiment.
struct TrialKey {
    int subject_index = 0;  // 0-based into plan.subjects
    int condition_id = 1;
    int order_slot = 0;  // 0-based position in the subject's condition order
};

struct ExperimentRun {
    ExperimentPlan plan;
    std::vector<TrialKey> keys;       // plan order, 7 per subject
    std::vector<TrialTrace> traces;   // aligned with keys
    std::vector<TrialMetrics> metrics;
    std::vector<std::string> failures;  // annotations for trials that threw
};

/// Executes all subject x condition trials. Trials are independent, so jobs>1
/// runs them in parallel; results land in plan order regardless of schedule.
inline ExperimentRun run_experiment_trials(const ExperimentPlan& plan, const HarnessConfig& cfg,
                                           int jobs = 1) {
    if (plan.subjects.empty()) throw ConfigError("run_experiment: empty plan (no subjects)");
    if (plan.orders.size() != plan.subjects.size())
        throw ConfigError("run_experiment: plan orders do not match subjects");
    if (jobs < 1) throw ConfigError("run_experiment: jobs must be >= 1");

    ExperimentRun run;
    run.plan = plan;
    for (std::size_t s = 0; s < plan.subjects.size(); ++s)
        for (std::size_t slot = 0; slot < plan.orders[s].size(); ++slot)
            run.keys.push_back({static_cast<int>(s), plan.orders[s][slot], static_cast<int>(slot)});

    const std::size_t total = run.keys.size();
    run.traces.resize(total);
    std::vector<std::string> errors(total);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            const TrialKey& key = run.keys[i];
            try {
                run.traces[i] = run_trial(condition_by_id(key.condition_id),
                                          plan.subjects[static_cast<std::size_t>(key.subject_index)],
                                          cfg);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(jobs, static_cast<int>(total));
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    run.metrics.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (!errors[i].empty()) {
            run.failures.push_back("trial subject=" +
                                   std::to_string(plan.subjects[static_cast<std::size_t>(
                                                                    run.keys[i].subject_index)]
                                                      .subject_id) +
                                   " condition=" + std::to_string(run.keys[i].condition_id) + ": " +
                                   errors[i]);
            continue;
        }
        const TrialTrace& tr = run.traces[i];
        const double epoch = cfg.epoch == ResponseEpoch::Spawn
                                 ? 0.0
                                 : (tr.t.empty() ? 0.0 : tr.t.front());
        run.metrics[i] = compute_trial_metrics(tr, cfg.response_threshold_deg, epoch);
    }
    return run;
}

}  // namespace evasim
