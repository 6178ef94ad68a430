#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "evasim/agents.hpp"
#include "evasim/errors.hpp"

namespace evasim {

/// Fixed-rate record of every signal in one trial. Times are relative to the
/// pedestrian spawn instant (t = 0); trials without an event use the trial
/// clock directly. Pedestrian columns hold NaN while the pedestrian is absent.
struct TrialTrace {
    double dt = 1.0 / 120.0;
    int condition_id = 0;
    int subject_id = 0;
    Interface interface_mode = Interface::MyoArmband;
    bool crosswalk = false;
    bool pedestrian_present = false;
    std::optional<double> event_time;        // absolute trial time of the spawn
    std::optional<double> crossing_station;  // pedestrian x
    double vehicle_length = 4.5;

    std::vector<double> t;  // s, relative to event_time, uniform grid
    std::vector<double> x, y, yaw;
    std::vector<double> vy, yaw_rate;
    std::vector<double> beta_deg;
    std::vector<double> a_y;  // leftward positive: negative while steering away
    std::vector<double> swa_deg;
    std::vector<double> assist_torque, driver_torque;
    std::vector<double> ped_x, ped_y;     // NaN when absent
    std::vector<double> ped_distance;     // NaN when absent
    std::vector<std::uint8_t> ped_visible;
    std::vector<Phase> phase;

    std::size_t size() const { return t.size(); }
};

/// Per-trial measurements. Slip and response time can legitimately be absent
/// (all samples inside the exclusion band; threshold never crossed).
struct TrialMetrics {
    std::optional<double> avg_abs_slip;   // deg, >= 0.1 whenever defined
    std::optional<double> min_distance;   // m, absent without a pedestrian
    double max_swa = 0.0;                 // deg, absolute maximum
    std::optional<double> response_time;  // s from the chosen epoch
    bool collided = false;
};

/// Drops slip samples strictly inside (-0.1, 0.1) deg; the +-0.1 boundary is
/// retained. Order-preserving.
inline std::vector<double> filter_slip(const std::vector<double>& beta_deg) {
    std::vector<double> retained;
    retained.reserve(beta_deg.size());
    for (double b : beta_deg)
        if (b <= -0.1 || b >= 0.1) retained.push_back(b);
    return retained;
}

/// Mean of |beta| over retained samples; empty input marks the metric
/// undefined so the trial can be excluded from slip statistics.
inline std::optional<double> avg_abs_slip(const std::vector<double>& retained) {
    if (retained.empty()) return std::nullopt;
    double sum = 0.0;
    for (double b : retained) sum += std::abs(b);
    return sum / static_cast<double>(retained.size());
}

/// First grid time at or after `epoch` where the rightward steering-wheel
/// angle reaches the threshold, expressed relative to the epoch. Absent if the
/// threshold is never reached.
inline std::optional<double> response_time(const std::vector<double>& t,
                                           const std::vector<double>& swa_deg,
                                           double threshold_deg, double epoch) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= epoch && swa_deg[i] >= threshold_deg) return t[i] - epoch;
    return std::nullopt;
}

/// Absolute maximum steering-wheel angle over the series.
inline double max_swa(const std::vector<double>& swa_deg) {
    if (swa_deg.empty()) throw ConfigError("max_swa: empty series");
    double m = 0.0;
    for (double s : swa_deg) m = std::max(m, std::abs(s));
    return m;
}

/// Number of leading samples that precede the vehicle front passing the
/// pedestrian's station. All per-trial metrics are computed on this prefix,
/// so appending post-pass samples never changes them.
inline std::size_t pass_truncation_index(const TrialTrace& trace) {
    if (!trace.crossing_station) return trace.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double front = trace.x[i] + 0.5 * trace.vehicle_length * std::cos(trace.yaw[i]);
        if (front >= *trace.crossing_station) return i;
    }
    return trace.size();
}

inline TrialMetrics compute_trial_metrics(const TrialTrace& trace, double threshold_deg,
                                          double epoch) {
    const std::size_t n = pass_truncation_index(trace);
    TrialMetrics m;
    if (n == 0) return m;

    std::vector<double> beta(trace.beta_deg.begin(), trace.beta_deg.begin() + n);
    std::vector<double> swa(trace.swa_deg.begin(), trace.swa_deg.begin() + n);
    std::vector<double> tt(trace.t.begin(), trace.t.begin() + n);

    m.avg_abs_slip = avg_abs_slip(filter_slip(beta));
    m.max_swa = max_swa(swa);
    m.response_time = response_time(tt, swa, threshold_deg, epoch);

    double min_d = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(trace.ped_distance[i])) continue;
        any = true;
        min_d = std::min(min_d, trace.ped_distance[i]);
    }
    if (any) {
        m.min_distance = min_d;
        m.collided = (min_d == 0.0);
    }
    return m;
}

/// Uniform series shared by the aligned-mean outputs.
struct AlignedSeries {
    std::vector<double> t;
    std::vector<double> mean;
};

/// Pointwise mean of one trace column over the traces' common time window.
/// Alignment uses the shared grid (the t values are multiples of dt).
template <typename ColumnGetter>
AlignedSeries aligned_mean_series(const std::vector<const TrialTrace*>& traces, ColumnGetter column) {
    if (traces.empty()) throw ConfigError("aligned_mean: empty trace set");
    const double dt = traces.front()->dt;
    long long lo = std::numeric_limits<long long>::min();
    long long hi = std::numeric_limits<long long>::max();
    for (const TrialTrace* tr : traces) {
        if (tr->size() == 0) throw ConfigError("aligned_mean: empty trace");
        if (std::abs(tr->dt - dt) > 1e-12) throw ConfigError("aligned_mean: mismatched sample rates");
        const long long first = std::llround(tr->t.front() / dt);
        lo = std::max(lo, first);
        hi = std::min(hi, first + static_cast<long long>(tr->size()) - 1);
    }
    AlignedSeries out;
    if (hi < lo) return out;  // no common domain
    out.t.reserve(static_cast<std::size_t>(hi - lo + 1));
    out.mean.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (long long k = lo; k <= hi; ++k) out.t.push_back(static_cast<double>(k) * dt);
    for (const TrialTrace* tr : traces) {
        const long long first = std::llround(tr->t.front() / dt);
        const auto& col = column(*tr);
        for (long long k = lo; k <= hi; ++k)
            out.mean[static_cast<std::size_t>(k - lo)] += col[static_cast<std::size_t>(k - first)];
    }
    const double inv = 1.0 / static_cast<double>(traces.size());
    for (double& v : out.mean) v *= inv;
    return out;
}

/// Pointwise mean lateral acceleration over the traces' common time window
/// (t = 0 at the pedestrian spawn for every trace).
inline AlignedSeries aligned_mean_lateral_accel(const std::vector<const TrialTrace*>& traces) {
    return aligned_mean_series(traces, [](const TrialTrace& tr) -> const std::vector<double>& {
        return tr.a_y;
    });
}

}  // namespace evasim
