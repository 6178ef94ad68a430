#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evasim/config.hpp"
#include "evasim/harness.hpp"
#include "evasim/metrics.hpp"
#include "evasim/stats.hpp"

namespace evasim {

inline int interface_index(Interface i) {
    switch (i) {
        case Interface::MyoArmband: return 0;
        case Interface::SteeringWheel: return 1;
        case Interface::ManualTakeover: return 2;
    }
    return 0;
}

inline const char* interface_display(int idx) {
    switch (idx) {
        case 0: return "Myo armband";
        case 1: return "Steering wheel";
        case 2: return "Manual takeover";
    }
    return "?";
}

struct MetricSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    int n = 0;
};

struct FiveNumber {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    int n = 0;
};

struct PairwiseComparison {
    int a = 0, b = 0;  // interface indices
    std::optional<GroupComparison> result;
    std::string error;  // set when the comparison could not run
};

struct ScenarioReport {
    bool crosswalk = false;
    // Indexed by interface (0 armband, 1 wheel, 2 takeover).
    std::array<MetricSummary, 3> min_distance, max_swa, response_time, slip;
    std::vector<PairwiseComparison> min_distance_tests, max_swa_tests, response_time_tests;
    std::array<AlignedSeries, 3> mean_path_x, mean_path_y, mean_lat_accel;
};

/// Everything needed to lay out the tables and figure data files.
struct ExperimentReport {
    std::array<ScenarioReport, 2> scenarios;  // [0] crosswalk, [1] without
    std::array<std::vector<double>, 3> slip_by_interface;  // per-subject, across scenarios
    std::array<FiveNumber, 3> slip_boxplot;
    std::vector<PairwiseComparison> slip_tests;  // across scenarios, per interface pair
    std::optional<GroupComparison> crosswalk_slip_test;
    std::string crosswalk_slip_error;
    std::vector<std::string> notes;
};

namespace report_detail {

inline MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    } else {
        s.sd = 0.0;
    }
    return s;
}

/// Excel-style (linear interpolation) quantile on a sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (h - static_cast<double>(lo));
}

inline FiveNumber five_number(std::vector<double> v) {
    FiveNumber f;
    f.n = static_cast<int>(v.size());
    if (v.empty()) return f;
    std::sort(v.begin(), v.end());
    f.min = v.front();
    f.q1 = quantile_sorted(v, 0.25);
    f.median = quantile_sorted(v, 0.50);
    f.q3 = quantile_sorted(v, 0.75);
    f.max = v.back();
    return f;
}

/// Paired comparison over per-subject optionals; subjects missing either side
/// are dropped (and reported by the caller via the returned pair count).
inline PairwiseComparison compare_paired(int ia, int ib,
                                         const std::vector<std::optional<double>>& a,
                                         const std::vector<std::optional<double>>& b,
                                         const ComparisonPolicy& policy) {
    PairwiseComparison out;
    out.a = ia;
    out.b = ib;
    Sample sa, sb;
    for (std::size_t s = 0; s < a.size(); ++s) {
        if (a[s] && b[s]) {
            sa.values.push_back(*a[s]);
            sb.values.push_back(*b[s]);
        }
    }
    try {
        out.result = compare_groups(sa, sb, policy);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace report_detail

/// Aggregates trial metrics the way the analysis pipeline prescribes:
/// per-subject values first, then summaries and pairwise tests on those.
inline ExperimentReport build_report(const ExperimentRun& run, const HarnessConfig& cfg) {
    using report_detail::compare_paired;
    using report_detail::summarize;

    const std::size_t n_subjects = run.plan.subjects.size();
    ExperimentReport rep;
    const ComparisonPolicy policy{cfg.alpha};

    // condition ids per scenario, indexed by interface.
    static constexpr std::array<std::array<int, 3>, 2> scenario_conditions{{{1, 3, 6}, {2, 5, 7}}};

    // Per-subject per-condition lookup.
    std::vector<std::array<const TrialMetrics*, 8>> by_subject(n_subjects, {nullptr});
    std::vector<std::array<const TrialTrace*, 8>> trace_by_subject(n_subjects, {nullptr});
    for (std::size_t i = 0; i < run.keys.size(); ++i) {
        const TrialKey& key = run.keys[i];
        if (run.traces[i].t.empty()) continue;  // failed trial
        by_subject[static_cast<std::size_t>(key.subject_index)]
                  [static_cast<std::size_t>(key.condition_id)] = &run.metrics[i];
        trace_by_subject[static_cast<std::size_t>(key.subject_index)]
                        [static_cast<std::size_t>(key.condition_id)] = &run.traces[i];
    }

    // Exclusions are logged for every executed trial, including the
    // no-pedestrian condition that belongs to neither scenario group.
    for (std::size_t i = 0; i < run.keys.size(); ++i) {
        if (run.traces[i].t.empty()) continue;
        const TrialKey& key = run.keys[i];
        const int subject =
            run.plan.subjects[static_cast<std::size_t>(key.subject_index)].subject_id;
        const TrialMetrics& m = run.metrics[i];
        if (!m.avg_abs_slip)
            rep.notes.push_back(
                "slip undefined (all samples inside the +-0.1 deg band): subject " +
                std::to_string(subject) + ", condition " + std::to_string(key.condition_id));
        if (condition_by_id(key.condition_id).pedestrian_present && !m.response_time)
            rep.notes.push_back("response threshold never reached: subject " +
                                std::to_string(subject) + ", condition " +
                                std::to_string(key.condition_id));
    }

    // Per-subject slip per (scenario, interface), reused for roll-ups below.
    std::array<std::array<std::vector<std::optional<double>>, 3>, 2> slip_cells;

    for (int sc = 0; sc < 2; ++sc) {
        ScenarioReport& srep = rep.scenarios[static_cast<std::size_t>(sc)];
        srep.crosswalk = (sc == 0);

        std::array<std::vector<std::optional<double>>, 3> dist, swa, rt;
        for (int iface = 0; iface < 3; ++iface) {
            const int cond = scenario_conditions[static_cast<std::size_t>(sc)]
                                                [static_cast<std::size_t>(iface)];
            auto& slips = slip_cells[static_cast<std::size_t>(sc)][static_cast<std::size_t>(iface)];
            std::vector<const TrialTrace*> traces;
            for (std::size_t s = 0; s < n_subjects; ++s) {
                const TrialMetrics* m =
                    by_subject[s][static_cast<std::size_t>(cond)];
                dist[static_cast<std::size_t>(iface)].push_back(m ? m->min_distance : std::nullopt);
                swa[static_cast<std::size_t>(iface)].push_back(
                    m ? std::optional<double>(m->max_swa) : std::nullopt);
                rt[static_cast<std::size_t>(iface)].push_back(m ? m->response_time : std::nullopt);
                slips.push_back(m ? m->avg_abs_slip : std::nullopt);
                const TrialTrace* tr = trace_by_subject[s][static_cast<std::size_t>(cond)];
                if (tr) traces.push_back(tr);
            }

            auto defined = [](const std::vector<std::optional<double>>& xs) {
                std::vector<double> out;
                for (const auto& x : xs)
                    if (x) out.push_back(*x);
                return out;
            };
            srep.min_distance[static_cast<std::size_t>(iface)] =
                summarize(defined(dist[static_cast<std::size_t>(iface)]));
            srep.max_swa[static_cast<std::size_t>(iface)] =
                summarize(defined(swa[static_cast<std::size_t>(iface)]));
            srep.response_time[static_cast<std::size_t>(iface)] =
                summarize(defined(rt[static_cast<std::size_t>(iface)]));
            srep.slip[static_cast<std::size_t>(iface)] = summarize(defined(slips));

            if (!traces.empty()) {
                srep.mean_path_x[static_cast<std::size_t>(iface)] = aligned_mean_series(
                    traces, [](const TrialTrace& t) -> const std::vector<double>& { return t.x; });
                srep.mean_path_y[static_cast<std::size_t>(iface)] = aligned_mean_series(
                    traces, [](const TrialTrace& t) -> const std::vector<double>& { return t.y; });
                srep.mean_lat_accel[static_cast<std::size_t>(iface)] =
                    aligned_mean_lateral_accel(traces);
            }
        }

        for (int ia = 0; ia < 3; ++ia)
            for (int ib = ia + 1; ib < 3; ++ib) {
                srep.min_distance_tests.push_back(
                    compare_paired(ia, ib, dist[static_cast<std::size_t>(ia)],
                                   dist[static_cast<std::size_t>(ib)], policy));
                srep.max_swa_tests.push_back(compare_paired(ia, ib, swa[static_cast<std::size_t>(ia)],
                                                            swa[static_cast<std::size_t>(ib)],
                                                            policy));
                srep.response_time_tests.push_back(
                    compare_paired(ia, ib, rt[static_cast<std::size_t>(ia)],
                                   rt[static_cast<std::size_t>(ib)], policy));
            }
    }

    // Slip averaged across scenarios, per subject and interface.
    std::array<std::vector<std::optional<double>>, 3> slip_across;
    for (int iface = 0; iface < 3; ++iface) {
        for (std::size_t s = 0; s < n_subjects; ++s) {
            double sum = 0.0;
            int k = 0;
            for (int sc = 0; sc < 2; ++sc) {
                const auto& v =
                    slip_cells[static_cast<std::size_t>(sc)][static_cast<std::size_t>(iface)][s];
                if (v) {
                    sum += *v;
                    ++k;
                }
            }
            slip_across[static_cast<std::size_t>(iface)].push_back(
                k > 0 ? std::optional<double>(sum / k) : std::nullopt);
        }
        for (const auto& v : slip_across[static_cast<std::size_t>(iface)])
            if (v) rep.slip_by_interface[static_cast<std::size_t>(iface)].push_back(*v);
        rep.slip_boxplot[static_cast<std::size_t>(iface)] =
            report_detail::five_number(rep.slip_by_interface[static_cast<std::size_t>(iface)]);
    }
    for (int ia = 0; ia < 3; ++ia)
        for (int ib = ia + 1; ib < 3; ++ib)
            rep.slip_tests.push_back(compare_paired(ia, ib, slip_across[static_cast<std::size_t>(ia)],
                                                    slip_across[static_cast<std::size_t>(ib)],
                                                    policy));

    // Crosswalk effect: per-subject slip averaged across the three interfaces,
    // one pair of values per subject.
    {
        std::vector<std::optional<double>> with, without;
        for (std::size_t s = 0; s < n_subjects; ++s) {
            for (int sc = 0; sc < 2; ++sc) {
                double sum = 0.0;
                int k = 0;
                for (int iface = 0; iface < 3; ++iface) {
                    const auto& v =
                        slip_cells[static_cast<std::size_t>(sc)][static_cast<std::size_t>(iface)][s];
                    if (v) {
                        sum += *v;
                        ++k;
                    }
                }
                (sc == 0 ? with : without)
                    .push_back(k > 0 ? std::optional<double>(sum / k) : std::nullopt);
            }
        }
        PairwiseComparison pc = compare_paired(0, 1, with, without, policy);
        if (pc.result)
            rep.crosswalk_slip_test = pc.result;
        else
            rep.crosswalk_slip_error = pc.error;
    }

    // Reference significance structure (armband vs takeover significant,
    // armband vs wheel and crosswalk effect not): runs that miss it carry the
    // deviation in their manifest.
    for (const auto& pc : rep.slip_tests) {
        if (!pc.result) continue;
        const double p = pc.result->chosen.p_value;
        if (pc.a == 0 && pc.b == 2 && p >= cfg.alpha)
            rep.notes.push_back("deviation: armband-vs-takeover slip comparison not significant (p=" +
                                std::to_string(p) + ") under this calibration/seed");
        if (pc.a == 0 && pc.b == 1 && p < cfg.alpha)
            rep.notes.push_back("deviation: armband-vs-wheel slip comparison significant (p=" +
                                std::to_string(p) + ") under this calibration/seed");
    }
    if (rep.crosswalk_slip_test && rep.crosswalk_slip_test->chosen.p_value < cfg.alpha)
        rep.notes.push_back("deviation: crosswalk effect on slip significant (p=" +
                            std::to_string(rep.crosswalk_slip_test->chosen.p_value) +
                            ") under this calibration/seed");

    for (const std::string& f : run.failures) rep.notes.push_back("FAILED " + f);
    return rep;
}

// ---------------------------------------------------------------------------
// Output emission
// ---------------------------------------------------------------------------

namespace report_detail {

inline std::string fmt_g(double v) {
    if (std::isnan(v)) return "";
    if (v == 0.0) v = 0.0;  // collapse negative zero
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits) {
    if (std::isnan(v)) return "-";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' endings on every platform
    if (!out) throw IoError("cannot open output file '" + path.string() + "'");
    return out;
}

/// Footnote marker in the style of the published tables: the symbol count
/// encodes which test produced the p-value.
inline const char* test_marker(TestName t) {
    switch (t) {
        case TestName::t_equal_var: return "#";
        case TestName::t_welch: return "##";
        case TestName::wilcoxon_signed_rank: return "###";
        default: return "";
    }
}

inline std::string comparison_cell(const PairwiseComparison& pc, double alpha) {
    if (!pc.result) return std::string("n/a (") + pc.error + ")";
    const StatTestResult& r = pc.result->chosen;
    std::string cell = fmt_fixed(r.p_value, 3);
    if (r.p_value < alpha) cell += "*";
    cell += " ";
    cell += test_marker(r.test_name);
    return cell;
}

}  // namespace report_detail

inline std::filesystem::path trace_filename(int subject_id, int condition_id) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "trial_s%02d_c%d.csv", subject_id, condition_id);
    return buf;
}

inline void write_trace_csv(const TrialTrace& tr, const std::filesystem::path& path) {
    using report_detail::fmt_g;
    auto out = report_detail::open_out(path);
    out << "t_s,x_m,y_m,yaw_rad,vy_mps,yaw_rate_radps,beta_deg,a_y_mps2,swa_deg,"
           "assist_torque_nm,driver_torque_nm,ped_x_m,ped_y_m,ped_distance_m,ped_visible,phase\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out << fmt_g(tr.t[i]) << ',' << fmt_g(tr.x[i]) << ',' << fmt_g(tr.y[i]) << ','
            << fmt_g(tr.yaw[i]) << ',' << fmt_g(tr.vy[i]) << ',' << fmt_g(tr.yaw_rate[i]) << ','
            << fmt_g(tr.beta_deg[i]) << ',' << fmt_g(tr.a_y[i]) << ',' << fmt_g(tr.swa_deg[i])
            << ',' << fmt_g(tr.assist_torque[i]) << ',' << fmt_g(tr.driver_torque[i]) << ','
            << fmt_g(tr.ped_x[i]) << ',' << fmt_g(tr.ped_y[i]) << ',' << fmt_g(tr.ped_distance[i])
            << ',' << static_cast<int>(tr.ped_visible[i]) << ',' << to_string(tr.phase[i]) << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Writes every artifact of one experiment run into out_dir: per-trial traces,
/// the metrics table, the two markdown tables, the three figure-data files,
/// the resolved config and a manifest. Output bytes are a pure function of
/// (seed, config) except for the manifest's generated_at line.
inline void emit_outputs(const ExperimentRun& run, const ExperimentReport& rep,
                         const HarnessConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    using report_detail::comparison_cell;
    using report_detail::fmt_fixed;
    using report_detail::fmt_g;
    using report_detail::open_out;

    std::error_code ec;
    fs::create_directories(out_dir / "traces", ec);
    if (ec) throw IoError("cannot create output directory '" + (out_dir / "traces").string() + "'");

    for (std::size_t i = 0; i < run.keys.size(); ++i) {
        if (run.traces[i].t.empty()) continue;
        const TrialKey& key = run.keys[i];
        write_trace_csv(run.traces[i],
                        out_dir / "traces" /
                            trace_filename(run.plan.subjects[static_cast<std::size_t>(
                                                                 key.subject_index)]
                                               .subject_id,
                                           key.condition_id));
    }

    {
        auto out = open_out(out_dir / "metrics.csv");
        out << "subject,condition,interface,crosswalk,pedestrian_present,order_slot,"
               "avg_abs_slip_deg,min_distance_m,max_swa_deg,response_time_s,collided\n";
        for (std::size_t i = 0; i < run.keys.size(); ++i) {
            const TrialKey& key = run.keys[i];
            const ConditionSpec& cond = condition_by_id(key.condition_id);
            const TrialMetrics& m = run.metrics[i];
            out << run.plan.subjects[static_cast<std::size_t>(key.subject_index)].subject_id << ','
                << key.condition_id << ',' << to_string(cond.interface_mode) << ','
                << (cond.crosswalk ? 1 : 0) << ',' << (cond.pedestrian_present ? 1 : 0) << ','
                << key.order_slot + 1 << ',' << (m.avg_abs_slip ? fmt_g(*m.avg_abs_slip) : "")
                << ',' << (m.min_distance ? fmt_g(*m.min_distance) : "") << ','
                << fmt_g(m.max_swa) << ',' << (m.response_time ? fmt_g(*m.response_time) : "")
                << ',' << (m.collided ? 1 : 0) << '\n';
        }
    }

    {
        auto out = open_out(out_dir / "table2.md");
        out << "# Interface comparison (mean and SD over subjects)\n\n";
        out << "| Performance parameter | Interface | Pedestrian at crosswalk | Pedestrian not at "
               "crosswalk |\n";
        out << "|---|---|---|---|\n";
        struct Row {
            const char* label;
            const std::array<MetricSummary, 3> ScenarioReport::* member;
            int digits;
        };
        const Row rows[] = {
            {"Minimum distance to pedestrian (m)", &ScenarioReport::min_distance, 2},
            {"Maximum steering wheel angle (deg)", &ScenarioReport::max_swa, 2},
            {"Response time of steering wheel angle (s)", &ScenarioReport::response_time, 2},
            {"Average absolute slip angle (deg)", &ScenarioReport::slip, 3},
        };
        for (const Row& row : rows) {
            for (int iface = 0; iface < 3; ++iface) {
                const MetricSummary& a =
                    (rep.scenarios[0].*row.member)[static_cast<std::size_t>(iface)];
                const MetricSummary& b =
                    (rep.scenarios[1].*row.member)[static_cast<std::size_t>(iface)];
                out << "| " << (iface == 0 ? row.label : "") << " | " << interface_display(iface)
                    << " | " << fmt_fixed(a.mean, row.digits) << " SD " << fmt_fixed(a.sd, row.digits)
                    << " (n=" << a.n << ") | " << fmt_fixed(b.mean, row.digits) << " SD "
                    << fmt_fixed(b.sd, row.digits) << " (n=" << b.n << ") |\n";
            }
        }
    }

    {
        auto out = open_out(out_dir / "table3.md");
        out << "# Pairwise statistical comparisons\n\n";
        out << "p-values are two-sided; `*` marks p < " << fmt_fixed(cfg.alpha, 2)
            << ". Footnotes: `#` t-test (equal variances), `##` t-test (unequal variances, Welch), "
               "`###` Wilcoxon signed-rank.\n";
        const char* scenario_names[2] = {"Pedestrian at crosswalk", "Pedestrian not at crosswalk"};
        struct Block {
            const char* label;
            const std::vector<PairwiseComparison> ScenarioReport::* member;
        };
        const Block blocks[] = {
            {"Minimum distance to pedestrian (m)", &ScenarioReport::min_distance_tests},
            {"Maximum steering wheel angle (deg)", &ScenarioReport::max_swa_tests},
            {"Response time of steering wheel angle (s)", &ScenarioReport::response_time_tests},
        };
        for (int sc = 0; sc < 2; ++sc) {
            out << "\n## " << scenario_names[sc] << "\n\n";
            out << "| Performance parameter | Pair | p-value |\n|---|---|---|\n";
            for (const Block& block : blocks) {
                const auto& tests = rep.scenarios[static_cast<std::size_t>(sc)].*block.member;
                for (std::size_t k = 0; k < tests.size(); ++k)
                    out << "| " << (k == 0 ? block.label : "") << " | "
                        << interface_display(tests[k].a) << " vs " << interface_display(tests[k].b)
                        << " | " << comparison_cell(tests[k], cfg.alpha) << " |\n";
            }
        }
        out << "\n## Average absolute slip angle, both scenarios pooled per subject\n\n";
        out << "| Pair | p-value |\n|---|---|\n";
        for (const auto& pc : rep.slip_tests)
            out << "| " << interface_display(pc.a) << " vs " << interface_display(pc.b) << " | "
                << comparison_cell(pc, cfg.alpha) << " |\n";
        out << "\nCrosswalk vs no crosswalk (per-subject slip averaged across interfaces): ";
        if (rep.crosswalk_slip_test) {
            const StatTestResult& r = rep.crosswalk_slip_test->chosen;
            out << "p = " << fmt_fixed(r.p_value, 3) << " (" << to_string(r.test_name) << ")"
                << (r.p_value < cfg.alpha ? ", significant" : ", not significant") << ".\n";
        } else {
            out << "n/a (" << rep.crosswalk_slip_error << ").\n";
        }
    }

    {
        auto out = open_out(out_dir / "fig4_boxplot.csv");
        out << "interface,n,min,q1,median,q3,max\n";
        for (int iface = 0; iface < 3; ++iface) {
            const FiveNumber& f = rep.slip_boxplot[static_cast<std::size_t>(iface)];
            out << to_string(static_cast<Interface>(iface)) << ',' << f.n << ',' << fmt_g(f.min)
                << ',' << fmt_g(f.q1) << ',' << fmt_g(f.median) << ',' << fmt_g(f.q3) << ','
                << fmt_g(f.max) << '\n';
        }
    }

    const char* scenario_keys[2] = {"crosswalk", "no_crosswalk"};
    {
        auto out = open_out(out_dir / "fig5_trajectories.csv");
        out << "scenario,interface,t_s,mean_x_m,mean_y_m\n";
        for (int sc = 0; sc < 2; ++sc)
            for (int iface = 0; iface < 3; ++iface) {
                const auto& sx =
                    rep.scenarios[static_cast<std::size_t>(sc)].mean_path_x[static_cast<std::size_t>(iface)];
                const auto& sy =
                    rep.scenarios[static_cast<std::size_t>(sc)].mean_path_y[static_cast<std::size_t>(iface)];
                for (std::size_t i = 0; i < sx.t.size(); ++i)
                    out << scenario_keys[sc] << ','
                        << to_string(static_cast<Interface>(iface)) << ',' << fmt_g(sx.t[i]) << ','
                        << fmt_g(sx.mean[i]) << ',' << fmt_g(sy.mean[i]) << '\n';
            }
    }

    {
        auto out = open_out(out_dir / "fig6_lateral_accel.csv");
        out << "scenario,interface,t_s,mean_ay_mps2\n";
        for (int sc = 0; sc < 2; ++sc)
            for (int iface = 0; iface < 3; ++iface) {
                const auto& series =
                    rep.scenarios[static_cast<std::size_t>(sc)]
                        .mean_lat_accel[static_cast<std::size_t>(iface)];
                for (std::size_t i = 0; i < series.t.size(); ++i) {
                    if (series.t[i] < 0.0) continue;  // event alignment: t starts at 0
                    out << scenario_keys[sc] << ',' << to_string(static_cast<Interface>(iface))
                        << ',' << fmt_g(series.t[i]) << ',' << fmt_g(series.mean[i]) << '\n';
                }
            }
    }

    {
        // Resolved config: carries the concrete subject set, so rerunning
        // with this file reproduces the exact population.
        HarnessConfig resolved = cfg;
        resolved.agents.subjects = run.plan.subjects;
        auto out = open_out(out_dir / "config.json");
        out << nlohmann::json(resolved).dump(2) << '\n';
    }

    {
        nlohmann::json manifest;
        manifest["config_hash"] = config_hash(cfg);
        manifest["master_seed"] = run.plan.master_seed;
        manifest["response_epoch"] = to_string(cfg.epoch);
        manifest["subjects"] = run.plan.subjects.size();
        manifest["trials_total"] = run.keys.size();
        manifest["trials_failed"] = run.failures.size();
        manifest["failures"] = run.failures;
        manifest["notes"] = rep.notes;
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        manifest["generated_at"] = stamp;
        auto out = open_out(out_dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }
}

}  // namespace evasim
