// Command-line front end: run the full experiment, run a single trial,
// print counterbalancing squares, compare two CSV columns, or lint a config.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evasim/config.hpp"
#include "evasim/harness.hpp"
#include "evasim/report.hpp"

namespace {

using namespace evasim;

struct CommonOptions {
    std::string config_path;
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    int jobs = 1;
    std::string epoch;
};

HarnessConfig resolve_config(const CommonOptions& opts) {
    HarnessConfig cfg;
    if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
    if (!opts.epoch.empty()) cfg.epoch = response_epoch_from_string(opts.epoch);
    cfg.validate();
    return cfg;
}

void print_run_summary(const ExperimentRun& run, const ExperimentReport& rep,
                       const HarnessConfig& cfg) {
    const char* scenario_names[2] = {"crosswalk", "no crosswalk"};
    std::printf("trials: %zu (%zu failed)\n", run.keys.size(), run.failures.size());
    for (int sc = 0; sc < 2; ++sc) {
        const ScenarioReport& s = rep.scenarios[sc];
        std::printf("[%s]\n", scenario_names[sc]);
        for (int i = 0; i < 3; ++i) {
            std::printf("  %-16s min_dist %5.2f SD %4.2f m   max_swa %6.2f SD %5.2f deg",
                        interface_display(i), s.min_distance[i].mean, s.min_distance[i].sd,
                        s.max_swa[i].mean, s.max_swa[i].sd);
            if (s.response_time[i].n > 0)
                std::printf("   resp %5.2f SD %4.2f s (n=%d)", s.response_time[i].mean,
                            s.response_time[i].sd, s.response_time[i].n);
            std::printf("\n");
        }
    }
    std::printf("slip comparisons (both scenarios pooled):\n");
    for (const auto& pc : rep.slip_tests) {
        if (!pc.result) {
            std::printf("  %s vs %s: n/a (%s)\n", interface_display(pc.a), interface_display(pc.b),
                        pc.error.c_str());
            continue;
        }
        const auto& r = pc.result->chosen;
        std::printf("  %-16s vs %-16s p=%.4f (%s)%s\n", interface_display(pc.a),
                    interface_display(pc.b), r.p_value, to_string(r.test_name),
                    r.p_value < cfg.alpha ? "  significant" : "");
    }
    if (rep.crosswalk_slip_test) {
        const auto& r = rep.crosswalk_slip_test->chosen;
        std::printf("crosswalk effect on slip: p=%.4f (%s)%s\n", r.p_value, to_string(r.test_name),
                    r.p_value < cfg.alpha ? "  significant" : "  not significant");
    }
}

int cmd_run(const CommonOptions& opts) {
    const HarnessConfig cfg = resolve_config(opts);
    const ExperimentPlan plan = build_plan(opts.seed, cfg.agents);
    const ExperimentRun run = run_experiment_trials(plan, cfg, opts.jobs);
    const ExperimentReport rep = build_report(run, cfg);
    emit_outputs(run, rep, cfg, opts.out_dir);
    print_run_summary(run, rep, cfg);
    std::printf("outputs written to %s\n", opts.out_dir.c_str());
    if (!run.failures.empty()) {
        for (const auto& f : run.failures) std::fprintf(stderr, "FAILED %s\n", f.c_str());
        return 3;
    }
    return 0;
}

int cmd_trial(const CommonOptions& opts, int condition_id, int subject_number) {
    const HarnessConfig cfg = resolve_config(opts);
    const ExperimentPlan plan = build_plan(opts.seed, cfg.agents);
    if (subject_number < 1 || subject_number > static_cast<int>(plan.subjects.size()))
        throw ConfigError("subject must be 1.." + std::to_string(plan.subjects.size()));
    const SubjectProfile& profile = plan.subjects[static_cast<std::size_t>(subject_number - 1)];
    const ConditionSpec& cond = condition_by_id(condition_id);

    const TrialTrace trace = run_trial(cond, profile, cfg);
    const double epoch =
        cfg.epoch == ResponseEpoch::Spawn ? 0.0 : (trace.t.empty() ? 0.0 : trace.t.front());
    const TrialMetrics m = compute_trial_metrics(trace, cfg.response_threshold_deg, epoch);

    std::filesystem::create_directories(opts.out_dir);
    const auto path = std::filesystem::path(opts.out_dir) / trace_filename(profile.subject_id, condition_id);
    write_trace_csv(trace, path);

    std::printf("condition %d (%s, crosswalk=%d, pedestrian=%d), subject %d\n", condition_id,
                to_string(cond.interface_mode), cond.crosswalk ? 1 : 0,
                cond.pedestrian_present ? 1 : 0, profile.subject_id);
    std::printf("samples: %zu at %.1f Hz\n", trace.size(), 1.0 / trace.dt);
    std::printf("max |swa|: %.2f deg\n", m.max_swa);
    if (m.avg_abs_slip) std::printf("avg |slip| (filtered): %.4f deg\n", *m.avg_abs_slip);
    else std::printf("avg |slip|: undefined (all samples inside +-0.1 deg)\n");
    if (m.min_distance) std::printf("min distance to pedestrian: %.3f m%s\n", *m.min_distance,
                                    m.collided ? "  COLLISION" : "");
    if (m.response_time) std::printf("response time (epoch %s): %.3f s\n", to_string(cfg.epoch),
                                     *m.response_time);
    std::printf("trace written to %s\n", path.string().c_str());
    return 0;
}

int cmd_latin(int n) {
    const auto square = latin_square(n);
    for (const auto& row : square) {
        for (std::size_t c = 0; c < row.size(); ++c)
            std::printf("%s%d", c == 0 ? "" : " ", row[c]);
        std::printf("\n");
    }
    return 0;
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        bool ok = true;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            const std::string field =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str()) {
                ok = false;  // header or non-numeric line
                break;
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (ok && !row.empty()) rows.push_back(row);
    }
    return rows;
}

int cmd_stats(const std::string& path, int col_a, int col_b, double alpha) {
    const auto rows = read_csv_columns(path);
    Sample a{{}, "column " + std::to_string(col_a)};
    Sample b{{}, "column " + std::to_string(col_b)};
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) <= std::max(col_a, col_b))
            throw ConfigError("CSV row with fewer than " + std::to_string(std::max(col_a, col_b) + 1) +
                              " numeric columns in '" + path + "'");
        a.values.push_back(row[static_cast<std::size_t>(col_a)]);
        b.values.push_back(row[static_cast<std::size_t>(col_b)]);
    }
    if (a.values.empty()) throw ConfigError("no numeric rows in '" + path + "'");

    const GroupComparison cmp = compare_groups(a, b, ComparisonPolicy{alpha});
    std::printf("n = %d pairs\n", a.n());
    std::printf("shapiro-wilk %s: W=%.5f p=%.5f\n", a.label.c_str(), cmp.shapiro_x.statistic,
                cmp.shapiro_x.p_value);
    std::printf("shapiro-wilk %s: W=%.5f p=%.5f\n", b.label.c_str(), cmp.shapiro_y.statistic,
                cmp.shapiro_y.p_value);
    if (cmp.variance_test)
        std::printf("f-test: F=%.5f p=%.5f\n", cmp.variance_test->statistic,
                    cmp.variance_test->p_value);
    std::printf("selected test: %s%s\n", to_string(cmp.chosen.test_name),
                cmp.chosen.exact ? " (exact)" : "");
    std::printf("statistic=%.6f p=%.6f -> %s at alpha=%.2f\n", cmp.chosen.statistic,
                cmp.chosen.p_value, cmp.significant(alpha) ? "significant" : "not significant",
                alpha);
    return 0;
}

int cmd_validate(const CommonOptions& opts) {
    if (opts.config_path.empty()) {
        HarnessConfig{}.validate();
        std::printf("built-in defaults OK\n");
        return 0;
    }
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("cannot open config file '" + opts.config_path + "'");
    nlohmann::json j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    for (const std::string& w : lint_config_keys(j)) std::printf("warning: %s\n", w.c_str());
    HarnessConfig cfg;
    j.get_to(cfg);
    cfg.validate();
    std::printf("configuration OK (hash %s)\n", config_hash(cfg).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shared-control pedestrian collision avoidance simulator"};
    app.require_subcommand(1);

    CommonOptions opts;
    app.add_option("--config", opts.config_path, "JSON config file (comments allowed)");
    app.add_option("--seed", opts.seed, "master seed for the subject population");
    app.add_option("--out", opts.out_dir, "output directory");
    app.add_option("--jobs", opts.jobs, "parallel trial workers");
    app.add_option("--epoch", opts.epoch, "response-time epoch: spawn | trial-start")
        ->check(CLI::IsMember({"spawn", "trial-start"}));

    auto* run = app.add_subcommand("run", "run the full 12-subject, 7-condition experiment");
    run->fallthrough();

    int condition_id = 1, subject_number = 1;
    auto* trial = app.add_subcommand("trial", "run a single condition x subject trial");
    trial->fallthrough();
    trial->add_option("--condition", condition_id, "condition id 1..7")->required();
    trial->add_option("--subject", subject_number, "subject number 1..N")->required();

    int latin_n = 6;
    auto* latin = app.add_subcommand("latin", "print the n x n counterbalancing square");
    latin->fallthrough();
    latin->add_option("--n", latin_n, "square size");

    std::string stats_file;
    int col_a = 0, col_b = 1;
    double alpha = 0.05;
    auto* stats = app.add_subcommand("stats", "compare two numeric CSV columns (paired)");
    stats->fallthrough();
    stats->add_option("--file", stats_file, "CSV file")->required();
    stats->add_option("--col-a", col_a, "first column index (0-based)");
    stats->add_option("--col-b", col_b, "second column index (0-based)");
    stats->add_option("--alpha", alpha, "significance level");

    auto* validate = app.add_subcommand("validate", "lint and validate the config file");
    validate->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // bad usage is a configuration error
    }

    try {
        if (run->parsed()) return cmd_run(opts);
        if (trial->parsed()) return cmd_trial(opts, condition_id, subject_number);
        if (latin->parsed()) return cmd_latin(latin_n);
        if (stats->parsed()) return cmd_stats(stats_file, col_a, col_b, alpha);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "simulation divergence: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
