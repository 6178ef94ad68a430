#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace evasim {

struct Sample {
    std::vector<double> values;
    std::string label;

    int n() const { return static_cast<int>(values.size()); }

    double mean() const {
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }

    /// Unbiased sample variance (n-1 denominator).
    double variance() const {
        const double m = mean();
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        return ss / static_cast<double>(values.size() - 1);
    }
};

enum class TestName { shapiro_wilk, wilcoxon_signed_rank, f_test, t_equal_var, t_welch };

inline const char* to_string(TestName t) {
    switch (t) {
        case TestName::shapiro_wilk: return "shapiro_wilk";
        case TestName::wilcoxon_signed_rank: return "wilcoxon_signed_rank";
        case TestName::f_test: return "f_test";
        case TestName::t_equal_var: return "t_equal_var";
        case TestName::t_welch: return "t_welch";
    }
    return "?";
}

struct StatTestResult {
    TestName test_name = TestName::shapiro_wilk;
    double statistic = 0.0;
    double p_value = 1.0;
    bool exact = false;      // exact null distribution vs approximation
    int n = 0;               // effective sample size
    bool degenerate = false;  // e.g. all paired differences zero
};

struct ComparisonPolicy {
    double alpha = 0.05;
    // Parametric path requires BOTH groups to pass Shapiro-Wilk at alpha.
};

namespace stats_detail {

inline double upper_normal_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Polynomial c[0] + c[1]*x + ... evaluated by Horner's rule.
template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double acc = c[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) acc = acc * x + c[i];
    return acc;
}

inline double sign_of(long long v) { return v >= 0 ? 1.0 : -1.0; }

}  // namespace stats_detail

/// Shapiro-Wilk W test for normality, AS R94 (Royston 1995), complete samples
/// of 3..50 values. Small p rejects normality.
inline StatTestResult shapiro_wilk(const Sample& sample) {
    using namespace stats_detail;
    const int n = sample.n();
    if (n < 3 || n > 50)
        throw std::invalid_argument("shapiro_wilk: unsupported sample size " + std::to_string(n) +
                                    " (need 3..50)");

    std::vector<double> x = sample.values;
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19)) throw std::invalid_argument("shapiro_wilk: zero variance sample");

    // W-statistic coefficients.
    const int nn2 = n / 2;
    std::vector<double> a(static_cast<std::size_t>(nn2));
    const double an = static_cast<double>(n);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
        static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        const boost::math::normal_distribution<double> unit_normal;
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (int i = 1; i <= nn2; ++i) {
            a[i - 1] = boost::math::quantile(unit_normal, (i - 0.375) / an25);
            summ2 += a[i - 1] * a[i - 1];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - a[0] / ssumm2;
        int first_unscaled;
        double fac;
        if (n > 5) {
            first_unscaled = 2;
            const double a2 = -a[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
        } else {
            first_unscaled = 1;
            fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (int i = first_unscaled; i < nn2; ++i) a[i] = -a[i] / fac;
    }

    // W as the squared correlation between data and coefficients.
    double sx = x[0] / range;
    double sa = -a[0];
    {
        long long j = n - 2;
        for (int i = 1; i < n; ++i, --j) {
            sx += x[static_cast<std::size_t>(i)] / range;
            if (i != j) sa += sign_of(i - j) * a[static_cast<std::size_t>(std::min<long long>(i, j))];
        }
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    {
        long long j = n - 1;
        for (int i = 0; i < n; ++i, --j) {
            const double asa =
                i != j ? sign_of(i - j) * a[static_cast<std::size_t>(std::min<long long>(i, j))] - sa
                       : -sa;
            const double xsx = x[static_cast<std::size_t>(i)] / range - sx;
            ssa += asa * asa;
            ssx += xsx * xsx;
            sax += asa * xsx;
        }
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    const double w = 1.0 - w1;

    // Significance level.
    double pw;
    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;   // 6/pi
        constexpr double stqr = 1.04719755119660;  // pi/3
        pw = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    } else {
        static constexpr double c3[4] = {0.5440, -0.39978, 0.025054, -6.714e-4};
        static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
        static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
        static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};
        static constexpr double g[2] = {-2.273, 0.459};
        const double y0 = std::log(w1);
        if (n <= 11) {
            const double gamma = poly(g, an);
            if (y0 >= gamma) {
                pw = 1e-99;
            } else {
                const double y = -std::log(gamma - y0);
                pw = upper_normal_tail((y - poly(c3, an)) / std::exp(poly(c4, an)));
            }
        } else {
            const double lx = std::log(an);
            pw = upper_normal_tail((y0 - poly(c5, lx)) / std::exp(poly(c6, lx)));
        }
    }

    return {TestName::shapiro_wilk, w, pw, false, n, false};
}

namespace stats_detail {

/// Midranks of |d|, doubled so they are always integral (a tie group at
/// 0-based positions [i..j] gets doubled rank i+j+2).
inline std::vector<long long> doubled_ranks_of_abs(const std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(d[i]);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag[a] < mag[b]; });

    std::vector<long long> doubled(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && mag[order[j + 1]] == mag[order[i]]) ++j;
        const long long dr = static_cast<long long>(i + j) + 2;  // 2 * midrank
        for (std::size_t k = i; k <= j; ++k) doubled[order[k]] = dr;
        i = j + 1;
    }
    return doubled;
}

/// Exact null distribution of the doubled positive-rank sum: counts[s] is the
/// number of the 2^n equally likely sign assignments with sum s.
inline std::vector<std::uint64_t> signed_rank_counts(const std::vector<long long>& doubled) {
    long long total = 0;
    for (long long r : doubled) total += r;
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
    counts[0] = 1;
    long long reach = 0;
    for (long long r : doubled) {
        reach += r;
        for (long long s = reach; s >= r; --s)
            counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - r)];
    }
    return counts;
}

}  // namespace stats_detail

/// Paired Wilcoxon signed-rank test, two-sided. Zero differences are dropped;
/// tied magnitudes share midranks. Up to 25 effective pairs the p-value is
/// exact over all 2^n sign assignments; beyond that a normal approximation
/// with continuity and tie corrections is used. The statistic is W+, the sum
/// of ranks of positive differences.
inline StatTestResult wilcoxon_signed_rank(const Sample& x, const Sample& y) {
    if (x.n() != y.n())
        throw std::invalid_argument("wilcoxon_signed_rank: paired samples must have equal length");

    std::vector<double> d;
    d.reserve(x.values.size());
    for (std::size_t i = 0; i < x.values.size(); ++i) {
        const double di = x.values[i] - y.values[i];
        if (di != 0.0) d.push_back(di);
    }
    const int n = static_cast<int>(d.size());
    if (n == 0) return {TestName::wilcoxon_signed_rank, 0.0, 1.0, true, 0, true};

    const auto doubled = stats_detail::doubled_ranks_of_abs(d);
    long long w2_plus = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.0) w2_plus += doubled[i];

    StatTestResult res;
    res.test_name = TestName::wilcoxon_signed_rank;
    res.statistic = static_cast<double>(w2_plus) / 2.0;
    res.n = n;

    if (n <= 25) {
        const auto counts = stats_detail::signed_rank_counts(doubled);
        std::uint64_t count_le = 0, count_ge = 0;
        for (long long s = 0; s < static_cast<long long>(counts.size()); ++s) {
            if (s <= w2_plus) count_le += counts[static_cast<std::size_t>(s)];
            if (s >= w2_plus) count_ge += counts[static_cast<std::size_t>(s)];
        }
        const double tail = static_cast<double>(std::min(count_le, count_ge));
        res.p_value = std::min(1.0, 2.0 * tail / static_cast<double>(std::uint64_t{1} << n));
        res.exact = true;
    } else {
        // Var(W+) = sum(rank_i^2)/4 (absorbs the tie correction).
        const double w_plus = res.statistic;
        const double mu = static_cast<double>(n) * (n + 1) / 4.0;
        double var = 0.0;
        for (long long r : doubled) var += static_cast<double>(r) * static_cast<double>(r);
        var /= 16.0;
        if (w_plus == mu || var == 0.0) {
            res.p_value = 1.0;
        } else {
            const double cc = w_plus > mu ? -0.5 : 0.5;  // continuity correction
            const double z = (w_plus - mu + cc) / std::sqrt(var);
            res.p_value = std::min(1.0, 2.0 * stats_detail::upper_normal_tail(std::abs(z)));
        }
        res.exact = false;
    }
    return res;
}

/// Two-sided F-test for equal variances: F is the larger sample variance over
/// the smaller, so swapping the samples changes nothing.
inline StatTestResult f_test(const Sample& x, const Sample& y) {
    if (x.n() < 2 || y.n() < 2) throw std::invalid_argument("f_test: need n >= 2 in both samples");
    const double vx = x.variance();
    const double vy = y.variance();
    if (!(vx > 0.0) || !(vy > 0.0)) throw std::invalid_argument("f_test: zero variance sample");

    const bool x_larger = vx >= vy;
    const double f = x_larger ? vx / vy : vy / vx;
    const double d1 = static_cast<double>(x_larger ? x.n() : y.n()) - 1.0;
    const double d2 = static_cast<double>(x_larger ? y.n() : x.n()) - 1.0;
    const boost::math::fisher_f_distribution<double> dist(d1, d2);
    const double p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, f)));
    return {TestName::f_test, f, p, false, x.n() + y.n(), false};
}

enum class TTestVariant { equal_var, welch };

/// Two-sided t-test. Unpaired by default: pooled-variance (Student) or
/// Welch-Satterthwaite depending on the variant. With paired=true the test is
/// the one-sample t on the differences (the variant is irrelevant then).
inline StatTestResult t_test(const Sample& x, const Sample& y, TTestVariant variant,
                             bool paired = false) {
    if (x.n() < 2 || y.n() < 2) throw std::invalid_argument("t_test: need n >= 2 in both samples");

    double t_stat, df;
    int n_eff;
    if (paired) {
        if (x.n() != y.n()) throw std::invalid_argument("t_test: paired samples must have equal length");
        Sample d;
        d.values.reserve(x.values.size());
        for (std::size_t i = 0; i < x.values.size(); ++i) d.values.push_back(x.values[i] - y.values[i]);
        const double var = d.variance();
        if (!(var > 0.0)) throw std::invalid_argument("t_test: zero variance of paired differences");
        t_stat = d.mean() / std::sqrt(var / d.n());
        df = d.n() - 1.0;
        n_eff = d.n();
    } else if (variant == TTestVariant::equal_var) {
        const double pooled = ((x.n() - 1) * x.variance() + (y.n() - 1) * y.variance()) /
                              static_cast<double>(x.n() + y.n() - 2);
        if (!(pooled > 0.0)) throw std::invalid_argument("t_test: zero pooled variance");
        t_stat = (x.mean() - y.mean()) / std::sqrt(pooled * (1.0 / x.n() + 1.0 / y.n()));
        df = x.n() + y.n() - 2.0;
        n_eff = x.n() + y.n();
    } else {
        const double sx = x.variance() / x.n();
        const double sy = y.variance() / y.n();
        if (!(sx + sy > 0.0)) throw std::invalid_argument("t_test: zero variance in both samples");
        t_stat = (x.mean() - y.mean()) / std::sqrt(sx + sy);
        df = (sx + sy) * (sx + sy) / (sx * sx / (x.n() - 1) + sy * sy / (y.n() - 1));
        n_eff = x.n() + y.n();
    }

    const boost::math::students_t_distribution<double> dist(df);
    const double p =
        t_stat == 0.0 ? 1.0 : std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t_stat))));
    return {variant == TTestVariant::equal_var && !paired ? TestName::t_equal_var : TestName::t_welch,
            t_stat, p, false, n_eff, false};
}

/// A pairwise comparison along with how the test was selected: Shapiro-Wilk on
/// both groups, then either the Wilcoxon path (any non-normal group) or an
/// F-test choosing between the equal-variance and Welch t-tests.
struct GroupComparison {
    StatTestResult chosen;
    StatTestResult shapiro_x, shapiro_y;
    std::optional<StatTestResult> variance_test;

    bool significant(double alpha) const { return chosen.p_value < alpha; }
};

inline GroupComparison compare_groups(const Sample& x, const Sample& y,
                                      const ComparisonPolicy& policy = {}) {
    if (x.n() != y.n())
        throw std::invalid_argument("compare_groups: paired samples must have equal length");
    if (!(policy.alpha > 0.0 && policy.alpha < 1.0))
        throw std::invalid_argument("compare_groups: alpha must be in (0,1)");

    GroupComparison out;
    out.shapiro_x = shapiro_wilk(x);
    out.shapiro_y = shapiro_wilk(y);
    const bool both_normal =
        out.shapiro_x.p_value >= policy.alpha && out.shapiro_y.p_value >= policy.alpha;
    if (!both_normal) {
        out.chosen = wilcoxon_signed_rank(x, y);
        return out;
    }
    out.variance_test = f_test(x, y);
    const TTestVariant variant =
        out.variance_test->p_value < policy.alpha ? TTestVariant::welch : TTestVariant::equal_var;
    out.chosen = t_test(x, y, variant);
    return out;
}

}  // namespace evasim
