#!/usr/bin/env python3
"""Regenerates stat_fixtures.hpp.

Reference values come from scipy (AS R94 Shapiro-Wilk, t distributions,
F distribution). Run from the repository root:

    python3 tests/fixtures/gen_stat_fixtures.py > tests/fixtures/stat_fixtures.hpp
"""
import numpy as np
from scipy import stats

SEED = 20250810
N = 12


def fmt(x):
    return repr(float(x))


def emit_array(name, rows, cols):
    print(f"inline constexpr double {name}[{len(rows)}][{cols}] = {{")
    for r in rows:
        print("    {" + ", ".join(fmt(v) for v in r) + "},")
    print("};")
    print()


def main():
    rng = np.random.default_rng(SEED)

    # --- Shapiro-Wilk: 20 fixtures of n=12 from a mix of shapes ---
    samples = []
    for k in range(20):
        family = k % 5
        if family == 0:
            x = rng.normal(0.0, 1.0, N)
        elif family == 1:
            x = rng.uniform(-1.0, 1.0, N)
        elif family == 2:
            x = rng.lognormal(0.0, 0.8, N)
        elif family == 3:
            x = rng.standard_t(2, N)
        else:
            x = np.concatenate([rng.normal(-2, 0.3, N // 2), rng.normal(2, 0.3, N - N // 2)])
        samples.append(np.round(x, 6))

    print("// Generated by gen_stat_fixtures.py -- do not edit by hand.")
    print("// Reference values: scipy.stats (shapiro, t, f), seed", SEED)
    print("#pragma once")
    print()
    print("namespace evasim::test_fixtures {")
    print()
    print(f"inline constexpr int kShapiroN = {N};")
    rows = []
    for x in samples:
        w, p = stats.shapiro(x)
        rows.append(list(x) + [w, p])
    emit_array("kShapiroFixtures", rows, N + 2)  # columns: x[0..11], W, p

    # Spec-style ramp 1..12
    w, p = stats.shapiro(np.arange(1.0, 13.0))
    print(f"inline constexpr double kShapiroRampW = {fmt(w)};")
    print(f"inline constexpr double kShapiroRampP = {fmt(p)};")
    print()

    # --- t-tests: 6 paired fixtures of n=12 ---
    trows = []
    for k in range(6):
        x = np.round(rng.normal(0.0, 1.0 + 0.5 * k, N), 6)
        y = np.round(rng.normal(0.3 * k - 0.5, 1.0, N), 6)
        te = stats.ttest_ind(x, y, equal_var=True)
        tw = stats.ttest_ind(x, y, equal_var=False)
        # Welch-Satterthwaite df
        v1, v2 = x.var(ddof=1) / N, y.var(ddof=1) / N
        df_w = (v1 + v2) ** 2 / (v1**2 / (N - 1) + v2**2 / (N - 1))
        f = max(x.var(ddof=1), y.var(ddof=1)) / min(x.var(ddof=1), y.var(ddof=1))
        pf = min(1.0, 2.0 * stats.f.sf(f, N - 1, N - 1))
        trows.append(list(x) + list(y) + [te.statistic, te.pvalue, tw.statistic, df_w, tw.pvalue, f, pf])
    # columns: x[12], y[12], t_eq, p_eq, t_welch, df_welch, p_welch, F, p_F
    emit_array("kTTestFixtures", trows, 2 * N + 7)

    # Analytic F case: variance ratio 4 with n1=n2=12
    print(f"inline constexpr double kFRatio4P = {fmt(min(1.0, 2.0 * stats.f.sf(4.0, 11, 11)))};")
    print()
    print("}  // namespace evasim::test_fixtures")


if __name__ == "__main__":
    main()
