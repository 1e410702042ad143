"""The eight headline behaviors, asserted at their stated tolerances.

Every test evaluates all of its sub-clauses, appends one
"CRITERION n: PASS/FAIL" line (with measured values) to the terminal
summary, and then asserts the combined verdict, so a single run reports
each criterion exactly once.
"""

import math
import time

import numpy as np
from conftest import ACCEPTANCE_LINES, random_hmc, random_unifilar_hmc

from qssp import (
    EstimatorConfig,
    blackwell_entropy_rate,
    build_msp,
    derive_measured_hmc,
    dimension_from_points,
    entropy_rate_unifilar,
    examples,
    msp_metrics,
    process_metrics,
    projective_basis,
    stationary_distribution,
    statistical_complexity_dimension,
    sweep_theta,
    truncation_series,
    unifilarity,
    usd_alpha_study,
)


def conclude(n, extra, checks):
    failed = [label for label, ok in checks if not ok]
    verdict = "PASS" if not failed else "FAIL"
    line = f"CRITERION {n}: {verdict} - {extra}"
    if failed:
        line += f" [failed: {'; '.join(failed)}]"
    ACCEPTANCE_LINES.append(line)
    assert not failed, line


def test_criterion_1_exact_metrics_of_orthogonal_golden_mean():
    src = examples.golden_mean_orthogonal()

    def pipeline():
        measured = derive_measured_hmc(src, projective_basis(0.0, 0.0))
        return msp_metrics(build_msp(measured))

    met = pipeline()  # warmup
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        met = pipeline()
        best = min(best, time.perf_counter() - t0)
    err_h = abs(met.hmu - 2.0 / 3.0)
    err_c = abs(met.cmu - 0.91830)
    checks = [
        (f"hmu err {err_h:.2e} <= 1e-12", err_h <= 1e-12),
        (f"cmu err {err_c:.2e} <= 1e-5", err_c <= 1e-5),
        (f"runtime {best * 1e3:.3f} ms < 1 ms", best < 1e-3),
    ]
    conclude(1, f"hmu={met.hmu:.15f}, cmu={met.cmu:.7f}, "
                f"best runtime {best * 1e3:.3f} ms", checks)


def test_criterion_2_countable_class_convergence():
    src = examples.golden_mean_nonorthogonal()
    t0 = time.perf_counter()
    measured = derive_measured_hmc(src, projective_basis(math.pi / 2, 0.0))
    series = truncation_series(measured, (10, 25, 50, 100, 200, 500))
    elapsed = time.perf_counter() - t0
    hmus = [m.hmu for n, m in series if n >= 25]
    cmus = [m.cmu for n, m in series if n >= 25]
    checks = [
        (f"hmu plateau {hmus[0]:.6f} within 0.599±0.005",
         all(abs(h - 0.599) <= 0.005 for h in hmus)),
        (f"cmu plateau {cmus[0]:.6f} within 3.69±0.05",
         all(abs(c - 3.69) <= 0.05 for c in cmus)),
        ("stable through N=500",
         max(hmus) - min(hmus) <= 1e-9 and max(cmus) - min(cmus) <= 1e-9),
        (f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0),
    ]
    conclude(2, f"hmu={hmus[-1]:.6f}, cmu={cmus[-1]:.6f}, "
                f"runtime {elapsed * 1e3:.0f} ms", checks)


def test_criterion_3_uncountable_class_estimates():
    src = examples.nemo_nonorthogonal()
    measured = derive_measured_hmc(src, projective_basis(0.0, 0.0))
    t0 = time.perf_counter()
    hmu, stderr = blackwell_entropy_rate(measured, length=10 ** 6, seed=0)
    dmu, fit = statistical_complexity_dimension(measured, sample=2 * 10 ** 6,
                                                seed=0)
    elapsed = time.perf_counter() - t0
    checks = [
        (f"hmu {hmu:.5f} within 0.8896±0.005", abs(hmu - 0.8896) <= 0.005),
        (f"dmu {dmu:.4f} within 1.38±0.1", abs(dmu - 1.38) <= 0.1),
        (f"runtime {elapsed:.1f} s < 60 s", elapsed < 60.0),
    ]
    conclude(3, f"hmu={hmu:.5f} (stderr {stderr:.1e}), dmu={dmu:.4f} "
                f"(R2 {fit.r_squared:.5f}), runtime {elapsed:.1f} s", checks)


def test_criterion_4_memoryless_measurements():
    cases = (
        ("skewed-pair source", examples.golden_mean_nonorthogonal(),
         math.pi / 4),
        ("insertion source", examples.random_insertion(), math.pi / 5),
    )
    checks = []
    details = []
    for label, src, theta in cases:
        measured = derive_measured_hmc(src, projective_basis(theta, 0.0))
        msp = build_msp(measured)
        report = process_metrics(measured)
        t_full = measured.transition_matrix
        pi = stationary_distribution(measured)
        prop_err = 0.0
        for x in measured.alphabet:
            tx = measured.matrix(x)
            px = float(pi @ tx.sum(axis=1))
            prop_err = max(prop_err, float(np.abs(tx - px * t_full).max()))
        checks += [
            (f"{label}: single mixed state (got {msp.n_states})",
             msp.n_states == 1),
            (f"{label}: cmu {report.cmu} == 0", report.cmu == 0.0),
            (f"{label}: dmu {report.dmu} within 0±0.02",
             abs(report.dmu) <= 0.02),
            (f"{label}: proportionality err {prop_err:.2e} <= 1e-12",
             prop_err <= 1e-12),
        ]
        details.append(f"{label}: states={msp.n_states}, "
                       f"prop_err={prop_err:.1e}")
    conclude(4, "; ".join(details), checks)


def test_criterion_5_dimension_zero_set():
    src = examples.golden_mean_nonorthogonal()
    special = (0.0, math.pi / 4, math.pi / 2, math.pi)
    fractal_theta = 3.0 * math.pi / 8.0
    thetas = np.union1d(np.linspace(0.0, math.pi, 100),
                        np.array(special + (fractal_theta,)))
    t0 = time.perf_counter()
    res = sweep_theta(src, cfg=EstimatorConfig(structure="dmu"),
                      base_seed=0, thetas=thetas)
    elapsed = time.perf_counter() - t0
    checks = []
    for t in special:
        row = res.row_at(t)
        checks.append(
            (f"dmu(theta={t:.6g}) = {row.structure_value:.4f} within 0±0.03",
             abs(row.structure_value) <= 0.03))
    row38 = res.row_at(fractal_theta)
    checks.append((f"dmu(3pi/8) = {row38.structure_value:.4f} > 0.2",
                   row38.structure_value > 0.2))
    checks.append((f"runtime {elapsed:.0f} s < 20 min", elapsed < 1200.0))
    conclude(5, f"measured dmu(3pi/8)={row38.structure_value:.4f} "
                f"(kind {row38.msp_kind}), runtime {elapsed:.0f} s", checks)


def test_criterion_6_discrimination_study_endpoints():
    grid = np.union1d(np.linspace(0.02, math.pi, 60), [0.05])
    rows = usd_alpha_study(grid)

    def at(target):
        row = min(rows, key=lambda r: abs(r.alpha - target))
        assert abs(row.alpha - target) <= 1e-9
        return row

    low = sorted(rows, key=lambda r: r.alpha)[:3]
    a05 = at(0.05)
    api = at(math.pi)
    peak = max(rows, key=lambda r: r.cmu)
    checks = [
        ("hmu decreasing toward alpha=0",
         low[0].hmu < low[1].hmu < low[2].hmu),
        ("cmu decreasing toward alpha=0",
         low[0].cmu < low[1].cmu < low[2].cmu),
        (f"hmu(0.05) = {a05.hmu:.4f} < 0.05", a05.hmu < 0.05),
        (f"cmu(0.05) = {a05.cmu:.4f} < 0.05", a05.cmu < 0.05),
        (f"hmu(pi) = {api.hmu:.6f} within 2/3±1e-3",
         abs(api.hmu - 2.0 / 3.0) <= 1e-3),
        (f"cmu(pi) = {api.cmu:.6f} within 0.918±1e-3",
         abs(api.cmu - 0.918) <= 1e-3),
        (f"hmu at cmu peak = {peak.hmu:.4f} within 0.4±0.05",
         abs(peak.hmu - 0.4) <= 0.05),
    ]
    conclude(6, f"cmu peak {peak.cmu:.3f} at alpha={peak.alpha:.4f}; "
                f"cmu(0.05)={a05.cmu:.4f}", checks)


def test_criterion_7_property_suite():
    rng = np.random.default_rng(20260823)
    checks = []

    # (a) belief presentations of nonunifilar machines are unifilar
    nonunifilar_count = 0
    for _ in range(100):
        hmc = random_hmc(rng)
        msp = build_msp(hmc, max_states=200)
        if not unifilarity(msp.to_hmc()).unifilar:
            nonunifilar_count += 1
    checks.append((f"(a) {nonunifilar_count}/100 presentations nonunifilar",
                   nonunifilar_count == 0))

    # (b) presentation word probabilities match the source to depth 10
    worst = 0.0
    for _ in range(20):
        hmc = random_hmc(rng, n_states=2, n_symbols=2)
        msp = build_msp(hmc, merge_tol=0.0, max_states=4096,
                        mass_threshold=0.0)
        mats = [hmc.matrix(x) for x in hmc.alphabet]
        stack = [(stationary_distribution(hmc), 0, 1.0, 0)]
        while stack:
            vec, s, pm, depth = stack.pop()
            for xi in range(len(mats)):
                v2 = vec @ mats[xi]
                ps = float(v2.sum())
                j = int(msp.successor[s, xi]) if s >= 0 else -1
                pm2 = pm * float(msp.probability[s, xi]) if j >= 0 else 0.0
                worst = max(worst, abs(ps - pm2))
                if depth + 1 < 10 and ps > 1e-15:
                    stack.append((v2, j, pm2, depth + 1))
    checks.append((f"(b) max word-probability deviation {worst:.2e} <= 1e-9",
                   worst <= 1e-9))

    # (c) trajectory estimate matches the unifilar closed form
    worst_c = 0.0
    ok_c = True
    for i in range(20):
        hmc = random_unifilar_hmc(rng)
        closed = entropy_rate_unifilar(hmc)
        est, stderr = blackwell_entropy_rate(hmc, length=100_000,
                                             burn_in=5_000, seed=1000 + i)
        diff = abs(est - closed)
        worst_c = max(worst_c, diff)
        ok_c = ok_c and diff <= 3.0 * stderr + 1e-12
    checks.append((f"(c) worst |estimate-closed| {worst_c:.2e} within "
                   f"3*stderr on 20 unifilar machines", ok_c))

    # (d) trajectory estimate never exceeds the naive closed-form bound
    ok_d = True
    margin_d = -math.inf
    for i in range(20):
        hmc = random_hmc(rng)
        naive = entropy_rate_unifilar(hmc, allow_nonunifilar=True)
        est, stderr = blackwell_entropy_rate(hmc, length=100_000,
                                             burn_in=5_000, seed=2000 + i)
        margin_d = max(margin_d, est - naive)
        ok_d = ok_d and est <= naive + 3.0 * stderr
    checks.append((f"(d) max estimate-bound gap {margin_d:.2e} on 20 "
                   f"nonunifilar machines", ok_d))

    # (e) dimension estimator on known geometries
    u = rng.random(200_000)
    segment = np.column_stack([u, 1.0 - u])
    dim1, _ = dimension_from_points(segment)
    point_mass = np.tile([0.25, 0.75], (10_000, 1))
    dim0, _ = dimension_from_points(point_mass)
    checks.append((f"(e) segment dimension {dim1:.4f} within 1±0.02",
                   abs(dim1 - 1.0) <= 0.02))
    checks.append((f"(e) point-mass dimension {dim0} == 0", dim0 == 0.0))

    conclude(7, "soundness of presentation builder and estimators", checks)


def test_criterion_8_insertion_sweep_crosses_baseline():
    src = examples.random_insertion()
    t0 = time.perf_counter()
    res = sweep_theta(src, n=30, cfg=EstimatorConfig(structure="cmu"),
                      base_seed=0)
    elapsed = time.perf_counter() - t0
    base = res.generator_hmu
    above = [r for r in res.rows
             if r.hmu - base > max(3.0 * r.hmu_stderr, 1e-9)]
    below = [r for r in res.rows
             if base - r.hmu > max(3.0 * r.hmu_stderr, 1e-9)]
    hi = max(res.rows, key=lambda r: r.hmu)
    lo = min(res.rows, key=lambda r: r.hmu)
    checks = [
        (f"{len(above)}/30 rows above the baseline", len(above) > 0),
        (f"{len(below)}/30 rows below the baseline", len(below) > 0),
    ]
    conclude(8, f"baseline {base:.6f}; max hmu {hi.hmu:.4f} at "
                f"theta={hi.theta:.4f}, min hmu {lo.hmu:.4f} at "
                f"theta={lo.theta:.4f}; runtime {elapsed:.0f} s", checks)
