"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines.
All Monte Carlo here is seeded; the tolerances and thresholds below are
frozen (pilot-calibrated where the criterion allows it) and must not drift.
"""

import math

import numpy as np
import pytest

from sharpthreshold import boolfn as bf, lattice as lat, percolation as pc, randomcluster as rc
from sharpthreshold import graphprops as gp
from sharpthreshold import spectral as sp
from sharpthreshold import threshold as th
from sharpthreshold.boolfn import BooleanFunctionTable, ProductMeasure
from sharpthreshold.cli import DEFAULT_THRESHOLD_RATIO
from sharpthreshold.decisiontree import osss_check, standard_tree_suite
from sharpthreshold.rng import stream
from sharpthreshold.stats import wilson_interval
from sharpthreshold.threshold import _first_crossing


def verdict(ok: bool, label: str, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def theta_pipeline():
    # d=2 boxes 1..32, 10^4 replicas per size, shared by criteria 5 and 6
    p_grid = np.linspace(0.40, 0.60, 21)
    return pc.theta_curve(2, range(1, 33), p_grid, 10_000, seed=104, workers=2)


def test_criterion_1_exact_identities():
    rng = stream(1001, 0)
    # Parseval + gradient-spectrum to 1e-10 for 500 random f, n <= 10
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 11))
        f = bf.random_function(n, rng)
        coeffs = sp.fourier_walsh(f)
        worst = max(worst, abs(coeffs.parseval_sum() - float(np.mean(f.values.astype(float) ** 2))))
        assert sp.gradient_spectrum_check(f, int(rng.integers(1, n + 1)))
    verdict(worst <= 1e-10, "criterion 1a (Parseval/gradient)", f"500 tables, worst residual {worst:.2e}")

    # Margulis-Russo == correlation-formula derivative to 1e-9, families n <= 12
    from conftest import monotone_families

    worst = 0.0
    for f in monotone_families(12):
        for p in (0.2, 0.5, 0.8):
            mu = ProductMeasure(p, f.n)
            worst = max(worst, abs(th.russo_derivative(f, mu) - th.correlation_derivative(f, mu)))
    verdict(worst <= 1e-9, "criterion 1b (Margulis-Russo)", f"worst gap {worst:.2e}")

    # OSSS: exhaustive monotone n <= 4 x 20 trees, and 500 random n in {6, 8}
    violations = 0
    cases = 0
    for n in (1, 2, 3, 4):
        trees = standard_tree_suite(n, count=20) if n >= 2 else [None]
        for f in bf.all_monotone_functions(n):
            for tree in trees:
                if tree is None:
                    from sharpthreshold.decisiontree import DecisionTree

                    tree = DecisionTree.fixed_order([1])
                for p in (0.2, 0.5, 0.8):
                    cases += 1
                    if not osss_check(f, tree, ProductMeasure(p, n)).holds:
                        violations += 1
    for n in (6, 8):
        trees = standard_tree_suite(n, count=20)
        for _ in range(250):
            f = bf.random_monotone(n, rng)
            for tree in trees:
                for p in (0.2, 0.5, 0.8):
                    cases += 1
                    if not osss_check(f, tree, ProductMeasure(p, n)).holds:
                        violations += 1
    verdict(violations == 0, "criterion 1c (OSSS exact)", f"{cases} cases, {violations} violations")

    # Talagrand at p = 1/2 with constant 1 (talagrand_bound raises on violation)
    count = 0
    for f in monotone_families(12):
        th.talagrand_bound(f, ProductMeasure(0.5, f.n))
        count += 1
    for _ in range(500):
        n = int(rng.integers(2, 9))
        th.talagrand_bound(bf.random_monotone(n, rng), ProductMeasure(0.5, n))
        count += 1
    verdict(True, "criterion 1d (Talagrand p=1/2)", f"{count} monotone tables, zero violations")


def test_criterion_2_duality():
    region, event = pc.self_dual_crossing(2)
    configs = ((np.arange(128)[:, None] >> np.arange(region.n_edges)) & 1).astype(np.uint8)
    both_ok = all(
        bool(np.all(pc.duality_complement_check_batch(2, configs, d))) for d in ("v", "h")
    )
    table = pc.indicator_table(region, event)
    count = int(table.values.sum())
    exact_half = bf.expectation(table, ProductMeasure(0.5, region.n_edges)) == 0.5
    verdict(
        both_ok and count == 64 and exact_half,
        "criterion 2a (exact duality)",
        f"complement identity on all 128 configurations; crossing count {count}/128",
    )
    details = []
    ok = True
    for n, seed in ((8, 2001), (16, 2002), (32, 2003)):
        reg, ev = pc.self_dual_crossing(n)
        curve = pc.direct_mc_curve(reg, ev, [0.5], 100_000, seed=seed)
        est = float(curve.estimates[0])
        lo, hi = wilson_interval(est * 100_000, 100_000, z=3.0)
        ok = ok and (lo <= 0.5 <= hi)
        details.append(f"n={n}: {est:.4f} in [{lo:.4f},{hi:.4f}]")
    verdict(ok, "criterion 2b (MC self-dual)", "; ".join(details))


def test_criterion_3_rsw_conclusion():
    details = []
    ok = True
    for n, seed in ((8, 3001), (16, 3002)):
        region = lat.build_rectangle(2 * n, 3 * n)
        curve = pc.direct_mc_curve(region, pc.CrossingEvent("v"), [0.5], 10_000, seed=seed)
        est = float(curve.estimates[0])
        lo, _ = wilson_interval(est * 10_000, 10_000, z=3.0)
        ok = ok and lo > 1 / 128
        details.append(f"V(2n,3n) n={n}: {est:.4f}, lower {lo:.4f} > 1/128")
    verdict(ok, "criterion 3 (RSW conclusion)", "; ".join(details))


def test_criterion_4_sharp_crossing_threshold():
    region = lat.build_rectangle(128, 64)
    curve = pc.newman_ziff_sweep(region, pc.CrossingEvent("h"), [0.4, 0.6], 10_000, seed=4001, workers=2)
    low, high = float(curve.estimates[0]), float(curve.estimates[1])
    verdict(
        high >= 0.9 and low <= 0.1,
        "criterion 4 (sharp crossing)",
        f"H(128,64): p=0.6 -> {high:.4f} >= 0.9; p=0.4 -> {low:.2e} <= 0.1",
    )


def test_criterion_5_subcritical_decay(theta_pipeline):
    j = int(np.argmin(np.abs(theta_pipeline.p_grid - 0.40)))
    thetas = {n: float(theta_pipeline.curves[n].estimates[j]) for n in (4, 8, 16, 32)}
    ratios = [thetas[8] / thetas[4], thetas[16] / thetas[8], thetas[32] / max(thetas[16], 1e-12)]
    ok = all(r <= 0.6 for r in ratios) and thetas[32] <= 0.05
    verdict(
        ok,
        "criterion 5 (subcritical decay)",
        f"theta(0.4) at n=4,8,16,32: {thetas[4]:.4f}, {thetas[8]:.4f}, "
        f"{thetas[16]:.4f}, {thetas[32]:.4f}; ratios {[round(r, 3) for r in ratios]}",
    )


def test_criterion_6_critical_estimator(theta_pipeline):
    est = th.critical_estimator(theta_pipeline.family(), DEFAULT_THRESHOLD_RATIO)
    ok = (not est.censored) and 0.45 <= est.x_hat <= 0.55
    verdict(
        ok,
        "criterion 6 (critical estimator)",
        f"p_hat = {est.x_hat:.4f} in [0.45, 0.55] at ratio {DEFAULT_THRESHOLD_RATIO}",
    )


def test_criterion_7_random_cluster_exactness():
    c4 = lat.cycle_graph(4)
    grid = lat.build_rectangle(2, 2)
    # heat-bath conditionals match exact tables to 1e-10 on both instances
    worst = 0.0
    rng = stream(7001, 0)
    for region in (c4, grid):
        for q in (1.0, 2.0, 4.0):
            params = rc.RandomClusterParams(0.5, q)
            measure = rc.exact_measure(region, params)
            masks = (
                range(1 << region.n_edges)
                if region.n_edges <= 8
                else rng.integers(0, 1 << region.n_edges, size=400)
            )
            for mask in masks:
                mask = int(mask)
                omega = ((mask >> np.arange(region.n_edges)) & 1).astype(np.uint8)
                for e in range(region.n_edges):
                    gap = abs(
                        rc.heat_bath_probability(region, omega, e, params)
                        - measure.conditional_open_given_rest(e, mask & ~(1 << e))
                    )
                    worst = max(worst, gap)
    verdict(worst <= 1e-10, "criterion 7a (heat-bath conditionals)", f"worst gap {worst:.2e}")

    # sampler edge marginals within 0.02 of exact after 1e5 sweeps
    details = []
    ok = True
    for region, tag in ((c4, "cycle4"), (grid, "grid2x2")):
        for q in (1.0, 2.0, 4.0):
            params = rc.RandomClusterParams(0.5, q)
            exact = np.array(
                [rc.exact_measure(region, params).edge_marginal(e) for e in range(region.n_edges)]
            )
            est = rc.edge_marginal_estimate(region, params, sweeps=100_000, burn_in=100, seed=7002)
            gap = float(np.max(np.abs(est - exact)))
            ok = ok and gap <= 0.02
            details.append(f"{tag} q={q}: {gap:.4f}")
    verdict(ok, "criterion 7b (sampler marginals)", "max |est - exact|: " + "; ".join(details))

    # monotonicity, FKG, Graham-Grimmett finite ratio, monotonic OSSS
    ok = True
    trees = standard_tree_suite(4, count=6)
    masks4 = np.arange(16)
    pair = BooleanFunctionTable(
        4, (((masks4 >> 0) & 1) & ((masks4 >> 1) & 1)).astype(np.uint8), monotone=True
    )
    for q in (1.0, 2.0, 4.0):
        params = rc.RandomClusterParams(0.5, q)
        mono, _ = rc.monotonicity_check(c4, params)
        ok = ok and mono
        f = ((masks4 >> 0) & 1).astype(float)
        g = ((masks4 >> 2) & 1).astype(float)
        ok = ok and rc.fkg_check(c4, params, f, g)
        measure = rc.exact_measure(c4, params)
        rep = rc.graham_grimmett_report(pair, measure)
        ok = ok and np.isfinite(rep.ratio)
        for tree in trees:
            ok = ok and rc.monotonic_osss_check(pair, measure, tree).holds
    verdict(ok, "criterion 7c (monotonic inequalities)", "monotonicity, FKG, GG, OSSS on 4-cycle at q=1,2,4")


def test_criterion_8_revealment_and_influence_bounds():
    ok = True
    details = []
    for p in (0.3, 0.5, 0.7):
        rep = pc.revealment_bound_check(1, 1, p)
        ok = ok and rep.exact and rep.holds
        details.append(f"L1 p={p} exact")
    for k in (1, 2):
        rep = pc.revealment_bound_check(2, k, 0.5, mode="mc", samples=100_000, seed=8001)
        ok = ok and rep.holds
        details.append(f"L2 k={k} mc")
    verdict(ok, "criterion 8a (revealment bound)", "; ".join(details))

    rep = pc.influence_sum_bound_check(1, 0.5)
    ok = rep.exact and rep.holds
    mc = pc.influence_sum_bound_check(2, 0.5, mode="mc", samples=10_000, seed=8002)
    ok = ok and mc.holds
    verdict(
        ok,
        "criterion 8b (influence-sum bound)",
        f"L1 exact lhs={rep.lhs:.4f} rhs={rep.rhs:.4f}; L2 mc lhs={mc.lhs:.4f} rhs={mc.rhs:.4f}",
    )


def test_criterion_9_erdos_renyi():
    n = 1000
    center = math.log(n) / n
    curve, _ = gp.threshold_experiment(
        "connectivity", n, np.linspace(0.2 * center, 2.5 * center, 47), 1000, seed=9001
    )
    p_half = _first_crossing(curve.ps, curve.estimates, 0.5)
    ok_conn = 0.5 * center <= p_half <= 1.5 * center
    curve_g, _ = gp.threshold_experiment(
        "giant", n, np.linspace(0.2 / n, 3.0 / n, 47), 1000, seed=9002
    )
    pg_half = _first_crossing(curve_g.ps, curve_g.estimates, 0.5)
    ok_giant = 0.5 / n <= pg_half <= 2.0 / n
    verdict(
        ok_conn and ok_giant,
        "criterion 9a (ER thresholds)",
        f"connectivity half-point {p_half:.5f} vs log n/n = {center:.5f}; "
        f"giant half-point {pg_half:.6f} vs 1/n = {1 / n:.6f}",
    )

    windows = {}
    for size in (500, 2000):
        c_size = math.log(size) / size
        _, window = gp.threshold_experiment(
            "connectivity", size, np.linspace(0.2 * c_size, 2.5 * c_size, 47), 1000, seed=9003
        )
        windows[size] = window.width
    verdict(
        windows[2000] < windows[500],
        "criterion 9b (window shrinkage)",
        f"epsilon=0.1 widths: n=500 -> {windows[500]:.5f}, n=2000 -> {windows[2000]:.5f}",
    )
