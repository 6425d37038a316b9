"""Percolation sampling, connectivity, Newman-Ziff, duality, exploration."""

from collections import deque

import numpy as np
import pytest

from sharpthreshold import boolfn as bf, lattice as lat, percolation as pc
from sharpthreshold.boolfn import ProductMeasure
from sharpthreshold.curves import SweepCurve
from sharpthreshold.rng import stream
from sharpthreshold.stats import wilson_halfwidth


def bfs_connected(region, omega, srcs, dsts) -> bool:
    """Breadth-first oracle, independent of the union-find implementation."""
    srcs, dsts = set(srcs), set(dsts)
    if srcs & dsts:
        return True
    adj = {v: [] for v in range(region.n_vertices)}
    for e in np.nonzero(np.asarray(omega))[0]:
        u, v = int(region.edges[e, 0]), int(region.edges[e, 1])
        adj[u].append(v)
        adj[v].append(u)
    queue = deque(srcs)
    seen = set(srcs)
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y in dsts:
                return True
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return False


def test_sample_extremes_and_determinism():
    r = lat.build_rectangle(5, 5)
    assert not pc.sample(r, 0.0, seed=1).any()
    assert pc.sample(r, 1.0, seed=1).all()
    a = pc.sample(r, 0.37, seed=5, replica=2)
    b = pc.sample(r, 0.37, seed=5, replica=2)
    assert np.array_equal(a, b)
    c = pc.sample(r, 0.37, seed=5, replica=3)
    assert not np.array_equal(a, c)


def test_sample_open_fraction():
    box = lat.build_box(2, 60)  # ~29k edges
    omega = pc.sample(box, 0.5, seed=7)
    frac = float(omega.mean())
    assert abs(frac - 0.5) <= 3 * 0.5 / np.sqrt(box.n_edges)


def test_connected_trivial_cases():
    r = lat.build_rectangle(3, 3)
    assert pc.connected(r, np.ones(r.n_edges, dtype=np.uint8), [0], [r.n_vertices - 1])
    assert not pc.connected(r, np.zeros(r.n_edges, dtype=np.uint8), [0], [5])
    assert pc.connected(r, np.zeros(r.n_edges, dtype=np.uint8), [0, 3], [3, 7])


def test_union_find_matches_bfs_oracle():
    rng = stream(61, 0)
    cases = 0
    while cases < 10_000:
        r = lat.build_rectangle(int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        omega = (rng.random(r.n_edges) < rng.random()).astype(np.uint8)
        a = int(rng.integers(0, r.n_vertices))
        b = int(rng.integers(0, r.n_vertices))
        assert pc.connected(r, omega, [a], [b]) == bfs_connected(r, omega, [a], [b])
        cases += 1


def test_union_find_state_invariants():
    uf = pc.UnionFind(6)
    assert uf.n_components == 6
    assert uf.union(0, 1) and uf.n_components == 5
    assert not uf.union(1, 0) and uf.n_components == 5  # no double-count
    root = uf.find(1)
    assert uf.find(root) == root  # idempotent
    uf.union(2, 3)
    uf.union(1, 3)
    assert uf.n_components == 3
    assert len({uf.find(v) for v in range(4)}) == 1


def test_crossing_examples():
    r = lat.build_rectangle(3, 2)
    omega = np.zeros(r.n_edges, dtype=np.uint8)
    # open the bottom row y=0
    for x in range(3):
        u = r.vertex_index(x, 0)
        v = r.vertex_index(x + 1, 0)
        for e in range(r.n_edges):
            if {int(r.edges[e, 0]), int(r.edges[e, 1])} == {u, v}:
                omega[e] = 1
    assert pc.crossing_h(r, omega)
    assert not pc.crossing_v(r, omega)
    assert not pc.crossing_h(r, np.zeros(r.n_edges, dtype=np.uint8))


def test_exhaustive_half_crossing_R12():
    # the long-direction crossing of R(1,2) holds for exactly half of the
    # 128 configurations; the short-direction one does not
    region, event = pc.self_dual_crossing(2)
    table = pc.indicator_table(region, event)
    assert int(table.values.sum()) == 64
    mu = ProductMeasure(0.5, region.n_edges)
    assert bf.expectation(table, mu) == pytest.approx(0.5, abs=1e-15)
    short_way = pc.indicator_table(region, pc.CrossingEvent("h"))
    assert bf.expectation(short_way, mu) == pytest.approx(0.875, abs=1e-15)


def test_duality_complement_exhaustive():
    region = lat.build_rectangle(1, 2)
    configs = ((np.arange(128)[:, None] >> np.arange(region.n_edges)) & 1).astype(np.uint8)
    for direction in ("v", "h"):
        assert np.all(pc.duality_complement_check_batch(2, configs, direction))
    # single-configuration API
    assert pc.duality_complement_check(2, np.ones(region.n_edges, dtype=np.uint8))
    assert pc.duality_complement_check(2, np.zeros(region.n_edges, dtype=np.uint8))


def test_duality_complement_sampled_large():
    region = lat.build_rectangle(15, 16)
    rng = stream(62, 0)
    configs = (rng.random((100_000, region.n_edges)) < 0.5).astype(np.uint8)
    assert np.all(pc.duality_complement_check_batch(16, configs))


def test_self_dual_crossing_mc():
    for n, seed in ((8, 631), (16, 632), (32, 633)):
        region, event = pc.self_dual_crossing(n)
        curve = pc.direct_mc_curve(region, event, [0.5], 20_000, seed=seed)
        hw = wilson_halfwidth(curve.estimates[0] * 20_000, 20_000, z=3.0)
        assert abs(curve.estimates[0] - 0.5) <= hw


def test_theta_curve_extremes_and_exact():
    res = pc.theta_curve(2, [1, 2], [0.0, 1.0], 200, seed=63)
    for n in (1, 2):
        assert res.curves[n].estimates[0] == 0.0
        assert res.curves[n].estimates[1] == 1.0
    exact = pc.theta_exact(2, 1, 0.5)
    assert exact == pytest.approx(1 - 0.5**4, abs=1e-12)
    mc = pc.theta_curve(2, [1], [0.5], 20_000, seed=64).curves[1]
    assert abs(mc.estimates[0] - exact) <= max(3 * mc.stderrs[0], 1e-3)
    # S_n-values use the theta_0 = 1 convention
    res2 = pc.theta_curve(2, [1, 2, 3], [0.5], 500, seed=65)
    s3 = res2.s_values(3)[0]
    manual = 1.0 + res2.curves[1].estimates[0] + res2.curves[2].estimates[0]
    assert s3 == pytest.approx(manual)


def test_newman_ziff_closed_forms():
    r = lat.build_rectangle(2, 2)
    ps = np.linspace(0.05, 0.95, 7)
    # ">= 1 open edge": hitting count is always 1, so the curve is exactly
    # 1 - (1-p)^E with zero variance
    ev = pc.PredicateEvent(lambda cfg: bool(cfg.any()), name="any-open")
    curve = pc.newman_ziff_sweep(r, ev, ps, 50, seed=66)
    np.testing.assert_allclose(curve.estimates, 1 - (1 - ps) ** r.n_edges, atol=1e-10)
    np.testing.assert_allclose(curve.stderrs, 0.0, atol=1e-12)
    # "all edges open": hitting count is always E, curve is p^E
    ev_all = pc.PredicateEvent(lambda cfg: bool(cfg.all()), name="all-open")
    curve = pc.newman_ziff_sweep(r, ev_all, ps, 50, seed=67)
    np.testing.assert_allclose(curve.estimates, ps**r.n_edges, atol=1e-10)


def test_newman_ziff_agrees_with_direct_mc():
    r = lat.build_rectangle(16, 8)
    ps = np.array([0.45, 0.5, 0.55])
    nz = pc.newman_ziff_sweep(r, pc.CrossingEvent("h"), ps, 4000, seed=68)
    direct = pc.direct_mc_curve(r, pc.CrossingEvent("h"), ps, 4000, seed=69)
    for j in range(len(ps)):
        sigma = float(np.hypot(nz.stderrs[j], direct.stderrs[j]))
        assert abs(nz.estimates[j] - direct.estimates[j]) <= 3 * sigma
    nz.check_monotone()


def test_newman_ziff_detects_non_increasing_event():
    r = lat.build_rectangle(2, 1)
    bad = pc.PredicateEvent(lambda cfg: int(cfg.sum()) == 1, name="exactly-one")
    with pytest.raises(pc.ContractViolation):
        pc.newman_ziff_sweep(r, bad, [0.5], 5, seed=70)


def test_newman_ziff_replica_stream_contract():
    # replica r of seed s is the Philox stream (s, r): reordering batch
    # boundaries must not change results
    r = lat.build_rectangle(4, 4)
    ps = np.array([0.4, 0.6])
    a = pc.newman_ziff_sweep(r, pc.CrossingEvent("h"), ps, 300, seed=71, workers=1)
    b = pc.newman_ziff_sweep(r, pc.CrossingEvent("h"), ps, 300, seed=71, workers=2)
    np.testing.assert_array_equal(a.estimates, b.estimates)


def test_explore_examples():
    box = lat.build_box(2, 2)
    all_closed = np.zeros(box.n_edges, dtype=np.uint8)
    res = pc.explore(box, 2, all_closed)
    assert res.value == 0
    all_open = np.ones(box.n_edges, dtype=np.uint8)
    res = pc.explore(box, 1, all_open)
    assert res.value == 1


def test_explore_exhaustive_oracle_small_box():
    box = lat.build_box(2, 1)
    table = pc.indicator_table(box, pc.OneArmEvent())
    configs = ((np.arange(4096)[:, None] >> np.arange(12)) & 1).astype(np.uint8)
    revealed, values, taus = pc.explore_batch(box, 1, configs)
    assert np.array_equal(values, table.values)
    # python reference implementation agrees with the compiled batch
    rng = stream(72, 0)
    for mask in rng.integers(0, 4096, size=150):
        res = pc.explore(box, 1, configs[int(mask)])
        assert res.value == values[int(mask)]
        assert res.tau == taus[int(mask)]
        got = {e for e in res.revealed}
        expect = {e for e in range(12) if (int(revealed[int(mask)]) >> e) & 1}
        assert got == expect


def test_explore_oracle_lambda2():
    box = lat.build_box(2, 2)
    table_event = pc.OneArmEvent()
    rng = stream(73, 0)
    configs = (rng.random((300, box.n_edges)) < 0.5).astype(np.uint8)
    oracle = pc.event_indicator(box, table_event, configs)
    for k in (1, 2):
        _, values, _ = pc.explore_batch(box, k, configs)
        assert np.array_equal(values, oracle)
        for row in (0, 1, 2):
            assert pc.explore(box, k, configs[row]).value == oracle[row]


def test_explore_phase1_frontier_invariant():
    # before the scan phase, every revealed edge touches the grown cluster set
    box = lat.build_box(2, 2)
    rng = stream(74, 0)
    for _ in range(25):
        omega = (rng.random(box.n_edges) < rng.random()).astype(np.uint8)
        res = pc.explore(box, int(rng.integers(1, 3)), omega)
        assert all(res.frontier_ok)
        # once phase 2 starts it never goes back to phase 1
        phases = list(res.phases)
        if 2 in phases:
            first = phases.index(2)
            assert all(ph == 2 for ph in phases[first:])


def test_explore_respects_edge_order():
    box = lat.build_box(2, 1)
    rng = stream(75, 0)
    omega = (rng.random(box.n_edges) < 0.5).astype(np.uint8)
    order = rng.permutation(box.n_edges)
    res = pc.explore(box, 1, omega, edge_order=order)
    base = pc.explore(box, 1, omega)
    assert res.value == base.value  # the determined value is order-independent
    rev_kernel, val_kernel, tau_kernel = pc.explore_batch(box, 1, omega[None, :], edge_order=order)
    assert val_kernel[0] == res.value and tau_kernel[0] == res.tau


def test_revealment_bound_exact_lambda1():
    for p in (0.3, 0.5, 0.7):
        rep = pc.revealment_bound_check(1, 1, p)
        assert rep.exact and rep.holds
    rep = pc.revealment_bound_check(1, 1, 0.0)
    assert rep.holds  # rhs >= 1 for edges touching the shell


def test_revealment_bound_mc_lambda2():
    for k in (1, 2):
        rep = pc.revealment_bound_check(2, k, 0.5, mode="mc", samples=20_000, seed=76)
        assert not rep.exact and rep.holds


def test_influence_sum_bound():
    rep = pc.influence_sum_bound_check(1, 0.5)
    assert rep.exact and rep.holds
    # hand check: lhs = 4 (1-p)^3 = 0.5; rhs = theta_1 (1 - theta_1) with
    # theta_1 = 15/16
    assert rep.lhs == pytest.approx(0.5, abs=1e-12)
    assert rep.rhs == pytest.approx((15 / 16) * (1 / 16), abs=1e-12)
    # p -> 1 degeneracy: rhs -> 0
    rep = pc.influence_sum_bound_check(1, 0.999)
    assert rep.holds and rep.rhs < 1e-2
    for p in (0.4, 0.5, 0.6):
        rep = pc.influence_sum_bound_check(2, p, mode="mc", samples=4000, seed=77)
        assert rep.holds


def test_sweep_curve_validation():
    with pytest.raises(Exception):
        SweepCurve(np.array([0.1, 0.2]), np.array([0.5, 1.5]), np.zeros(2), 1, 0)
    curve = SweepCurve(np.array([0.1, 0.2, 0.3]), np.array([0.9, 0.1, 0.95]), np.zeros(3), 10, 0)
    with pytest.raises(Exception):
        curve.check_monotone()


def test_curve_csv_format():
    curve = SweepCurve(np.array([0.25]), np.array([0.5]), np.array([0.01]), 4, 9)
    text = curve.to_csv({"seed": 9})
    lines = text.strip().splitlines()
    assert lines[0] == "# seed: 9"
    assert lines[1] == "p,estimate,stderr,n_replicas"
    assert lines[2] == "0.25,0.5,0.01,4"
