"""Bernoulli percolation on finite regions.

Sampling, connectivity, crossings, Newman-Ziff sweeps, the planar duality
identity, and the boundary-cluster exploration algorithm with its revealment
and influence-sum bounds.

Monte Carlo conventions: replica r of master seed s draws from the Philox
stream (s, r); replicas merge by summation so results are independent of
batching and worker count.  "Within 3 sigma" for proportions uses the Wilson
half-width.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import _kernels as K
from .boolfn import BooleanFunctionTable, InputError, ProductMeasure, expectation, influences, popcounts
from .curves import SweepCurve
from .lattice import BoxRegion, RectangleRegion
from .rng import stream
from .stats import binomial_upper_tails, proportion_stderr

EXACT_EXPLORE_MAX_EDGES = 14
EXACT_TABLE_MAX_EDGES = 20


class ContractViolation(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# union-find (single-owner mutable state)
# ---------------------------------------------------------------------------


class UnionFind:
    """Array-based union-find with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.n_components = n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.n_components -= 1
        return True


# ---------------------------------------------------------------------------
# sampling and connectivity
# ---------------------------------------------------------------------------


def sample(region, p: float, seed: int, replica: int = 0) -> np.ndarray:
    """iid Bernoulli(p) configuration over the region's edges."""
    if not 0.0 <= p <= 1.0:
        raise InputError("p must lie in [0, 1]")
    rng = stream(seed, replica)
    return (rng.random(region.n_edges) < p).astype(np.uint8)


def connected(region, omega: np.ndarray, a: Iterable[int], b: Iterable[int]) -> bool:
    """Is some vertex of A joined to some vertex of B by an open path?"""
    a = list(a)
    b = list(b)
    if not a or not b:
        raise InputError("A and B must be nonempty")
    if set(a) & set(b):
        return True
    omega = np.asarray(omega, dtype=np.uint8)
    uf = UnionFind(region.n_vertices)
    eu, ev = region.edges[:, 0], region.edges[:, 1]
    for e in np.nonzero(omega)[0]:
        uf.union(int(eu[e]), int(ev[e]))
    roots_a = {uf.find(x) for x in a}
    return any(uf.find(y) in roots_a for y in b)


def crossing_h(rect: RectangleRegion, omega: np.ndarray) -> bool:
    """Open path from the left side to the right side, inside the rectangle."""
    return connected(rect, omega, rect.left, rect.right)


def crossing_v(rect: RectangleRegion, omega: np.ndarray) -> bool:
    """Open path from the bottom side to the top side."""
    return connected(rect, omega, rect.bottom, rect.top)


def _adjacency(region) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    nv = region.n_vertices
    eu, ev = region.edges[:, 0], region.edges[:, 1]
    deg = np.zeros(nv + 1, dtype=np.int64)
    np.add.at(deg, eu + 1, 1)
    np.add.at(deg, ev + 1, 1)
    indptr = np.cumsum(deg)
    adj_edge = np.empty(2 * region.n_edges, dtype=np.int64)
    adj_vert = np.empty(2 * region.n_edges, dtype=np.int64)
    cursor = indptr[:-1].copy()
    for e in range(region.n_edges):
        u, v = int(eu[e]), int(ev[e])
        adj_edge[cursor[u]] = e
        adj_vert[cursor[u]] = v
        cursor[u] += 1
        adj_edge[cursor[v]] = e
        adj_vert[cursor[v]] = u
        cursor[v] += 1
    return indptr, adj_edge, adj_vert


# ---------------------------------------------------------------------------
# events over configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingEvent:
    direction: str = "h"

    def __post_init__(self):
        if self.direction not in ("h", "v"):
            raise InputError("direction must be 'h' or 'v'")


@dataclass(frozen=True)
class OneArmEvent:
    """Origin joined to the box boundary."""


@dataclass(frozen=True)
class TwoSetEvent:
    a: tuple[int, ...]
    b: tuple[int, ...]


@dataclass(frozen=True)
class PredicateEvent:
    """Arbitrary increasing predicate; slow Python path, test-scale only."""

    fn: Callable[[np.ndarray], bool]
    name: str = "predicate"


def _terminals(region, event) -> tuple[int, np.ndarray, np.ndarray, int, int]:
    """(total vertex count incl. virtuals, pre-union pairs, src, dst)."""
    nv = region.n_vertices
    if isinstance(event, CrossingEvent):
        if not isinstance(region, RectangleRegion):
            raise InputError("crossing events need a rectangle")
        sides = (region.left, region.right) if event.direction == "h" else (region.bottom, region.top)
        a_ids, b_ids = sides
        src, dst = nv, nv + 1
        pre_a = np.concatenate([np.full(len(a_ids), src), np.full(len(b_ids), dst)])
        pre_b = np.concatenate([a_ids, b_ids])
        return nv + 2, pre_a.astype(np.int64), pre_b.astype(np.int64), src, dst
    if isinstance(event, OneArmEvent):
        if not isinstance(region, BoxRegion):
            raise InputError("one-arm events need a box")
        boundary = region.boundary_indices()
        dst = nv
        pre_a = np.full(len(boundary), dst, dtype=np.int64)
        return nv + 1, pre_a, boundary.astype(np.int64), region.origin, dst
    if isinstance(event, TwoSetEvent):
        src, dst = nv, nv + 1
        a_ids = np.asarray(event.a, dtype=np.int64)
        b_ids = np.asarray(event.b, dtype=np.int64)
        pre_a = np.concatenate([np.full(len(a_ids), src), np.full(len(b_ids), dst)])
        pre_b = np.concatenate([a_ids, b_ids])
        return nv + 2, pre_a.astype(np.int64), pre_b, src, dst
    raise InputError(f"no union-find terminals for event {event!r}")


def event_indicator(region, event, configs: np.ndarray) -> np.ndarray:
    """Evaluate the event on a (replicas, E) batch of configurations."""
    configs = np.ascontiguousarray(configs, dtype=np.uint8)
    if isinstance(event, PredicateEvent):
        return np.array([1 if event.fn(row) else 0 for row in configs], dtype=np.uint8)
    nv_total, pre_a, pre_b, src, dst = _terminals(region, event)
    out = np.empty(configs.shape[0], dtype=np.uint8)
    eu = np.ascontiguousarray(region.edges[:, 0])
    ev = np.ascontiguousarray(region.edges[:, 1])
    K.event_check_batch(eu, ev, nv_total, configs, pre_a, pre_b, src, dst, out)
    return out


def indicator_table(region, event) -> BooleanFunctionTable:
    """Truth table of the event over all 2^E edge configurations."""
    n_edges = region.n_edges
    if n_edges > EXACT_TABLE_MAX_EDGES:
        raise InputError(f"exact tables capped at {EXACT_TABLE_MAX_EDGES} edges")
    if isinstance(event, PredicateEvent):
        bits = np.arange(n_edges)
        values = np.empty(1 << n_edges, dtype=np.uint8)
        for mask in range(1 << n_edges):
            row = ((mask >> bits) & 1).astype(np.uint8)
            values[mask] = 1 if event.fn(row) else 0
        return BooleanFunctionTable(n_edges, values, monotone=False)
    nv_total, pre_a, pre_b, src, dst = _terminals(region, event)
    eu = np.ascontiguousarray(region.edges[:, 0])
    ev = np.ascontiguousarray(region.edges[:, 1])
    values = K.mask_event_table(eu, ev, nv_total, n_edges, pre_a, pre_b, src, dst)
    return BooleanFunctionTable(n_edges, values, monotone=True)


# ---------------------------------------------------------------------------
# Monte Carlo curves
# ---------------------------------------------------------------------------


def _batches(total: int, batch: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + batch, total)) for lo in range(0, total, batch)]


def _run_batched(tasks: list, workers: int | None) -> None:
    workers = workers or 1
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            t()
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda t: t(), tasks))


def direct_mc_curve(
    region,
    event,
    p_grid,
    replicas: int,
    seed: int,
    workers: int | None = None,
    replica_offset: int = 0,
) -> SweepCurve:
    """Independent-sample estimates of P_p[event] at each grid point.

    Replica r reuses its stream across grid points (common random numbers),
    which keeps the estimated curve monotone for increasing events.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    n_edges = region.n_edges
    batch = max(64, min(replicas, (1 << 21) // max(n_edges, 1)))
    results = np.zeros((len(p_grid), replicas), dtype=np.uint8)

    def make_task(lo, hi):
        def task():
            u = np.stack(
                [stream(seed, replica_offset + r).random(n_edges) for r in range(lo, hi)]
            )
            for j, p in enumerate(p_grid):
                configs = (u < p).astype(np.uint8)
                results[j, lo:hi] = event_indicator(region, event, configs)

        return task

    _run_batched([make_task(lo, hi) for lo, hi in _batches(replicas, batch)], workers)
    estimates = results.mean(axis=1)
    stderrs = np.array([proportion_stderr(m, replicas) for m in estimates])
    return SweepCurve(
        p_grid,
        estimates,
        stderrs,
        replicas,
        seed,
        meta={"method": "direct", "event": repr(event)},
    )


def newman_ziff_sweep(
    region,
    event,
    p_grid,
    replicas: int,
    seed: int,
    workers: int | None = None,
    validate_predicate: bool = True,
) -> SweepCurve:
    """One random-insertion sweep per replica, reweighted binomially.

    Each replica inserts a uniformly shuffled edge order and records the
    first insertion count at which the increasing event holds; the curve at p
    averages the binomial upper tails at those hitting counts.  Must agree
    with direct Monte Carlo within 3 sigma.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    n_edges = region.n_edges
    hits = np.empty(replicas, dtype=np.int64)

    if isinstance(event, PredicateEvent):
        for r in range(replicas):
            order = stream(seed, r).permutation(n_edges)
            config = np.zeros(n_edges, dtype=np.uint8)
            m = n_edges + 1
            if event.fn(config):
                m = 0
            for t, e in enumerate(order):
                config[e] = 1
                holds = event.fn(config)
                if holds and m > n_edges:
                    m = t + 1
                    if not validate_predicate:
                        break
                if not holds and m <= n_edges:
                    raise ContractViolation(
                        f"event {event.name} turned off after turning on at insertion {t + 1}"
                    )
            hits[r] = m
    else:
        nv_total, pre_a, pre_b, src, dst = _terminals(region, event)
        eu = np.ascontiguousarray(region.edges[:, 0])
        ev = np.ascontiguousarray(region.edges[:, 1])
        batch = max(32, min(replicas, (1 << 21) // max(n_edges, 1)))

        def make_task(lo, hi):
            def task():
                orders = np.stack(
                    [stream(seed, r).permutation(n_edges).astype(np.int64) for r in range(lo, hi)]
                )
                K.nz_two_terminal_batch(
                    eu, ev, nv_total, orders, pre_a, pre_b, src, dst, hits[lo:hi]
                )

            return task

        _run_batched([make_task(lo, hi) for lo, hi in _batches(replicas, batch)], workers)

    estimates = np.empty(len(p_grid))
    stderrs = np.empty(len(p_grid))
    for j, p in enumerate(p_grid):
        tails = np.append(binomial_upper_tails(n_edges, p), 0.0)
        g = tails[hits]
        estimates[j] = g.mean()
        stderrs[j] = g.std(ddof=0) / math.sqrt(replicas)
    estimates = np.clip(estimates, 0.0, 1.0)
    return SweepCurve(
        p_grid,
        estimates,
        stderrs,
        replicas,
        seed,
        meta={"method": "newman-ziff", "event": repr(event)},
    )


# ---------------------------------------------------------------------------
# duality
# ---------------------------------------------------------------------------


def self_dual_crossing(n: int) -> tuple[RectangleRegion, CrossingEvent]:
    """The crossing of R(n-1, n) whose probability at p = 1/2 is exactly 1/2.

    Rotation by pi/2 exchanges it with its dual blocking path only when the
    near-square is crossed in its long direction, so the self-dual event is
    the vertical crossing of R(n-1, n) (equivalently H of R(n, n-1)).
    """
    if n < 2:
        raise InputError("need n >= 2 so that R(n-1, n) exists")
    return RectangleRegion(n - 1, n), CrossingEvent("v")


def duality_complement_check(n: int, omega: np.ndarray, direction: str = "v") -> bool:
    """Exactly one of: a primal crossing of R(n-1, n), or the dual blocking path.

    The dual configuration opens e* iff e is closed.  A vertical primal
    crossing is blocked by a left-right dual path, a horizontal one by a
    top-bottom dual path; both pairings are exact complements for every
    omega.  The default direction 'v' is the self-dual case.
    """
    batch = np.asarray(omega, dtype=np.uint8)[None, :]
    return bool(duality_complement_check_batch(n, batch, direction)[0])


def duality_complement_check_batch(n: int, configs: np.ndarray, direction: str = "v") -> np.ndarray:
    if n < 2:
        raise InputError("need n >= 2 so that R(n-1, n) exists")
    region = RectangleRegion(n - 1, n)
    configs = np.ascontiguousarray(configs, dtype=np.uint8)
    if configs.shape[1] != region.n_edges:
        raise InputError("configuration length must match R(n-1, n)")
    primal = event_indicator(region, CrossingEvent(direction), configs)
    dual = region.dual_map()
    dual_configs = (1 - configs).astype(np.uint8)
    src, dst = dual.n_vertices, dual.n_vertices + 1
    blocking = ("left", "right") if direction == "v" else ("top", "bottom")
    a_ids = dual.side_ids(blocking[0])
    b_ids = dual.side_ids(blocking[1])
    pre_a = np.concatenate([np.full(len(a_ids), src), np.full(len(b_ids), dst)]).astype(np.int64)
    pre_b = np.concatenate([a_ids, b_ids]).astype(np.int64)
    out = np.empty(configs.shape[0], dtype=np.uint8)
    K.event_check_batch(
        np.ascontiguousarray(dual.edges[:, 0]),
        np.ascontiguousarray(dual.edges[:, 1]),
        dual.n_vertices + 2,
        dual_configs,
        pre_a,
        pre_b,
        src,
        dst,
        out,
    )
    return primal != out


# ---------------------------------------------------------------------------
# one-arm curves
# ---------------------------------------------------------------------------


@dataclass
class ThetaResult:
    """theta_n(p) curves for several box radii, plus the partial sums S_n."""

    dimension: int
    curves: dict[int, SweepCurve]
    p_grid: np.ndarray
    replicas: int
    seed: int

    def theta(self, n: int) -> np.ndarray:
        return self.curves[n].estimates

    def s_values(self, n: int) -> np.ndarray:
        """S_n(p) = sum_{k<n} theta_k(p) over theta_0 = 1 plus available k."""
        total = np.ones(len(self.p_grid))
        for k, curve in self.curves.items():
            if 0 < k < n:
                total = total + curve.estimates
        return total

    def family(self):
        """CurveFamily over the available sizes, including the theta_0 row."""
        from .curves import CurveFamily

        entries = {0: (np.ones(len(self.p_grid)), np.zeros(len(self.p_grid)))}
        for n, curve in self.curves.items():
            entries[n] = (curve.estimates, curve.stderrs)
        return CurveFamily(self.p_grid, entries)


def theta_curve(
    d: int,
    n_list: Iterable[int],
    p_grid,
    replicas: int,
    seed: int,
    workers: int | None = None,
) -> ThetaResult:
    """theta_n(p) = P_p[0 <-> boundary of Lambda_n] for each requested n."""
    p_grid = np.asarray(p_grid, dtype=float)
    curves: dict[int, SweepCurve] = {}
    for n in sorted(set(int(x) for x in n_list)):
        if n < 1:
            raise InputError("theta_n needs n >= 1 (theta_0 = 1 by convention)")
        region = BoxRegion(d, n)
        curves[n] = newman_ziff_sweep(region, OneArmEvent(), p_grid, replicas, seed, workers)
    return ThetaResult(d, curves, p_grid, replicas, seed)


def theta_exact(d: int, n: int, p: float) -> float:
    """Exact theta_n by full enumeration; tiny boxes only."""
    region = BoxRegion(d, n)
    table = indicator_table(region, OneArmEvent())
    return expectation(table, ProductMeasure(p, region.n_edges))


# ---------------------------------------------------------------------------
# the exploration algorithm and its bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExploreResult:
    revealed: tuple[int, ...]
    phases: tuple[int, ...]
    frontier_ok: tuple[bool, ...]
    tau: int
    value: int

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "revealed": list(self.revealed),
                "phases": list(self.phases),
                "tau": self.tau,
                "value": self.value,
            }
        )


def explore(region: BoxRegion, k: int, omega: np.ndarray, edge_order: np.ndarray | None = None) -> ExploreResult:
    """Reference implementation of the boundary-cluster exploration.

    Grows the set V of vertices joined to the k-shell, revealing the smallest
    (in ``edge_order``) untested edge with exactly one endpoint in V; once no
    such edge exists the remaining edges are scanned in order.  Stops at the
    stopping time of the induced decision tree for the event {0 <-> boundary
    of the box}.
    """
    if not 1 <= k <= region.radius:
        raise InputError("need 1 <= k <= n")
    omega = np.asarray(omega, dtype=np.uint8)
    n_edges = region.n_edges
    if edge_order is None:
        edge_order = np.arange(n_edges)
    edge_order = np.asarray(edge_order, dtype=np.int64)
    if sorted(edge_order.tolist()) != list(range(n_edges)):
        raise InputError("edge_order must be a permutation of the edge indices")

    k_shell = {
        v for v in range(region.n_vertices) if np.max(np.abs(region.coords[v])) == k
    }
    target = set(region.boundary_indices().tolist())
    origin = region.origin
    eu, ev = region.edges[:, 0], region.edges[:, 1]

    in_v = set(k_shell)
    revealed: list[int] = []
    phases: list[int] = []
    frontier_ok: list[bool] = []
    revealed_set: set[int] = set()
    uf = UnionFind(region.n_vertices + 1)
    virt = region.n_vertices
    for b in target:
        uf.union(virt, b)
    passable = np.ones(n_edges, dtype=bool)
    value = None

    def det_zero() -> bool:
        # BFS over open-or-unrevealed edges
        seen = {origin}
        stack = [origin]
        while stack:
            x = stack.pop()
            if x in target:
                return False
            for e in np.nonzero((eu == x) | (ev == x))[0]:
                if not passable[e]:
                    continue
                y = int(ev[e]) if int(eu[e]) == x else int(eu[e])
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return True

    while len(revealed) < n_edges and value is None:
        chosen = -1
        phase = 2
        for e in edge_order:
            e = int(e)
            if e in revealed_set:
                continue
            if (int(eu[e]) in in_v) != (int(ev[e]) in in_v):
                chosen, phase = e, 1
                break
        if chosen < 0:
            for e in edge_order:
                e = int(e)
                if e not in revealed_set:
                    chosen = e
                    break
        revealed.append(chosen)
        revealed_set.add(chosen)
        phases.append(phase)
        u, v = int(eu[chosen]), int(ev[chosen])
        frontier_ok.append(phase == 2 or (u in in_v) != (v in in_v))
        if omega[chosen]:
            uf.union(u, v)
            if phase == 1:
                in_v.add(v if u in in_v else u)
            if uf.find(origin) == uf.find(virt):
                value = 1
        else:
            passable[chosen] = False
            if det_zero():
                value = 0
    if value is None:
        value = 1 if uf.find(origin) == uf.find(virt) else 0
    return ExploreResult(tuple(revealed), tuple(phases), tuple(frontier_ok), len(revealed), value)


def _explore_arrays(region: BoxRegion, k: int):
    source = np.zeros(region.n_vertices, dtype=np.bool_)
    source[np.max(np.abs(region.coords), axis=1) == k] = True
    target = np.zeros(region.n_vertices, dtype=np.bool_)
    target[region.boundary_indices()] = True
    indptr, adj_edge, adj_vert = _adjacency(region)
    eu = np.ascontiguousarray(region.edges[:, 0])
    ev = np.ascontiguousarray(region.edges[:, 1])
    return eu, ev, indptr, adj_edge, adj_vert, source, target


def explore_batch(
    region: BoxRegion,
    k: int,
    configs: np.ndarray,
    edge_order: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(revealed-bitmask, value, tau) per configuration row; E <= 64."""
    if region.n_edges > 64:
        raise InputError("batched exploration supports at most 64 edges")
    if not 1 <= k <= region.radius:
        raise InputError("need 1 <= k <= n")
    configs = np.ascontiguousarray(configs, dtype=np.uint8)
    eu, ev, indptr, adj_edge, adj_vert, source, target = _explore_arrays(region, k)
    order = np.arange(region.n_edges, dtype=np.int64) if edge_order is None else np.asarray(edge_order, dtype=np.int64)
    out_revealed = np.empty(configs.shape[0], dtype=np.uint64)
    out_value = np.empty(configs.shape[0], dtype=np.uint8)
    out_tau = np.empty(configs.shape[0], dtype=np.int64)
    K.explore_batch(
        eu, ev, indptr, adj_edge, adj_vert, region.n_vertices, configs, order,
        source, region.origin, target, out_revealed, out_value, out_tau,
    )
    return out_revealed, out_value, out_tau


def _all_configs(n_edges: int) -> np.ndarray:
    masks = np.arange(1 << n_edges, dtype=np.uint64)[:, None]
    return ((masks >> np.arange(n_edges, dtype=np.uint64)) & 1).astype(np.uint8)


@dataclass(frozen=True)
class RevealmentBoundReport:
    holds: bool
    exact: bool
    delta: np.ndarray
    rhs: np.ndarray
    delta_stderr: np.ndarray | None
    rhs_stderr: np.ndarray | None


def revealment_bound_check(
    n: int,
    k: int,
    p: float,
    d: int = 2,
    mode: str = "auto",
    samples: int = 100_000,
    seed: int = 0,
) -> RevealmentBoundReport:
    """Check delta_e <= P_p[u <-> k-shell] + P_p[v <-> k-shell] per edge.

    Exact (full enumeration) when the box has at most 14 edges, Monte Carlo
    with 3-sigma slack otherwise; the one-arm estimates come from runs
    independent of the exploration samples.
    """
    region = BoxRegion(d, n)
    n_edges = region.n_edges
    kshell = np.zeros(region.n_vertices, dtype=np.bool_)
    kshell[np.max(np.abs(region.coords), axis=1) == k] = True
    eu = np.ascontiguousarray(region.edges[:, 0])
    ev = np.ascontiguousarray(region.edges[:, 1])
    if mode == "auto":
        mode = "exact" if n_edges <= EXACT_EXPLORE_MAX_EDGES else "mc"
    if mode == "exact":
        if n_edges > EXACT_EXPLORE_MAX_EDGES:
            raise InputError(f"exact mode capped at {EXACT_EXPLORE_MAX_EDGES} edges")
        configs = _all_configs(n_edges)
        weights = ProductMeasure(p, n_edges).config_weights()
        revealed, _, _ = explore_batch(region, k, configs)
        delta = np.array(
            [weights[((revealed >> np.uint64(e)) & np.uint64(1)) == 1].sum() for e in range(n_edges)]
        )
        reach = np.empty((configs.shape[0], region.n_vertices), dtype=np.uint8)
        K.one_arm_vertex_batch(eu, ev, region.n_vertices, configs, kshell, reach)
        arm = weights @ reach.astype(np.float64)
        rhs = arm[region.edges[:, 0]] + arm[region.edges[:, 1]]
        return RevealmentBoundReport(bool(np.all(delta <= rhs + 1e-12)), True, delta, rhs, None, None)

    configs = np.stack([sample(region, p, seed, r) for r in range(samples)])
    revealed, _, _ = explore_batch(region, k, configs)
    delta = np.array(
        [np.mean(((revealed >> np.uint64(e)) & np.uint64(1)) == 1) for e in range(n_edges)]
    )
    delta_se = np.array([proportion_stderr(x, samples) for x in delta])
    arm_configs = np.stack([sample(region, p, seed, samples + r) for r in range(samples)])
    reach = np.empty((samples, region.n_vertices), dtype=np.uint8)
    K.one_arm_vertex_batch(eu, ev, region.n_vertices, arm_configs, kshell, reach)
    arm = reach.mean(axis=0)
    arm_se = np.array([proportion_stderr(x, samples) for x in arm])
    rhs = arm[region.edges[:, 0]] + arm[region.edges[:, 1]]
    rhs_se = np.sqrt(arm_se[region.edges[:, 0]] ** 2 + arm_se[region.edges[:, 1]] ** 2)
    holds = bool(np.all(delta <= rhs + 3.0 * np.sqrt(delta_se**2 + rhs_se**2) + 1e-12))
    return RevealmentBoundReport(holds, False, delta, rhs, delta_se, rhs_se)


@dataclass(frozen=True)
class InfluenceSumReport:
    holds: bool
    exact: bool
    lhs: float
    rhs: float
    lhs_stderr: float
    rhs_stderr: float
    theta_n: float
    s_n: float


def influence_sum_bound_check(
    n: int,
    p: float,
    d: int = 2,
    mode: str = "auto",
    samples: int = 10_000,
    seed: int = 0,
) -> InfluenceSumReport:
    """Check sum_e Inf_e[0 <-> boundary] >= (n / S_n) theta_n (1 - theta_n).

    S_n uses the theta_0 = 1 convention.  Exact by enumeration on boxes with
    at most 20 edges; otherwise the left side is the sampled mean number of
    pivotal edges and the thetas come from independent streams.
    """
    region = BoxRegion(d, n)
    n_edges = region.n_edges
    if mode == "auto":
        mode = "exact" if n_edges <= EXACT_TABLE_MAX_EDGES else "mc"
    if mode == "exact":
        table = indicator_table(region, OneArmEvent())
        mu = ProductMeasure(p, n_edges)
        lhs = influences(table, mu).total()
        theta_n = expectation(table, mu)
        s_n = 1.0 + sum(theta_exact(d, kk, p) for kk in range(1, n))
        rhs = (n / s_n) * theta_n * (1.0 - theta_n)
        return InfluenceSumReport(lhs >= rhs - 1e-12, True, lhs, rhs, 0.0, 0.0, theta_n, s_n)

    configs = np.stack([sample(region, p, seed, r) for r in range(samples)])
    eu, ev, indptr, adj_edge, adj_vert, _, target = _explore_arrays(region, 1)
    counts = np.empty(samples, dtype=np.int64)
    edge_counts = np.zeros(n_edges, dtype=np.int64)
    K.pivotal_count_batch(
        eu, ev, indptr, adj_edge, adj_vert, region.n_vertices, configs,
        region.origin, target, counts, edge_counts,
    )
    lhs = float(counts.mean())
    lhs_se = float(counts.std(ddof=0) / math.sqrt(samples))
    thetas = {}
    theta_ses = {}
    for j, kk in enumerate(range(1, n + 1)):
        sub = BoxRegion(d, kk)
        cfg = np.stack([sample(sub, p, seed, samples * (j + 1) + r) for r in range(samples)])
        ind = event_indicator(sub, OneArmEvent(), cfg)
        thetas[kk] = float(ind.mean())
        theta_ses[kk] = proportion_stderr(thetas[kk], samples)
    theta_n = thetas[n]
    s_n = 1.0 + sum(thetas[kk] for kk in range(1, n))
    rhs = (n / s_n) * theta_n * (1.0 - theta_n)
    d_theta = abs(n * (1 - 2 * theta_n) / s_n) * theta_ses[n]
    d_s = sum(
        (n * theta_n * (1 - theta_n) / s_n**2) * theta_ses[kk] for kk in range(1, n)
    )
    rhs_se = float(math.hypot(d_theta, d_s))
    holds = lhs + 3.0 * lhs_se >= rhs - 3.0 * rhs_se
    return InfluenceSumReport(bool(holds), False, lhs, rhs, lhs_se, rhs_se, theta_n, s_n)
