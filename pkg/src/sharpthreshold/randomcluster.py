"""Finite-volume random-cluster model with free boundary conditions.

The measure on configurations omega in {0,1}^E is proportional to
p^|omega| (1-p)^(|E|-|omega|) q^k(omega), where k counts connected
components of (V, open edges) **including isolated vertices** (the Potts
coupling needs a color for every vertex, which forces that convention).

Exact enumeration backs everything: the heat-bath conditional, the sampler,
and the monotonic-measure inequalities are all validated against explicit
probability tables on small graphs before any large run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .boolfn import BooleanFunctionTable, InputError, popcounts
from .decisiontree import DecisionTree, revealment_exact
from .percolation import UnionFind, _adjacency
from .rng import stream
from .threshold import DomainError

EXACT_MEASURE_MAX_EDGES = 20
MONOTONICITY_MAX_EDGES = 14
FKG_MAX_EDGES = 16
MONOTONIC_OSSS_MAX_EDGES = 14


@dataclass(frozen=True)
class RandomClusterParams:
    p: float
    q: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InputError("p must lie in [0, 1]")
        if self.q <= 0:
            raise InputError("q must be positive")

    def require_monotonic(self) -> None:
        if self.q < 1.0:
            raise InputError("monotonicity-dependent operations require q >= 1")


def component_count(region, omega: np.ndarray) -> int:
    """k(omega): connected components of (V, open edges), isolated included."""
    omega = np.asarray(omega, dtype=np.uint8)
    uf = UnionFind(region.n_vertices)
    eu, ev = region.edges[:, 0], region.edges[:, 1]
    for e in np.nonzero(omega)[0]:
        uf.union(int(eu[e]), int(ev[e]))
    return uf.n_components


class ExactMeasure:
    """Explicit probability table of the random-cluster measure."""

    def __init__(self, region, params: RandomClusterParams):
        n_edges = region.n_edges
        if n_edges > EXACT_MEASURE_MAX_EDGES:
            raise InputError(
                f"exact enumeration refused: {n_edges} edges exceeds the "
                f"{EXACT_MEASURE_MAX_EDGES}-edge cap"
            )
        self.region = region
        self.params = params
        self.n_edges = n_edges
        eu = np.ascontiguousarray(region.edges[:, 0])
        ev = np.ascontiguousarray(region.edges[:, 1])
        self.component_counts = K.component_count_masks(region.n_vertices, eu, ev, n_edges)
        pc = popcounts(n_edges).astype(np.float64)
        p, q = params.p, params.q
        with np.errstate(divide="ignore"):
            base = np.where(
                (pc > 0) & (p == 0.0), -np.inf, pc * (np.log(p) if p > 0 else 0.0)
            ) + np.where(
                (n_edges - pc > 0) & (p == 1.0),
                -np.inf,
                (n_edges - pc) * (np.log1p(-p) if p < 1 else 0.0),
            )
        logw = base + self.component_counts * math.log(q)
        w = np.exp(logw)
        self.partition_function = float(w.sum())
        self.probabilities = w / self.partition_function
        if abs(self.probabilities.sum() - 1.0) > 1e-10:
            raise ArithmeticError("probabilities failed to normalize")

    def probability(self, mask: int) -> float:
        return float(self.probabilities[mask])

    def config_weights(self) -> np.ndarray:
        return self.probabilities

    def expectation(self, table: np.ndarray) -> float:
        return float(np.dot(np.asarray(table, dtype=np.float64), self.probabilities))

    def variance(self, table: np.ndarray) -> float:
        t = np.asarray(table, dtype=np.float64)
        m = self.expectation(t)
        return self.expectation(t * t) - m * m

    def edge_marginal(self, e: int) -> float:
        masks = np.arange(1 << self.n_edges)
        return float(self.probabilities[(masks >> e) & 1 == 1].sum())

    def conditional_open_given_rest(self, e: int, rest_mask: int) -> float:
        """mu[omega_e = 1 | all other edges equal rest_mask's bits]."""
        bit = 1 << e
        hi = self.probabilities[rest_mask | bit]
        lo = self.probabilities[rest_mask & ~bit]
        if hi + lo == 0.0:
            raise DomainError("conditioning event has zero probability")
        return float(hi / (hi + lo))

    def to_csv(self) -> str:
        lines = ["mask,probability"]
        for mask, prob in enumerate(self.probabilities):
            lines.append(f"{mask},{float(prob)!r}")
        return "\n".join(lines) + "\n"


def exact_measure(region, params: RandomClusterParams) -> ExactMeasure:
    return ExactMeasure(region, params)


# ---------------------------------------------------------------------------
# heat-bath dynamics
# ---------------------------------------------------------------------------


def heat_bath_probability(region, omega: np.ndarray, e: int, params: RandomClusterParams) -> float:
    """Conditional probability that edge e is open given every other edge.

    p when the endpoints of e are joined off e, else p / (p + q (1 - p)):
    the ratio of the configuration weights, where closing e changes the
    component count by one exactly when the endpoints are not joined off e.
    """
    omega = np.asarray(omega, dtype=np.uint8)
    eu, ev = int(region.edges[e, 0]), int(region.edges[e, 1])
    uf = UnionFind(region.n_vertices)
    for j in np.nonzero(omega)[0]:
        if int(j) != e:
            uf.union(int(region.edges[j, 0]), int(region.edges[j, 1]))
    p, q = params.p, params.q
    if uf.find(eu) == uf.find(ev):
        return p
    return p / (p + q * (1.0 - p))


def heat_bath_step(region, omega: np.ndarray, e: int, params: RandomClusterParams, draw: float) -> np.ndarray:
    """Resample edge e from its exact conditional; draw is uniform on [0,1)."""
    out = np.array(omega, dtype=np.uint8, copy=True)
    out[e] = 1 if draw < heat_bath_probability(region, omega, e, params) else 0
    return out


def sample(
    region,
    params: RandomClusterParams,
    sweeps: int,
    burn_in: int = 100,
    seed: int = 0,
    replica: int = 0,
    trace: bool = False,
):
    """Systematic-scan heat bath, initialized from Bernoulli(p).

    Returns the final configuration; with ``trace=True`` also returns
    (sweep, |omega|, k(omega)) rows recorded after each post-burn-in sweep.
    """
    if sweeps < 0 or burn_in < 0:
        raise InputError("sweeps and burn_in must be >= 0")
    rng = stream(seed, replica)
    n_edges = region.n_edges
    state = (rng.random(n_edges) < params.p).astype(np.uint8)
    eu = np.ascontiguousarray(region.edges[:, 0])
    ev = np.ascontiguousarray(region.edges[:, 1])
    indptr, adj_edge, adj_vert = _adjacency(region)
    scan = np.arange(n_edges, dtype=np.int64)
    rows = []
    done = 0
    total = burn_in + sweeps
    chunk_rows = max(1, min(total, (1 << 20) // max(n_edges, 1)))
    while done < total:
        take = min(chunk_rows, total - done)
        uniforms = rng.random((take, n_edges))
        if trace and done + take > burn_in:
            for s in range(take):
                K.heat_bath_chain(
                    eu, ev, indptr, adj_edge, adj_vert, region.n_vertices,
                    state, scan, params.p, params.q, uniforms[s : s + 1],
                )
                sweep_index = done + s + 1
                if sweep_index > burn_in:
                    rows.append(
                        (sweep_index - burn_in, int(state.sum()), component_count(region, state))
                    )
        else:
            K.heat_bath_chain(
                eu, ev, indptr, adj_edge, adj_vert, region.n_vertices,
                state, scan, params.p, params.q, uniforms,
            )
        done += take
    if trace:
        return state, rows
    return state


def edge_marginal_estimate(
    region,
    params: RandomClusterParams,
    sweeps: int,
    burn_in: int = 100,
    seed: int = 0,
    replica: int = 0,
) -> np.ndarray:
    """Ergodic per-edge occupation averages over the post-burn-in sweeps."""
    if sweeps < 1:
        raise InputError("need at least one sweep to average over")
    rng = stream(seed, replica)
    n_edges = region.n_edges
    state = (rng.random(n_edges) < params.p).astype(np.uint8)
    eu = np.ascontiguousarray(region.edges[:, 0])
    ev = np.ascontiguousarray(region.edges[:, 1])
    indptr, adj_edge, adj_vert = _adjacency(region)
    scan = np.arange(n_edges, dtype=np.int64)
    totals = np.zeros(n_edges, dtype=np.int64)
    for s in range(burn_in + sweeps):
        K.heat_bath_chain(
            eu, ev, indptr, adj_edge, adj_vert, region.n_vertices,
            state, scan, params.p, params.q, rng.random((1, n_edges)),
        )
        if s >= burn_in:
            totals += state
    return totals / sweeps


def trace_to_csv(rows) -> str:
    lines = ["sweep,n_open,components"]
    for sweep, n_open, comps in rows:
        lines.append(f"{sweep},{n_open},{comps}")
    return "\n".join(lines) + "\n"


def sweep_distribution(region, params: RandomClusterParams, pi: np.ndarray) -> np.ndarray:
    """Push a distribution vector through one full systematic heat-bath sweep.

    Uses the sampler's own conditional formula (connectivity off e), so a
    fixed point certifies stationarity of the implemented dynamics.
    """
    n_edges = region.n_edges
    pi = np.array(pi, dtype=np.float64, copy=True)
    masks = np.arange(1 << n_edges)
    for e in range(n_edges):
        bit = 1 << e
        rest = masks[(masks & bit) == 0]
        others = [j for j in range(n_edges) if j != e]
        sub_edges = region.edges[others]
        u, v = int(region.edges[e, 0]), int(region.edges[e, 1])
        conn_table = K.mask_event_table(
            np.ascontiguousarray(sub_edges[:, 0]),
            np.ascontiguousarray(sub_edges[:, 1]),
            region.n_vertices,
            n_edges - 1,
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            u,
            v,
        )
        # compress each full rest-mask to the (E-1)-bit submask in 'others' order
        comp = np.zeros(rest.size, dtype=np.int64)
        for j, m in enumerate(others):
            comp |= ((rest >> m) & 1) << j
        connected_off_e = conn_table[comp].astype(bool)
        p, q = params.p, params.q
        cond = np.where(connected_off_e, p, p / (p + q * (1.0 - p)))
        total = pi[rest] + pi[rest | bit]
        pi[rest | bit] = total * cond
        pi[rest] = total * (1.0 - cond)
    return pi


# ---------------------------------------------------------------------------
# monotonicity / positive association
# ---------------------------------------------------------------------------


def monotonicity_check(region, params: RandomClusterParams, tol: float = 1e-12):
    """Exhaustively verify the monotonic-measure property of the conditionals.

    For every edge e, conditioning set F and configurations xi <= zeta on F
    with positive probability, mu[omega_e=1 | xi] <= mu[omega_e=1 | zeta].
    Chains of single-coordinate increments cover all comparable pairs.
    Returns (True, None) or (False, witness) with a concrete violating
    (e, F, xi, j) tuple.
    """
    n_edges = region.n_edges
    if n_edges > MONOTONICITY_MAX_EDGES:
        raise InputError(f"monotonicity check capped at {MONOTONICITY_MAX_EDGES} edges")
    measure = ExactMeasure(region, params)
    probs = measure.probabilities
    shaped = probs.reshape((2,) * n_edges)
    axis_of = lambda j: n_edges - 1 - j
    for e in range(n_edges):
        open_e = np.take(shaped, 1, axis=axis_of(e))
        both = open_e + np.take(shaped, 0, axis=axis_of(e))
        reduced = [j for j in range(n_edges) if j != e]  # axis r holds edge reduced[::-1][r]
        axes_edges = list(reversed(reduced))
        for f_mask in range(1 << (n_edges - 1)):
            subset = [reduced[t] for t in range(n_edges - 1) if (f_mask >> t) & 1]
            drop = tuple(r for r in range(len(axes_edges)) if axes_edges[r] not in subset)
            numer = open_e.sum(axis=drop) if drop else open_e
            denom = both.sum(axis=drop) if drop else both
            with np.errstate(invalid="ignore", divide="ignore"):
                cond = np.where(denom > 0, numer / np.maximum(denom, 1e-300), np.nan)
            kept_edges = [axes_edges[r] for r in range(len(axes_edges)) if r not in drop]
            for axis_pos, j in enumerate(kept_edges):
                low = np.take(cond, 0, axis=axis_pos)
                high = np.take(cond, 1, axis=axis_pos)
                ok = np.isnan(low) | np.isnan(high) | (low <= high + tol)
                if not np.all(ok):
                    where = np.argwhere(~ok)[0]
                    xi = {}
                    rest = [ke for ke in kept_edges if ke != j]
                    for val, edge_id in zip(where, rest):
                        xi[edge_id] = int(val)
                    xi[j] = 0
                    return False, (e, tuple(sorted(subset)), xi, j)
    return True, None


def _require_increasing(table: np.ndarray, n_edges: int, what: str) -> None:
    idx = np.arange(1 << n_edges)
    for j in range(n_edges):
        bad = np.nonzero(table > table[idx | (1 << j)])[0]
        if bad.size:
            raise InputError(f"{what} is not increasing: flipping edge {j} up at mask {int(bad[0])} lowers it")


def fkg_check(region, params: RandomClusterParams, f_table: np.ndarray, g_table: np.ndarray, tol: float = 1e-12) -> bool:
    """Positive association E[fg] >= E[f] E[g] for increasing f, g."""
    n_edges = region.n_edges
    if n_edges > FKG_MAX_EDGES:
        raise InputError(f"FKG check capped at {FKG_MAX_EDGES} edges")
    f_table = np.asarray(f_table, dtype=np.float64)
    g_table = np.asarray(g_table, dtype=np.float64)
    _require_increasing(f_table, n_edges, "f")
    _require_increasing(g_table, n_edges, "g")
    measure = ExactMeasure(region, params)
    both = measure.expectation(f_table * g_table)
    return bool(both >= measure.expectation(f_table) * measure.expectation(g_table) - tol)


def conditional_influence(f: BooleanFunctionTable | np.ndarray, measure: ExactMeasure, i: int) -> float:
    """Inf_i^mu(f) = mu[f | omega_i = 1] - mu[f | omega_i = 0], exact."""
    table = f.values if isinstance(f, BooleanFunctionTable) else np.asarray(f, dtype=np.float64)
    n_edges = measure.n_edges
    if not 1 <= i <= n_edges:
        raise InputError(f"i={i} outside [1, {n_edges}]")
    bit = 1 << (i - 1)
    masks = np.arange(1 << n_edges)
    on = (masks & bit) != 0
    w = measure.probabilities
    w_on = w[on].sum()
    w_off = w[~on].sum()
    if w_on <= 0.0 or w_off <= 0.0:
        raise DomainError("conditioning on a zero-probability edge state")
    t = table.astype(np.float64)
    return float(np.dot(t[on], w[on]) / w_on - np.dot(t[~on], w[~on]) / w_off)


@dataclass(frozen=True)
class GrahamGrimmettReport:
    variance: float
    bound_sum: float
    min_edge_variance: float
    ratio: float


def graham_grimmett_report(f: BooleanFunctionTable | np.ndarray, measure: ExactMeasure) -> GrahamGrimmettReport:
    """Var_mu(f) against (1/min_i Var_mu[omega_i]) sum Inf_i / log(1/Inf_i).

    The theorem's constant is unspecified, so the realized constant
    Var * min_edge_variance / bound_sum is reported, never asserted.
    """
    measure.params.require_monotonic()
    table = f.values if isinstance(f, BooleanFunctionTable) else np.asarray(f, dtype=np.float64)
    var = measure.variance(table)
    n_edges = measure.n_edges
    terms = 0.0
    for i in range(1, n_edges + 1):
        inf_i = conditional_influence(table, measure, i)
        inf_i = abs(inf_i)
        if inf_i <= 0.0:
            continue
        if inf_i >= 1.0:
            terms = math.inf
            break
        terms += inf_i / math.log(1.0 / inf_i)
    marginals = np.array([measure.edge_marginal(e) for e in range(n_edges)])
    min_var = float(np.min(marginals * (1.0 - marginals)))
    if var == 0.0:
        ratio = 0.0
    elif terms == 0.0 or math.isinf(terms):
        ratio = 0.0 if math.isinf(terms) else math.inf
    else:
        ratio = var * min_var / terms
    return GrahamGrimmettReport(var, terms, min_var, ratio)


@dataclass(frozen=True)
class MonotonicOSSSResult:
    variance: float
    rhs: float
    holds: bool
    delta: np.ndarray
    influence_values: np.ndarray


def monotonic_osss_check(
    f: BooleanFunctionTable,
    measure: ExactMeasure,
    tree: DecisionTree,
    tol: float = 1e-12,
) -> MonotonicOSSSResult:
    """Var_mu(f) <= sum_i delta_i(T) Inf_i^mu(f) for monotonic mu, increasing f.

    No p(1-p) factor appears in the monotonic statement.  Revealments are
    computed under mu by exhaustive weighting of the transcript tree.
    """
    measure.params.require_monotonic()
    n_edges = measure.n_edges
    if n_edges > MONOTONIC_OSSS_MAX_EDGES:
        raise InputError(f"monotonic OSSS check capped at {MONOTONIC_OSSS_MAX_EDGES} edges")
    if not f.monotone:
        raise InputError("the monotonic OSSS statement needs an increasing f")
    delta = revealment_exact(tree, f, measure.probabilities).delta
    infl = np.array([conditional_influence(f, measure, i) for i in range(1, n_edges + 1)])
    var = measure.variance(f.values)
    rhs = float(np.dot(delta, infl))
    return MonotonicOSSSResult(var, rhs, var <= rhs + tol, delta, infl)


# ---------------------------------------------------------------------------
# Potts coupling and the self-dual point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PottsColoring:
    q: int
    colors: np.ndarray  # one color in 1..q per vertex

    def __post_init__(self):
        if np.any(self.colors < 1) or np.any(self.colors > self.q):
            raise InputError("colors must lie in 1..q")


def potts_coloring(region, omega: np.ndarray, q: int, seed: int, replica: int = 0) -> PottsColoring:
    """Color every open component uniformly and independently."""
    if int(q) != q or q < 2:
        raise InputError("Potts coloring needs an integer q >= 2")
    q = int(q)
    omega = np.asarray(omega, dtype=np.uint8)
    uf = UnionFind(region.n_vertices)
    eu, ev = region.edges[:, 0], region.edges[:, 1]
    for e in np.nonzero(omega)[0]:
        uf.union(int(eu[e]), int(ev[e]))
    roots = np.array([uf.find(v) for v in range(region.n_vertices)])
    rng = stream(seed, replica)
    root_color = {r: int(rng.integers(1, q + 1)) for r in sorted(set(roots.tolist()))}
    colors = np.array([root_color[r] for r in roots], dtype=np.int64)
    return PottsColoring(q, colors)


def self_dual_point(q: float) -> float:
    """p_c of the planar random-cluster model: sqrt(q) / (1 + sqrt(q))."""
    if q <= 0:
        raise DomainError("q must be positive")
    root = math.sqrt(q)
    return root / (1.0 + root)
