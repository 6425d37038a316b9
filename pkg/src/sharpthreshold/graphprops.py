"""Erdos-Renyi G(n, p) experiments: graph properties as boolean functions.

The N = C(n, 2) edge bits are indexed by the lexicographic pairing:
index 0 is {0,1}, then {0,2}, ..., {0,n-1}, {1,2}, ...  Vertices are
0-based internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .boolfn import InputError
from .curves import SweepCurve
from .percolation import UnionFind
from .rng import stream
from .stats import binomial_upper_tails, proportion_stderr
from .threshold import ThresholdWindow, window_from_curve


@dataclass(frozen=True)
class RandomGraphSpec:
    """The edge-bit universe of G(n, p)."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InputError("need at least 2 vertices")

    @property
    def n_edges(self) -> int:
        return self.n * (self.n - 1) // 2

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        rows, cols = np.triu_indices(self.n, 1)
        return rows.astype(np.int64), cols.astype(np.int64)

    def pair_index(self, i: int, j: int) -> int:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise InputError("need two distinct vertices")
        i, j = min(i, j), max(i, j)
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def index_pair(self, k: int) -> tuple[int, int]:
        rows, cols = self.edge_arrays()
        return int(rows[k]), int(cols[k])


def _components(spec: RandomGraphSpec, omega: np.ndarray) -> UnionFind:
    omega = np.asarray(omega, dtype=np.uint8)
    if omega.shape != (spec.n_edges,):
        raise InputError("configuration length must be C(n, 2)")
    rows, cols = spec.edge_arrays()
    uf = UnionFind(spec.n)
    for e in np.nonzero(omega)[0]:
        uf.union(int(rows[e]), int(cols[e]))
    return uf


def is_connected(spec: RandomGraphSpec, omega: np.ndarray) -> bool:
    return _components(spec, omega).n_components == 1


def has_component_of_size(spec: RandomGraphSpec, omega: np.ndarray, r: int) -> bool:
    if not 1 <= r <= spec.n:
        raise InputError("need 1 <= r <= n")
    if r == 1:
        return True
    uf = _components(spec, omega)
    sizes: dict[int, int] = {}
    for v in range(spec.n):
        root = uf.find(v)
        sizes[root] = sizes.get(root, 0) + 1
        if sizes[root] >= r:
            return True
    return False


def default_giant_size(n: int) -> int:
    """ceil(n^(2/3)): grows faster than log n and is o(n)."""
    return int(math.ceil(n ** (2.0 / 3.0)))


# ---------------------------------------------------------------------------
# threshold experiments via Newman-Ziff on the complete graph
# ---------------------------------------------------------------------------


def _hitting_counts(spec: RandomGraphSpec, mode: int, r_target: int, replicas: int, seed: int) -> np.ndarray:
    rows, cols = spec.edge_arrays()
    n_edges = spec.n_edges
    hits = np.empty(replicas, dtype=np.int64)
    base_chunk = max(1024, 4 * spec.n)
    for r in range(replicas):
        rng = stream(seed, r)
        parent = np.arange(spec.n, dtype=np.int64)
        size = np.ones(spec.n, dtype=np.int64)
        seen = np.zeros(n_edges, dtype=np.uint8)
        counters = np.array([0, spec.n, 1], dtype=np.int64)
        chunk = base_chunk
        m = -1
        while m < 0:
            draws = rng.integers(0, n_edges, size=chunk).astype(np.int64)
            m = K.stream_hitting(rows, cols, draws, parent, size, seen, counters, mode, r_target)
            chunk = min(chunk * 2, 4 * n_edges)
        hits[r] = m
    return hits


def threshold_experiment(
    property_name: str,
    n: int,
    p_grid,
    replicas: int,
    seed: int,
    epsilon: float = 0.1,
    r: int | None = None,
) -> tuple[SweepCurve, ThresholdWindow]:
    """Estimate P_p[property] on the grid and report the epsilon-window.

    ``connectivity`` is Example-1 territory (threshold near log n / n);
    ``giant`` asks for a component of size >= r, default ceil(n^(2/3)),
    with threshold near 1/n.
    """
    spec = RandomGraphSpec(n)
    if property_name == "connectivity":
        mode, r_target = 1, 0
    elif property_name == "giant":
        mode, r_target = 2, r if r is not None else default_giant_size(n)
    else:
        raise InputError(f"unknown property {property_name!r}; use 'connectivity' or 'giant'")
    p_grid = np.asarray(p_grid, dtype=float)
    hits = _hitting_counts(spec, mode, r_target, replicas, seed)
    estimates = np.empty(len(p_grid))
    stderrs = np.empty(len(p_grid))
    n_edges = spec.n_edges
    for j, p in enumerate(p_grid):
        tails = np.append(binomial_upper_tails(n_edges, p), 0.0)
        g = tails[hits]
        estimates[j] = g.mean()
        stderrs[j] = g.std(ddof=0) / math.sqrt(replicas)
    curve = SweepCurve(
        p_grid,
        np.clip(estimates, 0.0, 1.0),
        stderrs,
        replicas,
        seed,
        meta={"method": "newman-ziff", "property": property_name, "n": n, "r": r_target},
    )
    window = window_from_curve(curve, epsilon)
    return curve, window


def permute_configuration(spec: RandomGraphSpec, omega: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Relabel vertices by ``perm`` and carry the edge bits along."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(spec.n)):
        raise InputError("perm must be a permutation of the vertices")
    out = np.zeros_like(np.asarray(omega, dtype=np.uint8))
    rows, cols = spec.edge_arrays()
    for e in range(spec.n_edges):
        out[spec.pair_index(int(perm[rows[e]]), int(perm[cols[e]]))] = omega[e]
    return out
