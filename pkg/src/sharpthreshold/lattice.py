"""Geometry of Z^d boxes, Z^2 rectangles, edge indexing, planar duality.

Edge indices are dense integers in construction order: vertices are visited
in lexicographic coordinate order, and from each vertex the +e_axis edges are
emitted axis by axis.  All configuration bit arrays use this indexing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .boolfn import InputError

MEMORY_BUDGET_ITEMS = 1 << 27


@dataclass(frozen=True)
class EdgeGraph:
    """Minimal graph carrier: vertex count plus an (E, 2) endpoint array."""

    n_vertices: int
    edges: np.ndarray
    name: str = "graph"

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64)
        object.__setattr__(self, "edges", e)
        if e.ndim != 2 or e.shape[1] != 2:
            raise InputError("edges must be an (E, 2) array")

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])


def cycle_graph(k: int) -> EdgeGraph:
    if k < 3:
        raise InputError("cycle needs k >= 3")
    edges = [(i, (i + 1) % k) for i in range(k)]
    return EdgeGraph(k, np.array(edges), name=f"cycle{k}")


def path_graph(k: int) -> EdgeGraph:
    if k < 2:
        raise InputError("path needs k >= 2")
    edges = [(i, i + 1) for i in range(k - 1)]
    return EdgeGraph(k, np.array(edges), name=f"path{k}")


class BoxRegion:
    """The box Lambda_n = [-n, n]^d with its internal nearest-neighbor edges."""

    def __init__(self, d: int, radius: int):
        if d < 1:
            raise InputError("dimension must be >= 1")
        if radius < 0:
            raise InputError("radius must be >= 0")
        side = 2 * radius + 1
        n_vertices = side**d
        if n_vertices * d > MEMORY_BUDGET_ITEMS:
            raise InputError(f"box ({d}, {radius}) exceeds the memory budget")
        self.d = d
        self.radius = radius
        self.side = side
        self.n_vertices = int(n_vertices)
        # lexicographic coordinates: first axis most significant
        grids = np.meshgrid(*([np.arange(-radius, radius + 1)] * d), indexing="ij")
        self.coords = np.stack([g.ravel() for g in grids], axis=1)
        edges = []
        strides = side ** np.arange(d - 1, -1, -1)
        for axis in range(d):
            ok = self.coords[:, axis] < radius
            src = np.nonzero(ok)[0]
            dst = src + strides[axis]
            edges.append(np.stack([src, dst], axis=1))
        order = np.lexsort(
            (np.concatenate([np.full(len(e), a) for a, e in enumerate(edges)]),
             np.concatenate([e[:, 0] for e in edges]))
        )
        self.edges = np.concatenate(edges, axis=0)[order].astype(np.int64)
        self.origin = self.vertex_index(np.zeros(d, dtype=int))

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def vertex_index(self, coord) -> int:
        coord = np.asarray(coord, dtype=int)
        if coord.shape != (self.d,) or np.any(np.abs(coord) > self.radius):
            raise InputError(f"{coord} outside the box")
        digits = coord + self.radius
        return int(np.dot(digits, self.side ** np.arange(self.d - 1, -1, -1)))

    def boundary_indices(self) -> np.ndarray:
        """Vertices of Lambda_n \\ Lambda_{n-1}: some |coordinate| equals n."""
        if self.radius == 0:
            return np.array([self.origin])
        return np.nonzero(np.max(np.abs(self.coords), axis=1) == self.radius)[0]


def build_box(d: int, n: int) -> BoxRegion:
    return BoxRegion(d, n)


class RectangleRegion:
    """R(n, m) = [0, n] x [0, m] with named sides.

    Left side is {0} x [0, m], right is {n} x [0, m], bottom is [0, n] x {0},
    top is [0, n] x {m}.
    """

    def __init__(self, n: int, m: int):
        if n < 1 or m < 1:
            raise InputError("rectangle needs n, m >= 1")
        self.n = n
        self.m = m
        self.n_vertices = (n + 1) * (m + 1)
        xs, ys = np.meshgrid(np.arange(n + 1), np.arange(m + 1), indexing="ij")
        self.coords = np.stack([xs.ravel(), ys.ravel()], axis=1)
        edges = []
        for x in range(n + 1):
            for y in range(m + 1):
                v = x * (m + 1) + y
                if x < n:
                    edges.append((v, v + (m + 1)))
                if y < m:
                    edges.append((v, v + 1))
        self.edges = np.array(edges, dtype=np.int64)
        self.left = np.arange(m + 1)
        self.right = np.arange(m + 1) + n * (m + 1)
        self.bottom = np.arange(n + 1) * (m + 1)
        self.top = np.arange(n + 1) * (m + 1) + m

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def vertex_index(self, x: int, y: int) -> int:
        if not (0 <= x <= self.n and 0 <= y <= self.m):
            raise InputError(f"({x}, {y}) outside the rectangle")
        return x * (self.m + 1) + y

    def dual_map(self) -> "DualMap":
        return DualMap(self)


def build_rectangle(n: int, m: int) -> RectangleRegion:
    return RectangleRegion(n, m)


class DualMap:
    """Edge-for-edge bijection with the dual lattice of a rectangle.

    Dual vertices sit at (1/2, 1/2) + Z^2; here they are shifted by
    (+1/2, +1/2) to integer coordinates, so the dual of the horizontal primal
    edge (x,y)-(x+1,y) is the vertical dual edge (x+1,y)-(x+1,y+1) and the
    dual of the vertical primal edge (x,y)-(x,y+1) is (x,y+1)-(x+1,y+1).
    Dual edge i corresponds to primal edge i, so a dual configuration uses
    the same indexing.
    """

    def __init__(self, region: RectangleRegion):
        self.region = region
        coords_of = region.coords
        dual_pairs = []
        for (u, v) in region.edges:
            xu, yu = coords_of[u]
            xv, yv = coords_of[v]
            if yu == yv:  # horizontal primal edge, endpoints x and x+1
                x = min(xu, xv)
                dual_pairs.append(((x + 1, yu), (x + 1, yu + 1)))
            else:  # vertical primal edge
                y = min(yu, yv)
                dual_pairs.append(((xu, y + 1), (xu + 1, y + 1)))
        vertex_ids: dict[tuple[int, int], int] = {}
        endpoint_rows = []
        for a, b in dual_pairs:
            for c in (a, b):
                if c not in vertex_ids:
                    vertex_ids[c] = len(vertex_ids)
            endpoint_rows.append((vertex_ids[a], vertex_ids[b]))
        self.vertex_coords = np.array(sorted(vertex_ids, key=vertex_ids.get), dtype=np.int64)
        self.edges = np.array(endpoint_rows, dtype=np.int64)
        self.n_vertices = len(vertex_ids)

    def side_ids(self, side: str) -> np.ndarray:
        """Dual vertices on an extreme row/column of the dual graph."""
        xs = self.vertex_coords[:, 0]
        ys = self.vertex_coords[:, 1]
        if side == "top":
            return np.nonzero(ys == ys.max())[0]
        if side == "bottom":
            return np.nonzero(ys == ys.min())[0]
        if side == "left":
            return np.nonzero(xs == xs.min())[0]
        if side == "right":
            return np.nonzero(xs == xs.max())[0]
        raise InputError(f"unknown side {side!r}")

    def to_json(self) -> str:
        return json.dumps(
            {
                "dual_vertices": self.vertex_coords.tolist(),
                "dual_edges": self.edges.tolist(),
            }
        )


def dual_configuration(region: RectangleRegion, omega: np.ndarray) -> np.ndarray:
    """omega*_{e*} = 1 - omega_e, carried on the shared edge indexing."""
    omega = np.asarray(omega, dtype=np.uint8)
    if omega.shape != (region.n_edges,):
        raise InputError("configuration length must equal the edge count")
    return (1 - omega).astype(np.uint8)


def region_to_json(region) -> str:
    doc = {
        "n_vertices": int(region.n_vertices),
        "edges": np.asarray(region.edges).tolist(),
    }
    if isinstance(region, RectangleRegion):
        doc["coords"] = region.coords.tolist()
        doc["sides"] = {
            "left": region.left.tolist(),
            "right": region.right.tolist(),
            "bottom": region.bottom.tolist(),
            "top": region.top.tolist(),
        }
    if isinstance(region, BoxRegion):
        doc["coords"] = region.coords.tolist()
        doc["boundary"] = region.boundary_indices().tolist()
    return json.dumps(doc)
