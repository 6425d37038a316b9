"""Compiled union-find / exploration kernels.

Everything here takes plain numpy arrays; the public modules own the region
objects, RNG streams, and statistics.  Union-find state is single-owner and
never shared across replicas.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return False
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return True


@njit(cache=True, nogil=True)
def nz_two_terminal_batch(eu, ev, nv_total, orders, pre_a, pre_b, src, dst, out):
    """Hitting counts: number of inserted edges when src first meets dst."""
    n_rep, n_edges = orders.shape
    for r in range(n_rep):
        parent = np.arange(nv_total, dtype=np.int64)
        size = np.ones(nv_total, dtype=np.int64)
        for j in range(pre_a.size):
            _union(parent, size, pre_a[j], pre_b[j])
        if _find(parent, src) == _find(parent, dst):
            out[r] = 0
            continue
        m = n_edges + 1
        for t in range(n_edges):
            e = orders[r, t]
            _union(parent, size, eu[e], ev[e])
            if _find(parent, src) == _find(parent, dst):
                m = t + 1
                break
        out[r] = m


@njit(cache=True, nogil=True)
def event_check_batch(eu, ev, nv_total, configs, pre_a, pre_b, src, dst, out):
    """Per-configuration src <-> dst connectivity over open edges."""
    n_rep = configs.shape[0]
    n_edges = eu.size
    for r in range(n_rep):
        parent = np.arange(nv_total, dtype=np.int64)
        size = np.ones(nv_total, dtype=np.int64)
        for j in range(pre_a.size):
            _union(parent, size, pre_a[j], pre_b[j])
        for e in range(n_edges):
            if configs[r, e]:
                _union(parent, size, eu[e], ev[e])
        out[r] = 1 if _find(parent, src) == _find(parent, dst) else 0


@njit(cache=True, nogil=True)
def mask_event_table(eu, ev, nv_total, n_edges, pre_a, pre_b, src, dst):
    """src <-> dst indicator for every edge-subset mask (little-endian bits)."""
    out = np.zeros(1 << n_edges, dtype=np.uint8)
    for mask in range(1 << n_edges):
        parent = np.arange(nv_total, dtype=np.int64)
        size = np.ones(nv_total, dtype=np.int64)
        for j in range(pre_a.size):
            _union(parent, size, pre_a[j], pre_b[j])
        for e in range(n_edges):
            if (mask >> e) & 1:
                _union(parent, size, eu[e], ev[e])
        if _find(parent, src) == _find(parent, dst):
            out[mask] = 1
    return out


@njit(cache=True, nogil=True)
def component_count_masks(nv, eu, ev, n_edges):
    """k(omega) for every edge-subset mask; isolated vertices count."""
    out = np.zeros(1 << n_edges, dtype=np.int64)
    for mask in range(1 << n_edges):
        parent = np.arange(nv, dtype=np.int64)
        size = np.ones(nv, dtype=np.int64)
        comps = nv
        for e in range(n_edges):
            if (mask >> e) & 1:
                if _union(parent, size, eu[e], ev[e]):
                    comps -= 1
        out[mask] = comps
    return out


@njit(cache=True, nogil=True)
def component_count_configs(nv, eu, ev, configs):
    n_rep = configs.shape[0]
    n_edges = eu.size
    out = np.zeros(n_rep, dtype=np.int64)
    for r in range(n_rep):
        parent = np.arange(nv, dtype=np.int64)
        size = np.ones(nv, dtype=np.int64)
        comps = nv
        for e in range(n_edges):
            if configs[r, e]:
                if _union(parent, size, eu[e], ev[e]):
                    comps -= 1
        out[r] = comps
    return out


@njit(cache=True, nogil=True)
def one_arm_vertex_batch(eu, ev, nv, configs, target, out):
    """out[r, u] = 1 iff u is joined to the target set in configuration r."""
    n_rep = configs.shape[0]
    n_edges = eu.size
    virt = nv
    for r in range(n_rep):
        parent = np.arange(nv + 1, dtype=np.int64)
        size = np.ones(nv + 1, dtype=np.int64)
        for u in range(nv):
            if target[u]:
                _union(parent, size, virt, u)
        for e in range(n_edges):
            if configs[r, e]:
                _union(parent, size, eu[e], ev[e])
        root = _find(parent, virt)
        for u in range(nv):
            out[r, u] = 1 if _find(parent, u) == root else 0


@njit(cache=True, nogil=True)
def _reachable(adj_indptr, adj_edge, adj_vert, passable, origin, target, visited, queue):
    """BFS from origin over passable edges; True iff a target vertex is hit."""
    if target[origin]:
        return True
    for i in range(visited.size):
        visited[i] = 0
    visited[origin] = 1
    queue[0] = origin
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for ptr in range(adj_indptr[x], adj_indptr[x + 1]):
            if not passable[adj_edge[ptr]]:
                continue
            y = adj_vert[ptr]
            if visited[y]:
                continue
            if target[y]:
                return True
            visited[y] = 1
            queue[tail] = y
            tail += 1
    return False


@njit(cache=True, nogil=True)
def explore_batch(
    eu,
    ev,
    adj_indptr,
    adj_edge,
    adj_vert,
    nv,
    configs,
    order,
    source,
    origin,
    target,
    out_revealed,
    out_value,
    out_tau,
):
    """The boundary-cluster exploration algorithm, run to its stopping time.

    Phase 1 grows the set V of vertices known to be joined to the source
    shell, always revealing the smallest untested edge with exactly one
    endpoint in V; when none exists the remaining edges are scanned in order.
    Stops as soon as the origin-to-target indicator is determined.  Returns a
    bitmask (over edge indices) of the edges revealed at or before tau.
    """
    n_rep = configs.shape[0]
    n_edges = eu.size
    virt = nv
    for r in range(n_rep):
        parent = np.arange(nv + 1, dtype=np.int64)
        size = np.ones(nv + 1, dtype=np.int64)
        for u in range(nv):
            if target[u]:
                _union(parent, size, virt, u)
        in_v = source.copy()
        revealed = np.zeros(n_edges, dtype=np.uint8)
        passable = np.ones(n_edges, dtype=np.uint8)  # open or unrevealed
        reveal_seq = np.empty(n_edges, dtype=np.int64)
        visited = np.empty(nv, dtype=np.uint8)
        queue = np.empty(nv, dtype=np.int64)
        step = 0
        determined = False
        value = 0
        while step < n_edges and not determined:
            chosen = -1
            for t in range(n_edges):
                e = order[t]
                if revealed[e]:
                    continue
                if in_v[eu[e]] != in_v[ev[e]]:
                    chosen = e
                    break
            if chosen == -1:
                for t in range(n_edges):
                    e = order[t]
                    if not revealed[e]:
                        chosen = e
                        break
            e = chosen
            revealed[e] = 1
            reveal_seq[step] = e
            step += 1
            if configs[r, e]:
                _union(parent, size, eu[e], ev[e])
                if in_v[eu[e]] and not in_v[ev[e]]:
                    in_v[ev[e]] = True
                elif in_v[ev[e]] and not in_v[eu[e]]:
                    in_v[eu[e]] = True
                if _find(parent, origin) == _find(parent, virt):
                    determined = True
                    value = 1
            else:
                passable[e] = 0
                if not _reachable(adj_indptr, adj_edge, adj_vert, passable, origin, target, visited, queue):
                    determined = True
                    value = 0
        if not determined:
            value = 1 if _find(parent, origin) == _find(parent, virt) else 0
        mask = np.uint64(0)
        for s in range(step):
            mask |= np.uint64(1) << np.uint64(reveal_seq[s])
        out_revealed[r] = mask
        out_value[r] = value
        out_tau[r] = step


@njit(cache=True, nogil=True)
def pivotal_count_batch(eu, ev, adj_indptr, adj_edge, adj_vert, nv, configs, origin, target, out_counts, out_edge_counts):
    """Number of pivotal edges for the origin-to-target indicator, per sample."""
    n_rep = configs.shape[0]
    n_edges = eu.size
    visited = np.empty(nv, dtype=np.uint8)
    queue = np.empty(nv, dtype=np.int64)
    passable = np.empty(n_edges, dtype=np.uint8)
    for r in range(n_rep):
        count = 0
        for e in range(n_edges):
            for j in range(n_edges):
                passable[j] = configs[r, j]
            passable[e] = 1
            with_e = _reachable(adj_indptr, adj_edge, adj_vert, passable, origin, target, visited, queue)
            if not with_e:
                continue  # closed value also 0: not pivotal
            passable[e] = 0
            without_e = _reachable(adj_indptr, adj_edge, adj_vert, passable, origin, target, visited, queue)
            if not without_e:
                count += 1
                out_edge_counts[e] += 1
        out_counts[r] = count


@njit(cache=True, nogil=True)
def _connected_excluding(adj_indptr, adj_edge, adj_vert, state, skip, u, v, visited, queue):
    if u == v:
        return True
    for i in range(visited.size):
        visited[i] = 0
    visited[u] = 1
    queue[0] = u
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        for ptr in range(adj_indptr[x], adj_indptr[x + 1]):
            e = adj_edge[ptr]
            if e == skip or not state[e]:
                continue
            y = adj_vert[ptr]
            if visited[y]:
                continue
            if y == v:
                return True
            visited[y] = 1
            queue[tail] = y
            tail += 1
    return False


@njit(cache=True, nogil=True)
def heat_bath_chain(eu, ev, adj_indptr, adj_edge, adj_vert, nv, state, scan, p, q, uniforms):
    """Systematic-scan single-edge heat bath on the random-cluster weights.

    The conditional for edge e given the rest is p when its endpoints are
    joined off e, and p / (p + q(1-p)) otherwise.
    """
    sweeps = uniforms.shape[0]
    n_edges = state.size
    visited = np.empty(nv, dtype=np.uint8)
    queue = np.empty(nv, dtype=np.int64)
    for s in range(sweeps):
        for j in range(n_edges):
            e = scan[j]
            conn = _connected_excluding(
                adj_indptr, adj_edge, adj_vert, state, e, eu[e], ev[e], visited, queue
            )
            prob = p if conn else p / (p + q * (1.0 - p))
            state[e] = 1 if uniforms[s, j] < prob else 0


@njit(cache=True, nogil=True)
def stream_hitting(eu, ev, draws, parent, size, seen, counters, mode, r_target):
    """Insert distinct edges from a with-replacement stream until the event.

    counters = [n_open, n_components, max_size]; mode 1 is full connectivity,
    mode 2 is max component size >= r_target.  Returns the hitting count or
    -1 if the draw buffer ran dry first.
    """
    for idx in draws:
        if seen[idx]:
            continue
        seen[idx] = 1
        counters[0] += 1
        if _union(parent, size, eu[idx], ev[idx]):
            counters[1] -= 1
            root = _find(parent, eu[idx])
            if size[root] > counters[2]:
                counters[2] = size[root]
        if mode == 1 and counters[1] == 1:
            return counters[0]
        if mode == 2 and counters[2] >= r_target:
            return counters[0]
    return -1
