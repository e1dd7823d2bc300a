"""Compiled shortest-path counting kernels (Brandes accumulation)."""
from __future__ import annotations

import heapq

import numba
import numpy as np

from .graph import Topology

_EPS = 1e-12


@numba.njit(cache=True)
def _accumulate(s, order, n_order, sigma, dist, rptr, ridx, rlen, redge, node_alive, edge_alive,
                pw_row, use_pw, weighted, node_bc, edge_bc, delta):
    for k in range(n_order):
        delta[order[k]] = 0.0
    for k in range(n_order - 1, -1, -1):
        w = order[k]
        coeff = (delta[w] + (pw_row[w] if use_pw else 1.0)) / sigma[w]
        if w == s:
            continue
        for a in range(rptr[w], rptr[w + 1]):
            u = ridx[a]
            if not node_alive[u] or not edge_alive[redge[a]] or dist[u] < 0:
                continue
            if weighted:
                if abs(dist[u] + rlen[a] - dist[w]) > _EPS * max(1.0, dist[w]):
                    continue
            elif dist[u] + 1.0 != dist[w]:
                continue
            c = sigma[u] * coeff
            edge_bc[redge[a]] += c
            delta[u] += c
        node_bc[w] += delta[w]


@numba.njit(cache=True)
def _brandes_kernel(v, ptr, idx, alen, aedge, rptr, ridx, rlen, redge, n_edges, sources,
                    node_alive, edge_alive, pair_w, use_pw, weighted):
    node_bc = np.zeros(v)
    edge_bc = np.zeros(n_edges)
    sigma = np.zeros(v)
    dist = np.full(v, -1.0)
    order = np.empty(v, np.int64)
    delta = np.zeros(v)
    queue = np.empty(v, np.int64)
    done = np.zeros(v, np.bool_)
    for si in range(sources.shape[0]):
        s = sources[si]
        if not node_alive[s]:
            continue
        for i in range(v):
            sigma[i] = 0.0
            dist[i] = -1.0
            done[i] = False
        sigma[s] = 1.0
        dist[s] = 0.0
        n_order = 0
        if not weighted:
            head, tail = 0, 1
            queue[0] = s
            while head < tail:
                u = queue[head]
                head += 1
                order[n_order] = u
                n_order += 1
                for a in range(ptr[u], ptr[u + 1]):
                    w = idx[a]
                    if not node_alive[w] or not edge_alive[aedge[a]]:
                        continue
                    if dist[w] < 0:
                        dist[w] = dist[u] + 1.0
                        queue[tail] = w
                        tail += 1
                    if dist[w] == dist[u] + 1.0:
                        sigma[w] += sigma[u]
        else:
            heap = [(0.0, s)]
            while len(heap) > 0:
                d, u = heapq.heappop(heap)
                if done[u]:
                    continue
                done[u] = True
                order[n_order] = u
                n_order += 1
                for a in range(ptr[u], ptr[u + 1]):
                    w = idx[a]
                    if not node_alive[w] or not edge_alive[aedge[a]] or done[w]:
                        continue
                    nd = d + alen[a]
                    if dist[w] < 0 or nd < dist[w] - _EPS * max(1.0, dist[w]):
                        dist[w] = nd
                        sigma[w] = sigma[u]
                        heapq.heappush(heap, (nd, w))
                    elif abs(nd - dist[w]) <= _EPS * max(1.0, dist[w]):
                        sigma[w] += sigma[u]
        pw_row = pair_w[si] if use_pw else pair_w[0]
        _accumulate(s, order, n_order, sigma, dist, rptr, ridx, rlen, redge, node_alive,
                    edge_alive, pw_row, use_pw, weighted, node_bc, edge_bc, delta)
    return node_bc, edge_bc


def _csr_arrays(t: Topology, reverse: bool):
    nbrs = t.in_neighbors if reverse else t.out_neighbors
    ptr = np.zeros(t.v + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(x) for x in nbrs])
    idx = np.fromiter((w for x in nbrs for w in x), dtype=np.int64, count=int(ptr[-1]))
    edge = np.empty(len(idx), dtype=np.int64)
    length = np.ones(len(idx))
    k = 0
    for u in range(t.v):
        for w in nbrs[u]:
            key = (w, u) if reverse else (u, w)
            eid = t.edge_index[key]
            edge[k] = eid
            if t.weighted:
                length[k] = 1.0 / t.edge_weights[eid]
            k += 1
    return ptr, idx, length, edge


def brandes(t: Topology, sources=None, weighted: bool = False, node_alive=None, edge_alive=None,
            pair_weights=None):
    """Dependency sums over the given sources, every target counted once per source.

    Returns ``(node, edge)`` arrays. For an undirected graph with all nodes as
    sources each unordered pair is counted twice. ``pair_weights[k, t]`` scales
    the contribution of pair ``(sources[k], t)``.
    """
    weighted = bool(weighted and t.weighted)
    fwd = _csr_arrays(t, False)
    rev = fwd if not t.directed else _csr_arrays(t, True)
    src = np.arange(t.v, dtype=np.int64) if sources is None else np.asarray(sources, dtype=np.int64)
    na = np.ones(t.v, np.bool_) if node_alive is None else np.asarray(node_alive, np.bool_)
    ea = np.ones(max(t.e, 1), np.bool_) if edge_alive is None else np.asarray(edge_alive, np.bool_)
    if pair_weights is None:
        pw, use = np.zeros((1, t.v)), False
    else:
        pw, use = np.asarray(pair_weights, dtype=float), True
    return _brandes_kernel(t.v, *fwd, *rev, t.e, src, na, ea, pw, use, weighted)


def routing_tree(t: Topology, source: int, node_alive=None) -> np.ndarray:
    """Parent pointers of one shortest-path tree: lowest-id predecessor on ties.

    Unreached nodes and the source get ``-1``.
    """
    alive = np.ones(t.v, bool) if node_alive is None else node_alive
    dist = np.full(t.v, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for w in t.out_neighbors[u]:
                if alive[w] and dist[w] < 0:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    parent = np.full(t.v, -1, dtype=np.int64)
    for w in range(t.v):
        if dist[w] > 0:
            parent[w] = min(u for u in t.in_neighbors[w] if alive[u] and dist[u] == dist[w] - 1)
    return parent


def tree_path(parent: np.ndarray, target: int) -> list:
    """Node sequence from the tree root to ``target``."""
    out = [target]
    while parent[out[-1]] >= 0:
        out.append(int(parent[out[-1]]))
    return out[::-1]


@numba.njit(cache=True)
def _route_kernel(v, ptr, idx, rptr, ridx, redge, n_edges, y, alive, unordered):
    node_load = np.zeros(v)
    transit = np.zeros(v)
    edge_load = np.zeros(n_edges)
    dist = np.empty(v, np.int64)
    parent = np.empty(v, np.int64)
    pedge = np.empty(v, np.int64)
    order = np.empty(v, np.int64)
    cnt = np.zeros(v)
    served = 0.0
    for s in range(v):
        if not alive[s]:
            continue
        for i in range(v):
            dist[i] = -1
            parent[i] = -1
            cnt[i] = 0.0
        dist[s] = 0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            u = order[head]
            head += 1
            for a in range(ptr[u], ptr[u + 1]):
                w = idx[a]
                if alive[w] and dist[w] < 0:
                    dist[w] = dist[u] + 1
                    order[tail] = w
                    tail += 1
        # lowest-id predecessor on the previous BFS layer
        for k in range(1, tail):
            w = order[k]
            for a in range(rptr[w], rptr[w + 1]):
                u = ridx[a]
                if alive[u] and dist[u] == dist[w] - 1 and (parent[w] < 0 or u < parent[w]):
                    parent[w] = u
                    pedge[w] = redge[a]
        total = 0.0
        for k in range(1, tail):
            w = order[k]
            if unordered and w < s:
                continue
            cnt[w] = y[s] * y[w]
            total += cnt[w]
        for k in range(tail - 1, 0, -1):
            w = order[k]
            f = 0.0
            if not (unordered and w < s):
                f = y[s] * y[w]
            if cnt[w] == 0.0:
                continue
            node_load[w] += cnt[w]
            transit[w] += cnt[w] - f
            edge_load[pedge[w]] += cnt[w]
            cnt[parent[w]] += cnt[w]
        node_load[s] += total
        served += total
    return node_load, transit, edge_load, served


def route_loads(t: Topology, demands=None, node_alive=None):
    """Loads when every pair uses one shortest path (lowest-id predecessor on ties).

    Pair ``(i, j)`` carries ``y_i * y_j``; undirected graphs route each
    unordered pair once. Returns ``(node_with_endpoints, node_transit, edge,
    served)`` where ``served`` is the total demand of connected pairs.
    """
    fwd = _csr_arrays(t, False)
    rev = fwd if not t.directed else _csr_arrays(t, True)
    y = np.ones(t.v) if demands is None else np.asarray(demands, dtype=float)
    alive = np.ones(t.v, np.bool_) if node_alive is None else np.asarray(node_alive, np.bool_)
    return _route_kernel(t.v, fwd[0], fwd[1], rev[0], rev[1], rev[3], max(t.e, 1), y, alive,
                         not t.directed)
