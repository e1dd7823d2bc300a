"""Exhaustive optimisers for small graphs, plus max-flow connectivity.

Every oracle enumerates vertex subsets, edge subsets or bipartitions and
refuses to run above a size cap. They serve as ground truth for the
heuristics and as the only implementation of the intractable cut metrics.
"""
from __future__ import annotations

from itertools import combinations

import numba
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .graph import MetricResult, Topology, TopologyError, Undefined, components

DEFAULT_CAP = 12
EDGE_CAP = 20

PROBLEMS = (
    "min_vertex_cut", "min_edge_cut", "toughness", "integrity", "scattering", "tenacity",
    "edge_tenacity", "mixed_tenacity", "ratio_of_disruption", "cheeger", "sparsity_min",
    "min_m_degree", "reliability_all_terminal", "partition_resilience",
)


class OracleCapExceeded(TopologyError):
    """The graph is too large for exhaustive enumeration."""


# -- enumeration kernels ----------------------------------------------------

@numba.njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@numba.njit(cache=True)
def _vertex_sweep(v, eu, ew):
    """For each removed-vertex mask: component count and largest component size."""
    n = 1 << v
    ncomp = np.zeros(n, np.int32)
    vmax = np.zeros(n, np.int32)
    parent = np.empty(v, np.int64)
    size = np.empty(v, np.int64)
    for mask in range(n):
        for i in range(v):
            parent[i] = i
            size[i] = 1
        for k in range(eu.shape[0]):
            a, b = eu[k], ew[k]
            if (mask >> a) & 1 or (mask >> b) & 1:
                continue
            ra, rb = _find(parent, a), _find(parent, b)
            if ra != rb:
                if size[ra] < size[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
                size[ra] += size[rb]
        c, big = 0, 0
        for i in range(v):
            if (mask >> i) & 1:
                continue
            if _find(parent, i) == i:
                c += 1
                if size[i] > big:
                    big = size[i]
        ncomp[mask] = c
        vmax[mask] = big
    return ncomp, vmax


@numba.njit(cache=True)
def _edge_sweep(v, eu, ew, kmask):
    """For each kept-edge mask: components, largest size, most edges in a component,
    and whether every node flagged in ``kmask`` lies in one component."""
    e = eu.shape[0]
    n = 1 << e
    ncomp = np.zeros(n, np.int32)
    vmax = np.zeros(n, np.int32)
    emax = np.zeros(n, np.int32)
    kconn = np.zeros(n, np.bool_)
    parent = np.empty(v, np.int64)
    size = np.empty(v, np.int64)
    ecount = np.empty(v, np.int64)
    for mask in range(n):
        for i in range(v):
            parent[i] = i
            size[i] = 1
            ecount[i] = 0
        for k in range(e):
            if not (mask >> k) & 1:
                continue
            ra, rb = _find(parent, eu[k]), _find(parent, ew[k])
            if ra != rb:
                if size[ra] < size[rb]:
                    ra, rb = rb, ra
                parent[rb] = ra
                size[ra] += size[rb]
                ecount[ra] += ecount[rb]
            ecount[ra] += 1
        c, big, ebig = 0, 0, 0
        root = -1
        ok = True
        for i in range(v):
            r = _find(parent, i)
            if r == i:
                c += 1
                if size[i] > big:
                    big = size[i]
                if ecount[i] > ebig:
                    ebig = ecount[i]
            if (kmask >> i) & 1:
                if root < 0:
                    root = r
                elif r != root:
                    ok = False
        ncomp[mask] = c
        vmax[mask] = big
        emax[mask] = ebig
        kconn[mask] = ok
    return ncomp, vmax, emax, kconn


def _arrays(t: Topology):
    u = t.as_undirected()
    if u.e == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    ea = np.asarray(u.edges, dtype=np.int64)
    return ea[:, 0].copy(), ea[:, 1].copy()


def _check_nodes(t: Topology, cap: int):
    if t.v > cap:
        raise OracleCapExceeded(f"exhaustive search refused: v={t.v} exceeds cap {cap}")


def _check_edges(t: Topology, cap: int):
    if t.as_undirected().e > cap:
        raise OracleCapExceeded(f"edge-state enumeration refused: e={t.e} exceeds cap {cap}")


def _popcount(masks: np.ndarray) -> np.ndarray:
    m = masks.astype(np.uint64)
    out = np.zeros(len(m), dtype=np.int64)
    while np.any(m):
        out += (m & np.uint64(1)).astype(np.int64)
        m >>= np.uint64(1)
    return out


def _boundaries(t: Topology):
    """``(masks, |A|, |dA|)`` over every node subset ``A``."""
    eu, ew = _arrays(t)
    masks = np.arange(1 << t.v, dtype=np.int64)
    size = _popcount(masks)
    if len(eu) == 0:
        return masks, size, np.zeros_like(masks)
    inside_u = (masks[:, None] >> eu[None, :]) & 1
    inside_w = (masks[:, None] >> ew[None, :]) & 1
    return masks, size, (inside_u != inside_w).sum(axis=1)


def _members(mask: int) -> list:
    return [i for i in range(mask.bit_length()) if (mask >> i) & 1]


# -- vertex-removal problems ------------------------------------------------

def _vertex_table(t: Topology):
    eu, ew = _arrays(t)
    ncomp, vmax = _vertex_sweep(t.v, eu, ew)
    masks = np.arange(1 << t.v, dtype=np.int64)
    return masks, _popcount(masks), ncomp.astype(np.int64), vmax.astype(np.int64)


def _best(values: np.ndarray, masks: np.ndarray, sel: np.ndarray, maximize=False):
    idx = np.flatnonzero(sel)
    if len(idx) == 0:
        return None, None
    vals = values[idx]
    pick = idx[np.argmax(vals) if maximize else np.argmin(vals)]
    return values[pick], _members(int(masks[pick]))


def min_vertex_cut(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    masks, s, ncomp, _ = _vertex_table(t)
    val, wit = _best(s.astype(float), masks, ncomp >= 2)
    if val is None:
        # complete graph: only deleting down to one node "disconnects" it
        val, wit = t.v - 1, list(range(t.v - 1))
    return MetricResult("vertex_connectivity", "global_scalar", int(val), (0, t.v - 1),
                        mode="worst-case", witness=wit)


def toughness(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    masks, s, ncomp, _ = _vertex_table(t)
    sel = ncomp >= 2
    val, wit = _best(s / np.maximum(ncomp, 1), masks, sel)
    if val is None:
        val = Undefined("complete graph has no disconnecting vertex set")
    else:
        val = float(val)
    return MetricResult("toughness", "global_scalar", val, (0, None), mode="worst-case",
                        witness=wit)


def integrity(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    masks, s, _, vmax = _vertex_table(t)
    val, wit = _best((s + vmax).astype(float), masks, np.ones(len(masks), bool))
    return MetricResult("integrity", "global_scalar", int(val), (1, t.v), mode="worst-case",
                        witness=wit)


def scattering(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    masks, s, ncomp, _ = _vertex_table(t)
    val, wit = _best((ncomp - s).astype(float), masks, ncomp >= 2, maximize=True)
    val = Undefined("complete graph has no disconnecting vertex set") if val is None else int(val)
    return MetricResult("scattering_number", "global_scalar", val, (None, t.v),
                        mode="worst-case", witness=wit)


def tenacity(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    """Minimum of ``(|S| + |V_L|) / omega`` over proper vertex subsets ``S``."""
    _check_nodes(t, cap)
    masks, s, ncomp, vmax = _vertex_table(t)
    sel = ncomp >= 1
    val, wit = _best((s + vmax) / np.maximum(ncomp, 1), masks, sel)
    return MetricResult("tenacity", "global_scalar", float(val), (0, None), mode="worst-case",
                        witness=wit)


def partition_resilience(t: Topology, cap: int = DEFAULT_CAP,
                         single_node_connected: bool = True) -> MetricResult:
    """Average over removal sizes ``2..v-1`` of the fraction of disconnecting node sets."""
    _check_nodes(t, cap)
    if t.v < 3:
        raise TopologyError("partition resilience needs at least 3 nodes")
    _, s, ncomp, _ = _vertex_table(t)
    disc = ncomp >= 2
    if not single_node_connected:
        disc = disc | (ncomp == 1) & (s == t.v - 1)
    k = {}
    for i in range(2, t.v):
        k[i] = float(disc[s == i].mean())
    rf = sum(k.values()) / (t.v - 2)
    return MetricResult("partition_resilience_factor", "global_scalar", rf, (0, 1),
                        mode="failures", witness=k)


# -- edge-removal problems --------------------------------------------------

def _edge_table(t: Topology, kmask: int = 0):
    eu, ew = _arrays(t)
    ncomp, vmax, emax, kconn = _edge_sweep(t.v, eu, ew, kmask)
    masks = np.arange(1 << len(eu), dtype=np.int64)
    removed = len(eu) - _popcount(masks)
    return masks, removed, ncomp.astype(np.int64), vmax.astype(np.int64), emax.astype(np.int64), kconn


def _removed_edges(t: Topology, kept_mask: int) -> list:
    u = t.as_undirected()
    return [u.edges[k] for k in range(u.e) if not (kept_mask >> k) & 1]


def edge_tenacity(t: Topology, cap: int = EDGE_CAP) -> MetricResult:
    """Minimum of ``(|F| + |E_L|) / omega``; ``E_L`` counts the edges of the
    component holding the most edges."""
    _check_edges(t, cap)
    masks, f, ncomp, _, emax, _ = _edge_table(t)
    vals = (f + emax) / ncomp
    pick = int(np.argmin(vals))
    return MetricResult("edge_tenacity", "global_scalar", float(vals[pick]), (0, None),
                        mode="worst-case", witness=_removed_edges(t, int(masks[pick])))


def mixed_tenacity(t: Topology, cap: int = EDGE_CAP) -> MetricResult:
    _check_edges(t, cap)
    masks, f, ncomp, vmax, _, _ = _edge_table(t)
    vals = (f + vmax) / ncomp
    pick = int(np.argmin(vals))
    return MetricResult("mixed_tenacity", "global_scalar", float(vals[pick]), (0, None),
                        mode="worst-case", witness=_removed_edges(t, int(masks[pick])))


def reliability_coefficients(t: Topology, terminals=None, cap: int = EDGE_CAP) -> np.ndarray:
    """``a[j]``: number of ``j``-edge spanning subgraphs connecting all terminals."""
    _check_edges(t, cap)
    nodes = range(t.v) if terminals is None else terminals
    kmask = 0
    for i in nodes:
        if not 0 <= int(i) < t.v:
            raise TopologyError(f"terminal {i} not in topology")
        kmask |= 1 << int(i)
    masks, f, _, _, _, kconn = _edge_table(t, kmask)
    e = t.as_undirected().e
    kept = e - f
    return np.bincount(kept[kconn], minlength=e + 1).astype(np.int64)


def reliability_from_coefficients(a: np.ndarray, p) -> np.ndarray:
    e = len(a) - 1
    p = np.asarray(p, dtype=float)
    j = np.arange(e + 1)
    return (a * p[..., None] ** j * (1 - p[..., None]) ** (e - j)).sum(axis=-1)


def reliability_all_terminal(t: Topology, p: float, cap: int = EDGE_CAP) -> MetricResult:
    a = reliability_coefficients(t, None, cap)
    return MetricResult("all_terminal_reliability", "global_scalar",
                        float(reliability_from_coefficients(a, p)), (0, 1), mode="failures",
                        witness=a.tolist())


# -- bipartition problems ---------------------------------------------------

def min_edge_cut(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    if t.v == 1:
        return MetricResult("edge_connectivity", "global_scalar", 0, (0, 0), mode="worst-case")
    masks, size, bd = _boundaries(t)
    # node 0 fixed outside A removes the mirror duplicates
    sel = (size >= 1) & (size < t.v) & ((masks & 1) == 0)
    val, wit = _best(bd.astype(float), masks, sel)
    return MetricResult("edge_connectivity", "global_scalar", int(val), (0, t.v - 1),
                        mode="worst-case", witness=wit)


def cheeger(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    if t.v < 2:
        return MetricResult("cheeger_constant", "global_scalar", Undefined("needs two nodes"),
                            (0, t.v / 2), mode="worst-case")
    masks, size, bd = _boundaries(t)
    sel = (size >= 1) & (size <= t.v // 2)
    val, wit = _best(bd / np.maximum(size, 1), masks, sel)
    return MetricResult("cheeger_constant", "global_scalar", float(val), (0, t.v / 2),
                        mode="worst-case", witness=wit)


def min_m_degree(t: Topology, m: int, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    if not 1 <= m < t.v:
        raise TopologyError(f"m must lie in [1, v) (m={m})")
    masks, size, bd = _boundaries(t)
    val, wit = _best(bd.astype(float), masks, size == m)
    return MetricResult("min_m_degree", "global_scalar", int(val), (0, m * (t.v - m)),
                        mode="worst-case", witness=wit)


def ratio_of_disruption(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    _check_nodes(t, cap)
    masks, size, bd = _boundaries(t)
    sel = (size >= 1) & (size <= t.v // 2)
    if not np.any(sel):
        val = Undefined("needs two nodes")
        return MetricResult("ratio_of_disruption", "global_scalar", val, (0, t.v / 2),
                            mode="worst-case")
    if np.any(sel & (bd == 0)):
        return MetricResult("ratio_of_disruption", "global_scalar",
                            Undefined("disconnected graph: empty boundary"), (0, t.v / 2),
                            mode="worst-case")
    val, wit = _best(size / (np.maximum(bd, 1) * np.maximum(t.v - size, 1)), masks, sel, maximize=True)
    return MetricResult("ratio_of_disruption", "global_scalar", float(val), (0, t.v / 2),
                        mode="worst-case", witness=wit)


def _best_split(sizes: list) -> int:
    """Largest ``|A||A'|`` over splits of components into two nonempty groups."""
    total = sum(sizes)
    reach = {0}
    for s in sizes[:-1]:
        reach |= {r + s for r in reach}
    # the last component always sits on the A' side, so both sides stay nonempty
    return max(r * (total - r) for r in reach if 0 < r < total)


def sparsity_min(t: Topology, cap: int = DEFAULT_CAP) -> MetricResult:
    """Minimum ``|X| / (|A||A'|)`` over separations with all three parts nonempty."""
    _check_nodes(t, cap)
    u = t.as_undirected()
    best, wit = None, None
    for mask in range(1, (1 << t.v) - 1):
        x = _members(mask)
        if len(x) > t.v - 2:
            continue
        rest = u.without_nodes(x)
        rep = components(rest)
        if rep.count < 2:
            continue
        q = len(x) / _best_split(list(rep.sizes))
        if best is None or q < best:
            best, wit = q, x
    if best is None:
        best = Undefined("no vertex separator exists")
    return MetricResult("sparsity", "global_scalar", best, (0, None), mode="worst-case",
                        witness=wit)


def brute_force_oracle(t: Topology, problem: str, cap: int = DEFAULT_CAP, **kw) -> MetricResult:
    """Dispatch an exact search by name; ``p`` and ``m`` are passed through ``kw``."""
    table = {
        "min_vertex_cut": min_vertex_cut, "min_edge_cut": min_edge_cut,
        "toughness": toughness, "integrity": integrity, "scattering": scattering,
        "tenacity": tenacity, "ratio_of_disruption": ratio_of_disruption,
        "cheeger": cheeger, "sparsity_min": sparsity_min,
        "partition_resilience": partition_resilience,
    }
    if problem in table:
        return table[problem](t, cap=cap, **kw)
    if problem in ("edge_tenacity", "mixed_tenacity"):
        fn = edge_tenacity if problem == "edge_tenacity" else mixed_tenacity
        _check_nodes(t, cap)
        return fn(t, **kw)
    if problem == "min_m_degree":
        return min_m_degree(t, kw["m"], cap=cap)
    if problem == "reliability_all_terminal":
        _check_nodes(t, cap)
        return reliability_all_terminal(t, kw["p"], cap=kw.get("edge_cap", EDGE_CAP))
    raise ValueError(f"unknown oracle problem {problem!r}; expected one of {', '.join(PROBLEMS)}")


# -- polynomial connectivity via max-flow ------------------------------------

def _max_flow(n: int, arcs: list, caps: list, s: int, t: int) -> int:
    rows = [a for a, _ in arcs]
    cols = [b for _, b in arcs]
    m = sparse.csr_matrix((np.asarray(caps, dtype=np.int32), (rows, cols)), shape=(n, n))
    m.sum_duplicates()
    return int(csgraph.maximum_flow(m, s, t).flow_value)


def local_edge_connectivity(t: Topology, s: int, d: int) -> int:
    u = t.as_undirected()
    arcs = [(a, b) for a, b in u.edges] + [(b, a) for a, b in u.edges]
    if not arcs:
        return 0
    return _max_flow(u.v, arcs, [1] * len(arcs), s, d)


def local_vertex_connectivity(t: Topology, s: int, d: int) -> int:
    """Internally vertex-disjoint ``s``-``d`` paths (``s`` and ``d`` non-adjacent)."""
    u = t.as_undirected()
    big = u.v + 1
    arcs, caps = [], []
    for i in range(u.v):
        arcs.append((i, i + u.v))
        caps.append(big if i in (s, d) else 1)
    for a, b in u.edges:
        arcs += [(a + u.v, b), (b + u.v, a)]
        caps += [big, big]
    return _max_flow(2 * u.v, arcs, caps, s + u.v, d)


def edge_connectivity(t: Topology) -> int:
    """Edge connectivity from ``v - 1`` max-flow computations."""
    if t.v < 2:
        return 0
    return min(local_edge_connectivity(t, 0, d) for d in range(1, t.v))


def vertex_connectivity(t: Topology) -> int:
    """Vertex connectivity via the Esfahanian-Hakimi reduction (complete graphs give ``v-1``)."""
    u = t.as_undirected()
    if u.v < 2:
        return 0
    nb = u.neighbor_sets
    x = int(np.argmin(u.degrees))
    best = u.v - 1
    for y in range(u.v):
        if y != x and y not in nb[x]:
            best = min(best, local_vertex_connectivity(u, x, y))
    for a, b in combinations(sorted(nb[x]), 2):
        if b not in nb[a]:
            best = min(best, local_vertex_connectivity(u, a, b))
    return best
