"""Computable connectivity measures: FM partitioning and the approximations built on it,
local delay resilience, percolation threshold, reliability, partition resilience and
component statistics."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from . import oracles
from .graph import MetricResult, Topology, TopologyError, Undefined, components, is_connected

CHEEGER_GRID = (0.05, 0.15, 0.25, 0.35, 0.45)


@dataclass
class PartitionReport:
    side: np.ndarray            # True for nodes in A
    cut_edges: list
    ratio: float                # |A| / v
    xi: int                     # cut size
    balance: float              # c in absolute nodes
    objective: float = float("nan")

    @property
    def size_a(self) -> int:
        return int(self.side.sum())

    def sides(self) -> tuple[np.ndarray, np.ndarray]:
        return np.flatnonzero(self.side), np.flatnonzero(~self.side)


def allowed_sizes(v: int, ratio: float, balance: float) -> range:
    """Integer sizes of ``A`` within ``balance`` nodes of ``ratio * v``."""
    lo = max(1, math.ceil(ratio * v - balance - 1e-9))
    hi = min(v - 1, math.floor(ratio * v + balance + 1e-9))
    return range(lo, hi + 1)


def _cut_edges(t: Topology, side: np.ndarray) -> list:
    return [(u, w) for u, w in t.edges if side[u] != side[w]]


class _Buckets:
    """Gain buckets per side with a max-gain pointer (classic FM structure)."""

    def __init__(self, pmax: int):
        self.off = pmax
        self.b = [[set() for _ in range(2 * pmax + 1)] for _ in range(2)]
        self.top = [-1, -1]

    def add(self, side: int, node: int, gain: int):
        g = gain + self.off
        self.b[side][g].add(node)
        if g > self.top[side]:
            self.top[side] = g

    def remove(self, side: int, node: int, gain: int):
        self.b[side][gain + self.off].discard(node)

    def best(self, side: int):
        g = self.top[side]
        while g >= 0 and not self.b[side][g]:
            g -= 1
        self.top[side] = g
        if g < 0:
            return None
        return min(self.b[side][g]), g - self.off


def _fm_pass(nbrs, side: np.ndarray, sizes: range, pmax: int):
    """One FM pass. Returns the best feasible side vector and its cut change."""
    v = len(side)
    gain = np.zeros(v, dtype=np.int64)
    for u in range(v):
        for w in nbrs[u]:
            gain[u] += 1 if side[w] != side[u] else -1
    buckets = _Buckets(pmax)
    for u in range(v):
        buckets.add(int(side[u]), u, int(gain[u]))
    locked = np.zeros(v, dtype=bool)
    size_a = int(side.sum())
    lo, hi = sizes.start - 1, sizes.stop  # one node of tentative slack each way
    delta = best_delta = 0
    moves, best_len = [], 0
    while True:
        cands = []
        for s in (0, 1):
            new = size_a + (1 if s == 0 else -1)
            if lo <= new <= hi:
                got = buckets.best(s)
                if got is not None:
                    cands.append((got[1], -got[0], s, got[0]))
        if not cands:
            break
        g, _, s, u = max(cands)
        buckets.remove(s, u, int(gain[u]))
        locked[u] = True
        side[u] = not side[u]
        size_a += 1 if s == 0 else -1
        delta -= g
        moves.append(u)
        for w in nbrs[u]:
            if locked[w]:
                continue
            buckets.remove(int(side[w]), w, int(gain[w]))
            # edge (u, w) flipped between internal and external
            gain[w] += -2 if side[w] == side[u] else 2
            buckets.add(int(side[w]), w, int(gain[w]))
        if size_a in sizes and delta < best_delta:
            best_delta, best_len = delta, len(moves)
    for u in moves[best_len:]:
        side[u] = not side[u]
    return side, best_delta


def fm_partition(t: Topology, ratio: float, balance: float = 0.0, seed=None, restarts: int = 8,
                 balance_is_fraction: bool = False, sizes: range | None = None) -> PartitionReport:
    """Fiduccia-Mattheyses bipartition with ``|A|`` near ``ratio * v``.

    ``balance`` is in absolute nodes unless ``balance_is_fraction`` is set,
    in which case it is multiplied by ``v``. Each restart begins from a seeded
    random split; passes repeat until the cut stops shrinking.
    """
    if t.directed:
        t = t.as_undirected()
    if not 0 < ratio <= 0.5:
        raise ValueError("ratio must lie in (0, 0.5]")
    if balance < 0:
        raise ValueError("balance must be nonnegative")
    c = balance * t.v if balance_is_fraction else balance
    if sizes is None:
        sizes = allowed_sizes(t.v, ratio, c)
    if len(sizes) == 0:
        raise ValueError(f"infeasible balance: no integer |A| within {c} of {ratio * t.v:.3f}")
    nbrs = t.out_neighbors
    pmax = int(t.degrees.max()) if t.v else 0
    rng = np.random.default_rng(seed)
    target = ratio * t.v
    start_size = min(sizes, key=lambda s: (abs(s - target), s))
    best = None
    for _ in range(restarts):
        side = np.zeros(t.v, dtype=bool)
        side[rng.permutation(t.v)[:start_size]] = True
        cut = len(_cut_edges(t, side))
        while True:
            side, d = _fm_pass(nbrs, side, sizes, pmax)
            if d >= 0:
                break
            cut += d
        if best is None or cut < best[0]:
            best = (cut, side.copy())
    cut, side = best
    return PartitionReport(side, _cut_edges(t, side), float(side.sum() / t.v), int(cut), float(c),
                           objective=float(cut))


def _grid_partitions(t: Topology, seed, balance_fraction: float = 0.05):
    """FM partitions over the Cheeger grid.

    FM minimises the raw cut, so a size window alone drifts to its smallest
    size; each window is therefore probed at its two ends and its target size.
    An empty window snaps to the nearest integer size.
    """
    out, done = [], set()
    for a in CHEEGER_GRID:
        window = allowed_sizes(t.v, a, balance_fraction * t.v)
        if len(window) == 0:
            s = int(min(max(1, round(a * t.v)), t.v // 2))
            if s < 1:
                continue
            probes = [s]
        else:
            target = min(window, key=lambda s: (abs(s - a * t.v), s))
            probes = [window[0], target, window[-1]]
        for s in probes:
            if s in done or not 1 <= s < t.v:
                continue
            done.add(s)
            out.append(fm_partition(t, min(0.5, s / t.v), seed=seed, sizes=range(s, s + 1)))
    return out


def cheeger_approx(t: Topology, seed=0) -> MetricResult:
    """Smallest ``|dA| / min(|A|, |V - A|)`` over the FM grid partitions."""
    u = t.as_undirected()
    if u.v < 2:
        return MetricResult("cheeger_approx", "global_scalar", Undefined("needs two nodes"),
                            (0, u.v / 2), mode="worst-case")
    if not is_connected(u):
        return MetricResult("cheeger_approx", "global_scalar", 0.0, (0, u.v / 2), mode="worst-case")
    best = None
    for rep in _grid_partitions(u, seed):
        small = min(rep.size_a, u.v - rep.size_a)
        h = rep.xi / small
        if best is None or h < best[0]:
            best = (h, rep)
    return MetricResult("cheeger_approx", "global_scalar", float(best[0]), (0, u.v / 2),
                        mode="worst-case", witness=best[1])


def _sparsity_terms(t: Topology, side: np.ndarray):
    nb = t.neighbor_sets
    vals = []
    for a_side in (True, False):
        A = [i for i in range(t.v) if side[i] == a_side]
        other = t.v - len(A)
        border = [i for i in A if any(side[j] != a_side for j in nb[i])]
        inner = len(A) - len(border)
        if border and inner > 0 and other > 0:
            vals.append((len(border) / (inner * other), border))
    return vals


def sparsity_approx(t: Topology, seed=0) -> MetricResult:
    """Upper estimate of ``min_X |X| / (|A||A'|)`` from FM bipartitions.

    For every bipartition both boundary sets are tried as the separator ``X``.
    """
    u = t.as_undirected()
    if u.v < 3:
        raise TopologyError("sparsity needs at least three nodes")
    best = None
    for rep in _grid_partitions(u, seed):
        for q, border in _sparsity_terms(u, rep.side):
            if best is None or q < best[0]:
                best = (q, border)
    if best is None:
        return MetricResult("sparsity_approx", "global_scalar",
                            Undefined("no bipartition yields a separator"), (0, None),
                            mode="worst-case")
    return MetricResult("sparsity_approx", "global_scalar", float(best[0]), (0, None),
                        mode="worst-case", witness=best[1])


# -- local delay resilience ---------------------------------------------------

def _ball(t: Topology, i: int, h: int) -> list:
    dist = {i: 0}
    q = deque([i])
    nb = t.neighbor_sets
    while q:
        u = q.popleft()
        if dist[u] == h:
            continue
        for w in nb[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return sorted(dist)


def policy_ball(t: Topology, i: int, h: int) -> list:
    """Nodes reachable from ``i`` over valley-free paths of at most ``h`` hops.

    Directed edges point customer -> provider; a reciprocal pair is a peering
    link. A path climbs customer->provider links, crosses at most one peering
    link, then only descends provider->customer links.
    """
    if not t.directed:
        raise TopologyError("policy-compliant paths need a directed relationship graph")
    up = [set() for _ in range(t.v)]
    down = [set() for _ in range(t.v)]
    peer = [set() for _ in range(t.v)]
    for a, b in t.edges:
        if t.has_edge(b, a):
            peer[a].add(b)
        else:
            up[a].add(b)
            down[b].add(a)
    seen = {(i, 0): 0}
    reach = {i}
    q = deque([(i, 0)])
    while q:
        u, phase = q.popleft()
        d = seen[(u, phase)]
        if d == h:
            continue
        steps = [(w, 1) for w in down[u]]
        if phase == 0:
            steps += [(w, 0) for w in up[u]] + [(w, 1) for w in peer[u]]
        for state in steps:
            if state not in seen:
                seen[state] = d + 1
                reach.add(state[0])
                q.append(state)
    return sorted(reach)


def local_delay_resilience(t: Topology, i: int, h: int = 1, seed=0, policy: bool = False) -> MetricResult:
    """Cut size of a balanced FM bisection of the ``h``-hop neighbourhood of ``i``.

    Odd neighbourhoods are split ``floor(n/2)`` / ``ceil(n/2)``.
    """
    if h < 1:
        raise ValueError("h must be at least 1")
    nodes = policy_ball(t, i, h) if policy else _ball(t, i, h)
    key = "local_delay_resilience"
    if len(nodes) < 2:
        return MetricResult(key, "global_scalar", Undefined("neighbourhood smaller than two nodes"),
                            (0, None), scope="local", mode="worst-case", witness=len(nodes))
    sub = t.as_undirected().induced(nodes)
    n = sub.v
    rep = fm_partition(sub, 0.5, 0.0 if n % 2 == 0 else 0.5, seed=seed)
    return MetricResult(key, "global_scalar", rep.xi, (0, n * n / 4), scope="local",
                        mode="worst-case", witness=n)


def local_delay_resilience_global(t: Topology, h: int = 1, seed=0, policy: bool = False) -> MetricResult:
    """Mean ``R_i(h)`` over nodes with a defined value, plus ``v(h)`` (mean ball size)."""
    vals, sizes = [], []
    for i in range(t.v):
        r = local_delay_resilience(t, i, h, seed=seed, policy=policy)
        sizes.append(r.witness)
        if not isinstance(r.value, Undefined):
            vals.append(r.value)
    vh = float(np.mean(sizes))
    val = float(np.mean(vals)) if vals else Undefined("no node has a neighbourhood of two nodes")
    return MetricResult("local_delay_resilience_mean", "global_scalar", val, (0, None),
                        mode="worst-case", witness={"v_h": vh, "per_node_defined": len(vals)})


# -- failures ---------------------------------------------------------------

def percolation_threshold(t: Topology) -> MetricResult:
    """``1 - p_c = 1 / (<k^2>/<k> - 1)``, clamped to ``[0, 1]``."""
    k = t.as_undirected().degrees.astype(float)
    key = "percolation_threshold"
    if k.mean() == 0:
        return MetricResult(key, "global_scalar", Undefined("no edges"), (0, 1), mode="failures")
    kappa = (k ** 2).mean() / k.mean()
    if kappa <= 1:
        return MetricResult(key, "global_scalar",
                            Undefined("<k^2>/<k> <= 1: no percolating giant component"),
                            (0, 1), mode="failures")
    pc = 1.0 - 1.0 / (kappa - 1.0)
    return MetricResult(key, "global_scalar", float(min(1.0, max(0.0, pc))), (0, 1),
                        mode="failures", witness={"kappa": float(kappa)})


@numba.njit(cache=True)
def _count_connected(v, eu, ew, keep, term):
    """Number of edge-state rows in ``keep`` that connect every terminal."""
    parent = np.empty(v, np.int64)
    hits = 0
    for r in range(keep.shape[0]):
        for i in range(v):
            parent[i] = i
        for k in range(eu.shape[0]):
            if keep[r, k]:
                a = oracles._find(parent, eu[k])
                b = oracles._find(parent, ew[k])
                if a != b:
                    parent[b] = a
        root = oracles._find(parent, term[0])
        ok = True
        for j in range(1, term.shape[0]):
            if oracles._find(parent, term[j]) != root:
                ok = False
                break
        hits += ok
    return hits


@dataclass
class Reliability:
    value: float
    exact: bool
    coefficients: list | None = None
    ci95: tuple | None = None
    samples: int = 0


def _terminals(t: Topology, K):
    if K is None:
        return list(range(t.v))
    K = [int(x) for x in K]
    bad = [x for x in K if not 0 <= x < t.v]
    if bad:
        raise TopologyError(f"terminal set is not a subset of the nodes: {bad}")
    return K


def reliability_polynomial(t: Topology, p: float, K=None, samples: int = 100_000, seed=0,
                           exact_cap: int = oracles.EDGE_CAP) -> Reliability:
    """Probability that all terminals ``K`` (default: all nodes) are connected when
    each edge survives independently with probability ``p``.

    Exact by enumerating every edge state up to ``exact_cap`` edges, Monte Carlo
    with a normal 95% interval above that.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    u = t.as_undirected()
    K = _terminals(u, K)
    if len(K) <= 1:
        return Reliability(1.0, True, None)
    if u.e <= exact_cap:
        a = oracles.reliability_coefficients(u, K, cap=exact_cap)
        val = float(oracles.reliability_from_coefficients(a, p))
        return Reliability(min(1.0, max(0.0, val)), True, a.tolist())
    rng = np.random.default_rng(seed)
    eu, ew = oracles._arrays(u)
    term = np.asarray(K, dtype=np.int64)
    hits, left = 0, samples
    while left > 0:
        n = min(left, 20_000)
        hits += _count_connected(u.v, eu, ew, rng.random((n, u.e)) < p, term)
        left -= n
    est = hits / samples
    half = 1.96 * math.sqrt(max(est * (1 - est), 0.0) / samples)
    return Reliability(est, False, None, (max(0.0, est - half), min(1.0, est + half)), samples)


def edge_reliability_importance(t: Topology, p: float, K=None) -> MetricResult:
    """Per-edge ``Rel(G * e) - Rel(G - e)``: reliability gained when edge ``e`` is
    perfect instead of absent (exact enumeration only)."""
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    u = t.as_undirected()
    K = _terminals(u, K)
    kmask = 0
    for i in K:
        kmask |= 1 << i
    oracles._check_edges(u, oracles.EDGE_CAP)
    eu, ew = oracles._arrays(u)
    _, _, _, kconn = oracles._edge_sweep(u.v, eu, ew, kmask)
    masks = np.arange(1 << u.e, dtype=np.int64)
    kept = oracles._popcount(masks)
    prob = p ** kept * (1 - p) ** (u.e - kept)
    out = []
    for k in range(u.e):
        on = ((masks >> k) & 1).astype(bool)
        # condition on the edge state: divide out its own factor
        rel_on = (prob[on & kconn] / p).sum()
        rel_off = (prob[~on & kconn] / (1 - p)).sum()
        out.append(float(rel_on - rel_off))
    return MetricResult("edge_reliability_importance", "per_edge", out, (0, 1), scope="local",
                        mode="failures")


def reliability_dominates(t: Topology, i: int, h: int, K=None, grid=np.linspace(0.05, 0.95, 19)) -> bool:
    """Whether edge ``i`` is ranked above edge ``h`` on the whole ``p`` grid:
    deleting ``i`` hurts at least as much and contracting it helps at least as much."""
    u = t.as_undirected()
    K = _terminals(u, K)
    kmask = 0
    for x in K:
        kmask |= 1 << x
    oracles._check_edges(u, oracles.EDGE_CAP)
    eu, ew = oracles._arrays(u)
    _, _, _, kconn = oracles._edge_sweep(u.v, eu, ew, kmask)
    masks = np.arange(1 << u.e, dtype=np.int64)
    kept = oracles._popcount(masks)
    for p in grid:
        prob = p ** kept * (1 - p) ** (u.e - kept)

        def cond(k, state):
            sel = (((masks >> k) & 1).astype(bool) == state) & kconn
            return prob[sel].sum() / (p if state else 1 - p)

        if cond(i, False) > cond(h, False) + 1e-12 or cond(i, True) < cond(h, True) - 1e-12:
            return False
    return True


def partition_resilience_factor(t: Topology, cap: int = oracles.DEFAULT_CAP, samples: int = 200,
                                seed=0, single_node_connected: bool = True) -> MetricResult:
    """Average fraction of disconnecting node-failure sets over sizes ``2..v-1``.

    Exact enumeration up to ``cap`` nodes, otherwise ``samples`` random sets per size.
    """
    u = t.as_undirected()
    if u.v < 3:
        raise TopologyError("partition resilience needs at least 3 nodes")
    if u.v <= cap:
        return oracles.partition_resilience(u, cap=cap, single_node_connected=single_node_connected)
    rng = np.random.default_rng(seed)
    ea = np.asarray(u.edges) if u.e else np.zeros((0, 2), dtype=np.int64)
    k = {}
    for i in range(2, u.v):
        bad = 0
        for _ in range(samples):
            removed = np.zeros(u.v, dtype=bool)
            removed[rng.choice(u.v, i, replace=False)] = True
            keep = ~(removed[ea[:, 0]] | removed[ea[:, 1]])
            sel = ea[keep]
            m = sparse.coo_matrix((np.ones(len(sel)), (sel[:, 0], sel[:, 1])), shape=(u.v, u.v))
            lab = csgraph.connected_components(m, directed=False)[1]
            alive = np.flatnonzero(~removed)
            n_comp = len(set(lab[alive].tolist()))
            disc = n_comp >= 2 or (not single_node_connected and len(alive) == 1)
            bad += disc
        k[i] = bad / samples
    rf = sum(k.values()) / (u.v - 2)
    return MetricResult("partition_resilience_factor", "global_scalar", rf, (0, 1), mode="failures",
                        witness=k)


# -- component statistics ---------------------------------------------------------

def component_class(size: int) -> int:
    """Decimal-log class: sizes ``(10^(c-1), 10^c]`` share class ``c``; class 1 holds 1..10."""
    return max(1, math.ceil(math.log10(size) - 1e-12))


@dataclass
class DisconnectionStats:
    n_components: int
    largest_fraction: float
    mean_size: float
    class_fraction: dict = field(default_factory=dict)
    reachability: float = 1.0

    def as_dict(self) -> dict:
        return {"N": self.n_components, "largest_fraction": self.largest_fraction,
                "mean_component_size": self.mean_size,
                "class_fraction": {str(k): v for k, v in self.class_fraction.items()},
                "reachability": self.reachability}


def reachability(t: Topology) -> float:
    """Fraction of ordered node pairs joined by a (directed) path."""
    if t.v < 2:
        return 1.0
    if not t.directed:
        sizes = np.asarray(components(t).sizes, dtype=float)
        return float((sizes * (sizes - 1)).sum() / (t.v * (t.v - 1)))
    reach = csgraph.shortest_path(t.adjacency(), unweighted=True, directed=True)
    return float((np.isfinite(reach).sum() - t.v) / (t.v * (t.v - 1)))


def disconnection_stats(t: Topology, v_ref: int | None = None) -> DisconnectionStats:
    """Component count, largest-component share, mean size, class shares and reachability.

    Shares divide by ``v_ref`` (the original node count during a challenge) when given.
    """
    rep = components(t)
    n = v_ref or t.v
    classes: dict = {}
    for s in rep.sizes:
        c = component_class(s)
        classes[c] = classes.get(c, 0) + s / n
    return DisconnectionStats(rep.count, rep.largest / n if n else 0.0,
                              float(np.mean(rep.sizes)) if rep.sizes else 0.0,
                              dict(sorted(classes.items())), reachability(t))


def mohar_bounds(t: Topology, side: np.ndarray) -> tuple[float, float]:
    """Laplacian-eigenvalue bounds ``lambda_2 |A||V-A|/v <= |dA| <= lambda_v |A||V-A|/v``."""
    u = t.as_undirected()
    L = csgraph.laplacian(u.adjacency()).toarray()
    ev = np.linalg.eigvalsh(L)
    a = int(np.sum(side))
    f = a * (u.v - a) / u.v
    return float(ev[1] * f), float(ev[-1] * f)
