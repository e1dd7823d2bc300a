"""Degree-based metrics: degree and strength distributions, entropy, skewness,
vulnerability function, assortativity, neighbour connectivity and rich-club."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .graph import MetricResult, Topology, TopologyError, Undefined, build_topology


@dataclass
class DegreeView:
    k: np.ndarray
    s: np.ndarray | None = None
    k_in: np.ndarray | None = None
    k_out: np.ndarray | None = None
    s_in: np.ndarray | None = None
    s_out: np.ndarray | None = None
    P: dict = field(default_factory=dict)
    P_s: dict = field(default_factory=dict)

    @property
    def D(self) -> dict:
        """Degree distribution as counts, ``P(k) * v``."""
        n = len(self.k)
        return {k: p * n for k, p in self.P.items()}

    @property
    def sigma(self) -> float:
        return float(np.std(self.k)) if len(self.k) else 0.0


def _freq(values) -> dict:
    n = len(values)
    c = Counter(values.tolist() if isinstance(values, np.ndarray) else values)
    return {key: cnt / n for key, cnt in sorted(c.items())}


def _strengths(t: Topology):
    """Out- and in-strength (equal for undirected graphs)."""
    w = t.edge_weights if t.weighted else np.ones(t.e)
    out = np.zeros(t.v)
    inn = np.zeros(t.v)
    if t.e:
        ea = np.asarray(t.edges)
        np.add.at(out, ea[:, 0], w)
        np.add.at(inn, ea[:, 1], w)
    if not t.directed:
        out = inn = out + inn
    return out, inn


def degree_metrics(t: Topology) -> DegreeView:
    s_out, s_in = _strengths(t)
    if t.directed:
        k_out, k_in = t.degrees.copy(), t.in_degrees.copy()
        k = k_out + k_in
        view = DegreeView(k=k, s=s_out + s_in if t.weighted else None, k_in=k_in, k_out=k_out,
                          s_in=s_in if t.weighted else None, s_out=s_out if t.weighted else None)
    else:
        k = t.degrees.copy()
        view = DegreeView(k=k, s=s_out if t.weighted else None)
    view.P = _freq(k)
    if view.s is not None:
        view.P_s = _freq(np.round(view.s, 12))
    return view


def _undirected_degrees(t: Topology) -> np.ndarray:
    return t.as_undirected().degrees


def entropy(t: Topology) -> MetricResult:
    """Shannon entropy (natural log) of the degree-frequency distribution."""
    if t.v < 2:
        raise TopologyError("entropy needs at least two nodes")
    P = _freq(_undirected_degrees(t))
    p = np.array([q for k, q in P.items() if 1 <= k <= t.v - 1])
    h = float(-(p * np.log(p)).sum()) if len(p) else 0.0
    h = max(h, 0.0)
    return MetricResult("entropy", "global_scalar", h, (0, float(np.log(t.v - 1)) if t.v > 2 else 0))


def skewness(t: Topology) -> MetricResult:
    """Rank-weighted degree sum relative to a uniform graph of the same mean degree.

    Rank 1 goes to the highest degree. Ties get consecutive ranks, but since
    tied nodes share a degree their order never changes the sum.
    """
    k = _undirected_degrees(t).astype(float)
    if k.sum() == 0:
        return MetricResult("skewness", "global_scalar", Undefined("no edges"), (0, 1))
    order = np.argsort(-k, kind="stable")
    ranks = np.empty(t.v)
    ranks[order] = np.arange(1, t.v + 1)
    sk_u = k.mean() * t.v * (t.v + 1) / 2
    return MetricResult("skewness", "global_scalar", float((ranks * k).sum() / sk_u), (0, 1))


def vulnerability_function(t: Topology) -> MetricResult:
    if t.directed or t.weighted:
        raise TopologyError("the vulnerability function is defined for simple graphs only")
    v, e = t.v, t.e
    sigma = float(np.std(t.degrees))
    val = float(np.exp(sigma / v + v - e - 2 + 2 / v))
    return MetricResult("vulnerability_function", "global_scalar", val, (0, 1))


def assortative_coefficient(t: Topology) -> MetricResult:
    """Pearson correlation of endpoint degrees over both orientations of every edge."""
    u = t.as_undirected()
    if u.e == 0:
        return MetricResult("assortativity", "global_scalar", Undefined("no edges"), (-1, 1))
    k = u.degrees.astype(float)
    ea = np.asarray(u.edges)
    x = np.concatenate([k[ea[:, 0]], k[ea[:, 1]]])
    y = np.concatenate([k[ea[:, 1]], k[ea[:, 0]]])
    if np.allclose(x, x[0]):
        return MetricResult("assortativity", "global_scalar",
                            Undefined("zero degree variance over edge endpoints"), (-1, 1))
    r = float(np.corrcoef(x, y)[0, 1])
    return MetricResult("assortativity", "global_scalar", float(np.clip(r, -1, 1)), (-1, 1))


def neighbor_connectivity(t: Topology, weighted: bool = False) -> MetricResult:
    """Average neighbour degree per degree class; empty classes are omitted.

    The weighted form averages ``k_j`` with weights ``w_ij / s_i``.
    """
    u = t.as_undirected()
    if weighted and not u.weighted:
        raise TopologyError("weighted neighbour connectivity needs edge weights")
    k = u.degrees.astype(float)
    A = u.adjacency(weighted=weighted)
    s = np.asarray(A.sum(axis=1)).ravel()
    num = A @ k
    per_node = np.full(u.v, np.nan)
    nz = s > 0
    per_node[nz] = num[nz] / s[nz]
    out = {}
    for deg in np.unique(k[nz]).astype(int):
        out[int(deg)] = float(per_node[k == deg].mean())
    key = "neighbor_connectivity_weighted" if weighted else "neighbor_connectivity"
    return MetricResult(key, "distribution", out, (0, u.v - 1))


def _phi(A, score: np.ndarray, threshold: float, weighted: bool):
    members = np.flatnonzero(score > threshold)
    if len(members) <= 1:
        return Undefined("fewer than two members above threshold")
    sub = A[members][:, members]
    if weighted:
        s = np.asarray(A[members].sum(axis=1)).ravel()
        return float(sub.sum() / s.sum()) if s.sum() > 0 else Undefined("zero strength")
    n = len(members)
    return float(sub.sum() / (n * (n - 1)))


def degree_preserving_randomization(t: Topology, swaps_per_edge: int = 10, seed=None) -> Topology:
    """Double-edge swaps that keep every degree and the graph simple.

    Weights travel with their edges.
    """
    u = t.as_undirected()
    rng = np.random.default_rng(seed)
    edges = [list(e) for e in u.edges]
    wts = list(u.edge_weights) if u.weighted else None
    present = set(u.edges)
    m = len(edges)
    if m < 2:
        return u
    for _ in range(swaps_per_edge * m):
        i, j = rng.integers(m, size=2)
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        if len({a, b, c, d}) < 4:
            continue
        e1, e2 = (min(a, d), max(a, d)), (min(c, b), max(c, b))
        if e1 in present or e2 in present:
            continue
        present.discard((min(a, b), max(a, b)))
        present.discard((min(c, d), max(c, d)))
        present.update((e1, e2))
        edges[i], edges[j] = list(e1), list(e2)
    items = [tuple(e) for e in edges]
    return build_topology(u.v, items, weights=wts)


def rich_club(t: Topology, weighted: bool = False, null_samples: int = 100, seed=0,
              thresholds=None) -> MetricResult:
    """Rich-club coefficient per threshold with a degree-preserving null normalisation.

    The value maps threshold -> ``{"phi": ..., "rho_null": ...}``. Thresholds
    default to every degree below the maximum (or every strength present
    except the largest).
    """
    u = t.as_undirected()
    if weighted and not u.weighted:
        raise TopologyError("weighted rich-club needs edge weights")
    A = u.adjacency(weighted=weighted).toarray()
    score = A.sum(axis=1) if weighted else u.degrees.astype(float)
    if thresholds is None:
        if weighted:
            thresholds = sorted(set(np.round(score, 12).tolist()))[:-1]
        else:
            thresholds = list(range(int(score.max()) if len(score) else 0))
    rng = np.random.default_rng(seed)
    nulls = []
    for _ in range(null_samples):
        r = degree_preserving_randomization(u, seed=rng)
        Ar = r.adjacency(weighted=weighted).toarray()
        nulls.append((Ar, Ar.sum(axis=1) if weighted else r.degrees.astype(float)))
    out = {}
    for th in thresholds:
        phi = _phi(A, score, th, weighted)
        ran = [_phi(Ar, sc, th, weighted) for Ar, sc in nulls]
        ran = [x for x in ran if not isinstance(x, Undefined)]
        rho = Undefined("no null reference")
        if not isinstance(phi, Undefined) and ran and np.mean(ran) > 0:
            rho = float(phi / np.mean(ran))
        out[th] = {"phi": phi, "rho_null": rho}
    key = "rich_club_weighted" if weighted else "rich_club"
    return MetricResult(key, "distribution", out, (0, None))
