"""Geographic metrics: distance strength and outreach, survivability under
regional failures, pointwise vulnerability and geographic path diversity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .graph import MetricResult, Topology, TopologyError, Undefined, components, distance_matrix

EARTH_RADIUS_KM = 6371.0088


@dataclass
class GeoParams:
    lam: float | None = None  # None: calibrate so EGPD = 1 - 1/e at the median k_sd
    omega: float = 0.5
    k: int = 3
    rho: float = 0.05

    def __post_init__(self):
        if not 0 <= self.omega <= 1:
            raise TopologyError("omega must lie in [0, 1]")
        if self.lam is not None and self.lam <= 0:
            raise TopologyError("lambda must be positive")
        if self.k < 1:
            raise TopologyError("k must be at least 1")


def _coords(t: Topology) -> np.ndarray:
    if t.node_coords is None:
        raise TopologyError("geographic metric needs node coordinates")
    return np.asarray(t.node_coords, dtype=float)


def haversine(a, b) -> np.ndarray:
    """Great-circle distance in km between (lat, lon) degree arrays."""
    a, b = np.radians(np.asarray(a, float)), np.radians(np.asarray(b, float))
    dlat = b[..., 0] - a[..., 0]
    dlon = b[..., 1] - a[..., 1]
    h = np.sin(dlat / 2) ** 2 + np.cos(a[..., 0]) * np.cos(b[..., 0]) * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0, 1)))


def geo_distances(t: Topology) -> np.ndarray:
    """Pairwise geographic distances: haversine km for ``latlon``, Euclidean otherwise."""
    c = _coords(t)
    if t.coord_kind == "latlon":
        return haversine(c[:, None, :], c[None, :, :])
    return np.sqrt(((c[:, None, :] - c[None, :, :]) ** 2).sum(axis=-1))


def _planar(t: Topology, pts: np.ndarray) -> np.ndarray:
    """Local equirectangular projection to km for area computations."""
    if t.coord_kind != "latlon":
        return pts
    lat0 = math.radians(float(np.mean(pts[:, 0])))
    k = math.pi * EARTH_RADIUS_KM / 180
    return np.column_stack([pts[:, 1] * k * math.cos(lat0), pts[:, 0] * k])


def distance_strength_outreach(t: Topology) -> dict:
    """Per-node sums of neighbour distances, plain and weighted by edge weight.

    Outreach is undefined without edge weights. Directed graphs sum over
    out-neighbours.
    """
    g = geo_distances(t)
    D = np.zeros(t.v)
    O = np.zeros(t.v)
    for k, (u, w) in enumerate(t.edges):
        wt = t.edge_weights[k] if t.weighted else 1.0
        D[u] += g[u, w]
        O[u] += wt * g[u, w]
        if not t.directed:
            D[w] += g[u, w]
            O[w] += wt * g[u, w]
    return {
        "distance_strength": MetricResult("distance_strength", "per_node", D.tolist(), (0, None)),
        "outreach": MetricResult("outreach", "per_node",
                                 O.tolist() if t.weighted else Undefined("no edge weights"), (0, None)),
    }


# -- regional failures -----------------------------------------------------

@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float

    def __post_init__(self):
        if len(self.center) != 2 or not self.radius >= 0:
            raise TopologyError("disk needs a 2-d centre and a non-negative radius")

    def contains(self, t: Topology) -> np.ndarray:
        c = _coords(t)
        if t.coord_kind == "latlon":
            d = haversine(c, np.asarray(self.center, float)[None, :])
        else:
            d = np.sqrt(((c - np.asarray(self.center, float)) ** 2).sum(axis=1))
        return d <= self.radius


@dataclass(frozen=True)
class Polygon:
    vertices: tuple

    def __post_init__(self):
        if len(self.vertices) < 3 or any(len(p) != 2 for p in self.vertices):
            raise TopologyError("polygon needs at least three 2-d vertices")

    def contains(self, t: Topology) -> np.ndarray:
        """Even-odd ray casting in coordinate space."""
        c = _coords(t)
        poly = np.asarray(self.vertices, float)
        x, y = c[:, 0], c[:, 1]
        inside = np.zeros(len(c), bool)
        j = len(poly) - 1
        for i in range(len(poly)):
            xi, yi = poly[i]
            xj, yj = poly[j]
            cross = (yi > y) != (yj > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = (xj - xi) * (y - yi) / (yj - yi) + xi
            inside ^= cross & (x < xint)
            j = i
        return inside


@dataclass
class GeoSurvivability:
    distribution: dict
    expected: float
    worst_case: float


def geo_survivability(t: Topology, events) -> GeoSurvivability:
    """Distribution of the giant-component fraction over regional failure events.

    ``events`` is a list of ``(region, probability)``; nodes inside a region
    fail together. The leftover probability is the no-event outcome. The
    fraction uses the original node count.
    """
    total = 0.0
    dist: dict = {}
    for region, p in events:
        if not hasattr(region, "contains"):
            raise TopologyError("event region must be a Disk or Polygon")
        if not 0 <= p <= 1:
            raise TopologyError("event probability must lie in [0, 1]")
        total += p
        gone = region.contains(t)
        rest = t.induced(np.flatnonzero(~gone))
        x = components(rest).largest / t.v
        dist[x] = dist.get(x, 0.0) + p
    if total > 1 + 1e-12:
        raise TopologyError("event probabilities sum to more than one")
    if total < 1 - 1e-12:
        x = components(t).largest / t.v
        dist[x] = dist.get(x, 0.0) + (1 - total)
    dist = dict(sorted(dist.items()))
    expected = float(sum(x * p for x, p in dist.items()))
    worst = min(x for x, p in dist.items() if p > 0)
    return GeoSurvivability(dist, expected, worst)


# -- pointwise vulnerability -----------------------------------------------

def _eucl_efficiency(g: np.ndarray, d: np.ndarray, v: int) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(np.isfinite(d) & (d > 0), g / d, 0.0)
    return float(r.sum() / (v * (v - 1)))


def pointwise_vulnerability(t: Topology, weighted: bool = False) -> MetricResult:
    """Relative drop of the Euclidean efficiency when each node is removed.

    Pairs involving the removed node contribute nothing afterwards while the
    ``v(v-1)`` normalisation is kept. The witness holds the global value
    (maximum) and the relative variance.
    """
    if t.v < 3:
        raise TopologyError("pointwise vulnerability needs at least three nodes")
    g = geo_distances(t)
    base = _eucl_efficiency(g, distance_matrix(t, weighted), t.v)
    if base <= 0:
        raise TopologyError("Euclidean efficiency of the intact graph is zero")
    U = np.zeros(t.v)
    for i in range(t.v):
        keep = np.r_[0:i, i + 1:t.v]
        sub = t.induced(keep)
        after = _eucl_efficiency(g[np.ix_(keep, keep)], distance_matrix(sub, weighted), t.v)
        U[i] = (base - after) / base
    mean = U.mean()
    h = float(((U - mean) ** 2).mean() / mean ** 2) if mean > 0 else Undefined("zero mean vulnerability")
    return MetricResult("pointwise_vulnerability", "per_node", U.tolist(), (0, 1), mode="dynamic",
                        witness={"global": float(U.max()), "relative_variance": h,
                                 "efficiency": base})


# -- geographic path diversity ---------------------------------------------

def _path(pred: np.ndarray, s: int, d: int):
    if s != d and pred[d] < 0:
        return None
    out = [d]
    while out[-1] != s:
        out.append(int(pred[out[-1]]))
    return out[::-1]


def alternative_paths(t: Topology, s: int, d: int, k: int = 3, g=None) -> list:
    """Shortest geographic path followed by up to ``k`` distinct alternatives.

    Each new path is a shortest path after every interior node of earlier
    paths has been made very expensive, so paths stay node-disjoint whenever
    the topology allows it.
    """
    g = geo_distances(t) if g is None else g
    ea = np.asarray(t.edges).reshape(-1, 2)
    base = g[ea[:, 0], ea[:, 1]] + 1e-9
    penalty = base.sum() + 1.0
    used = np.zeros(t.v)
    paths = []
    for _ in range(k + 1):
        w = base + penalty * (used[ea[:, 0]] + used[ea[:, 1]]) / 2
        M = sparse.csr_matrix((w, (ea[:, 0], ea[:, 1])), shape=(t.v, t.v))
        _, pred = csgraph.dijkstra(M, directed=t.directed, indices=s, return_predecessors=True)
        p = _path(pred, s, d)
        if p is None or p in paths:
            break
        paths.append(p)
        used[p[1:-1]] = 1.0
    return paths


def _shoelace(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def path_separation(t: Topology, pa: list, pb: list, omega: float, g) -> float:
    """``omega * Dmin^2 + (1 - omega) * area`` between two s-d paths.

    ``Dmin`` is the smallest distance between interior nodes of the two
    paths (a path without interior nodes contributes its endpoints). The
    area is the shoelace area of the loop formed by ``pa`` and reversed ``pb``.
    """
    ia = pa[1:-1] or pa
    ib = pb[1:-1] or pb
    block = g[np.ix_(ia, ib)]
    if not pa[1:-1] or not pb[1:-1]:
        same = np.equal.outer(ia, ib)
        block = np.where(same, np.inf, block)
    dmin = float(block.min()) if np.isfinite(block).any() else 0.0
    loop = pa + pb[::-1][1:-1]
    area = _shoelace(_planar(t, _coords(t)[loop])) if len(loop) >= 3 else 0.0
    return omega * dmin ** 2 + (1 - omega) * area


def path_diversity(t: Topology, s: int, d: int, params: GeoParams | None = None, g=None) -> float:
    """``k_sd``: summed separation of each alternative from the closest earlier path."""
    params = params or GeoParams()
    g = geo_distances(t) if g is None else g
    paths = alternative_paths(t, s, d, params.k, g)
    total = 0.0
    for i in range(1, len(paths)):
        total += min(path_separation(t, paths[i], paths[j], params.omega, g) for j in range(i))
    return total


def _pairs(t: Topology):
    comp = components(t).labels
    for s in range(t.v):
        for d in range(s + 1, t.v):
            yield s, d, comp[s] == comp[d]


def calibrate_lambda(t: Topology, params: GeoParams | None = None, g=None) -> float:
    """``1 / median`` of the nonzero ``k_sd`` over connected pairs (EGPD = 1 - 1/e there)."""
    params = params or GeoParams()
    g = geo_distances(t) if g is None else g
    ks = [path_diversity(t, s, d, params, g) for s, d, ok in _pairs(t) if ok]
    nz = [k for k in ks if k > 0]
    if not nz:
        return 1.0
    return 1.0 / float(np.median(nz))


def egpd(t: Topology, s: int, d: int, params: GeoParams | None = None) -> float:
    if s == d:
        raise TopologyError("source and destination must differ")
    params = params or GeoParams()
    g = geo_distances(t)
    lam = params.lam if params.lam is not None else calibrate_lambda(t, params, g)
    return float(1 - math.exp(-lam * path_diversity(t, s, d, params, g)))


def tggd(t: Topology, params: GeoParams | None = None) -> MetricResult:
    """Mean EGPD over node pairs and its compensated form ``e^(TGGD-1) |E|^-rho``.

    Disconnected pairs count as zero diversity.
    """
    params = params or GeoParams()
    if t.v < 2:
        raise TopologyError("TGGD needs at least two nodes")
    g = geo_distances(t)
    pairs = list(_pairs(t))
    ks = np.array([path_diversity(t, s, d, params, g) if ok else 0.0 for s, d, ok in pairs])
    nz = ks[ks > 0]
    lam = params.lam if params.lam is not None else (1.0 / float(np.median(nz)) if len(nz) else 1.0)
    e = 1 - np.exp(-lam * ks)
    T = float(e.mean())
    c = math.exp(T - 1) * max(t.e, 1) ** (-params.rho)
    return MetricResult("tggd", "global_scalar", T, (0, 1),
                        witness={"ctggd": c, "lambda": lam, "egpd": e.tolist()})
