"""Path-length metrics: ASPL and DIK, diameter, efficiency, cyclic coefficient,
characteristic path length, expansion and effective eccentricity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .graph import MetricResult, Topology, TopologyError, Undefined, components, distance_matrix

ASPL_MODES = ("finite_only", "giant_component", "dik")
DIAMETER_POLICIES = ("infinite", "finite_only")


@dataclass
class DistanceSummary:
    aspl: float | Undefined
    diameter: float
    dik: float | Undefined
    width: float | Undefined
    per_node_aspl: list = field(default_factory=list)
    per_node_efficiency: list = field(default_factory=list)
    connected: bool = True


def _offdiag_finite(d: np.ndarray) -> np.ndarray:
    mask = np.isfinite(d)
    np.fill_diagonal(mask, False)
    return mask


def _per_node_mean(d: np.ndarray, mask: np.ndarray) -> list:
    out = []
    for i in range(d.shape[0]):
        row = d[i][mask[i]]
        out.append(float(row.mean()) if len(row) else Undefined("no reachable node"))
    return out


def aspl(t: Topology, mode: str = "finite_only", weighted: bool = False) -> MetricResult:
    """Average shortest path length under an explicit disconnected-pair policy.

    ``finite_only`` averages over all reachable ordered pairs,
    ``giant_component`` restricts to the largest (weak) component and ``dik``
    divides the finite average by the fraction of connected pairs.
    """
    if mode not in ASPL_MODES:
        raise TopologyError(f"unknown ASPL mode {mode!r}; choose from {ASPL_MODES}")
    if t.v < 2:
        raise TopologyError("ASPL needs at least two nodes")
    sub = t
    if mode == "giant_component":
        sub = t.induced(components(t).largest_members())
    d = distance_matrix(sub, weighted=weighted)
    mask = _offdiag_finite(d)
    pairs = int(mask.sum())
    key = "dik" if mode == "dik" else "aspl"
    if pairs == 0:
        return MetricResult(key, "global_scalar", Undefined("no finite pair"), (0, None))
    mean = float(d[mask].mean())
    witness = {"per_node": _per_node_mean(d, mask), "pairs": pairs, "mode": mode}
    if mode == "dik":
        K = pairs / (t.v * (t.v - 1))
        witness["K"] = K
        return MetricResult(key, "global_scalar", mean / K, (0, None), witness=witness)
    return MetricResult(key, "global_scalar", mean, (0, None), witness=witness)


def distance_distribution_width(t: Topology, weighted: bool = False) -> MetricResult:
    """Standard deviation of the finite pair distances."""
    d = distance_matrix(t, weighted=weighted)
    mask = _offdiag_finite(d)
    if not mask.any():
        return MetricResult("distance_width", "global_scalar", Undefined("no finite pair"), (0, None))
    return MetricResult("distance_width", "global_scalar", float(d[mask].std()), (0, None))


def diameter(t: Topology, policy: str = "infinite", weighted: bool = False) -> MetricResult:
    """Largest pair distance.

    On a disconnected graph ``policy="infinite"`` returns ``inf`` and
    ``finite_only`` the largest finite distance; either way the witness lists
    the diameter of every component.
    """
    if policy not in DIAMETER_POLICIES:
        raise TopologyError(f"unknown diameter policy {policy!r}")
    d = distance_matrix(t, weighted=weighted)
    mask = _offdiag_finite(d)
    infinite = bool((~np.isfinite(d)).any())
    comp = components(t)
    per = []
    for c in range(comp.count):
        m = comp.members(c)
        sub = d[np.ix_(m, m)]
        fin = sub[np.isfinite(sub)]
        per.append(float(fin.max()) if len(fin) else 0.0)
    finite_max = float(d[mask].max()) if mask.any() else 0.0
    val = math.inf if infinite and policy == "infinite" else finite_max
    if not weighted or not t.weighted:
        val = val if math.isinf(val) else int(val)
    return MetricResult("diameter", "global_scalar", val, (0, None),
                        witness={"infinite": infinite, "per_component": per})


def global_efficiency(t: Topology, weighted: bool = False) -> MetricResult:
    """Mean reciprocal distance; unreachable pairs contribute zero.

    The witness carries per-node ``E_i`` and the harmonic mean ``h = 1/E``.
    """
    if t.v < 2:
        raise TopologyError("efficiency needs at least two nodes")
    d = distance_matrix(t, weighted=weighted)
    with np.errstate(divide="ignore"):
        inv = 1.0 / d
    np.fill_diagonal(inv, 0.0)
    per = inv.sum(axis=1) / (t.v - 1)
    E = float(per.mean())
    h = 1.0 / E if E > 0 else Undefined("zero efficiency")
    return MetricResult("global_efficiency", "global_scalar", E, (0, 1),
                        witness={"per_node": per.tolist(), "harmonic_mean": h})


def _length_matrix(t: Topology, weighted: bool) -> sparse.csr_matrix:
    A = t.adjacency(weighted=weighted).tocsr().astype(float)
    if weighted:
        A.data = 1.0 / A.data
    return A


def local_efficiency(t: Topology, cyclic: bool = False, weighted: bool = False) -> MetricResult:
    """Neighbour efficiency after removing each node.

    For every node the distances between its neighbours are measured in the
    graph without that node. ``cyclic=True`` gives the cyclic coefficient,
    which uses ``1/(d+2)`` instead of ``1/d``. Nodes of degree below two are
    undefined and skipped in the mean. Directed graphs are symmetrised.
    """
    u = t.as_undirected()
    weighted = weighted and u.weighted
    L = _length_matrix(u, weighted)
    shift = 2.0 if cyclic else 0.0
    per = []
    for i in range(u.v):
        nb = np.asarray(u.out_neighbors[i], dtype=np.int64)
        k = len(nb)
        if k < 2:
            per.append(Undefined("degree below two"))
            continue
        keep = np.ones(u.v)
        keep[i] = 0.0
        D = sparse.diags(keep)
        Li = D @ L @ D
        d = csgraph.shortest_path(Li, method="D", directed=False, unweighted=not weighted,
                                  indices=nb)[:, nb]
        with np.errstate(divide="ignore"):
            inv = 1.0 / (d + shift)
        np.fill_diagonal(inv, 0.0)
        per.append(float(inv.sum() / (k * (k - 1))))
    vals = [x for x in per if not isinstance(x, Undefined)]
    g = float(np.mean(vals)) if vals else Undefined("no node of degree two or more")
    key = "cyclic_coefficient" if cyclic else "local_efficiency"
    hi = 1 / 3 if cyclic else 1
    return MetricResult(key, "global_scalar", g, (0, hi), witness={"per_node": per})


def characteristic_path_length(t: Topology, labels=None, weighted: bool = False) -> MetricResult:
    """Mean distance within and between label classes.

    The value maps ``label_a -> label_b -> L``. Unreachable pairs are excluded
    and the witness gives, for each class pair, the fraction of pairs that
    were reachable.
    """
    labels = t.node_labels if labels is None else labels
    if labels is None:
        raise TopologyError("characteristic path length needs node labels")
    if len(labels) != t.v:
        raise TopologyError("one label per node required")
    classes = sorted(set(labels), key=str)
    members = {c: np.array([i for i, x in enumerate(labels) if x == c]) for c in classes}
    d = distance_matrix(t, weighted=weighted)
    value, coverage = {}, {}
    for a in classes:
        value[a], coverage[a] = {}, {}
        for b in classes:
            block = d[np.ix_(members[a], members[b])]
            if a == b:
                n = len(members[a])
                if n < 2:
                    value[a][b] = Undefined("class has a single member")
                    coverage[a][b] = Undefined("no pair")
                    continue
                block = block[~np.eye(n, dtype=bool)]
            block = np.ravel(block)
            fin = block[np.isfinite(block)]
            coverage[a][b] = len(fin) / len(block)
            value[a][b] = float(fin.mean()) if len(fin) else Undefined("no reachable pair")
    return MetricResult("characteristic_path_length", "distribution", value, (0, None),
                        witness={"coverage": coverage})


def label_cpl(result: MetricResult, a, b):
    """Look up one class pair, raising for labels that do not occur."""
    if a not in result.value or b not in result.value[a]:
        raise TopologyError(f"label pair ({a!r}, {b!r}) not present")
    return result.value[a][b]


def _hop_matrix(t: Topology) -> np.ndarray:
    return distance_matrix(t, weighted=False)


def _policy_hops(t: Topology, hmax: int) -> np.ndarray:
    from .connectivity import policy_ball

    d = np.full((t.v, t.v), np.inf)
    for i in range(t.v):
        prev = {i}
        d[i, i] = 0
        for h in range(1, hmax + 1):
            ball = set(policy_ball(t, i, h))
            for j in ball - prev:
                d[i, j] = h
            if ball == prev:
                break
            prev = ball
    return d


def expansion(t: Topology, h: int, policy: bool = False) -> MetricResult:
    """Fraction of the other nodes within ``h`` hops, per node and averaged.

    ``policy=True`` counts only valley-free paths on a customer->provider
    relationship digraph.
    """
    if h < 1:
        raise TopologyError("h must be at least 1")
    d = _policy_hops(t, h) if policy else _hop_matrix(t)
    within = (d <= h).sum(axis=1) - 1
    per = within / t.v
    return MetricResult("expansion", "global_scalar", float(per.mean()), (0, 1),
                        witness={"per_node": per.tolist(), "h": h})


def expansion_curve(t: Topology, hmax: int | None = None, policy: bool = False) -> dict:
    """Raw ``E(h)`` curves plus a log-log least-squares exponent.

    The exponent is a diagnostic: it is fitted over the few integer ``h``
    before saturation. Returns ``{"h", "global", "per_node", "p", "r2",
    "p_per_node"}``.
    """
    if hmax is None:
        d0 = _hop_matrix(t)
        fin = d0[np.isfinite(d0)]
        hmax = max(int(fin.max()) if len(fin) else 1, 1)
    d = _policy_hops(t, hmax) if policy else _hop_matrix(t)
    hs = np.arange(1, hmax + 1)
    per = np.stack([((d <= h).sum(axis=1) - 1) / t.v for h in hs], axis=1)
    glob = per.mean(axis=0)

    def fit(y):
        sat = y.max() if len(y) else 0
        if sat <= 0:
            return Undefined("no reachable node"), Undefined("no fit")
        # keep points up to and including the first saturated one
        last = int(np.argmax(y >= sat - 1e-12)) + 1
        x, yy = np.log(hs[:last]), np.log(np.maximum(y[:last], 1e-300))
        if last < 2:
            return Undefined("saturated after one hop"), Undefined("no fit")
        p, c = np.polyfit(x, yy, 1)
        res = yy - (p * x + c)
        tot = ((yy - yy.mean()) ** 2).sum()
        r2 = 1.0 - (res ** 2).sum() / tot if tot > 0 else 1.0
        return float(p), float(r2)

    p, r2 = fit(glob)
    return {"h": hs.tolist(), "global": glob.tolist(), "per_node": per.tolist(), "p": p,
            "r2": r2, "p_per_node": [fit(row)[0] for row in per]}


def _ball_counts(d: np.ndarray):
    """N(i, h) for h = 0..max finite distance; N(i, 0) = 1 (the node itself)."""
    fin = d[np.isfinite(d)]
    hmax = int(fin.max()) if len(fin) else 0
    counts = np.stack([(d <= h).sum(axis=1) for h in range(hmax + 1)], axis=1)
    return counts, np.isfinite(d).sum(axis=1)


def effective_eccentricity(t: Topology, r: float) -> MetricResult:
    """Fewest hops that reach a fraction ``r`` of the nodes reachable from each node."""
    if not 0 < r <= 1:
        raise TopologyError("r must lie in (0, 1]")
    counts, total = _ball_counts(_hop_matrix(t))
    need = r * total - 1e-9
    per = [int(np.argmax(counts[i] >= need[i])) for i in range(t.v)]
    return MetricResult("effective_eccentricity", "per_node", per, (0, max(t.v - 1, 0)))


def effective_diameter(t: Topology, r: float) -> MetricResult:
    """Fewest hops ``h`` with ``sum_i N(i, h) >= r * sum_i N(i, inf)``."""
    if not 0 < r <= 1:
        raise TopologyError("r must lie in (0, 1]")
    counts, total = _ball_counts(_hop_matrix(t))
    agg = counts.sum(axis=0)
    h = int(np.argmax(agg >= r * total.sum() - 1e-9))
    return MetricResult("effective_diameter", "global_scalar", h, (0, max(t.v - 1, 0)))


def distance_summary(t: Topology, weighted: bool = False) -> DistanceSummary:
    fin = aspl(t, "finite_only", weighted)
    dik = aspl(t, "dik", weighted)
    eff = global_efficiency(t, weighted)
    dia = diameter(t, "infinite", weighted)
    return DistanceSummary(
        aspl=fin.value, diameter=dia.value, dik=dik.value,
        width=distance_distribution_width(t, weighted).value,
        per_node_aspl=(fin.witness or {}).get("per_node", []),
        per_node_efficiency=eff.witness["per_node"],
        connected=not dia.witness["infinite"],
    )
