"""Clustering coefficients, edge clustering, modularity and community detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse.linalg import LinearOperator, eigsh

from ._paths import brandes
from .graph import MetricResult, Topology, TopologyError, Undefined

VARIANTS = ("local", "average", "transitivity", "soffer_local", "soffer_average",
            "soffer_transitivity", "barrat", "onnela", "opsahl", "wasserman_faust")
TAU = {
    "arithmetic": lambda a, b: (a + b) / 2,
    "geometric": lambda a, b: np.sqrt(a * b),
    "max": np.maximum,
    "min": np.minimum,
}


def _undirected(t: Topology) -> Topology:
    if t.directed:
        raise TopologyError("this clustering variant needs an undirected graph")
    return t


def _tri_counts(t: Topology) -> np.ndarray:
    """``e(V_i)``: edges among the neighbours of every node."""
    A = t.adjacency()
    return np.asarray((A @ A).multiply(A).sum(axis=1)).ravel() / 2


def _local(t: Topology) -> list:
    k = t.degrees
    tri = _tri_counts(t)
    out = []
    for i in range(t.v):
        if k[i] <= 1:
            out.append(Undefined("degree below two"))
        else:
            out.append(float(tri[i] / (k[i] * (k[i] - 1) / 2)))
    return out


def _mean_defined(vals) -> float | Undefined:
    xs = [x for x in vals if not isinstance(x, Undefined)]
    return float(np.mean(xs)) if xs else Undefined("no node with a defined coefficient")


def _greedy_capacity(caps: list) -> int:
    """Edges of a simple graph on the neighbour set under per-node degree caps.

    Havel-Hakimi style: the node with the largest remaining cap links to the
    next largest ones.
    """
    caps = sorted((c for c in caps if c > 0), reverse=True)
    total = 0
    while caps:
        c = caps.pop(0)
        take = min(c, len(caps))
        for j in range(take):
            caps[j] -= 1
        total += take
        caps = sorted((x for x in caps if x > 0), reverse=True)
    return total


def soffer_bounds(t: Topology) -> tuple[np.ndarray, np.ndarray]:
    """Per node ``(omega_i, Omega_i)``: the rewiring estimate and its closed-form bound."""
    _undirected(t)
    k = t.degrees
    tri = _tri_counts(t)
    omega = np.zeros(t.v, dtype=np.int64)
    bound = np.zeros(t.v, dtype=np.int64)
    for i in range(t.v):
        caps = [int(min(k[j] - 1, k[i] - 1)) for j in t.out_neighbors[i]]
        bound[i] = sum(caps) // 2
        omega[i] = min(bound[i], max(_greedy_capacity(caps), int(tri[i])))
    return omega, bound


def clustering_coefficient(t: Topology, variant: str = "local", tau: str | None = None) -> MetricResult:
    """Clustering coefficient in one of the ``VARIANTS``.

    Local variants return a per-node list with :class:`Undefined` entries for
    nodes where the coefficient does not exist.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    if variant == "wasserman_faust":
        return _wasserman_faust(t, tau)
    _undirected(t)
    if variant == "local":
        return MetricResult("clustering_local", "per_node", _local(t), (0, 1), scope="local")
    if variant == "average":
        return MetricResult("clustering_average", "global_scalar", _mean_defined(_local(t)), (0, 1))
    if variant == "transitivity":
        k = t.degrees
        triplets = float((k * (k - 1) / 2).sum())
        val = float(_tri_counts(t).sum() / triplets) if triplets else Undefined("no connected triplet")
        return MetricResult("clustering_transitivity", "global_scalar", val, (0, 1))
    if variant.startswith("soffer"):
        omega, _ = soffer_bounds(t)
        tri = _tri_counts(t)
        if variant == "soffer_transitivity":
            val = float(tri.sum() / omega.sum()) if omega.sum() else Undefined("all omega_i are zero")
            return MetricResult("clustering_soffer_transitivity", "global_scalar", val, (0, 1))
        loc = [float(tri[i] / omega[i]) if omega[i] > 0 else Undefined("no available neighbour ties")
               for i in range(t.v)]
        if variant == "soffer_local":
            return MetricResult("clustering_soffer_local", "per_node", loc, (0, 1), scope="local")
        return MetricResult("clustering_soffer_average", "global_scalar", _mean_defined(loc), (0, 1))
    if not t.weighted:
        raise TopologyError(f"variant {variant!r} needs edge weights")
    if variant == "barrat":
        return _barrat(t)
    if variant == "onnela":
        return _onnela(t)
    return _opsahl(t, tau)


def _barrat(t: Topology) -> MetricResult:
    A = t.adjacency()
    W = t.adjacency(weighted=True)
    k = t.degrees
    s = np.asarray(W.sum(axis=1)).ravel()
    # sum over ordered neighbour pairs (j, h) of (w_ij + w_ih)/2 equals sum_j w_ij * common(i, j)
    num = np.asarray(W.multiply(A @ A).sum(axis=1)).ravel()
    loc = [float(num[i] / (s[i] * (k[i] - 1))) if k[i] > 1 else Undefined("degree below two")
           for i in range(t.v)]
    return MetricResult("clustering_barrat", "per_node", loc, (0, 1), scope="local")


def _onnela(t: Topology) -> MetricResult:
    W = t.adjacency(weighted=True)
    W3 = W / W.max()
    W3.data = np.cbrt(W3.data)
    cyc = np.asarray((W3 @ W3).multiply(W3).sum(axis=1)).ravel()
    k = t.degrees
    loc = [float(cyc[i] / (k[i] * (k[i] - 1))) if k[i] > 1 else Undefined("degree below two")
           for i in range(t.v)]
    return MetricResult("clustering_onnela", "per_node", loc, (0, 1), scope="local")


def _tau(tau):
    if tau not in TAU:
        raise ValueError(f"triplet value must be one of {', '.join(TAU)}, got {tau!r}")
    return TAU[tau]


def _opsahl(t: Topology, tau) -> MetricResult:
    f = _tau(tau)
    A = t.adjacency().tocsr()
    W = t.adjacency(weighted=True).tocsr()
    closed = total = 0.0
    for i in range(t.v):
        nb = W.indices[W.indptr[i]:W.indptr[i + 1]]
        if len(nb) < 2:
            continue
        w = W.data[W.indptr[i]:W.indptr[i + 1]]
        val = f(w[:, None], w[None, :])
        iu = np.triu_indices(len(nb), 1)
        link = A[nb][:, nb].toarray()
        total += val[iu].sum()
        closed += (val * link)[iu].sum()
    res = float(closed / total) if total else Undefined("no triplet")
    return MetricResult(f"clustering_opsahl_{tau}", "global_scalar", res, (0, 1))


def _wasserman_faust(t: Topology, tau=None) -> MetricResult:
    """Directed transitivity: paths ``i->j->k`` (``i != k``) closed by ``i->k``."""
    if not t.directed:
        raise TopologyError("the directed transitivity needs a directed graph")
    f = _tau(tau) if (t.weighted and tau is not None) else None
    closed = total = 0.0
    for j in range(t.v):
        for i in t.in_neighbors[j]:
            for k in t.out_neighbors[j]:
                if i == k:
                    continue
                val = f(t.weight(i, j), t.weight(j, k)) if f else 1.0
                total += val
                if t.has_edge(i, k):
                    closed += val
    res = float(closed / total) if total else Undefined("no directed triplet")
    return MetricResult("clustering_wasserman_faust", "global_scalar", res, (0, 1))


def clustering_by_degree(t: Topology) -> MetricResult:
    """Mean local coefficient per degree class."""
    loc = _local(_undirected(t))
    k = t.degrees
    out = {}
    for deg in sorted(set(k.tolist())):
        xs = [loc[i] for i in range(t.v) if k[i] == deg and not isinstance(loc[i], Undefined)]
        if xs:
            out[int(deg)] = float(np.mean(xs))
    return MetricResult("clustering_by_degree", "distribution", out, (0, 1))


def edge_clustering_coefficient(t: Topology, loop_order: int = 3) -> MetricResult:
    """Per-edge coefficient aligned with ``t.edges``.

    ``loop_order=3`` counts triangles through the edge; ``4`` counts squares
    and normalises by ``(k_i - 1)(k_j - 1)``.
    """
    _undirected(t)
    if loop_order not in (3, 4):
        raise ValueError("loop_order must be 3 or 4")
    A = t.adjacency().tocsr()
    k = t.degrees
    nb = t.neighbor_sets
    out = []
    for u, w in t.edges:
        lo = min(k[u], k[w]) - 1
        if lo <= 0:
            out.append(Undefined("endpoint of degree one"))
            continue
        if loop_order == 3:
            out.append(float((len(nb[u] & nb[w]) + 1) / lo))
        else:
            sq = 0
            for x in nb[u] - {w}:
                for y in nb[w] - {u, x}:
                    if A[x, y]:
                        sq += 1
            out.append(float((sq + 1) / ((k[u] - 1) * (k[w] - 1))))
    # sq <= (k_i - 1)(k_j - 1) keeps both loop orders within [0, 2]
    return MetricResult(f"edge_clustering_{loop_order}", "per_edge", out, (0, 2), scope="local")


# -- communities -------------------------------------------------------------

@dataclass
class CommunityAssignment:
    labels: np.ndarray
    E: np.ndarray
    Q: float

    @property
    def count(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


def _dense_labels(labels) -> np.ndarray:
    labels = np.asarray(labels)
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = {labels[first[o]]: n for n, o in enumerate(order)}
    return np.array([remap[x] for x in labels], dtype=np.int64)


def mixing_matrix(t: Topology, labels, weighted: bool = False) -> np.ndarray:
    lab = _dense_labels(labels)
    c = int(lab.max()) + 1 if len(lab) else 0
    E = np.zeros((c, c))
    u = t.as_undirected()
    if u.e == 0:
        return E
    ea = np.asarray(u.edges)
    w = u.edge_weights if (weighted and u.weighted) else np.ones(u.e)
    np.add.at(E, (lab[ea[:, 0]], lab[ea[:, 1]]), w / 2)
    np.add.at(E, (lab[ea[:, 1]], lab[ea[:, 0]]), w / 2)
    return E / w.sum()


def modularity(t: Topology, labels, weighted: bool = False) -> float:
    """``Tr E - ||E^2||`` where ``||.||`` sums all matrix elements."""
    if len(labels) != t.v:
        raise ValueError("assignment must label every node")
    E = mixing_matrix(t, labels, weighted)
    if E.size == 0 or E.sum() == 0:
        return 0.0
    return float(np.trace(E) - (E @ E).sum())


def assignment(t: Topology, labels, weighted: bool = False) -> CommunityAssignment:
    lab = _dense_labels(labels)
    return CommunityAssignment(lab, mixing_matrix(t, lab, weighted), modularity(t, lab, weighted))


def _leading(A, k, m2, group, dense_limit=1500):
    """Leading eigenpair of the generalised modularity matrix of ``group``."""
    kg = k[group]
    sub = A[group][:, group]
    rowsum = np.asarray(sub.sum(axis=1)).ravel() - kg * kg.sum() / m2
    if len(group) <= dense_limit:
        B = sub.toarray() - np.outer(kg, kg) / m2
        B[np.diag_indices_from(B)] -= rowsum
        vals, vecs = np.linalg.eigh(B)
        return vals[-1], vecs[:, -1], B

    def mv(x):
        x = np.asarray(x).ravel()
        return sub @ x - kg * (kg @ x) / m2 - rowsum * x

    op = LinearOperator((len(group), len(group)), matvec=mv, dtype=float)
    vals, vecs = eigsh(op, k=1, which="LA", tol=1e-10, maxiter=10_000)
    return vals[0], vecs[:, 0], op


def detect_communities_spectral(t: Topology, weighted: bool = False, tol: float = 1e-10) -> CommunityAssignment:
    """Recursive leading-eigenvector bisection of the modularity matrix.

    A group is split by the sign pattern of the leading eigenvector while the
    eigenvalue is positive and the split raises modularity.
    """
    u = t.as_undirected()
    A = u.adjacency(weighted=weighted).tocsr()
    k = np.asarray(A.sum(axis=1)).ravel()
    m2 = k.sum()
    labels = np.zeros(u.v, dtype=np.int64)
    if m2 == 0:
        return assignment(u, np.arange(u.v), weighted)
    queue = [np.arange(u.v)]
    nxt = 1
    while queue:
        group = queue.pop(0)
        if len(group) < 2:
            continue
        lam, vec, B = _leading(A, k, m2, group)
        if lam <= tol:
            continue
        s = np.where(vec >= 0, 1.0, -1.0)
        if abs(s.sum()) == len(s):
            continue
        gain = s @ (B @ s) / (2 * m2)
        if gain <= tol:
            continue
        neg = group[s < 0]
        labels[neg] = nxt
        nxt += 1
        queue.extend([group[s > 0], neg])
    return assignment(u, labels, weighted)


def detect_communities_edge_betweenness(t: Topology, sample_fraction: float = 1.0, seed=None,
                                        weighted: bool = False) -> CommunityAssignment:
    """Girvan-Newman: delete the top edge-betweenness link, recompute, keep the best-Q state.

    With ``sample_fraction < 1`` betweenness is summed over a seeded random
    subset of sources. Ties go to the lowest edge id.
    """
    u = t.as_undirected()
    if u.e == 0:
        raise TopologyError("edge-betweenness partitioning needs at least one edge")
    if not 0 < sample_fraction <= 1:
        raise ValueError("sample_fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    alive = np.ones(u.e, dtype=bool)
    ea = np.asarray(u.edges)
    n_src = max(1, int(round(sample_fraction * u.v)))

    def labels_now():
        sel = ea[alive]
        m = sparse.coo_matrix((np.ones(len(sel)), (sel[:, 0], sel[:, 1])), shape=(u.v, u.v))
        return csgraph.connected_components(m, directed=False)[1]

    best = labels_now()
    best_q = modularity(u, best, weighted)
    ncomp = len(set(best.tolist()))
    while alive.any():
        src = None if n_src >= u.v else np.sort(rng.choice(u.v, n_src, replace=False))
        _, eb = brandes(u, sources=src, weighted=weighted, edge_alive=alive)
        eb = np.where(alive, eb, -np.inf)
        top = eb.max()
        pick = int(np.flatnonzero(eb >= top - 1e-9 * max(1.0, top))[0])
        alive[pick] = False
        lab = labels_now()
        c = len(set(lab.tolist()))
        if c != ncomp:
            ncomp = c
            q = modularity(u, lab, weighted)
            if q > best_q + 1e-12:
                best, best_q = lab, q
    return assignment(u, best, weighted)


def zscore_within_module(t: Topology, labels) -> MetricResult:
    """Within-community degree standardised per community (population sigma; sigma=0 gives 0)."""
    u = t.as_undirected()
    lab = _dense_labels(labels)
    within = np.zeros(u.v)
    for a, b in u.edges:
        if lab[a] == lab[b]:
            within[a] += 1
            within[b] += 1
    z = np.zeros(u.v)
    for c in np.unique(lab):
        idx = lab == c
        sd = within[idx].std()
        if sd > 0:
            z[idx] = (within[idx] - within[idx].mean()) / sd
    return MetricResult("within_module_zscore", "per_node", z.tolist(), (None, None), scope="local")


def participation_coefficient(t: Topology, labels) -> MetricResult:
    u = t.as_undirected()
    lab = _dense_labels(labels)
    c = int(lab.max()) + 1
    counts = np.zeros((u.v, c))
    for a, b in u.edges:
        counts[a, lab[b]] += 1
        counts[b, lab[a]] += 1
    k = counts.sum(axis=1)
    out = []
    for i in range(u.v):
        if k[i] == 0:
            out.append(Undefined("isolated node"))
        else:
            out.append(float(1 - ((counts[i] / k[i]) ** 2).sum()))
    return MetricResult("participation_coefficient", "per_node", out, (0, 1), scope="local")
