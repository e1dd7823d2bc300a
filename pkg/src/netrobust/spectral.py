"""Spectral and random-walk metrics: eigenvector centrality, symmetry ratio,
spectral clusters, algebraic connectivity, good expansion, spanning trees,
natural connectivity, random-walk distance and betweenness, current-flow
closeness and betweenness, network criticality."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as splinalg
from scipy.special import logsumexp

from .clustering import CommunityAssignment, assignment
from .distance import diameter
from .graph import MetricResult, Topology, TopologyError, Undefined, components, is_connected

DENSE_LIMIT = 2000
EXACT_TREES = 50
PINV_RTOL = 1e-10


class SpectralCache:
    """Eigen data of one undirected topology, computed lazily and reused."""

    def __init__(self, t: Topology, weighted: bool = False):
        self.t = t.as_undirected() if t.directed else t
        self.weighted = bool(weighted and self.t.weighted)

    @cached_property
    def A(self) -> np.ndarray:
        return self.t.dense_adjacency(weighted=self.weighted).astype(float)

    @cached_property
    def L(self) -> np.ndarray:
        return np.diag(self.A.sum(axis=1)) - self.A

    @cached_property
    def adjacency_eigen(self):
        """Ascending eigenvalues and eigenvectors of ``A``."""
        return np.linalg.eigh(self.A)

    @cached_property
    def laplacian_eigen(self):
        return np.linalg.eigh(self.L)

    @cached_property
    def L_pinv(self) -> np.ndarray:
        vals, vecs = self.laplacian_eigen
        cut = PINV_RTOL * max(abs(vals).max(), 1.0)
        inv = np.where(vals > cut, 1.0 / np.where(vals > cut, vals, 1.0), 0.0)
        return (vecs * inv) @ vecs.T

    @property
    def spectral_gap(self) -> float:
        vals = self.adjacency_eigen[0]
        return float(vals[-1] - vals[-2]) if len(vals) > 1 else 0.0

    def check_residual(self) -> float:
        vals, vecs = self.adjacency_eigen
        return float(np.abs(self.A @ vecs - vecs * vals).max())


# -- eigenvector centrality ------------------------------------------------

def _power(A, tol, max_iter, shift):
    x = np.ones(A.shape[0])
    x /= x.sum()
    for _ in range(max_iter):
        y = A @ x + shift * x
        s = y.sum()
        if s <= 0:
            return None
        y /= s
        if np.abs(y - x).max() < tol:
            return y
        x = y
    return None


def eigenvector_centrality(t: Topology, tol: float = 1e-12, max_iter: int = 100000,
                           weighted: bool = False) -> MetricResult:
    """Principal adjacency eigenvector by power iteration, normalised to sum one.

    Disconnected graphs are evaluated on the largest component, every other
    node gets zero. Bipartite graphs make the plain iteration oscillate, in
    which case it is retried on ``A + I`` (same eigenvector).
    """
    u = t.as_undirected()
    comp = components(u)
    keep = comp.largest_members()
    A = u.adjacency(weighted=weighted and u.weighted)[keep][:, keep].astype(float)
    if len(keep) == 1:
        x = np.ones(1)
    else:
        x = _power(A, tol, max_iter, 0.0)
        shifted = x is None
        if shifted:
            x = _power(A, tol, max_iter, 1.0)
        if x is None:
            raise TopologyError("eigenvector iteration did not converge")
    out = np.zeros(u.v)
    out[keep] = x
    return MetricResult("eigenvector_centrality", "per_node", out.tolist(), (0, 1),
                        witness={"component_size": len(keep)})


def symmetry_ratio(t: Topology) -> MetricResult:
    """Distinct adjacency eigenvalues divided by ``D + 1``."""
    if not is_connected(t):
        return MetricResult("symmetry_ratio", "global_scalar",
                            Undefined("disconnected: infinite diameter"), (1, t.v / 3))
    vals = SpectralCache(t).adjacency_eigen[0]
    tol = 1e-8 * max(np.abs(vals).max(), 1e-300)
    distinct = 1 + int((np.diff(vals) > tol).sum())
    D = diameter(t).value
    return MetricResult("symmetry_ratio", "global_scalar", distinct / (D + 1), (1, max(t.v / 3, 1)),
                        witness={"distinct": distinct, "diameter": D})


# -- spectral clusters -----------------------------------------------------

def sim_matrix(t: Topology) -> np.ndarray:
    """``A A^T`` with a zero diagonal: common out-neighbours (shared providers)."""
    A = t.dense_adjacency().astype(float)
    S = A @ A.T
    np.fill_diagonal(S, 0.0)
    return S


def normalized_matrix(W: np.ndarray) -> np.ndarray:
    """Rows divided by twice their sum, diagonal set to one half."""
    s = W.sum(axis=1)
    N = np.divide(W, 2 * s[:, None], out=np.zeros_like(W), where=s[:, None] > 0)
    np.fill_diagonal(N, 0.5)
    return N


def _conductance(W: np.ndarray, side: np.ndarray) -> float:
    cut = W[np.ix_(side, ~side)].sum()
    vol = min(W[side].sum(), W[~side].sum())
    return float(cut / vol) if vol > 0 else 0.0


@dataclass
class SpectralClustering:
    assignment: CommunityAssignment
    clusters: list = field(default_factory=list)


def _second_vector(W: np.ndarray):
    """Second-largest eigenpair of N(W), computed through the symmetric form."""
    s = W.sum(axis=1)
    dinv = np.where(s > 0, 1.0 / np.sqrt(np.where(s > 0, s, 1.0)), 0.0)
    S = dinv[:, None] * W * dinv[None, :]
    vals, vecs = np.linalg.eigh(S)
    return (1.0 + vals[-2]) / 2.0, dinv * vecs[:, -2]


def spectral_clusters(t: Topology, depth: int = 3, threshold: float = 0.5,
                      max_conductance: float = 0.5) -> SpectralClustering:
    """Recursive bisection with the second eigenvector of the normalised matrix.

    Nodes are sorted by their eigenvector weight and cut at the largest jump.
    A split is kept when the eigenvalue exceeds ``threshold`` and the cut
    conductance is at most ``max_conductance``. Disconnected parts are split
    first. Directed graphs use ``A A^T`` (common providers) as weights.
    """
    W = sim_matrix(t) if t.directed else t.dense_adjacency().astype(float)
    W = np.maximum(W, W.T)
    labels = np.zeros(t.v, dtype=np.int64)
    record = []
    nxt = [1]

    def split(members, level):
        sub = W[np.ix_(members, members)]
        n = len(members)
        if level >= depth or n < 2:
            return
        ncomp, lab = sparse.csgraph.connected_components(sparse.csr_matrix(sub), directed=False)
        if ncomp > 1:
            parts = [members[lab == c] for c in range(ncomp)]
            record.append({"members": members.tolist(), "level": level, "eigenvalue": 1.0,
                           "conductance": 0.0, "split": True})
        else:
            lam, vec = _second_vector(sub)
            order = np.argsort(vec, kind="stable")
            gaps = np.diff(vec[order])
            cut = int(np.argmax(gaps)) + 1
            side = np.zeros(n, bool)
            side[order[:cut]] = True
            phi = _conductance(sub, side)
            ok = lam > threshold and phi <= max_conductance
            record.append({"members": members.tolist(), "level": level, "eigenvalue": float(lam),
                           "conductance": phi, "split": bool(ok)})
            if not ok:
                return
            parts = [members[side], members[~side]]
        for k, p in enumerate(parts):
            if k:
                labels[p] = nxt[0]
                nxt[0] += 1
            split(p, level + 1)

    split(np.arange(t.v), 0)
    return SpectralClustering(assignment(t.as_undirected(), labels), record)


# -- algebraic connectivity and relatives ----------------------------------

def algebraic_connectivity(t: Topology, weighted: bool = False) -> MetricResult:
    """Second-smallest Laplacian eigenvalue (zero iff disconnected)."""
    u = t.as_undirected()
    if u.v < 2:
        return MetricResult("algebraic_connectivity", "global_scalar", 0.0, (0, None))
    if u.v <= DENSE_LIMIT:
        vals = SpectralCache(u, weighted).laplacian_eigen[0]
        lam = float(vals[1])
    else:
        A = u.adjacency(weighted=weighted and u.weighted).astype(float)
        L = sparse.diags(np.asarray(A.sum(axis=1)).ravel()) - A
        vals = splinalg.eigsh(L.tocsc(), k=2, sigma=-1e-3, which="LM", return_eigenvectors=False)
        lam = float(np.sort(vals)[1])
    lam = 0.0 if abs(lam) < 1e-9 * max(u.v, 1) else lam
    kmin = u.degrees.min() if u.v else 0
    return MetricResult("algebraic_connectivity", "global_scalar", lam,
                        (0, u.v / (u.v - 1) * kmin + 1e-9))


@dataclass
class GoodExpansion:
    slope: float | Undefined
    intercept: float | Undefined
    expected_intercept: float
    residuals: list
    theory_residuals: list
    flagged: list
    is_good_expansion: bool
    spectral_gap: float


def good_expansion_test(t: Topology, weighted: bool = False, slope_tol: float = 0.05,
                        intercept_tol: float = 0.25) -> GoodExpansion:
    """Spectral scaling check: regress ``log u_v(i)`` on ``log SC_odd(i)``.

    For a good expander the fit has slope 1/2 and intercept
    ``-0.5 log sinh(lambda_v)``. Nodes falling more than two standard
    deviations below the theoretical line (relative to the median node) are
    flagged as sitting behind a bottleneck.
    """
    if not is_connected(t):
        raise TopologyError("good expansion test needs a connected graph")
    cache = SpectralCache(t, weighted)
    vals, vecs = cache.adjacency_eigen
    u = np.abs(vecs[:, -1])
    # sinh of large eigenvalues overflows; scale by exp(-lambda_v) throughout
    lv = vals[-1]
    scaled = (np.exp(vals - lv) - np.exp(-vals - lv)) / 2
    sc = (vecs ** 2) @ scaled
    bad = sc <= 0
    if bad.any():
        warnings.warn("non-positive odd subgraph centrality clamped", RuntimeWarning)
        sc = np.where(bad, np.finfo(float).tiny, sc)
    log_sc = np.log(sc) + lv
    log_u = np.log(np.maximum(u, np.finfo(float).tiny))
    log_sinh = lv + math.log((1 - math.exp(-2 * lv)) / 2) if lv > 0 else -np.inf
    expected = -0.5 * log_sinh
    theory = log_u - (expected + 0.5 * log_sc)
    if np.ptp(log_sc) < 1e-9 * max(1.0, abs(log_sc).max()):
        slope, icpt = Undefined("all nodes share one subgraph centrality"), Undefined("degenerate fit")
        resid = log_u - log_u.mean()
        verdict = bool(np.abs(theory - theory.mean()).max() < 1e-9)
    else:
        slope, icpt = np.polyfit(log_sc, log_u, 1)
        resid = log_u - (slope * log_sc + icpt)
        slope, icpt = float(slope), float(icpt)
        verdict = abs(slope - 0.5) <= slope_tol and abs(icpt - expected) <= intercept_tol
    # bottleneck flags use the deviation from the theoretical line, which the
    # regression itself would partly absorb
    dev = theory - np.median(theory)
    delta = 2 * dev.std()
    flagged = np.flatnonzero(dev < -delta).tolist() if delta > 1e-9 else []
    return GoodExpansion(slope, icpt, float(expected), resid.tolist(), theory.tolist(), flagged,
                         verdict, cache.spectral_gap)


def _bareiss(M) -> int:
    M = [[int(x) for x in row] for row in M]
    n = len(M)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[-1][-1]


def spanning_tree_count(t: Topology, drop: int = 0) -> MetricResult:
    """Kirchhoff count: log-determinant of the Laplacian with one row and column removed.

    The value is ``log N``; the witness holds the exact count for graphs of
    at most fifty nodes.
    """
    u = t.as_undirected().unweighted()
    if u.v == 1:
        return MetricResult("spanning_trees", "global_scalar", 0.0, (0, None), witness={"count": 1})
    if not is_connected(u):
        return MetricResult("spanning_trees", "global_scalar", -math.inf, (None, None),
                            witness={"count": 0})
    L = SpectralCache(u).L
    keep = [i for i in range(u.v) if i != drop]
    R = L[np.ix_(keep, keep)]
    sign, logdet = np.linalg.slogdet(R)
    exact = _bareiss(R.round().astype(np.int64)) if u.v <= EXACT_TREES else None
    return MetricResult("spanning_trees", "global_scalar", float(logdet), (0, None),
                        witness={"count": exact})


def natural_connectivity(t: Topology, dense_limit: int = 3000, k: int = 300) -> MetricResult:
    """``ln(sum exp(lambda_i) / v)`` over the adjacency spectrum.

    Above ``dense_limit`` nodes only the ``k`` largest eigenvalues are
    computed; the rest are bounded by the smallest computed one from above
    and by ``-lambda_max`` from below, and the midpoint is returned with the
    half-width in the witness.
    """
    u = t.as_undirected()
    if u.v <= dense_limit:
        vals = np.linalg.eigvalsh(u.dense_adjacency().astype(float))
        return MetricResult("natural_connectivity", "global_scalar",
                            float(logsumexp(vals) - math.log(u.v)), (0, None),
                            witness={"exact": True, "error": 0.0})
    A = u.adjacency().astype(float)
    top = splinalg.eigsh(A, k=min(k, u.v - 2), which="LA", return_eigenvectors=False)
    rest = u.v - len(top)
    hi = logsumexp(np.append(top, top.min() + math.log(rest)))
    lo = logsumexp(np.append(top, -top.max() + math.log(rest)))
    return MetricResult("natural_connectivity", "global_scalar",
                        float((hi + lo) / 2 - math.log(u.v)), (0, None),
                        witness={"exact": False, "error": float((hi - lo) / 2)})


# -- random walks and electrical flows -------------------------------------

@dataclass
class RandomWalkView:
    distance: np.ndarray
    to_target: np.ndarray
    betweenness: np.ndarray
    visits_total: float


def _transition(t: Topology, weighted: bool) -> np.ndarray:
    W = t.dense_adjacency(weighted=weighted and t.weighted).astype(float)
    s = W.sum(axis=1)
    if (s == 0).any():
        raise TopologyError("random walks need every node to have an outgoing edge")
    return W / s[:, None]


def random_walk(t: Topology, weighted: bool = False) -> RandomWalkView:
    """Fundamental-tensor quantities from ``F^t = (I - R_{\\t})^{-1}``.

    ``distance[s, t]`` is the expected hop count of a walk from ``s`` until
    it first hits ``t``; ``betweenness[m]`` sums expected visits to ``m``
    over all source-target pairs (the start counts as a visit). Directed
    graphs use out-degree transitions.
    """
    ok = components(t, strong=True).count == 1 if t.directed else is_connected(t)
    if not ok:
        raise TopologyError("random-walk metrics need a (strongly) connected graph")
    R = _transition(t, weighted)
    v = t.v
    dist = np.zeros((v, v))
    btw = np.zeros(v)
    total = 0.0
    ones = np.ones(v - 1)
    for tgt in range(v):
        keep = np.r_[0:tgt, tgt + 1:v]
        M = np.eye(v - 1) - R[np.ix_(keep, keep)]
        lu = linalg.lu_factor(M)
        dist[keep, tgt] = linalg.lu_solve(lu, ones)
        col = linalg.lu_solve(lu, ones, trans=1)
        btw[keep] += col
        total += col.sum()
    return RandomWalkView(dist, dist.sum(axis=0), btw, float(total))


def random_walk_distances(t: Topology, weighted: bool = False) -> MetricResult:
    rw = random_walk(t, weighted)
    return MetricResult("random_walk_aspl", "matrix", rw.distance.tolist(), (0, None),
                        witness={"per_target": rw.to_target.tolist()})


def random_walk_betweenness(t: Topology, weighted: bool = False) -> MetricResult:
    rw = random_walk(t, weighted)
    return MetricResult("random_walk_betweenness", "per_node", rw.betweenness.tolist(), (0, None))


def _electrical(t: Topology, weighted: bool) -> SpectralCache:
    if not is_connected(t):
        raise TopologyError("current-flow metrics need a connected graph")
    return SpectralCache(t, weighted)


def resistance_matrix(t: Topology, weighted: bool = False) -> np.ndarray:
    P = _electrical(t, weighted).L_pinv
    d = np.diag(P)
    return d[:, None] + d[None, :] - 2 * P


def current_flow_closeness(t: Topology, weighted: bool = False) -> MetricResult:
    """``v`` over the total effective resistance from each node.

    The total is taken from the diagonal of ``(L + J)^{-1}``; the witness
    reports the largest disagreement with the pseudoinverse route.
    """
    cache = _electrical(t, weighted)
    v = cache.t.v
    M = np.linalg.inv(cache.L + np.ones((v, v)))
    total = v * np.diag(M) + np.trace(M) - 2.0 / v
    via_pinv = resistance_matrix(cache.t, weighted).sum(axis=1)
    vals = v / total
    return MetricResult("current_flow_closeness", "per_node", vals.tolist(), (0, None),
                        witness={"agreement": float(np.abs(v / via_pinv - vals).max())})


def current_flow_betweenness(t: Topology, weighted: bool = False) -> MetricResult:
    """Net current through each node summed over unordered source-sink pairs.

    One unit enters at ``s`` and leaves at ``t``; a node's throughput is half
    the absolute current over its edges. Pair endpoints are excluded, so on
    trees the values equal shortest-path betweenness.
    """
    cache = _electrical(t, weighted)
    u = cache.t
    P = cache.L_pinv
    ea = np.asarray(u.edges).reshape(-1, 2)
    w = u.edge_weights if cache.weighted else np.ones(u.e)
    inc = sparse.csr_matrix((np.ones(2 * u.e), (ea.T.ravel(), np.tile(np.arange(u.e), 2))),
                            shape=(u.v, u.e))
    D = P[ea[:, 0]] - P[ea[:, 1]]  # e x v: potential drop per unit injection at each node
    out = np.zeros(u.v)
    for s in range(u.v):
        flow = np.abs(D[:, [s]] - D) * w[:, None]  # e x v over sinks
        thru = 0.5 * (inc @ flow)
        thru[s, :] = 0.0
        thru[np.arange(u.v), np.arange(u.v)] = 0.0
        out += thru.sum(axis=1)
    return MetricResult("current_flow_betweenness", "per_node", (out / 2).tolist(), (0, None))


def network_criticality(t: Topology, traffic=None, weighted: bool = False) -> MetricResult:
    """Sum of effective resistances over ordered pairs; traffic-aware when ``traffic`` is given.

    ``traffic[s][t]`` is the demand from ``s`` to ``t``; the weights are
    ``1 + (g_st + g_ts)/(2g) + (g_in(s) - g_out(s))/(v g)``.
    """
    if t.directed:
        raise TopologyError("network criticality is not applicable to directed graphs")
    tau_st = resistance_matrix(t, weighted)
    tau = float(tau_st.sum())
    witness = {"kirchhoff_index": tau / 2}
    if traffic is None:
        return MetricResult("network_criticality", "global_scalar", tau, (0, None), witness=witness)
    g = np.asarray(traffic, dtype=float)
    total = g.sum()
    if total <= 0:
        raise TopologyError("traffic matrix has no demand")
    v = t.v
    alpha = 1 + (g + g.T) / (2 * total) + ((g.sum(axis=0) - g.sum(axis=1)) / (v * total))[:, None]
    witness["tau"] = tau
    return MetricResult("tanc", "global_scalar", float((alpha * tau_st).sum()), (0, None),
                        witness=witness)
