"""Load and flow metrics: betweenness, AS hegemony, central point dominance,
effective load, capacity assignment, performance, elasticity, impact factors
and failure survivability."""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import _paths
from .graph import MetricResult, Topology, TopologyError, Undefined, is_connected


def betweenness(t: Topology, target: str = "node", weighted: bool = False) -> MetricResult:
    """Shortest-path betweenness of every node or edge.

    Undirected graphs count unordered pairs, directed graphs ordered pairs.
    Node values exclude the pair endpoints. Weighted mode uses ``1/w`` lengths.
    """
    if target not in ("node", "edge"):
        raise TopologyError("target must be 'node' or 'edge'")
    node, edge = _paths.brandes(t, weighted=weighted)
    if not t.directed:
        node, edge = node / 2, edge / 2
    vals = node if target == "node" else edge[: t.e]
    hi = (t.v - 1) * (t.v - 2) / (1 if t.directed else 2) if target == "node" else None
    key = "betweenness" if target == "node" else "edge_betweenness"
    return MetricResult(key, "per_node" if target == "node" else "per_edge",
                        [float(x) for x in vals], (0, hi), witness={"weighted": weighted})


# -- AS hegemony -----------------------------------------------------------

def _relationship_arcs(t: Topology):
    """Valley-free state graph: phase 0 may still climb, phase 1 only descends."""
    up = [[] for _ in range(t.v)]
    down = [[] for _ in range(t.v)]
    peer = [[] for _ in range(t.v)]
    for a, b in t.edges:
        if t.has_edge(b, a):
            peer[a].append(b)
        else:
            up[a].append(b)
            down[b].append(a)
    return up, down, peer


def _viewpoint_scores(t: Topology, i: int, policy: bool, arcs) -> np.ndarray:
    """Fraction of the viewpoint's destinations whose shortest paths cross each node."""
    if not policy:
        pw = np.ones((1, t.v))
        node, _ = _paths.brandes(t, sources=[i], pair_weights=pw)
        reached = _reached(t, i)
        return node / max(reached, 1)
    up, down, peer = arcs

    def succ(state):
        u, ph = state
        out = [(w, 1) for w in down[u]]
        if ph == 0:
            out += [(w, 0) for w in up[u]] + [(w, 1) for w in peer[u]]
        return out

    start = (i, 0)
    dist = {start: 0}
    sigma = {start: 1.0}
    order = [start]
    q = deque([start])
    while q:
        s = q.popleft()
        for w in succ(s):
            if w not in dist:
                dist[w] = dist[s] + 1
                sigma[w] = 0.0
                order.append(w)
                q.append(w)
            if dist[w] == dist[s] + 1:
                sigma[w] += sigma[s]
    best = {}
    for (u, ph), d in dist.items():
        if u != i and (u not in best or d < best[u]):
            best[u] = d
    total = {u: sum(sigma[(u, ph)] for ph in (0, 1) if dist.get((u, ph)) == best[u]) for u in best}
    preds = {s: [] for s in order}
    for s in order:
        for w in succ(s):
            if dist.get(w) == dist[s] + 1:
                preds[w].append(s)
    delta = {s: 0.0 for s in order}
    score = np.zeros(t.v)
    for s in reversed(order):
        u, _ = s
        own = 1.0 / total[u] if u in best and dist[s] == best[u] else 0.0
        coeff = (delta[s] + own) / sigma[s]
        for p in preds[s]:
            delta[p] += sigma[p] * coeff
        if u != i:
            score[u] += delta[s]
    return score / max(len(best), 1)


def _reached(t: Topology, i: int) -> int:
    seen = {i}
    q = deque([i])
    while q:
        u = q.popleft()
        for w in t.out_neighbors[u]:
            if w not in seen:
                seen.add(w)
                q.append(w)
    return len(seen) - 1


def as_hegemony(t: Topology, viewpoints, alpha: float = 0.1, policy: bool | None = None) -> MetricResult:
    """Trimmed mean over viewpoints of per-viewpoint betweenness.

    For each node the ``floor(alpha * n)`` lowest and highest viewpoint
    scores are dropped. Directed graphs default to valley-free paths
    (customer->provider edges, reciprocal pairs are peers).
    """
    if not 0 <= alpha < 0.5:
        raise TopologyError("alpha must lie in [0, 0.5)")
    vps = list(viewpoints)
    n = len(vps)
    k = int(math.floor(alpha * n))
    if n - 2 * k <= 0:
        raise TopologyError("every viewpoint is trimmed; lower alpha or add viewpoints")
    policy = t.directed if policy is None else policy
    arcs = _relationship_arcs(t) if policy else None
    scores = np.stack([_viewpoint_scores(t, i, policy, arcs) for i in vps])
    ordered = np.sort(scores, axis=0)
    kept = ordered[k: n - k]
    return MetricResult("as_hegemony", "per_node", kept.mean(axis=0).tolist(), (0, 1),
                        witness={"viewpoints": vps, "trimmed_each_side": k,
                                 "per_viewpoint": scores.tolist()})


def edge_degree(t: Topology, variant: str = "product") -> MetricResult:
    """Degree of an edge from its endpoints: ``k_i * k_j`` or ``min(k_i, k_j)``."""
    k = np.zeros(t.v, dtype=np.int64)
    for a, b in t.edges:
        k[a] += 1
        k[b] += 1
    ends = np.asarray(t.edges, dtype=np.int64).reshape(-1, 2)
    if variant == "product":
        vals, hi = k[ends[:, 0]] * k[ends[:, 1]], int(k.max(initial=0)) ** 2
    elif variant == "min":
        vals, hi = np.minimum(k[ends[:, 0]], k[ends[:, 1]]), int(k.max(initial=0))
    else:
        raise TopologyError("variant must be 'product' or 'min'")
    return MetricResult(f"edge_degree_{variant}", "per_edge", [int(x) for x in vals], (1, hi))


def central_point_dominance(t: Topology, weighted: bool = False) -> MetricResult:
    """Mean gap between the largest and each pair-normalised betweenness."""
    if t.v < 3:
        raise TopologyError("central point dominance needs at least three nodes")
    b = np.asarray(betweenness(t, weighted=weighted).value)
    pairs = (t.v - 1) * (t.v - 2) / (1 if t.directed else 2)
    bn = b / pairs
    cpd = float((bn.max() - bn).sum() / (t.v - 1))
    return MetricResult("central_point_dominance", "global_scalar", cpd, (0, 1))


# -- effective load --------------------------------------------------------

@dataclass
class LoadEnsemble:
    mean_node: np.ndarray
    mean_edge: np.ndarray
    node_samples: np.ndarray
    edge_samples: np.ndarray

    def stderr(self, target: str = "node") -> np.ndarray:
        s = self.node_samples if target == "node" else self.edge_samples
        n = s.shape[0]
        return s.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(s.shape[1])


def effective_load(t: Topology, A: float = 1.0, ensemble_size: int = 16, seed=None,
                   node_alive=None) -> LoadEnsemble:
    """Expected shortest-path counts through each node and edge.

    Each ensemble member draws ``round(A * v(v-1))`` ordered communicating
    pairs without replacement; flow between a pair splits equally over its
    shortest paths. At ``A = 1`` a single member equals the ordered-pair
    betweenness (twice the unordered value on undirected graphs).
    """
    if not 0 < A <= 1:
        raise TopologyError("A must lie in (0, 1]")
    v = t.v
    alive = np.ones(v, bool) if node_alive is None else np.asarray(node_alive, bool)
    live = np.flatnonzero(alive)
    n_pairs = len(live) * (len(live) - 1)
    m = int(round(A * n_pairs))
    rng = np.random.default_rng(seed)
    pair_idx = np.array([(i, j) for i in live for j in live if i != j], dtype=np.int64)
    nodes, edges = [], []
    runs = 1 if m == n_pairs else ensemble_size
    for _ in range(runs):
        pw = np.zeros((v, v))
        if m == n_pairs:
            pw[np.ix_(live, live)] = 1.0
            np.fill_diagonal(pw, 0.0)
        elif m:
            pick = pair_idx[rng.choice(len(pair_idx), size=m, replace=False)]
            pw[pick[:, 0], pick[:, 1]] = 1.0
        node, edge = _paths.brandes(t, node_alive=alive, pair_weights=pw)
        nodes.append(node)
        edges.append(edge[: t.e])
    ns, es = np.array(nodes), np.array(edges)
    return LoadEnsemble(ns.mean(axis=0), es.mean(axis=0), ns, es)


def motter_lai_capacities(t: Topology, alpha: float) -> np.ndarray:
    """Node capacities ``(1 + alpha) * B_u`` from the intact network."""
    if alpha < 0:
        raise TopologyError("alpha must be non-negative")
    return (1.0 + alpha) * np.asarray(betweenness(t).value)


# -- performance and elasticity -------------------------------------------

@dataclass
class PerformanceResult:
    rho: float
    performance: float
    loads: np.ndarray
    bottleneck: int | None = None
    unconstrained: bool = False


def performance(t: Topology, demands=None, capacities=None, transit_only: bool = False) -> PerformanceResult:
    """Largest common scale ``rho`` of gravity flows ``rho * y_i * y_j`` within router capacities.

    Each pair follows one deterministic shortest path. By default routers
    carry the flows they originate and terminate as well; ``transit_only``
    counts intermediate routers only.
    """
    if not is_connected(t):
        raise TopologyError("performance needs a connected graph")
    y = np.ones(t.v) if demands is None else np.asarray(demands, dtype=float)
    b = np.ones(t.v) if capacities is None else np.asarray(capacities, dtype=float)
    if (y <= 0).any() or (b <= 0).any():
        raise TopologyError("demands and capacities must be positive")
    node, transit, _, served = _paths.route_loads(t, y)
    load = transit if transit_only else node
    busy = load > 0
    if not busy.any():
        return PerformanceResult(math.inf, math.inf, load, None, True)
    ratio = np.full(t.v, np.inf)
    ratio[busy] = b[busy] / load[busy]
    r = int(np.argmin(ratio))
    rho = float(ratio[r])
    return PerformanceResult(rho, rho * served, load, r)


def link_throughput(t: Topology, node_alive=None) -> float:
    """Largest total of equal flows between all connected pairs under unit link capacities."""
    _, _, edge, served = _paths.route_loads(t, node_alive=node_alive)
    if served == 0:
        return 0.0
    alive = np.ones(t.v, bool) if node_alive is None else np.asarray(node_alive, bool)
    ea = np.asarray(t.edges).reshape(-1, 2)
    live = alive[ea[:, 0]] & alive[ea[:, 1]] if t.e else np.zeros(0, bool)
    peak = edge[: t.e][live].max() if live.any() else 0.0
    return float(served / peak) if peak > 0 else 0.0


@dataclass
class ElasticityCurve:
    fractions: list
    throughput: list
    area: list
    stopped: int | None = None
    removed: list = field(default_factory=list)
    throughput_at_stop: float | None = None

    def at(self, n: float) -> float | Undefined:
        """``E(n)`` by trapezoid integration, interpolating within the last step."""
        fr = self.fractions
        if n > fr[-1] + 1e-12:
            return Undefined("curve stops before this removal fraction")
        return float(np.interp(n, fr, self.area))


def elasticity(t: Topology, removal_sequence) -> ElasticityCurve:
    """Normalised throughput ``T_G`` along a node-removal sequence and its integral.

    ``T_G(0) = 1``. The fraction axis uses the original node count. The curve
    stops at the first removal that disconnects the remaining graph; once
    fewer than two nodes remain the throughput is zero.
    """
    if not is_connected(t):
        raise TopologyError("elasticity needs a connected starting graph")
    base = link_throughput(t)
    if base <= 0:
        raise TopologyError("no traffic in the intact graph")
    alive = np.ones(t.v, bool)
    fr, T, removed = [0.0], [1.0], []
    stopped, at_stop = None, None
    for step, node in enumerate(removal_sequence, 1):
        if not alive[node]:
            raise TopologyError(f"node {node} removed twice")
        alive[node] = False
        left = int(alive.sum())
        if left >= 2 and not is_connected(t.induced(np.flatnonzero(alive))):
            stopped = step
            at_stop = link_throughput(t, alive) / base
            break
        removed.append(int(node))
        fr.append(step / t.v)
        T.append(float(link_throughput(t, alive) / base) if left >= 2 else 0.0)
    area = [0.0]
    for k in range(1, len(fr)):
        area.append(area[-1] + (fr[k] - fr[k - 1]) * (T[k] + T[k - 1]) / 2)
    return ElasticityCurve(fr, T, area, stopped, removed, at_stop)


# -- impact factors --------------------------------------------------------

def vulnerability_impact_factors(m_norm, m_fault, m_min, d: float) -> dict:
    """Per-agent component impact factors and the share of agents above ``d``.

    The step function is strict: an agent counts when its CIF exceeds ``d``.
    """
    m_norm, m_fault, m_min = (np.asarray(x, dtype=float) for x in (m_norm, m_fault, m_min))
    span = np.abs(m_norm - m_min)
    if (span == 0).any():
        raise ZeroDivisionError("normal and minimum measures coincide for some agent")
    cif = np.abs(m_norm - m_fault) / span
    return {"cif": cif.tolist(), "sif": float((cif > d).mean())}


# -- survivability ---------------------------------------------------------

@dataclass
class SurvivabilityResult:
    distribution: dict
    expected: float
    baseline_overload: bool
    events: int
    exact: bool


def _delivered(t: Topology, demands: dict, cap: np.ndarray, node_alive, edge_alive) -> float:
    sub_edges = [i for i in range(t.e) if edge_alive[i]]
    live = t.without_edges([i for i in range(t.e) if not edge_alive[i]]) if len(sub_edges) < t.e else t
    new_ids = np.array(sub_edges, dtype=np.int64)
    parents = {}
    flows = []
    for (s, d), amount in demands.items():
        if not node_alive[s] or not node_alive[d]:
            flows.append((amount, None))
            continue
        if s not in parents:
            parents[s] = _paths.routing_tree(live, s, node_alive)
        path = _paths.tree_path(parents[s], d)
        if path[0] != s:
            flows.append((amount, None))
            continue
        flows.append((amount, [int(new_ids[live.edge_index[(a, b)]]) for a, b in zip(path, path[1:])]))
    load = np.zeros(t.e)
    for amount, links in flows:
        if links:
            load[links] += amount
    scale = np.ones(t.e)
    over = load > cap + 1e-12
    scale[over] = cap[over] / load[over]
    total = sum(a for a, _ in flows)
    got = sum(a * (scale[links].min() if links else 1.0) for a, links in flows if links is not None)
    return got / total if total > 0 else 1.0


def survivability_failures(t: Topology, demands: dict, p_fail, entity: str = "edge",
                           max_failures: int | None = None, samples: int = 10000, seed=None,
                           exact_cap: int = 14) -> SurvivabilityResult:
    """Distribution of the delivered share of demand after random failures.

    Demands map ``(source, target)`` to an amount. Edge weights are link
    capacities (unit capacities on unweighted graphs). Flows follow min-hop
    routes in the surviving graph and links carrying more than their capacity
    scale all their flows down proportionally. ``max_failures`` restricts the
    events to at most that many simultaneous failures and renormalises their
    probabilities; otherwise small entity sets are enumerated exactly and
    larger ones sampled.
    """
    if entity not in ("edge", "node"):
        raise TopologyError("entity must be 'edge' or 'node'")
    n = t.e if entity == "edge" else t.v
    p = np.broadcast_to(np.asarray(p_fail, dtype=float), (n,)).copy()
    if ((p < 0) | (p > 1)).any():
        raise TopologyError("failure probabilities must lie in [0, 1]")
    cap = np.asarray(t.edge_weights, dtype=float) if t.weighted else np.ones(t.e)

    def evaluate(failed):
        na = np.ones(t.v, bool)
        ea = np.ones(t.e, bool)
        if entity == "edge":
            ea[list(failed)] = False
        else:
            na[list(failed)] = False
        return _delivered(t, demands, cap, na, ea)

    intact = _delivered(t, demands, cap, np.ones(t.v, bool), np.ones(t.e, bool))
    risky = [i for i in range(n) if p[i] > 0]
    certain = [i for i in range(n) if p[i] >= 1]
    dist: dict = {}
    exact = True
    if max_failures is not None or len(risky) <= exact_cap:
        events = []
        limit = len(risky) if max_failures is None else max_failures
        for r in range(0, min(limit, len(risky)) + 1):
            for combo in itertools.combinations(risky, r):
                if not set(certain) <= set(combo):
                    continue
                pr = 1.0
                cs = set(combo)
                for i in risky:
                    pr *= p[i] if i in cs else 1 - p[i]
                if pr > 0:
                    events.append((combo, pr))
        norm = sum(pr for _, pr in events)
        if norm <= 0:
            raise TopologyError("no failure event with positive probability within max_failures")
        for combo, pr in events:
            x = round(float(evaluate(combo)), 12)
            dist[x] = dist.get(x, 0.0) + pr / norm
        count = len(events)
    else:
        exact = False
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            failed = np.flatnonzero(rng.random(n) < p)
            x = round(float(evaluate(failed)), 12)
            dist[x] = dist.get(x, 0.0) + 1.0 / samples
        count = samples
    dist = dict(sorted(dist.items()))
    expected = float(sum(x * s for x, s in dist.items()))
    return SurvivabilityResult(dist, expected, bool(intact < 1 - 1e-12), count, exact)
