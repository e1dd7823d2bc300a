"""Deterministic test-graph generators (ER, BA, WS and canonical shapes)."""
from __future__ import annotations

import itertools

import numpy as np

from .graph import Topology, TopologyError, build_topology

MODELS = ("er", "ba", "ws", "star", "path", "cycle", "complete")


def erdos_renyi(v: int, p: float, seed=None) -> Topology:
    if not 0.0 <= p <= 1.0:
        raise TopologyError(f"ER probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(v, k=1)
    keep = rng.random(len(iu)) < p
    return build_topology(v, list(zip(iu[keep].tolist(), ju[keep].tolist())))


def barabasi_albert(v: int, m: int, seed=None) -> Topology:
    """Preferential attachment: every arriving node links to ``m`` distinct existing nodes.

    Growth starts from a complete graph on ``m + 1`` nodes.
    """
    if m < 1 or v <= m:
        raise TopologyError(f"BA needs m >= 1 and v > m (v={v}, m={m})")
    rng = np.random.default_rng(seed)
    edges = list(itertools.combinations(range(m + 1), 2))
    # every endpoint occurrence, so uniform sampling is degree-proportional
    pool = [x for e in edges for x in e]
    for new in range(m + 1, v):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(pool[int(rng.integers(len(pool)))])
        for t in sorted(targets):
            edges.append((t, new))
            pool.extend((t, new))
    return build_topology(v, edges)


def watts_strogatz(v: int, k: int, beta: float, seed=None) -> Topology:
    if k % 2 or k < 2 or k >= v:
        raise TopologyError(f"WS needs an even k with 2 <= k < v (k={k})")
    if not 0.0 <= beta <= 1.0:
        raise TopologyError(f"WS rewiring probability must lie in [0, 1], got {beta}")
    rng = np.random.default_rng(seed)
    adj = [set() for _ in range(v)]
    ring = []
    for j in range(1, k // 2 + 1):
        for u in range(v):
            w = (u + j) % v
            adj[u].add(w)
            adj[w].add(u)
            ring.append((u, w))
    for u, w in ring:
        if rng.random() >= beta:
            continue
        if len(adj[u]) >= v - 1:
            continue
        while True:
            x = int(rng.integers(v))
            if x != u and x not in adj[u]:
                break
        adj[u].discard(w)
        adj[w].discard(u)
        adj[u].add(x)
        adj[x].add(u)
    edges = [(u, w) for u in range(v) for w in adj[u] if u < w]
    return build_topology(v, edges)


def star(n: int) -> Topology:
    """Hub 0 plus ``n - 1`` leaves."""
    return build_topology(n, [(0, i) for i in range(1, n)])


def path(n: int) -> Topology:
    return build_topology(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Topology:
    if n < 3:
        raise TopologyError("a cycle needs at least 3 nodes")
    return build_topology(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Topology:
    return build_topology(n, list(itertools.combinations(range(n), 2)))


def generate(model: str, *params, seed=None) -> Topology:
    """Dispatch on model name: ``er(v,p)``, ``ba(v,m)``, ``ws(v,k,beta)``, ``star(n)``, ..."""
    model = model.lower()
    if model == "er":
        v, p = params
        return erdos_renyi(int(v), float(p), seed)
    if model == "ba":
        v, m = params
        return barabasi_albert(int(v), int(m), seed)
    if model == "ws":
        v, k, beta = params
        return watts_strogatz(int(v), int(k), float(beta), seed)
    simple = {"star": star, "path": path, "cycle": cycle, "complete": complete}
    if model in simple:
        (n,) = params
        return simple[model](int(n))
    raise TopologyError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")


# -- composite fixtures -----------------------------------------------------

def disjoint_union(*graphs: Topology) -> Topology:
    edges, off = [], 0
    for g in graphs:
        edges.extend((u + off, w + off) for u, w in g.edges)
        off += g.v
    return build_topology(off, edges)


def cliques_with_bridge(a: int, b: int, bridge=(None, None), seed=None, shuffle: bool = False):
    """Two cliques ``K_a`` and ``K_b`` joined by a single edge.

    Returns ``(topology, truth)`` where ``truth`` maps node -> clique index.
    """
    rng = np.random.default_rng(seed)
    left = list(range(a))
    right = list(range(a, a + b))
    edges = list(itertools.combinations(left, 2)) + list(itertools.combinations(right, 2))
    x = bridge[0] if bridge[0] is not None else int(rng.integers(a))
    y = bridge[1] if bridge[1] is not None else a + int(rng.integers(b))
    edges.append((x, y))
    truth = [0] * a + [1] * b
    perm = rng.permutation(a + b) if shuffle else np.arange(a + b)
    edges = [(int(perm[u]), int(perm[w])) for u, w in edges]
    relabeled = [0] * (a + b)
    for old, new in enumerate(perm):
        relabeled[int(new)] = truth[old]
    return build_topology(a + b, edges), relabeled


def barbell(clique: int, path_len: int) -> Topology:
    """Two ``K_clique`` joined through a path of ``path_len`` extra nodes."""
    edges = list(itertools.combinations(range(clique), 2))
    off = clique + path_len
    edges += [(u + off, w + off) for u, w in itertools.combinations(range(clique), 2)]
    chain = [clique - 1] + list(range(clique, clique + path_len)) + [off]
    edges += list(zip(chain[:-1], chain[1:]))
    return build_topology(2 * clique + path_len, edges)


def random_tree(n: int, seed=None) -> Topology:
    """Uniform random labelled tree via a Pruefer sequence."""
    rng = np.random.default_rng(seed)
    if n <= 2:
        return path(n)
    seq = rng.integers(n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [i for i in range(n) if degree[i] == 1]
    edges.append((u, w))
    return build_topology(n, edges)


def random_connected(n: int, p: float, seed=None) -> Topology:
    """ER graph overlaid on a random spanning tree, hence always connected."""
    rng = np.random.default_rng(seed)
    tree = random_tree(n, rng)
    extra = erdos_renyi(n, p, rng)
    return build_topology(n, sorted(set(tree.edges) | set(extra.edges)))
