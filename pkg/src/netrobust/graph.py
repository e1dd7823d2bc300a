"""Graph data model, traversals and component analysis.

Topologies are immutable. Node ids are the dense range ``[0, v)``; the
original identifiers of ingested files are kept in ``node_names``.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph


class TopologyError(ValueError):
    """Raised when a topology cannot be constructed from the given input."""

    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            message = f"edge #{index}: {message}"
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Undefined:
    """Explicit marker for a metric value that does not exist."""

    reason: str

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {"undefined": self.reason}


def is_undefined(value) -> bool:
    return isinstance(value, Undefined)


class _Unreachable:
    __slots__ = ()

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return "UNREACHABLE"


UNREACHABLE = _Unreachable()


class Topology:
    """An immutable simple graph, optionally directed, weighted, geographic or labeled.

    Undirected edges are stored once with ``u < w``. Edge weights follow
    capacity semantics: larger is better, and weighted path lengths use
    ``1/w`` per edge.
    """

    def __init__(self, v, edges, directed=False, edge_weights=None, node_coords=None,
                 coord_kind="planar", node_labels=None, node_weights=None, node_names=None):
        self.v = int(v)
        self.edges = tuple(edges)
        self.directed = bool(directed)
        self.edge_weights = None if edge_weights is None else np.asarray(edge_weights, dtype=float)
        self.node_coords = None if node_coords is None else np.asarray(node_coords, dtype=float)
        self.coord_kind = coord_kind
        self.node_labels = None if node_labels is None else tuple(node_labels)
        self.node_weights = None if node_weights is None else np.asarray(node_weights, dtype=float)
        self.node_names = None if node_names is None else tuple(node_names)

    # -- basic properties -------------------------------------------------

    @property
    def e(self) -> int:
        return len(self.edges)

    @property
    def weighted(self) -> bool:
        return self.edge_weights is not None

    @property
    def geographic(self) -> bool:
        return self.node_coords is not None

    @property
    def labeled(self) -> bool:
        return self.node_labels is not None

    @property
    def simple(self) -> bool:
        return not self.directed and not self.weighted

    def __repr__(self) -> str:
        flags = [f for f, on in (("directed", self.directed), ("weighted", self.weighted),
                                 ("geo", self.geographic), ("labeled", self.labeled)) if on]
        return f"Topology(v={self.v}, e={self.e}{', ' + ', '.join(flags) if flags else ''})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return self.digest() == other.digest()

    def __hash__(self) -> int:
        return hash(self.digest())

    def name_of(self, i: int):
        return self.node_names[i] if self.node_names is not None else i

    def digest(self) -> str:
        """Stable content hash of the canonical form."""
        import hashlib

        h = hashlib.sha256()
        h.update(f"{self.v}|{int(self.directed)}|".encode())
        h.update(np.asarray(self.edges, dtype=np.int64).tobytes())
        for arr in (self.edge_weights, self.node_coords, self.node_weights):
            h.update(b"|" + (b"-" if arr is None else np.ascontiguousarray(arr).tobytes()))
        h.update(b"|" + repr(self.node_labels).encode())
        return h.hexdigest()

    # -- adjacency structures ---------------------------------------------

    @cached_property
    def _edge_array(self) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def edge_index(self) -> dict:
        """Map ``(u, w)`` to edge position; both orientations for undirected graphs."""
        idx = {}
        for k, (u, w) in enumerate(self.edges):
            idx[(u, w)] = k
            if not self.directed:
                idx[(w, u)] = k
        return idx

    @cached_property
    def out_neighbors(self) -> tuple:
        nb = [[] for _ in range(self.v)]
        for u, w in self.edges:
            nb[u].append(w)
            if not self.directed:
                nb[w].append(u)
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def in_neighbors(self) -> tuple:
        if not self.directed:
            return self.out_neighbors
        nb = [[] for _ in range(self.v)]
        for u, w in self.edges:
            nb[w].append(u)
        return tuple(tuple(sorted(x)) for x in nb)

    @cached_property
    def neighbor_sets(self) -> tuple:
        """Undirected neighbourhoods (direction ignored)."""
        if not self.directed:
            return tuple(frozenset(x) for x in self.out_neighbors)
        return tuple(frozenset(a) | frozenset(b) for a, b in zip(self.out_neighbors, self.in_neighbors))

    def neighbors(self, i: int) -> tuple:
        return self.out_neighbors[i]

    def has_edge(self, u: int, w: int) -> bool:
        return (u, w) in self.edge_index

    def weight(self, u: int, w: int) -> float:
        if self.edge_weights is None:
            return 1.0
        return float(self.edge_weights[self.edge_index[(u, w)]])

    @cached_property
    def degrees(self) -> np.ndarray:
        """Undirected degree, or out-degree for directed graphs."""
        return np.fromiter((len(x) for x in self.out_neighbors), dtype=np.int64, count=self.v)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return np.fromiter((len(x) for x in self.in_neighbors), dtype=np.int64, count=self.v)

    def adjacency(self, weighted: bool = False) -> sparse.csr_matrix:
        """Sparse adjacency matrix; symmetric for undirected graphs."""
        ea = self._edge_array
        data = (self.edge_weights if (weighted and self.weighted) else np.ones(self.e))
        rows, cols = ea[:, 0], ea[:, 1]
        if not self.directed:
            rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
            data = np.concatenate([data, data])
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.v, self.v))

    def dense_adjacency(self, weighted: bool = False) -> np.ndarray:
        return self.adjacency(weighted).toarray()

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` of the out-adjacency, neighbours sorted ascending."""
        indptr = np.zeros(self.v + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in self.out_neighbors])
        indices = np.fromiter((w for x in self.out_neighbors for w in x), dtype=np.int64,
                              count=int(indptr[-1]))
        return indptr, indices

    @cached_property
    def arc_edge(self) -> np.ndarray:
        """Edge id of every CSR slot."""
        indptr, indices = self.csr
        out = np.empty(len(indices), dtype=np.int64)
        for u in range(self.v):
            for k in range(indptr[u], indptr[u + 1]):
                out[k] = self.edge_index[(u, int(indices[k]))]
        return out

    # -- derived topologies -----------------------------------------------

    def induced(self, keep: Iterable[int]) -> "Topology":
        """Induced subgraph on ``keep`` (relabelled densely, original ids in ``node_names``)."""
        keep = sorted(set(int(i) for i in keep))
        pos = {old: new for new, old in enumerate(keep)}
        edges, weights = [], []
        for k, (u, w) in enumerate(self.edges):
            if u in pos and w in pos:
                a, b = pos[u], pos[w]
                if not self.directed and a > b:
                    a, b = b, a
                edges.append((a, b))
                if self.weighted:
                    weights.append(self.edge_weights[k])
        names = [self.name_of(i) for i in keep]
        sel = np.asarray(keep, dtype=np.int64)
        return Topology(
            len(keep), edges, self.directed,
            edge_weights=np.asarray(weights) if self.weighted else None,
            node_coords=None if self.node_coords is None else self.node_coords[sel],
            coord_kind=self.coord_kind,
            node_labels=None if self.node_labels is None else [self.node_labels[i] for i in keep],
            node_weights=None if self.node_weights is None else self.node_weights[sel],
            node_names=names,
        )

    def without_nodes(self, removed: Iterable[int]) -> "Topology":
        removed = set(removed)
        return self.induced(i for i in range(self.v) if i not in removed)

    def without_edges(self, removed: Iterable[int]) -> "Topology":
        """Same node set, minus the given edge ids."""
        removed = set(removed)
        keep = [k for k in range(self.e) if k not in removed]
        return Topology(
            self.v, [self.edges[k] for k in keep], self.directed,
            edge_weights=None if self.edge_weights is None else self.edge_weights[keep],
            node_coords=self.node_coords, coord_kind=self.coord_kind,
            node_labels=self.node_labels, node_weights=self.node_weights,
            node_names=self.node_names,
        )

    def with_edges(self, extra: Iterable[tuple]) -> "Topology":
        edges = list(self.edges) + [tuple(x) for x in extra]
        return build_topology(self.v, edges, directed=self.directed)

    def as_undirected(self) -> "Topology":
        if not self.directed:
            return self
        seen = {}
        for k, (u, w) in enumerate(self.edges):
            key = (min(u, w), max(u, w))
            wt = 1.0 if self.edge_weights is None else float(self.edge_weights[k])
            seen[key] = max(seen.get(key, 0.0), wt)
        keys = sorted(seen)
        return Topology(self.v, keys, False,
                        edge_weights=None if self.edge_weights is None else [seen[k] for k in keys],
                        node_coords=self.node_coords, coord_kind=self.coord_kind,
                        node_labels=self.node_labels, node_weights=self.node_weights,
                        node_names=self.node_names)

    def unweighted(self) -> "Topology":
        if not self.weighted:
            return self
        return Topology(self.v, self.edges, self.directed, None, self.node_coords, self.coord_kind,
                        self.node_labels, self.node_weights, self.node_names)


def build_topology(v: int, edges: Sequence, directed: bool = False, weights=None, *,
                   node_coords=None, coord_kind: str = "planar", node_labels=None,
                   node_weights=None, node_names=None, simple: bool = True) -> Topology:
    """Validate and normalise an edge list into a :class:`Topology`.

    ``edges`` items are ``(u, w)`` or ``(u, w, weight)``; a separate ``weights``
    sequence may be given instead. In simple mode duplicate edges raise;
    otherwise they are merged keeping the first occurrence.
    """
    if v < 1:
        raise TopologyError("a topology needs at least one node")
    pairs, ws = [], []
    inline = None
    for k, item in enumerate(edges):
        if len(item) == 3:
            if inline is False:
                raise TopologyError("mixed weighted and unweighted edges", k)
            inline = True
            u, w, wt = item
            ws.append(float(wt))
        elif len(item) == 2:
            if inline:
                raise TopologyError("mixed weighted and unweighted edges", k)
            inline = False
            u, w = item
        else:
            raise TopologyError("edge must be (u, w) or (u, w, weight)", k)
        pairs.append((int(u), int(w)))
    if weights is not None:
        if inline:
            raise TopologyError("weights given both inline and separately")
        ws = [float(x) for x in weights]
        if len(ws) != len(pairs):
            raise TopologyError("weights length does not match edge count")
    weighted = bool(ws)

    out, out_w, seen = [], [], set()
    for k, (u, w) in enumerate(pairs):
        if not (0 <= u < v and 0 <= w < v):
            raise TopologyError(f"endpoint out of range [0, {v})", k)
        if u == w:
            raise TopologyError(f"self-loop at node {u}", k)
        if weighted and not ws[k] > 0:
            raise TopologyError(f"nonpositive weight {ws[k]}", k)
        key = (u, w) if directed else (min(u, w), max(u, w))
        if key in seen:
            if simple:
                raise TopologyError(f"duplicate edge {key}", k)
            continue
        seen.add(key)
        out.append(key)
        if weighted:
            out_w.append(ws[k])
    order = sorted(range(len(out)), key=out.__getitem__)
    out = [out[i] for i in order]
    out_w = [out_w[i] for i in order] if weighted else None

    if node_coords is not None and np.shape(node_coords) != (v, 2):
        raise TopologyError("node_coords must have shape (v, 2)")
    if node_labels is not None and len(node_labels) != v:
        raise TopologyError("node_labels must have one entry per node")
    if node_weights is not None:
        if len(node_weights) != v:
            raise TopologyError("node_weights must have one entry per node")
        if np.any(np.asarray(node_weights, dtype=float) <= 0):
            raise TopologyError("node weights must be positive")
    return Topology(v, out, directed, out_w, node_coords, coord_kind, node_labels,
                    node_weights, node_names)


# -- distances -------------------------------------------------------------

@dataclass
class DistanceView:
    """Distances from one source; unreachable nodes are masked, never large numbers."""

    source: int
    dists: np.ma.MaskedArray
    weighted: bool = False

    def __getitem__(self, node: int):
        if self.dists.mask is not np.ma.nomask and self.dists.mask[node]:
            return UNREACHABLE
        val = self.dists.data[node]
        return float(val) if self.weighted else int(val)

    @property
    def reached(self) -> np.ndarray:
        return ~np.ma.getmaskarray(self.dists)

    def reachable_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.reached)


def _bfs(t: Topology, source: int, reverse: bool = False) -> np.ndarray:
    nbrs = t.in_neighbors if reverse else t.out_neighbors
    dist = np.full(t.v, -1, dtype=np.int64)
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for w in nbrs[u]:
            if dist[w] < 0:
                dist[w] = du
                q.append(w)
    return dist


def _dijkstra(t: Topology, source: int) -> np.ndarray:
    dist = np.full(t.v, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w in t.out_neighbors[u]:
            nd = d + 1.0 / t.weight(u, w)
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def shortest_paths(t: Topology, source: int, weighted: bool = False) -> DistanceView:
    """Hop counts (BFS) or ``1/w``-length distances (Dijkstra) from ``source``."""
    if not 0 <= source < t.v:
        raise IndexError(f"source {source} not in topology")
    if weighted and t.weighted:
        d = _dijkstra(t, source)
        return DistanceView(source, np.ma.masked_invalid(d), True)
    d = _bfs(t, source)
    return DistanceView(source, np.ma.masked_less(d, 0), False)


def distance_matrix(t: Topology, weighted: bool = False) -> np.ndarray:
    """All-pairs distances as a float matrix with ``inf`` for unreachable pairs.

    Internal helper for bulk metric code; callers must branch on ``isinf``.
    """
    if t.e == 0:
        d = np.full((t.v, t.v), np.inf)
        np.fill_diagonal(d, 0.0)
        return d
    if weighted and t.weighted:
        a = t.adjacency(weighted=True).tocoo()
        lengths = sparse.csr_matrix((1.0 / a.data, (a.row, a.col)), shape=a.shape)
        return csgraph.shortest_path(lengths, method="D", directed=t.directed)
    return csgraph.shortest_path(t.adjacency(), method="D", directed=t.directed, unweighted=True)


# -- components ------------------------------------------------------------

@dataclass
class ComponentReport:
    labels: np.ndarray
    sizes: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def largest(self) -> int:
        return self.sizes[0] if self.sizes else 0

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cid)

    def largest_members(self) -> np.ndarray:
        return self.members(0)


def components(t: Topology, strong: bool = False) -> ComponentReport:
    """Connected components, ids ordered by descending size (ties by lowest member).

    Directed graphs use weak components unless ``strong`` is set.
    """
    if t.v == 0:
        return ComponentReport(np.zeros(0, dtype=np.int64), [])
    conn = "strong" if (strong and t.directed) else "weak"
    _, raw = csgraph.connected_components(t.adjacency(), directed=t.directed, connection=conn)
    counts = np.bincount(raw)
    first = np.full(len(counts), t.v)
    for i in range(t.v - 1, -1, -1):
        first[raw[i]] = i
    order = sorted(range(len(counts)), key=lambda c: (-counts[c], first[c]))
    remap = np.empty(len(counts), dtype=np.int64)
    remap[order] = np.arange(len(counts))
    return ComponentReport(remap[raw], [int(counts[c]) for c in order])


def is_connected(t: Topology) -> bool:
    return t.v > 0 and components(t).count == 1


# -- metric results ----------------------------------------------------------

KINDS = ("global_scalar", "per_node", "per_edge", "distribution", "matrix")


@dataclass
class MetricResult:
    """A tagged metric value together with its declared codomain and flags.

    ``codomain`` is ``(lo, hi)`` with ``None`` for an unbounded side.
    ``witness`` optionally carries the optimising set of an exact search.
    """

    key: str
    kind: str
    value: object
    codomain: tuple | None = None
    scope: str = "global"
    mode: str = "static"
    witness: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown result kind {self.kind!r}")

    def values(self) -> list:
        """Flat list of the emitted scalars (nested maps are walked)."""
        out = []

        def walk(x):
            if isinstance(x, dict):
                for y in x.values():
                    walk(y)
            elif isinstance(x, (list, tuple, np.ndarray)):
                for y in np.asarray(x, dtype=object).ravel():
                    walk(y)
            else:
                out.append(x)

        walk(self.value)
        return out

    def within_codomain(self, tol: float = 1e-9) -> bool:
        if self.codomain is None:
            return True
        lo, hi = self.codomain
        for x in self.values():
            if is_undefined(x):
                continue
            x = float(x)
            if lo is not None and x < lo - tol:
                return False
            if hi is not None and x > hi + tol:
                return False
        return True
