"""Reading and writing topology files.

Formats:

``edgelist``
    ``u v`` per line, whitespace or comma separated, ``#`` starts a comment.
    An optional third column is an edge weight (all lines or none).
``weighted_edgelist``
    ``u v w``, weight required.
``as_rel``
    ``AS1|AS2|rel``. ``rel = -1``: AS1 provides transit to AS2, stored as the
    directed edge AS2 -> AS1. ``rel = 0``: peers, stored as both directions.
``coords``
    ``node,lat,lon`` attached to an existing topology.
``labels``
    ``node,label`` attached to an existing topology.

Node names are canonicalised: integers sort numerically, anything else as
strings, and the sorted position becomes the dense node id.
"""
from __future__ import annotations

import hashlib
import re
from pathlib import Path

import numpy as np

from .graph import Topology, TopologyError, build_topology

FORMATS = ("edgelist", "weighted_edgelist", "as_rel", "coords", "labels")
_SPLIT = re.compile(r"[\s,]+")


class ParseError(TopologyError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path}:" if path else ""
        if line is not None:
            message = f"{where}line {line}: {message}"
        super().__init__(message)
        self.line = line


def _name(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _canonical(names) -> list:
    names = set(names)
    if all(isinstance(x, int) for x in names):
        return sorted(names)
    return sorted(names, key=str)


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def parse_edgelist(text: str, weighted: bool | None = None, directed: bool = False,
                   path=None) -> Topology:
    """``weighted=None`` accepts an optional weight column."""
    rows = []
    for no, line in _lines(text):
        toks = _SPLIT.split(line)
        if len(toks) not in (2, 3):
            raise ParseError(f"expected 'u v [w]', got {line!r}", no, path)
        if weighted is True and len(toks) != 3:
            raise ParseError("missing weight", no, path)
        if weighted is False and len(toks) != 2:
            raise ParseError("unexpected weight column", no, path)
        if rows and (len(toks) == 3) != (len(rows[0][1]) == 3):
            raise ParseError("mixed weighted and unweighted lines", no, path)
        item = [_name(toks[0]), _name(toks[1])]
        if len(toks) == 3:
            try:
                w = float(toks[2])
            except ValueError:
                raise ParseError(f"bad weight {toks[2]!r}", no, path) from None
            if not w > 0:
                raise ParseError(f"weight must be positive, got {toks[2]}", no, path)
            item.append(w)
        rows.append((no, item))
    return _assemble(rows, directed, path)


def parse_as_rel(text: str, path=None) -> Topology:
    rows = []
    for no, line in _lines(text):
        toks = line.split("|")
        if len(toks) < 3:
            raise ParseError(f"expected 'AS1|AS2|rel', got {line!r}", no, path)
        a, b, rel = _name(toks[0].strip()), _name(toks[1].strip()), toks[2].strip()
        if rel == "-1":
            rows.append((no, [b, a]))
        elif rel == "0":
            rows.append((no, [a, b]))
            rows.append((no, [b, a]))
        else:
            raise ParseError(f"relationship must be -1 or 0, got {rel!r}", no, path)
    return _assemble(rows, True, path)


def _assemble(rows, directed: bool, path) -> Topology:
    if not rows:
        raise ParseError("no edges", None, path)
    names = _canonical(x for _, item in rows for x in item[:2])
    pos = {n: i for i, n in enumerate(names)}
    edges, seen = [], {}
    for no, item in rows:
        u, w = pos[item[0]], pos[item[1]]
        if u == w:
            raise ParseError(f"self-loop at {item[0]}", no, path)
        key = (u, w) if directed else (min(u, w), max(u, w))
        if key in seen:
            raise ParseError(f"duplicate edge {item[0]}-{item[1]} (first on line {seen[key]})", no, path)
        seen[key] = no
        edges.append((u, w, *item[2:]))
    return build_topology(len(names), edges, directed=directed, node_names=names)


def _attach_rows(t: Topology, text: str, width: int, path):
    index = {t.name_of(i): i for i in range(t.v)}
    index.update({str(k): i for k, i in list(index.items())})
    out = {}
    for no, line in _lines(text):
        toks = [x.strip() for x in line.split(",")]
        if len(toks) != width:
            raise ParseError(f"expected {width} comma-separated fields, got {line!r}", no, path)
        if toks[0] not in index:
            raise ParseError(f"dangling node reference {toks[0]!r}", no, path)
        node = index[toks[0]]
        if node in out:
            raise ParseError(f"node {toks[0]!r} listed twice", no, path)
        out[node] = (no, toks[1:])
    return out


def attach_coords(t: Topology, text: str, kind: str = "latlon", path=None) -> Topology:
    """Every node needs a position."""
    rows = _attach_rows(t, text, 3, path)
    coords = np.zeros((t.v, 2))
    for node, (no, (a, b)) in rows.items():
        try:
            coords[node] = float(a), float(b)
        except ValueError:
            raise ParseError(f"bad coordinate in {a!r}, {b!r}", no, path) from None
        if kind == "latlon" and not (-90 <= coords[node, 0] <= 90 and -180 <= coords[node, 1] <= 180):
            raise ParseError("latitude/longitude out of range", no, path)
    missing = [t.name_of(i) for i in range(t.v) if i not in rows]
    if missing:
        raise ParseError(f"no coordinates for node(s) {missing[:5]}", None, path)
    return _replace(t, node_coords=coords, coord_kind=kind)


def attach_labels(t: Topology, text: str, path=None) -> Topology:
    rows = _attach_rows(t, text, 2, path)
    missing = [t.name_of(i) for i in range(t.v) if i not in rows]
    if missing:
        raise ParseError(f"no label for node(s) {missing[:5]}", None, path)
    return _replace(t, node_labels=[rows[i][1][0] for i in range(t.v)])


def _replace(t: Topology, **kw) -> Topology:
    base = dict(v=t.v, edges=t.edges, directed=t.directed, edge_weights=t.edge_weights,
                node_coords=t.node_coords, coord_kind=t.coord_kind, node_labels=t.node_labels,
                node_weights=t.node_weights, node_names=t.node_names)
    base.update(kw)
    return Topology(**base)


def ingest(path, fmt: str = "edgelist", base: Topology | None = None, directed: bool = False,
           coord_kind: str = "latlon") -> Topology:
    """Read ``path``; ``coords`` and ``labels`` files need the ``base`` topology."""
    if fmt not in FORMATS:
        raise ParseError(f"unknown format {fmt!r}")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc}", None, path) from None
    if fmt == "edgelist":
        return parse_edgelist(text, None, directed, path)
    if fmt == "weighted_edgelist":
        return parse_edgelist(text, True, directed, path)
    if fmt == "as_rel":
        return parse_as_rel(text, path)
    if base is None:
        raise ParseError(f"{fmt} files annotate an existing topology")
    if fmt == "coords":
        return attach_coords(base, text, coord_kind, path)
    return attach_labels(base, text, path)


# -- writing ---------------------------------------------------------------

def format_edgelist(t: Topology) -> str:
    rows = []
    for k, (u, w) in enumerate(t.edges):
        cols = [str(t.name_of(u)), str(t.name_of(w))]
        if t.weighted:
            cols.append(repr(float(t.edge_weights[k])))
        rows.append(" ".join(cols))
    return "\n".join(rows) + "\n"


def format_as_rel(t: Topology) -> str:
    """Reciprocal arcs become peer lines, single arcs customer -> provider lines."""
    if not t.directed:
        raise TopologyError("as_rel output needs a directed topology")
    rows = []
    for u, w in t.edges:
        if t.has_edge(w, u):
            if u < w:
                rows.append(f"{t.name_of(u)}|{t.name_of(w)}|0")
        else:
            rows.append(f"{t.name_of(w)}|{t.name_of(u)}|-1")
    return "\n".join(rows) + "\n"


def format_coords(t: Topology) -> str:
    if t.node_coords is None:
        raise TopologyError("topology has no coordinates")
    return "".join(f"{t.name_of(i)},{repr(float(a))},{repr(float(b))}\n"
                   for i, (a, b) in enumerate(t.node_coords))


def format_labels(t: Topology) -> str:
    if t.node_labels is None:
        raise TopologyError("topology has no labels")
    return "".join(f"{t.name_of(i)},{lab}\n" for i, lab in enumerate(t.node_labels))
