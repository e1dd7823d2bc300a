import networkx as nx
import numpy as np
import pytest

from netrobust import build_topology, generators


def to_nx(t):
    g = nx.DiGraph() if t.directed else nx.Graph()
    g.add_nodes_from(range(t.v))
    for k, (u, w) in enumerate(t.edges):
        if t.weighted:
            g.add_edge(u, w, weight=float(t.edge_weights[k]))
        else:
            g.add_edge(u, w)
    return g


def from_nx(g, directed=False):
    mapping = {n: i for i, n in enumerate(sorted(g.nodes()))}
    edges = [(mapping[a], mapping[b]) for a, b in g.edges()]
    return build_topology(len(mapping), edges, directed=directed)


def small_fixtures(count=30, seed=0, vmax=10):
    """Connected random graphs of 4..vmax nodes with varied density."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        v = int(rng.integers(4, vmax + 1))
        p = float(rng.uniform(0.25, 0.8))
        out.append(generators.random_connected(v, p, seed=int(rng.integers(1 << 30))))
    return out


@pytest.fixture
def k3():
    return generators.complete(3)


@pytest.fixture
def p3():
    return generators.path(3)


VERDICTS = []


def record(number, ok, detail):
    """Log a criterion verdict; the terminal summary prints one line each."""
    VERDICTS.append((number, ok, detail))
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(VERDICTS, key=lambda x: x[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
