import math

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linprog

from conftest import to_nx
from netrobust import build_topology, generators
from netrobust.distance import aspl
from netrobust.graph import TopologyError
from netrobust.throughput import (as_hegemony, betweenness, central_point_dominance,
                                  edge_degree, effective_load, elasticity,
                                  motter_lai_capacities, performance, survivability_failures,
                                  vulnerability_impact_factors)

STAR_TAIL = build_topology(6, [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)])


def test_betweenness_examples():
    assert betweenness(generators.path(3)).value[1] == 1.0
    n = 7
    assert betweenness(generators.star(n)).value[0] == (n - 1) * (n - 2) / 2


def test_betweenness_matches_networkx():
    for s in range(20):
        t = generators.erdos_renyi(40, 0.1, seed=s)
        g = to_nx(t)
        ref = nx.betweenness_centrality(g, normalized=False)
        assert betweenness(t).value == pytest.approx([ref[i] for i in range(t.v)], abs=1e-9)
        eref = nx.edge_betweenness_centrality(g, normalized=False)
        got = betweenness(t, "edge").value
        assert got == pytest.approx([eref[e] for e in t.edges], abs=1e-9)


def test_directed_and_weighted_betweenness_match_networkx():
    d = generators.erdos_renyi(30, 0.12, seed=1)
    rng = np.random.default_rng(0)
    arcs = [(a, b) if rng.random() < 0.5 else (b, a) for a, b in d.edges]
    t = build_topology(d.v, arcs, directed=True)
    ref = nx.betweenness_centrality(to_nx(t), normalized=False)
    assert betweenness(t).value == pytest.approx([ref[i] for i in range(t.v)], abs=1e-9)
    # weights drawn from {1, 2, 4} keep 1/w sums exact in binary
    w = rng.choice([1.0, 2.0, 4.0], d.e)
    tw = build_topology(d.v, list(d.edges), weights=w)
    g = to_nx(tw)
    for a, b in g.edges:
        g[a][b]["length"] = 1 / g[a][b]["weight"]
    ref = nx.betweenness_centrality(g, normalized=False, weight="length")
    got = betweenness(tw, weighted=True).value
    assert got == pytest.approx([ref[i] for i in range(tw.v)], abs=1e-9)


def test_edge_betweenness_mean_identity():
    for s in range(50):
        t = generators.random_connected(int(8 + s % 20), 0.3, seed=s)
        be = np.mean(betweenness(t, "edge").value)
        expect = t.v * (t.v - 1) / (2 * t.e) * aspl(t).value
        assert be == pytest.approx(expect, rel=1e-9)


def test_node_betweenness_sum_identity():
    for s in range(50):
        t = generators.random_connected(int(6 + s % 15), 0.35, seed=100 + s)
        d = nx.floyd_warshall_numpy(to_nx(t))
        interior = (d[np.triu_indices(t.v, 1)] - 1).sum()
        assert sum(betweenness(t).value) == pytest.approx(interior, rel=1e-9)


def test_hegemony_untrimmed_is_mean_and_trimming_removes_bias():
    t = STAR_TAIL
    vps = list(range(t.v))
    raw = as_hegemony(t, vps, alpha=0.0, policy=False)
    per = np.asarray(raw.witness["per_viewpoint"])
    assert raw.value == pytest.approx(per.mean(axis=0).tolist())
    trimmed = as_hegemony(t, vps, alpha=0.2, policy=False)
    assert trimmed.value[4] < raw.value[4]
    assert trimmed.value[4] == pytest.approx(0.2)
    # leaves lie on no path
    assert raw.value[1] == 0.0 and trimmed.value[1] == 0.0
    with pytest.raises(TopologyError):
        as_hegemony(t, [], alpha=0.1)
    with pytest.raises(TopologyError):
        as_hegemony(t, [0, 1], alpha=0.5)


def test_hegemony_policy_paths():
    # 0 and 1 are customers of 2; paths between them must cross 2
    t = build_topology(3, [(0, 2), (1, 2)], directed=True)
    h = as_hegemony(t, [0, 1], alpha=0.0)
    assert h.value[2] > 0 and h.value[0] == 0


def test_central_point_dominance_examples():
    assert central_point_dominance(generators.star(6)).value == pytest.approx(1.0)
    assert central_point_dominance(generators.complete(6)).value == pytest.approx(0.0)
    assert central_point_dominance(generators.cycle(5)).value == pytest.approx(0.0)
    assert 0 < central_point_dominance(generators.path(5)).value < 1


def test_edge_degree():
    r = edge_degree(generators.star(4))
    assert r.value == [3, 3, 3]
    assert edge_degree(generators.path(3), "min").value == [1, 1]


def test_effective_load_examples():
    t = generators.erdos_renyi(25, 0.2, seed=2)
    full = effective_load(t, A=1.0)
    assert full.mean_node == pytest.approx(2 * np.asarray(betweenness(t).value))
    # a single communicating pair loads only its shortest-path entities
    p = generators.path(6)
    one = effective_load(p, A=1 / 30, ensemble_size=1, seed=0)
    assert np.count_nonzero(one.mean_edge) >= 1
    used = np.flatnonzero(one.mean_edge)
    assert np.all(np.diff(used) == 1)


def test_effective_load_ensemble_error_shrinks():
    t = generators.barabasi_albert(40, 2, seed=4)
    se16 = effective_load(t, A=0.1, ensemble_size=16, seed=1).stderr().mean()
    se64 = effective_load(t, A=0.1, ensemble_size=64, seed=1).stderr().mean()
    assert se64 < se16
    assert se64 == pytest.approx(se16 / 2, rel=0.35)
    with pytest.raises(TopologyError):
        effective_load(t, A=0)


def test_motter_lai_capacities():
    s = generators.star(5)
    assert motter_lai_capacities(s, 0.0).tolist() == betweenness(s).value
    assert motter_lai_capacities(s, 0.15)[0] == pytest.approx(6.9)
    assert motter_lai_capacities(s, 1.0) == pytest.approx(2 * motter_lai_capacities(s, 0.0))


def test_performance_examples():
    p = performance(generators.path(3), capacities=[10, 10, 10], transit_only=True)
    assert p.loads.tolist() == [0, 1, 0] and p.rho == pytest.approx(10)
    q = performance(generators.path(3), capacities=[20, 20, 20], transit_only=True)
    assert q.rho == pytest.approx(2 * p.rho)
    y = np.array([1.0, 2.0, 3.0])
    a = performance(generators.path(3), demands=y, capacities=[5, 5, 5])
    b = performance(generators.path(3), demands=y * 2, capacities=[20, 20, 20])
    assert a.rho == pytest.approx(b.rho)


def _route_oracle(g, y, transit_only):
    """Router-by-flow incidence from networkx paths on a tree (unique routes)."""
    nodes = sorted(g)
    rows = []
    for i in nodes:
        for j in nodes:
            if i < j:
                path = nx.shortest_path(g, i, j)
                on = path[1:-1] if transit_only else path
                col = np.zeros(len(nodes))
                col[on] = y[i] * y[j]
                rows.append(col)
    return np.array(rows).T


def test_performance_matches_lp_oracle():
    rng = np.random.default_rng(3)
    for s in range(5):
        t = generators.random_tree(9, seed=s)
        y = rng.uniform(0.5, 2, t.v)
        b = rng.uniform(5, 20, t.v)
        for transit in (False, True):
            R = _route_oracle(to_nx(t), y, transit)
            load = R.sum(axis=1)
            # maximise rho subject to rho * load <= b
            res = linprog([-1.0], A_ub=load[:, None], b_ub=b, bounds=[(0, None)])
            got = performance(t, y, b, transit_only=transit)
            assert got.rho == pytest.approx(res.x[0], rel=1e-9)


def test_elasticity_full_mesh_bound_and_normalisation():
    c = elasticity(generators.complete(20), range(20))
    assert c.throughput[0] == 1.0 and c.area[0] == 0.0
    assert c.at(1.0) <= 1 / 3 + 1e-6
    assert all(b <= a + 1e-12 for a, b in zip(c.throughput, c.throughput[1:]))


def test_elasticity_star_hub_hurts_more():
    s = generators.star(5)
    hub = elasticity(s, [0])
    leaf = elasticity(s, [1])
    assert hub.stopped == 1 and hub.throughput_at_stop < leaf.throughput[1]
    with pytest.raises(TopologyError):
        elasticity(build_topology(3, [(0, 1)]), [0])


def test_impact_factors():
    r = vulnerability_impact_factors([5, 5], [5, 0], [0, 0], 0.5)
    assert r["cif"] == [0.0, 1.0] and r["sif"] == 0.5
    norm = np.ones(12)
    fault = np.array([0.0] * 3 + [1.0] * 9)
    r = vulnerability_impact_factors(norm, fault, np.zeros(12), 0.5)
    assert r["sif"] == pytest.approx(0.25)
    with pytest.raises(ZeroDivisionError):
        vulnerability_impact_factors([1], [0], [1], 0.1)


def test_survivability_examples():
    k2 = generators.complete(2)
    r = survivability_failures(k2, {(0, 1): 1.0}, 0.0)
    assert r.distribution == {1.0: 1.0} and r.expected == 1.0
    r = survivability_failures(k2, {(0, 1): 1.0}, 0.3)
    assert r.expected == pytest.approx(0.7)
    r = survivability_failures(generators.complete(3), {(0, 1): 1.0}, 0.1, max_failures=1)
    assert r.expected == pytest.approx(1.0)
    over = survivability_failures(k2, {(0, 1): 3.0}, 0.0)
    assert over.baseline_overload


def test_survivability_sampling_close_to_exact():
    t = generators.erdos_renyi(10, 0.45, seed=5)
    dem = {(0, 9): 1.0, (3, 7): 1.0}
    exact = survivability_failures(t, dem, 0.2, entity="node", exact_cap=20)
    approx = survivability_failures(t, dem, 0.2, entity="node", exact_cap=0, samples=5000, seed=1)
    assert exact.exact and not approx.exact
    assert abs(exact.expected - approx.expected) < 0.03
    assert math.isclose(sum(exact.distribution.values()), 1.0)
