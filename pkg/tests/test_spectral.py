import itertools
import math

import networkx as nx
import numpy as np
import pytest

from conftest import small_fixtures, to_nx
from netrobust import build_topology, generators, oracles
from netrobust.graph import TopologyError
from netrobust.spectral import (SpectralCache, algebraic_connectivity, current_flow_betweenness,
                                current_flow_closeness, eigenvector_centrality,
                                good_expansion_test, natural_connectivity, network_criticality,
                                random_walk, random_walk_betweenness, random_walk_distances,
                                resistance_matrix, sim_matrix, spanning_tree_count,
                                spectral_clusters, symmetry_ratio)
from netrobust.throughput import betweenness


def test_cache_invariants():
    t = generators.erdos_renyi(30, 0.2, seed=1)
    c = SpectralCache(t)
    assert abs(c.adjacency_eigen[0].sum()) < 1e-9
    assert c.check_residual() < 1e-8
    P, L = c.L_pinv, c.L
    assert np.allclose(P @ L @ P, P, atol=1e-10)
    lam = np.linalg.eigvalsh(L)
    assert int((np.abs(lam) < 1e-9).sum()) == nx.number_connected_components(to_nx(t))


def test_eigenvector_centrality_examples():
    for t in (generators.cycle(7), generators.complete(5)):
        assert eigenvector_centrality(t).value == pytest.approx([1 / t.v] * t.v)
    s = eigenvector_centrality(generators.star(4)).value
    assert s[0] / s[1] == pytest.approx(math.sqrt(3))
    assert sum(s) == pytest.approx(1.0)


def test_eigenvector_centrality_matches_networkx():
    t = generators.barabasi_albert(100, 3, seed=2)
    ref = nx.eigenvector_centrality_numpy(to_nx(t))
    ref = np.array([ref[i] for i in range(t.v)])
    assert eigenvector_centrality(t).value == pytest.approx((ref / ref.sum()).tolist(), abs=1e-9)
    # bipartite graphs make plain power iteration oscillate
    assert eigenvector_centrality(generators.path(6)).value == pytest.approx(
        eigenvector_centrality(generators.path(6)).value[::-1])


def test_symmetry_ratio_examples():
    assert symmetry_ratio(generators.complete(6)).value == pytest.approx(1.0)
    assert symmetry_ratio(generators.path(3)).value == pytest.approx(1.0)
    for t in small_fixtures(20, seed=4, vmax=12):
        sr = symmetry_ratio(t).value
        assert 1 - 1e-12 <= sr <= t.v / 3 + 1e-12


def test_sim_matrix_counts_common_providers():
    # 0 and 1 are customers of both 2 and 3
    t = build_topology(4, [(0, 2), (0, 3), (1, 2), (1, 3)], directed=True)
    assert sim_matrix(t)[0, 1] == 2


def test_spectral_clusters_examples():
    for s in range(5):
        t, truth = generators.cliques_with_bridge(5, 5, seed=s, shuffle=True)
        lab = spectral_clusters(t).assignment.labels
        assert all((lab[i] == lab[j]) == (truth[i] == truth[j])
                   for i, j in itertools.combinations(range(10), 2))
    assert spectral_clusters(generators.complete(6)).assignment.count == 1
    two = generators.disjoint_union(generators.complete(3), generators.complete(4))
    assert spectral_clusters(two).assignment.count == 2


def test_algebraic_connectivity_examples():
    for v in (3, 5, 9):
        assert algebraic_connectivity(generators.complete(v)).value == pytest.approx(v, rel=1e-9)
    assert algebraic_connectivity(build_topology(4, [(0, 1), (2, 3)])).value == 0.0
    assert algebraic_connectivity(generators.path(2)).value == pytest.approx(2.0)


def test_algebraic_connectivity_matches_networkx_and_sparse_path():
    t = generators.erdos_renyi(60, 0.1, seed=3)
    g = to_nx(t)
    if nx.is_connected(g):
        assert algebraic_connectivity(t).value == pytest.approx(
            nx.algebraic_connectivity(g, method="tracemin_lu", tol=1e-12), rel=1e-6)
    big = generators.cycle(2500)
    assert algebraic_connectivity(big).value == pytest.approx(2 - 2 * math.cos(2 * math.pi / 2500),
                                                              rel=1e-4)


def test_fiedler_sandwich():
    for t in small_fixtures(40, seed=12, vmax=12):
        lam = algebraic_connectivity(t).value
        kappa = oracles.vertex_connectivity(t)
        mu = oracles.edge_connectivity(t)
        assert lam <= kappa + 1e-9 and kappa <= mu


def test_good_expansion_complete_graph_is_homogeneous():
    ge = good_expansion_test(generators.complete(8))
    assert np.ptp(ge.theory_residuals) < 1e-9 and ge.flagged == []


def test_good_expansion_slope_on_random_expanders():
    for s in range(10):
        ge = good_expansion_test(generators.erdos_renyi(500, 0.05, seed=s))
        assert 0.45 <= ge.slope <= 0.55


def test_good_expansion_flags_remote_cluster():
    # K8 joined to K5 through a four-node path: the K5 sits behind a bottleneck
    edges = list(itertools.combinations(range(8), 2))
    edges += [(7, 8), (8, 9), (9, 10), (10, 11), (11, 12)]
    edges += list(itertools.combinations(range(12, 17), 2))
    ge = good_expansion_test(build_topology(17, edges))
    assert not ge.is_good_expansion
    assert set(range(13, 17)) <= set(ge.flagged)


def test_spanning_tree_counts():
    assert spanning_tree_count(generators.complete(4)).witness["count"] == 16
    for n in (3, 5, 9):
        assert spanning_tree_count(generators.cycle(n)).witness["count"] == n
    for s in range(5):
        r = spanning_tree_count(generators.random_tree(15, seed=s))
        assert r.witness["count"] == 1 and r.value == pytest.approx(0.0, abs=1e-9)
    assert spanning_tree_count(build_topology(4, [(0, 1), (2, 3)])).witness["count"] == 0


def test_spanning_trees_match_networkx_and_drop_invariance():
    for t in small_fixtures(10, seed=2, vmax=12):
        ref = round(nx.number_of_spanning_trees(to_nx(t)))
        r = spanning_tree_count(t)
        assert r.witness["count"] == ref
        assert r.value == pytest.approx(math.log(ref), rel=1e-9)
        assert spanning_tree_count(t, drop=t.v - 1).witness["count"] == ref


def test_natural_connectivity_examples():
    assert natural_connectivity(build_topology(1, [])).value == 0.0
    assert natural_connectivity(generators.complete(2)).value == pytest.approx(
        math.log(math.cosh(1)))


def test_natural_connectivity_strictly_increases():
    rng = np.random.default_rng(0)
    t = generators.erdos_renyi(60, 0.05, seed=1)
    edges = list(t.edges)
    present = set(edges)
    prev = natural_connectivity(t).value
    added = 0
    while added < 200:
        a, b = sorted(rng.choice(60, 2, replace=False).tolist())
        if (a, b) in present:
            continue
        present.add((a, b))
        edges.append((a, b))
        cur = natural_connectivity(build_topology(60, edges)).value
        assert cur > prev
        prev = cur
        added += 1


def test_natural_connectivity_scale_free_approximation():
    t = generators.barabasi_albert(2000, 3, seed=0)
    lam = np.linalg.eigvalsh(t.dense_adjacency().astype(float))[-1]
    assert abs(natural_connectivity(t).value - (lam - math.log(t.v))) < 0.05


def test_natural_connectivity_truncated_bounds_contain_exact():
    t = generators.barabasi_albert(400, 3, seed=5)
    exact = natural_connectivity(t).value
    approx = natural_connectivity(t, dense_limit=100, k=60)
    assert abs(approx.value - exact) <= approx.witness["error"] + 1e-12


def test_random_walk_examples():
    assert np.array(random_walk_distances(generators.complete(2)).value).tolist() == [[0, 1], [1, 0]]
    d = np.array(random_walk_distances(generators.star(4)).value)
    assert d[1, 0] == pytest.approx(1.0)
    assert d[0, 1] == pytest.approx(5.0)


def test_hub_to_leaf_hitting_time_by_simulation():
    rng = np.random.default_rng(7)
    nbrs = {0: [1, 2, 3], 1: [0], 2: [0], 3: [0]}
    steps = []
    for _ in range(20_000):
        pos, n = 0, 0
        while pos != 1:
            pos = nbrs[pos][rng.integers(len(nbrs[pos]))]
            n += 1
        steps.append(n)
    assert np.mean(steps) == pytest.approx(5.0, abs=0.1)


def test_random_walk_distance_dominates_hops_and_is_asymmetric():
    for t in small_fixtures(10, seed=1, vmax=12):
        d = np.array(random_walk_distances(t).value)
        hops = nx.floyd_warshall_numpy(to_nx(t))
        assert np.all(d >= hops - 1e-9)
    s = np.array(random_walk_distances(generators.star(5)).value)
    assert s[0, 1] != s[1, 0]
    with pytest.raises(TopologyError):
        random_walk(build_topology(4, [(0, 1), (2, 3)]))


def test_random_walk_betweenness_proportional_to_strength():
    for s in range(10):
        t = generators.random_connected(15, 0.3, seed=s)
        r = np.asarray(random_walk_betweenness(t).value) / t.degrees
        assert np.ptp(r) <= 1e-9 * r.mean()
    w = generators.erdos_renyi(20, 0.3, seed=2)
    tw = build_topology(w.v, list(w.edges), weights=np.random.default_rng(1).uniform(1, 3, w.e))
    strength = np.asarray(tw.adjacency(weighted=True).sum(axis=1)).ravel()
    r = np.asarray(random_walk_betweenness(tw, weighted=True).value) / strength
    assert np.ptp(r) <= 1e-9 * r.mean()


def test_current_flow_closeness():
    c = current_flow_closeness(generators.path(3))
    assert c.value[1] > c.value[0] and c.witness["agreement"] < 1e-10
    assert np.ptp(current_flow_closeness(generators.complete(6)).value) < 1e-12
    t = generators.erdos_renyi(30, 0.2, seed=4)
    g = to_nx(t)
    if nx.is_connected(g):
        ref = nx.current_flow_closeness_centrality(g)
        got = current_flow_closeness(t)
        assert got.value == pytest.approx([t.v * ref[i] for i in range(t.v)], rel=1e-9)
        assert got.witness["agreement"] < 1e-10


def test_current_flow_betweenness():
    p = current_flow_betweenness(generators.path(3)).value
    assert p[1] == max(p) and p[1] == pytest.approx(1.0)
    for s in range(10):
        tree = generators.random_tree(12, seed=s)
        assert current_flow_betweenness(tree).value == pytest.approx(betweenness(tree).value,
                                                                       abs=1e-9)
    t = generators.random_connected(20, 0.25, seed=3)
    ref = nx.current_flow_betweenness_centrality(to_nx(t), normalized=False)
    assert current_flow_betweenness(t).value == pytest.approx([ref[i] for i in range(t.v)],
                                                              abs=1e-8)


def test_network_criticality_identities():
    assert network_criticality(generators.complete(2)).value == pytest.approx(2.0)
    for t in small_fixtures(10, seed=3, vmax=12):
        g = to_nx(t)
        kirchhoff = sum(nx.resistance_distance(g, a, b) for a, b in itertools.combinations(g, 2))
        assert network_criticality(t).value == pytest.approx(2 * kirchhoff, rel=1e-9)
    for s in range(10):
        tree = generators.random_tree(10, seed=s)
        hops = nx.floyd_warshall_numpy(to_nx(tree))
        assert resistance_matrix(tree) == pytest.approx(hops, abs=1e-9)
    with pytest.raises(TopologyError):
        network_criticality(build_topology(3, [(0, 1), (1, 2)], directed=True))


def test_tanc_uniform_traffic_is_proportional():
    t = generators.random_connected(10, 0.4, seed=1)
    g = np.full((10, 10), 1.0)
    np.fill_diagonal(g, 0.0)
    tau = network_criticality(t).value
    tanc = network_criticality(t, traffic=g).value
    # alpha_st = 1 + 1/(v(v-1)) for every ordered pair
    assert tanc == pytest.approx(tau * (1 + 1 / 90), rel=1e-12)
