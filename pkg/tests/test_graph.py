import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import small_fixtures, to_nx
from netrobust import (UNREACHABLE, TopologyError, build_topology, components, generate,
                       generators, shortest_paths)
from netrobust.graph import distance_matrix
from netrobust.oracles import brute_force_oracle, OracleCapExceeded


def test_triangle_construction():
    t = build_topology(3, [(0, 1), (1, 2), (0, 2)])
    assert (t.v, t.e) == (3, 3)


@pytest.mark.parametrize("edges,msg", [([(2, 2)], "self-loop"), ([(0, 1, 0.0)], "nonpositive"),
                                       ([(0, 1), (1, 0)], "duplicate"), ([(0, 5)], "range")])
def test_construction_errors_name_the_edge(edges, msg):
    with pytest.raises(TopologyError) as err:
        build_topology(3, edges)
    assert msg in str(err.value)
    assert err.value.index is not None


def test_undirected_edges_normalised():
    t = build_topology(3, [(2, 1), (1, 0)])
    assert t.edges == ((0, 1), (1, 2))


def test_path_distances(p3):
    d = shortest_paths(p3, 0)
    assert [d[i] for i in range(3)] == [0, 1, 2]


def test_weighted_distance_is_inverse_weight():
    t = build_topology(2, [(0, 1, 2.0)])
    assert shortest_paths(t, 0, weighted=True)[1] == pytest.approx(0.5)


def test_unreachable_marker():
    t = build_topology(3, [(0, 1)])
    assert shortest_paths(t, 0)[2] is UNREACHABLE


def test_components_examples(k3):
    r = components(k3)
    assert (r.count, r.largest) == (1, 3)
    r = components(generators.disjoint_union(k3, build_topology(1, [])))
    assert (r.count, sorted(r.sizes, reverse=True)) == (2, [3, 1])
    r = components(build_topology(4, []))
    assert (r.count, r.largest) == (4, 1)


def test_directed_weak_and_strong_components():
    t = build_topology(3, [(0, 1), (1, 2)], directed=True)
    assert components(t).count == 1
    assert components(t, strong=True).count == 3


def test_generator_examples():
    assert generate("complete", 4).e == 6
    assert generate("er", 100, 0.0, seed=1).e == 0
    a, b = generate("ba", 1000, 2, seed=7), generate("ba", 1000, 2, seed=7)
    assert a.edges == b.edges and a.digest() == b.digest()


def test_generator_rejects_bad_parameters():
    with pytest.raises(TopologyError):
        generate("ws", 10, 3, 0.1, seed=0)
    with pytest.raises(TopologyError):
        generate("ba", 10, 0, seed=0)


def test_oracle_examples():
    assert brute_force_oracle(generators.cycle(4), "cheeger").value == 1
    assert brute_force_oracle(generators.path(4), "integrity").value == 3
    assert brute_force_oracle(generators.cycle(4), "tenacity").value == pytest.approx(1.5)


def test_oracle_refuses_large_graphs():
    with pytest.raises(OracleCapExceeded):
        brute_force_oracle(generators.cycle(20), "toughness")


@pytest.mark.parametrize("t", small_fixtures(25, seed=3))
def test_degree_sum_and_min_cut_bound(t):
    assert t.degrees.sum() == 2 * t.e
    cut = brute_force_oracle(t, "min_edge_cut").value
    assert cut <= t.degrees.min()
    assert cut == nx.edge_connectivity(to_nx(t))
    assert brute_force_oracle(t, "min_vertex_cut").value == nx.node_connectivity(to_nx(t))


def test_directed_degree_sums():
    t = generators.erdos_renyi(40, 0.1, seed=2)
    d = build_topology(t.v, list(t.edges) + [(b, a) for a, b in t.edges[::3]], directed=True)
    assert d.degrees.sum() == d.in_degrees.sum() == d.e


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 30), st.floats(0.05, 0.5), st.integers(0, 10_000))
def test_distances_symmetric_and_match_networkx(v, p, seed):
    t = generators.erdos_renyi(v, p, seed=seed)
    d = distance_matrix(t)
    assert np.array_equal(d, d.T)
    ref = dict(nx.all_pairs_shortest_path_length(to_nx(t)))
    for a in range(v):
        for b in range(v):
            assert d[a, b] == ref[a].get(b, np.inf)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.floats(0.0, 0.3), st.integers(0, 10_000))
def test_components_partition_and_idempotent(v, p, seed):
    t = generators.erdos_renyi(v, p, seed=seed)
    r = components(t)
    assert sum(r.sizes) == v and r.largest == max(r.sizes)
    assert sorted(r.sizes, reverse=True) == list(r.sizes)
    again = components(t)
    assert np.array_equal(r.labels, again.labels)
    assert r.count == nx.number_connected_components(to_nx(t))
