import itertools

import networkx as nx
import numpy as np
import pytest

from conftest import small_fixtures, to_nx
from netrobust import Undefined, build_topology, components, generators, oracles
from netrobust.connectivity import (allowed_sizes, cheeger_approx, component_class,
                                    disconnection_stats, edge_reliability_importance,
                                    fm_partition, local_delay_resilience,
                                    local_delay_resilience_global, mohar_bounds,
                                    partition_resilience_factor, percolation_threshold,
                                    policy_ball, reachability, reliability_dominates,
                                    reliability_polynomial, sparsity_approx)
from netrobust.graph import TopologyError


def _two_k4_through_x():
    edges = list(itertools.combinations([0, 1, 2, 3], 2))
    edges += list(itertools.combinations([4, 5, 6, 7], 2))
    edges += [(8, 0), (8, 4)]
    return build_topology(9, edges)


def test_fm_bridge_and_cycle():
    t, _ = generators.cliques_with_bridge(5, 5, bridge=(0, 5))
    rep = fm_partition(t, 0.5, seed=1)
    assert rep.xi == 1 and rep.cut_edges == [(0, 5)]
    assert fm_partition(generators.cycle(8), 0.5, seed=0).xi == 2


def test_fm_cut_is_valid_and_balanced():
    for s in range(15):
        t = generators.erdos_renyi(60, 0.08, seed=s)
        rep = fm_partition(t, 0.3, balance=2, seed=s)
        assert rep.size_a in allowed_sizes(t.v, 0.3, 2)
        assert rep.xi == len(rep.cut_edges)
        rest = t.without_edges([t.edges.index(e) for e in rep.cut_edges])
        lab = components(rest).labels
        a, b = rep.sides()
        assert not set(lab[a].tolist()) & set(lab[b].tolist())


def test_fm_infeasible_balance():
    with pytest.raises(ValueError):
        fm_partition(generators.cycle(5), 0.3, balance=0.0)
    with pytest.raises(ValueError):
        fm_partition(generators.cycle(6), 0.7)


def test_fm_never_below_optimum():
    for t in small_fixtures(40, seed=11, vmax=11):
        m = t.v // 2
        rep = fm_partition(t, m / t.v, sizes=range(m, m + 1), seed=0)
        assert rep.xi >= oracles.min_m_degree(t, m).value


def test_cheeger_examples():
    two = generators.disjoint_union(generators.cycle(3), generators.cycle(3))
    assert cheeger_approx(two).value == 0.0
    assert cheeger_approx(generators.cycle(4)).value == pytest.approx(1.0)
    assert cheeger_approx(generators.complete(4)).value == pytest.approx(2.0)
    for t in (generators.cycle(4), generators.complete(4)):
        assert cheeger_approx(t).value == pytest.approx(oracles.cheeger(t).value)


def test_cheeger_upper_bounds_optimum_and_spectral_floor():
    for t in small_fixtures(30, seed=5, vmax=10):
        h = cheeger_approx(t).value
        assert h >= oracles.cheeger(t).value - 1e-12
        lam = np.linalg.eigvalsh(nx.laplacian_matrix(to_nx(t)).toarray().astype(float))[1]
        assert h >= lam / 2 - 1e-9


def test_sparsity_examples():
    assert sparsity_approx(generators.path(3)).value == pytest.approx(1.0)
    t = _two_k4_through_x()
    assert sparsity_approx(t).value == pytest.approx(1 / 16)
    assert oracles.sparsity_min(t).value == pytest.approx(1 / 16)
    with pytest.raises(TopologyError):
        sparsity_approx(generators.path(2))


def test_sparsity_upper_bounds_optimum():
    for t in small_fixtures(30, seed=6, vmax=10):
        a, o = sparsity_approx(t).value, oracles.sparsity_min(t).value
        if isinstance(o, Undefined):
            continue
        if not isinstance(a, Undefined):
            assert a >= o - 1e-12


def test_local_delay_resilience_examples():
    assert local_delay_resilience(generators.complete(4), 2).value == 4
    assert local_delay_resilience(generators.path(5), 2).value == 1
    assert local_delay_resilience(generators.star(4), 0).value == 2
    iso = build_topology(3, [(0, 1)])
    assert isinstance(local_delay_resilience(iso, 2).value, Undefined)
    g = local_delay_resilience_global(generators.complete(4))
    assert g.value == 4 and g.witness["v_h"] == 4
    with pytest.raises(ValueError):
        local_delay_resilience(generators.complete(4), 0, h=0)


def test_policy_ball_is_valley_free():
    # 0 and 1 are customers of 2; 2 peers with 3; 3 provides for 4; 4 provides for 5
    t = build_topology(6, [(0, 2), (1, 2), (2, 3), (3, 2), (4, 3), (5, 4)], directed=True)
    assert policy_ball(t, 0, 4) == [0, 1, 2, 3, 4, 5]
    assert policy_ball(t, 5, 1) == [4, 5]
    # 1 is also a customer of 6: reaching 6 from 0 would need 0->2 up, 2->1 down, 1->6 up
    v = build_topology(7, [(0, 2), (1, 2), (1, 6)], directed=True)
    assert policy_ball(v, 0, 3) == [0, 1, 2]
    assert policy_ball(v, 1, 1) == [1, 2, 6]
    with pytest.raises(TopologyError):
        policy_ball(generators.path(3), 0, 1)


def test_percolation_examples():
    assert percolation_threshold(generators.cycle(4)).value == pytest.approx(0.0)
    assert percolation_threshold(generators.complete(4)).value == pytest.approx(0.5)
    assert percolation_threshold(generators.barabasi_albert(10_000, 2, seed=0)).value >= 0.9
    assert isinstance(percolation_threshold(generators.path(2)).value, Undefined)


def test_reliability_examples():
    for p in np.linspace(0, 1, 11):
        assert reliability_polynomial(generators.complete(2), p).value == pytest.approx(p)
        assert reliability_polynomial(generators.complete(3), p).value == pytest.approx(
            3 * p ** 2 - 2 * p ** 3, rel=1e-9, abs=1e-15)
    assert reliability_polynomial(generators.cycle(5), 1.0).value == 1.0
    with pytest.raises(TopologyError):
        reliability_polynomial(generators.cycle(4), 0.5, K=[0, 7])


def test_reliability_two_terminal_and_monotone():
    p = 0.7
    # two-terminal across a 4-cycle: two disjoint 2-edge paths
    assert reliability_polynomial(generators.cycle(4), p, K=[0, 2]).value == pytest.approx(
        1 - (1 - p * p) ** 2)
    for t in small_fixtures(10, seed=3, vmax=8):
        if t.e > 20:
            continue
        vals = [reliability_polynomial(t, p).value for p in np.linspace(0, 1, 11)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_reliability_monte_carlo_interval():
    t = generators.erdos_renyi(12, 0.5, seed=1)
    assert t.e > 20
    r = reliability_polynomial(t, 0.9, samples=20_000, seed=4)
    assert not r.exact and r.ci95[0] <= r.value <= r.ci95[1]
    again = reliability_polynomial(t, 0.9, samples=20_000, seed=4)
    assert again.value == r.value


def test_edge_importance_bridge_dominates():
    # triangle 0-1-2 with pendant edge 2-3: the pendant edge is a bridge
    t = build_topology(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    imp = edge_reliability_importance(t, 0.8).value
    assert imp[3] == max(imp)
    assert reliability_dominates(t, 3, 0)
    assert not reliability_dominates(t, 0, 3)


def test_partition_resilience_examples():
    assert partition_resilience_factor(generators.complete(4)).value == 0.0
    assert partition_resilience_factor(generators.star(4)).value == pytest.approx(0.25)
    for t in small_fixtures(10, seed=8, vmax=9):
        assert 0 <= partition_resilience_factor(t).value <= 1
    with pytest.raises(TopologyError):
        partition_resilience_factor(generators.path(2))


def test_partition_resilience_sampling_is_close_to_exact():
    t = generators.random_connected(12, 0.35, seed=2)
    exact = partition_resilience_factor(t).value
    approx = partition_resilience_factor(t, cap=5, samples=400, seed=1).value
    assert abs(exact - approx) < 0.05


def test_disconnection_examples():
    assert disconnection_stats(generators.cycle(5)).reachability == 1.0
    two = build_topology(4, [(0, 1), (2, 3)])
    assert reachability(two) == pytest.approx(1 / 3)
    iso = build_topology(5, [])
    st = disconnection_stats(iso)
    assert st.reachability == 0 and st.n_components == 5
    assert component_class(1) == 1 and component_class(10) == 1
    assert component_class(11) == 2 and component_class(1000) == 3


def test_reachability_closed_form_and_directed():
    for s in range(10):
        t = generators.erdos_renyi(40, 0.04, seed=s)
        g = to_nx(t)
        pairs = sum(len(c) * (len(c) - 1) for c in nx.connected_components(g))
        assert reachability(t) == pytest.approx(pairs / (40 * 39))
    d = build_topology(3, [(0, 1), (1, 2)], directed=True)
    assert reachability(d) == pytest.approx(3 / 6)


def test_mohar_bounds_hold_for_fm_cuts():
    for t in small_fixtures(25, seed=9, vmax=12):
        rep = fm_partition(t, 0.5, balance=0.5, seed=0)
        lo, hi = mohar_bounds(t, rep.side)
        assert lo - 1e-9 <= rep.xi <= hi + 1e-9
