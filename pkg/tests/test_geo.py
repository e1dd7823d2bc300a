import itertools
import math

import numpy as np
import pytest

from netrobust import Undefined, build_topology, generators
from netrobust.geo import (Disk, GeoParams, Polygon, alternative_paths,
                           distance_strength_outreach, egpd, geo_distances, geo_survivability,
                           haversine, path_diversity, pointwise_vulnerability, tggd)
from netrobust.graph import TopologyError


def _with_coords(t, coords, kind="planar", weights=None):
    return build_topology(t.v, list(t.edges), directed=t.directed, weights=weights,
                          node_coords=np.asarray(coords, float), coord_kind=kind)


def _ring_coords(n, r=1.0):
    ang = 2 * np.pi * np.arange(n) / n
    return np.column_stack([r * np.cos(ang), r * np.sin(ang)])


def _bowtie7():
    """Two triangles hanging off a shared cut vertex 3, v=7."""
    edges = [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 6)]
    coords = [(0, 0), (0, 1), (1, 0.5), (2, 0.5), (3, 0.5), (4, 0), (4, 1)]
    return build_topology(7, edges, node_coords=np.asarray(coords, float))


def test_haversine_reference_distance():
    # one degree of longitude on the equator
    assert haversine((0, 0), (0, 1)) == pytest.approx(2 * math.pi * 6371.0088 / 360)
    assert haversine((10, 20), (10, 20)) == 0.0


def test_strength_and_outreach_reduce_to_degree_and_strength():
    t = generators.path(4)
    unit = _with_coords(t, [(0, 0), (1, 0), (2, 0), (3, 0)], weights=[2.0, 3.0, 5.0])
    r = distance_strength_outreach(unit)
    assert r["distance_strength"].value == t.degrees.tolist()
    assert r["outreach"].value == [2.0, 5.0, 8.0, 5.0]
    plain = distance_strength_outreach(_with_coords(t, [(0, 0), (1, 0), (2, 0), (3, 0)]))
    assert isinstance(plain["outreach"].value, Undefined)


def test_distance_strength_sum():
    t = build_topology(3, [(0, 1), (0, 2)], node_coords=np.array([[0, 0], [100, 0], [0, 300.0]]))
    assert distance_strength_outreach(t)["distance_strength"].value[0] == pytest.approx(400)
    with pytest.raises(TopologyError):
        distance_strength_outreach(generators.path(3))


def test_regions():
    t = _with_coords(generators.path(4), [(0, 0), (1, 0), (2, 0), (3, 0)])
    assert Disk((0, 0), 1.0).contains(t).tolist() == [True, True, False, False]
    sq = Polygon(((1.5, -1), (3.5, -1), (3.5, 1), (1.5, 1)))
    assert sq.contains(t).tolist() == [False, False, True, True]
    with pytest.raises(TopologyError):
        Polygon(((0, 0), (1, 1)))
    with pytest.raises(TopologyError):
        Disk((0, 0), -1)


def test_geo_survivability_examples():
    t = _bowtie7()
    nothing = geo_survivability(t, [(Disk((50, 50), 0.1), 1.0)])
    assert nothing.distribution == {1.0: 1.0} and nothing.expected == 1.0
    r = geo_survivability(t, [(Disk((2, 0.5), 0.1), 0.5)])
    assert list(r.distribution) == [pytest.approx(3 / 7), 1.0]
    assert list(r.distribution.values()) == [0.5, 0.5]
    assert r.expected == pytest.approx(5 / 7)
    assert r.worst_case == pytest.approx(3 / 7)
    assert sum(r.distribution.values()) == pytest.approx(1.0)
    with pytest.raises(TopologyError):
        geo_survivability(t, [(Disk((0, 0), 1), 0.7), (Disk((4, 0), 1), 0.6)])
    with pytest.raises(TopologyError):
        geo_survivability(t, [("not a region", 0.5)])


def test_pointwise_vulnerability_examples():
    k = _with_coords(generators.complete(6), _ring_coords(6))
    r = pointwise_vulnerability(k)
    assert np.ptp(r.value) < 1e-12 and r.witness["relative_variance"] == pytest.approx(0, abs=1e-20)
    p = _with_coords(generators.path(3), [(0, 0), (1, 0), (2, 0)])
    u = pointwise_vulnerability(p)
    assert u.witness["efficiency"] == pytest.approx(1.0)
    assert u.value[1] == pytest.approx(1.0)
    assert u.witness["global"] == pytest.approx(1.0)


def test_pointwise_vulnerability_codomain_and_articulation():
    rng = np.random.default_rng(0)
    for s in range(10):
        t = generators.random_connected(12, 0.25, seed=s)
        tc = _with_coords(t, rng.uniform(0, 10, (12, 2)))
        U = pointwise_vulnerability(tc).value
        assert all(-1e-12 <= x <= 1 + 1e-12 for x in U)
    t = _bowtie7()
    # hang a degree-1 leaf 7 off node 6
    edges = list(t.edges) + [(6, 7)]
    coords = np.vstack([t.node_coords, [[5, 1]]])
    tt = build_topology(8, edges, node_coords=coords)
    U = pointwise_vulnerability(tt).value
    assert U[7] <= U[3] and U[7] <= U[6]


def test_alternative_paths_are_node_disjoint_when_possible():
    c = _with_coords(generators.cycle(6), _ring_coords(6))
    paths = alternative_paths(c, 0, 3, k=3)
    assert len(paths) == 2
    assert not set(paths[0][1:-1]) & set(paths[1][1:-1])


def test_egpd_examples():
    p = _with_coords(generators.path(3), [(0, 0), (1, 0), (2, 0)])
    assert egpd(p, 0, 2, GeoParams(lam=1.0)) == 0.0
    # two paths 0-1-3 and 0-2-3 with nodes 1 and 2 at the same place
    t = build_topology(4, [(0, 1), (1, 3), (0, 2), (2, 3)],
                       node_coords=np.array([[0, 0], [1, 0], [1, 0], [2, 0.0]]))
    assert egpd(t, 0, 3, GeoParams(lam=1.0)) == 0.0
    sq = _with_coords(generators.cycle(4), [(0, 0), (1, 1), (2, 0), (1, -1)])
    vals = [egpd(sq, 0, 2, GeoParams(lam=lam)) for lam in (0.1, 0.5, 1.0, 2.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(TopologyError):
        egpd(sq, 1, 1)


def test_path_diversity_square():
    sq = _with_coords(generators.cycle(4), [(0, 0), (1, 1), (2, 0), (1, -1)])
    # interior nodes 2 apart, loop area 2: 0.5 * 4 + 0.5 * 2
    assert path_diversity(sq, 0, 2, GeoParams(lam=1.0)) == pytest.approx(3.0)


def test_tggd_codomain():
    rng = np.random.default_rng(1)
    for s in range(5):
        t = generators.random_connected(10, 0.35, seed=s)
        r = tggd(_with_coords(t, rng.uniform(0, 5, (10, 2))))
        assert 0 <= r.value <= 1
        assert 0 <= r.witness["ctggd"] <= 1


def test_geo_params_validation():
    with pytest.raises(TopologyError):
        GeoParams(omega=1.5)
    with pytest.raises(TopologyError):
        GeoParams(lam=0)


def test_latlon_distances_use_great_circle():
    t = build_topology(2, [(0, 1)], node_coords=np.array([[0.0, 0.0], [0.0, 90.0]]),
                       coord_kind="latlon")
    assert geo_distances(t)[0, 1] == pytest.approx(math.pi * 6371.0088 / 2)
