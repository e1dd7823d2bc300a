"""Metric registry, coverage table and versioned JSON reports.

Every registry key maps to a function ``(topology, ctx) -> MetricResult`` plus
the graph features it requires. ``TABLE`` lists one row per catalogued metric
with its implementation status; ``OUT_OF_SCOPE`` lists the deliberately
excluded topics.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import (__version__, adjacency, clustering, connectivity, distance, geo, oracles,
               spectral, throughput)
from .graph import MetricResult, Topology, Undefined, components

SCHEMA = "netrobust-report/1"
STATUSES = ("implemented", "oracle-only", "out-of-scope")

REASONS = {
    "simple": "requires simple graph",
    "undirected": "requires undirected graph",
    "weights": "requires edge weights",
    "coords": "requires geographic coordinates",
    "labels": "requires node labels",
    "node_weights": "requires node weights",
}


@dataclass
class Context:
    seed: int = 0
    options: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    def opt(self, name, default):
        return self.options.get(name, default)

    def communities(self, t: Topology):
        if "communities" not in self._cache:
            self._cache["communities"] = clustering.detect_communities_spectral(t.as_undirected())
        return self._cache["communities"]

    def module_labels(self, t: Topology):
        return t.node_labels if t.labeled else self.communities(t).labels


@dataclass(frozen=True)
class MetricSpec:
    key: str
    compute: object
    requires: tuple = ()


def _mr(key, kind, value, codomain=(None, None), scope="global", mode="static", witness=None):
    return MetricResult(key, kind, value, codomain, scope, mode, witness)


# -- adapters for functions that do not return MetricResult ----------------

def _degree(t, ctx):
    d = adjacency.degree_metrics(t)
    return _mr("degree", "per_node", d.k.tolist(), (0, t.v - 1), "local",
               witness={"distribution": {int(k): float(p) for k, p in d.P.items()}})


def _strength(t, ctx):
    d = adjacency.degree_metrics(t)
    return _mr("strength", "per_node", np.asarray(d.s).tolist(), (0, None), "local",
               witness={"distribution": {float(k): float(p) for k, p in d.P_s.items()}})


def _modularity(t, ctx):
    c = ctx.communities(t)
    return _mr("modularity", "global_scalar", float(c.Q), (-0.5, 1),
               witness={"communities": c.count})


def _communities(algo):
    def run(t, ctx):
        u = t.as_undirected()
        if algo == "spectral":
            c = ctx.communities(t)
        else:
            c = clustering.detect_communities_edge_betweenness(u, seed=ctx.seed)
        return _mr(f"communities_{algo}", "per_node", c.labels.tolist(), (0, t.v - 1), "global",
                   witness={"modularity": float(c.Q), "communities": c.count})
    return run


def _partition(t, ctx):
    r = connectivity.fm_partition(t.as_undirected(), ctx.opt("ratio", 0.5), seed=ctx.seed)
    return _mr("partition", "per_node", r.side.astype(int).tolist(), (0, 1), "global", "worst-case",
               witness={"cut_size": r.xi, "ratio": r.ratio})


def _oracle(problem, **kw):
    def run(t, ctx):
        return oracles.brute_force_oracle(t.as_undirected(), problem, **kw)
    return run


def _flow_connectivity(kind):
    def run(t, ctx):
        u = t.as_undirected()
        f = oracles.vertex_connectivity if kind == "vertex" else oracles.edge_connectivity
        return _mr(f"{kind}_connectivity", "global_scalar", int(f(u)), (0, t.v - 1),
                   mode="worst-case")
    return run


def _disconnection(field_, key, kind="global_scalar", codomain=(0, None)):
    def run(t, ctx):
        s = connectivity.disconnection_stats(t)
        val = getattr(s, field_)
        if isinstance(val, dict):
            kind_ = "distribution"
        else:
            kind_ = kind
        return _mr(key, kind_, val, codomain, mode="dynamic")
    return run


def _class_node_share(t, ctx):
    comp = components(t.as_undirected())
    share: dict = {}
    for size in comp.sizes:
        c = connectivity.component_class(int(size))
        share[c] = share.get(c, 0.0) + size / t.v
    return _mr("component_class_node_share", "distribution", dict(sorted(share.items())), (0, 1),
               mode="dynamic")


def _reliability(t, ctx):
    r = connectivity.reliability_polynomial(t.as_undirected(), ctx.opt("p", 0.9), seed=ctx.seed)
    return _mr("reliability", "global_scalar", float(r.value), (0, 1), mode="failures",
               witness={"exact": r.exact, "samples": r.samples})


def _harmonic(t, ctx):
    r = distance.global_efficiency(t)
    return _mr("harmonic_mean_distance", "global_scalar", r.witness["harmonic_mean"], (1, None))


def _cpl(t, ctx):
    r = distance.characteristic_path_length(t, t.node_labels)
    return _mr("characteristic_path_length", "distribution", r.value, (0, None), "local")


def _eff_ecc(t, ctx):
    return distance.effective_eccentricity(t, ctx.opt("r", 0.9))


def _eff_diam(t, ctx):
    return distance.effective_diameter(t, ctx.opt("r", 0.9))


def _hegemony(t, ctx):
    return throughput.as_hegemony(t, list(range(t.v)), alpha=ctx.opt("hegemony_alpha", 0.1))


def _effective_load(t, ctx):
    r = throughput.effective_load(t, ctx.opt("A", 1.0), seed=ctx.seed)
    return _mr("effective_load", "per_node", np.asarray(r.mean_node).tolist(), (0, None), "local",
               "dynamic")


def _performance(t, ctx):
    r = throughput.performance(t)
    return _mr("performance", "global_scalar", r.performance, (0, None),
               witness={"rho": r.rho, "bottleneck": r.bottleneck})


def _attack_order(t: Topology) -> list:
    b = np.asarray(throughput.betweenness(t).value)
    return [int(x) for x in np.lexsort((np.arange(t.v), -b))]


def _elasticity(t, ctx):
    curve = throughput.elasticity(t, _attack_order(t))
    return _mr("elasticity", "global_scalar", curve.area[-1], (0, 1), mode="dynamic",
               witness={"stopped": curve.stopped, "removed": len(curve.removed)})


def _vif(t, ctx):
    """Agents are nodes measured by their efficiency; the fault removes the busiest node."""
    u = t.as_undirected()
    victim = _attack_order(u)[0]
    norm = np.asarray(distance.global_efficiency(u).witness["per_node"])
    alive = [i for i in range(u.v) if i != victim]
    fault = np.zeros(u.v)
    fault[alive] = np.asarray(distance.global_efficiency(u.induced(alive)).witness["per_node"]) \
        * (u.v - 2) / (u.v - 1)
    keep = np.array([i for i in alive if norm[i] > 0])
    r = throughput.vulnerability_impact_factors(norm[keep], fault[keep], np.zeros(len(keep)),
                                                ctx.opt("vif_d", 0.1))
    return _mr("vulnerability_impact_factors", "global_scalar", r["sif"], (0, 1), "global", "dynamic",
               witness={"faulty_node": victim, "max_cif": max(r["cif"], default=0.0)})


def _survivability(t, ctx):
    order = np.argsort(-np.asarray(t.degrees), kind="stable")
    hubs = [int(x) for x in order[: min(4, t.v)]]
    demands = {(a, b): 1.0 for a in hubs for b in hubs if a != b}
    r = throughput.survivability_failures(t, demands, ctx.opt("p_fail", 0.01),
                                          samples=ctx.opt("samples", 2000), seed=ctx.seed)
    return _mr("survivability_failures", "distribution",
               {round(k, 12): v for k, v in r.distribution.items()}, (0, 1), mode="failures",
               witness={"expected": r.expected, "exact": r.exact})


def _spectral_clusters(t, ctx):
    r = spectral.spectral_clusters(t)
    return _mr("spectral_clusters", "per_node", r.assignment.labels.tolist(), (0, t.v - 1),
               witness={"clusters": r.assignment.count})


def _good_expansion(t, ctx):
    r = spectral.good_expansion_test(t)
    return _mr("good_expansion", "global_scalar", bool(r.is_good_expansion), (0, 1),
               witness={"slope": r.slope, "intercept": r.intercept, "flagged": len(r.flagged)})


def _rw_aspl(t, ctx):
    r = spectral.random_walk_distances(t)
    m = np.asarray(r.value, float)
    off = ~np.eye(t.v, dtype=bool)
    return _mr("random_walk_aspl", "global_scalar", float(m[off].mean()), (1, None))


def _geo(key):
    def run(t, ctx):
        return geo.distance_strength_outreach(t)[key]
    return run


def _geo_surv(t, ctx):
    events = ctx.opt("events", None)
    if not events:
        return _mr("geo_survivability", "distribution", Undefined("no regional events given"), (0, 1),
                   mode="dynamic")
    r = geo.geo_survivability(t, events)
    return _mr("geo_survivability", "distribution", r.distribution, (0, 1), mode="dynamic",
               witness={"expected": r.expected, "worst_case": r.worst_case})


def _pv(part):
    def run(t, ctx):
        r = geo.pointwise_vulnerability(t)
        if part == "pointwise":
            return r
        key = "global_vulnerability" if part == "global" else "vulnerability_variance"
        return _mr(key, "global_scalar", r.witness["global" if part == "global" else "relative_variance"],
                   (0, 1) if part == "global" else (0, None), mode="dynamic")
    return run


def _tggd(t, ctx):
    return geo.tggd(t)


def _simple(fn, **kw):
    return lambda t, ctx: fn(t, **kw)


def _labels(fn):
    return lambda t, ctx: fn(t, ctx.module_labels(t))


S, U, W, G, L, N = "simple", "undirected", "weights", "coords", "labels", "node_weights"

REGISTRY = {s.key: s for s in [
    MetricSpec("degree", _degree),
    MetricSpec("strength", _strength, (W,)),
    MetricSpec("entropy", _simple(adjacency.entropy), (U,)),
    MetricSpec("skewness", _simple(adjacency.skewness), (U,)),
    MetricSpec("vulnerability_function", _simple(adjacency.vulnerability_function), (S,)),
    MetricSpec("assortativity", _simple(adjacency.assortative_coefficient), (U,)),
    MetricSpec("neighbor_connectivity", _simple(adjacency.neighbor_connectivity), (U,)),
    MetricSpec("rich_club", lambda t, c: adjacency.rich_club(t, null_samples=c.opt("null_samples", 20),
                                                            seed=c.seed)),
    MetricSpec("clustering_local", _simple(clustering.clustering_coefficient, variant="local")),
    MetricSpec("clustering_average", _simple(clustering.clustering_coefficient, variant="average")),
    MetricSpec("transitivity", _simple(clustering.clustering_coefficient, variant="transitivity")),
    MetricSpec("clustering_barrat", _simple(clustering.clustering_coefficient, variant="barrat"), (W,)),
    MetricSpec("clustering_onnela", _simple(clustering.clustering_coefficient, variant="onnela"), (W,)),
    MetricSpec("clustering_opsahl", lambda t, c: clustering.clustering_coefficient(
        t, "opsahl", c.opt("tau", "arithmetic")), (W,)),
    MetricSpec("edge_clustering", _simple(clustering.edge_clustering_coefficient), (U,)),
    MetricSpec("clustering_by_degree", _simple(clustering.clustering_by_degree), (U,)),
    MetricSpec("modularity", _modularity, (U,)),
    MetricSpec("communities_spectral", _communities("spectral"), (U,)),
    MetricSpec("communities_edge_betweenness", _communities("edge_betweenness"), (U,)),
    MetricSpec("within_module_zscore", _labels(clustering.zscore_within_module), (U,)),
    MetricSpec("participation_coefficient", _labels(clustering.participation_coefficient), (U,)),
    MetricSpec("vertex_connectivity", _flow_connectivity("vertex"), (U,)),
    MetricSpec("edge_connectivity", _flow_connectivity("edge"), (U,)),
    MetricSpec("min_vertex_cut", _oracle("min_vertex_cut"), (U,)),
    MetricSpec("sparsity", lambda t, c: connectivity.sparsity_approx(t, seed=c.seed), (U,)),
    MetricSpec("cheeger", lambda t, c: connectivity.cheeger_approx(t, seed=c.seed), (U,)),
    MetricSpec("cheeger_exact", _oracle("cheeger"), (U,)),
    MetricSpec("min_m_degree", lambda t, c: oracles.min_m_degree(t, c.opt("m", 2)), (U,)),
    MetricSpec("partition", _partition, (U,)),
    MetricSpec("ratio_of_disruption", _oracle("ratio_of_disruption"), (U,)),
    MetricSpec("local_delay_resilience",
               lambda t, c: connectivity.local_delay_resilience_global(t, c.opt("h", 1), seed=c.seed)),
    MetricSpec("toughness", _oracle("toughness"), (U,)),
    MetricSpec("integrity", _oracle("integrity"), (U,)),
    MetricSpec("scattering", _oracle("scattering"), (U,)),
    MetricSpec("tenacity", _oracle("tenacity"), (U,)),
    MetricSpec("edge_tenacity", _oracle("edge_tenacity"), (U,)),
    MetricSpec("mixed_tenacity", _oracle("mixed_tenacity"), (U,)),
    MetricSpec("percolation_threshold", _simple(connectivity.percolation_threshold), (U,)),
    MetricSpec("reliability", _reliability, (U,)),
    MetricSpec("partition_resilience_factor",
               lambda t, c: connectivity.partition_resilience_factor(t, seed=c.seed), (U,)),
    MetricSpec("component_count", _disconnection("n_components", "component_count", codomain=(1, None))),
    MetricSpec("largest_component_fraction", _disconnection("largest_fraction", "largest_component_fraction",
                                                            codomain=(0, 1))),
    MetricSpec("mean_component_size", _disconnection("mean_size", "mean_component_size")),
    MetricSpec("component_class_distribution", _disconnection("class_fraction", "component_class_distribution",
                                                              codomain=(0, 1))),
    MetricSpec("component_class_node_share", _class_node_share),
    MetricSpec("reachability", _disconnection("reachability", "reachability", codomain=(0, 1))),
    MetricSpec("aspl", _simple(distance.aspl, mode="finite_only")),
    MetricSpec("aspl_giant", _simple(distance.aspl, mode="giant_component")),
    MetricSpec("dik", _simple(distance.aspl, mode="dik")),
    MetricSpec("diameter", _simple(distance.diameter)),
    MetricSpec("global_efficiency", _simple(distance.global_efficiency)),
    MetricSpec("harmonic_mean_distance", _harmonic),
    MetricSpec("local_efficiency", _simple(distance.local_efficiency)),
    MetricSpec("cyclic_coefficient", _simple(distance.local_efficiency, cyclic=True)),
    MetricSpec("characteristic_path_length", _cpl, (L,)),
    MetricSpec("expansion", lambda t, c: distance.expansion(t, c.opt("h", 1))),
    MetricSpec("effective_eccentricity", _eff_ecc),
    MetricSpec("effective_diameter", _eff_diam),
    MetricSpec("betweenness", _simple(throughput.betweenness)),
    MetricSpec("edge_betweenness", _simple(throughput.betweenness, target="edge")),
    MetricSpec("as_hegemony", _hegemony),
    MetricSpec("edge_degree", _simple(throughput.edge_degree)),
    MetricSpec("central_point_dominance", _simple(throughput.central_point_dominance)),
    MetricSpec("effective_load", _effective_load),
    MetricSpec("performance", _performance, (N,)),
    MetricSpec("elasticity", _elasticity, (U,)),
    MetricSpec("vulnerability_impact_factors", _vif, (U,)),
    MetricSpec("survivability_failures", _survivability),
    MetricSpec("eigenvector_centrality", _simple(spectral.eigenvector_centrality)),
    MetricSpec("symmetry_ratio", _simple(spectral.symmetry_ratio), (U,)),
    MetricSpec("spectral_clusters", _spectral_clusters, (U,)),
    MetricSpec("algebraic_connectivity", _simple(spectral.algebraic_connectivity), (U,)),
    MetricSpec("good_expansion", _good_expansion, (U,)),
    MetricSpec("spanning_trees", _simple(spectral.spanning_tree_count), (U,)),
    MetricSpec("natural_connectivity", _simple(spectral.natural_connectivity), (U,)),
    MetricSpec("random_walk_aspl", _rw_aspl),
    MetricSpec("current_flow_closeness", _simple(spectral.current_flow_closeness)),
    MetricSpec("random_walk_betweenness", _simple(spectral.random_walk_betweenness)),
    MetricSpec("current_flow_betweenness", _simple(spectral.current_flow_betweenness)),
    MetricSpec("network_criticality", _simple(spectral.network_criticality), (U,)),
    MetricSpec("distance_strength", _geo("distance_strength"), (G,)),
    MetricSpec("outreach", _geo("outreach"), (G, W)),
    MetricSpec("geo_survivability", _geo_surv, (G,)),
    MetricSpec("pointwise_vulnerability", _pv("pointwise"), (G,)),
    MetricSpec("global_vulnerability", _pv("global"), (G,)),
    MetricSpec("vulnerability_variance", _pv("variance"), (G,)),
    MetricSpec("tggd", _tggd, (G,)),
]}

DEFAULT_METRICS = ("degree", "entropy", "assortativity", "clustering_average", "transitivity",
                   "component_count", "largest_component_fraction", "reachability", "aspl",
                   "diameter", "global_efficiency", "central_point_dominance",
                   "algebraic_connectivity", "natural_connectivity")

# (section, catalogue row, status, registry keys)
TABLE = [
    ("3.1", "Node Degree / Degree-Freq. Distr.", "implemented", ("degree",)),
    ("3.2", "Strength / Strength Distribution", "implemented", ("strength",)),
    ("3.3", "Entropy", "implemented", ("entropy",)),
    ("3.4", "Skewness", "implemented", ("skewness",)),
    ("3.5", "Vulnerability Function", "implemented", ("vulnerability_function",)),
    ("3.6", "Assortative Coefficient", "implemented", ("assortativity",)),
    ("3.7", "Average Neighbor Connectivity", "implemented", ("neighbor_connectivity",)),
    ("3.8", "Rich-Club Connectivity", "implemented", ("rich_club",)),
    ("4.1", "Clustering Coefficient", "implemented",
     ("clustering_local", "clustering_average", "transitivity", "clustering_barrat",
      "clustering_onnela", "clustering_opsahl", "clustering_by_degree")),
    ("4.2", "Edge Clustering Coefficient", "implemented", ("edge_clustering",)),
    ("4.3", "Modularity", "implemented", ("modularity",)),
    ("4.3.1", "Modularity Matrix", "implemented", ("communities_spectral",)),
    ("4.3.2", "Edge Betweenness Part. Algorithm", "implemented", ("communities_edge_betweenness",)),
    ("4.4", "Z-Score of Within Module-Degree", "implemented", ("within_module_zscore",)),
    ("4.5", "Participation Coefficient", "implemented", ("participation_coefficient",)),
    ("5.1", "Vertex-, Edge- & Cond. Connectivity", "oracle-only",
     ("vertex_connectivity", "edge_connectivity", "min_vertex_cut")),
    ("5.2", "Sparsity", "implemented", ("sparsity",)),
    ("5.3", "Cheeger Constant", "implemented", ("cheeger", "cheeger_exact")),
    ("5.4", "Minimum m-Degree", "implemented", ("min_m_degree",)),
    ("5.4.1", "Network Partitioning Algorithm", "implemented", ("partition",)),
    ("5.5", "Ratio of Disruption", "oracle-only", ("ratio_of_disruption",)),
    ("5.6", "Local Decay Resilience", "implemented", ("local_delay_resilience",)),
    ("5.7", "Toughness / Integrity / Scatt. No.", "oracle-only", ("toughness", "integrity", "scattering")),
    ("5.8", "Tenacity / Edge-T. / Mixed-T.", "oracle-only", ("tenacity", "edge_tenacity", "mixed_tenacity")),
    ("5.9", "Percolation Threshold", "implemented", ("percolation_threshold",)),
    ("5.10", "Reliability Polynomial", "implemented", ("reliability",)),
    ("5.11", "Partition Resilience Factor", "implemented", ("partition_resilience_factor",)),
    ("5.12", "Total Number of Isolated Components", "implemented", ("component_count",)),
    ("5.12", "Frac. of Nodes in Largest Component", "implemented", ("largest_component_fraction",)),
    ("5.12", "Average Size of Isolated Components", "implemented", ("mean_component_size",)),
    ("5.12", "Distr. of Component Class Frequency", "implemented", ("component_class_distribution",)),
    ("5.12", "Distr. of Rel. No. of Nodes per Class", "implemented", ("component_class_node_share",)),
    ("5.12", "Reachability", "implemented", ("reachability",)),
    ("6.1", "ASPL", "implemented", ("aspl", "aspl_giant")),
    ("6.1", "Diameter-Inverse-K", "implemented", ("dik",)),
    ("6.1", "Diameter", "implemented", ("diameter",)),
    ("6.2", "Global Network Efficiency", "implemented", ("global_efficiency",)),
    ("6.2", "Harm. Mean of Geodesic Distances", "implemented", ("harmonic_mean_distance",)),
    ("6.3", "Local Network Efficiency", "implemented", ("local_efficiency",)),
    ("6.3", "Cyclic Coefficient", "implemented", ("cyclic_coefficient",)),
    ("6.4", "Characteristic Path Length", "implemented", ("characteristic_path_length",)),
    ("6.5", "Expansion", "implemented", ("expansion",)),
    ("6.6", "Effective Eccentricity / Eff. Diameter", "implemented",
     ("effective_eccentricity", "effective_diameter")),
    ("7.1", "Betweenness Centrality, node / link", "implemented", ("betweenness", "edge_betweenness")),
    ("7.1", "AS Hegemony", "implemented", ("as_hegemony",)),
    ("7.1", "Edge Degree", "implemented", ("edge_degree",)),
    ("7.2", "Central Point Dominance", "implemented", ("central_point_dominance",)),
    ("7.3", "Effective Load", "implemented", ("effective_load",)),
    ("7.4", "Performance", "implemented", ("performance",)),
    ("7.5", "Elasticity", "implemented", ("elasticity",)),
    ("7.6", "Vulnerability Impact Factors", "implemented", ("vulnerability_impact_factors",)),
    ("7.7", "Survivability Function, Failures", "implemented", ("survivability_failures",)),
    ("8.1", "Eigenvector Centrality", "implemented", ("eigenvector_centrality",)),
    ("8.2", "Symmetry Ratio", "implemented", ("symmetry_ratio",)),
    ("8.3", "Spectral Cluster Identification", "implemented", ("spectral_clusters",)),
    ("8.4", "Algebraic Connectivity", "implemented", ("algebraic_connectivity",)),
    ("8.5", "Good Expansion", "implemented", ("good_expansion",)),
    ("8.6", "Number of Spanning Trees", "implemented", ("spanning_trees",)),
    ("8.7", "Natural Connectivity", "implemented", ("natural_connectivity",)),
    ("8.8", "Random Walk ASPL", "implemented", ("random_walk_aspl",)),
    ("8.9", "Current-Flow Closeness", "implemented", ("current_flow_closeness",)),
    ("8.10", "Random Walk Betweenness", "implemented", ("random_walk_betweenness",)),
    ("8.11", "Current-Flow Betweenness", "implemented", ("current_flow_betweenness",)),
    ("8.12", "Network Criticality", "implemented", ("network_criticality",)),
    ("9.1", "Distance Strength", "implemented", ("distance_strength",)),
    ("9.2", "Survivability Function, Geographical", "implemented", ("geo_survivability",)),
    ("9.1", "Outreach", "implemented", ("outreach",)),
    ("9.3", "Pointwise Vulnerability", "implemented", ("pointwise_vulnerability",)),
    ("9.3", "Global Vulnerability", "implemented", ("global_vulnerability",)),
    ("9.3", "Rel. Variance of Pointwise Vuln.", "implemented", ("vulnerability_variance",)),
    ("9.4", "Eff. / Total Geograph. Path Diversity", "implemented", ("tggd",)),
]

OUT_OF_SCOPE = [
    ("2.2", "multilevel_hierarchies", "Layered/multilevel graph hierarchies and multilevel reachability"),
    ("2.2", "generator_fidelity", "Topology generators beyond ER/BA/WS test graphs (KE, HOT)"),
    ("2.2", "bgp_measurement", "BGP data collection and live measurement"),
    ("2.3", "epidemics", "Network epidemics"),
    ("8.3", "traffic_matrix_svd_clusters", "Spectral cluster identification from traffic-matrix SVD"),
    ("2.3", "interacting_networks", "Robustness of interacting networks"),
]


def coverage_rows() -> list:
    """``(section, name, status, keys)`` for every catalogue row and exclusion."""
    rows = [(s, n, st, ",".join(k)) for s, n, st, k in TABLE]
    rows += [(s, f"{key}: {desc}", "out-of-scope", "-") for s, key, desc in OUT_OF_SCOPE]
    return rows


# -- evaluation ------------------------------------------------------------

def _missing(t: Topology, requires) -> str | None:
    checks = {S: t.simple, U: not t.directed, W: t.weighted, G: t.geographic, L: t.labeled,
              N: t.node_weights is not None}
    for r in requires:
        if not checks[r]:
            return REASONS[r]
    return None


def plain(x):
    """JSON-native form: str keys, lists, python scalars; NaN becomes Undefined."""
    if isinstance(x, Undefined):
        return x
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return Undefined("not a number") if math.isnan(x) else x
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _scalar_witness(w) -> dict:
    if not isinstance(w, dict):
        return {}
    ok = (int, float, str, bool, np.integer, np.floating, np.bool_, Undefined)
    return {k: plain(v) for k, v in w.items() if isinstance(k, str) and isinstance(v, ok)}


def evaluate(t: Topology, key: str, ctx: Context) -> dict:
    """One report entry; failures become tagged undefined values."""
    if key not in REGISTRY:
        raise KeyError(key)
    spec = REGISTRY[key]
    reason = _missing(t, spec.requires)
    base = {"key": key, "kind": None, "scope": None, "mode": None, "codomain": None}
    if reason:
        return {**base, "value": Undefined(reason), "incompatible": True}
    try:
        r = spec.compute(t, ctx)
    except (ValueError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        return {**base, "value": Undefined(str(exc)), "incompatible": False}
    entry = {"key": key, "kind": r.kind, "scope": r.scope, "mode": r.mode,
             "codomain": plain(list(r.codomain)), "value": plain(r.value), "incompatible": False}
    extra = _scalar_witness(r.witness)
    if extra:
        entry["witness"] = extra
    return entry


def topology_digest(t: Topology) -> dict:
    return {"v": t.v, "e": t.e, "directed": t.directed, "weighted": t.weighted,
            "geo": t.geographic, "labeled": t.labeled, "sha256": t.digest()}


@dataclass
class ReportDocument:
    topology: dict
    metrics: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    schema: str = SCHEMA

    def to_dict(self) -> dict:
        return {"schema": self.schema, "topology": self.topology, "metrics": self.metrics,
                "traces": self.traces, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(d["topology"], d["metrics"], d["traces"], d["provenance"], d["schema"])

    def dumps(self) -> str:
        return json.dumps(_tag(self.to_dict()), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ReportDocument":
        return cls.from_dict(json.loads(text, object_hook=_untag))

    def undefined_keys(self) -> list:
        return [m["key"] for m in self.metrics if _has_undefined(m["value"])]


def _has_undefined(x) -> bool:
    if isinstance(x, Undefined):
        return True
    if isinstance(x, dict):
        return any(_has_undefined(v) for v in x.values())
    if isinstance(x, list):
        return any(_has_undefined(v) for v in x)
    return False


def _tag(x):
    if isinstance(x, Undefined):
        return {"undefined": x.reason}
    if isinstance(x, float) and not math.isfinite(x):
        return {"nonfinite": "inf" if x > 0 else "-inf"}
    if isinstance(x, dict):
        return {k: _tag(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_tag(v) for v in x]
    return x


def _untag(d: dict):
    if set(d) == {"undefined"}:
        return Undefined(d["undefined"])
    if set(d) == {"nonfinite"}:
        return float(d["nonfinite"])
    return d


def trace_dict(trace, label: str) -> dict:
    return {"label": label, "entity": trace.entity, "total": trace.total,
            "baseline": plain(trace.baseline),
            "steps": [{"removed": list(s.removed), "fraction": s.fraction, "snapshot": plain(s.snapshot)}
                      for s in trace.steps],
            "summary": plain(trace.summary)}


def analyze(t: Topology, keys=None, seed: int = 0, options: dict | None = None,
            inputs: dict | None = None) -> ReportDocument:
    """Evaluate ``keys`` (default set when ``None``) in the given order."""
    keys = list(DEFAULT_METRICS if keys is None else keys)
    unknown = [k for k in keys if k not in REGISTRY]
    if unknown:
        raise KeyError(f"unknown metric key(s): {', '.join(unknown)}")
    ctx = Context(seed, dict(options or {}))
    metrics = [evaluate(t, k, ctx) for k in keys]
    prov = {"tool": "netrobust", "version": __version__, "seed": seed,
            "inputs": dict(sorted((inputs or {}).items())),
            "options": plain({k: v for k, v in (options or {}).items() if k != "events"})}
    return ReportDocument(topology_digest(t), metrics, [], prov)
