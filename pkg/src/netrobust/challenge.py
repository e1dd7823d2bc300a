"""Failure, attack and cascade simulation producing metric-degradation traces.

Entities are removed one at a time (or in batches for geographic events and
cascade waves) and the tracked metrics are re-evaluated on the survivors.
Fractions and shares always refer to the original node (or edge) count.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _paths, clustering, connectivity, distance, spectral, throughput
from .graph import Topology, TopologyError, Undefined, components

STRATEGIES = ("random_failure", "targeted", "geographic", "cascade")


class ScenarioError(TopologyError):
    """Bad scenario definition or a tracked metric that became undefined."""


# -- ranking metrics -------------------------------------------------------

def _degree(t: Topology, seed) -> np.ndarray:
    deg = np.zeros(t.v)
    for a, b in t.edges:
        deg[a] += 1
        deg[b] += 1
    return deg


def _strength(t: Topology, seed) -> np.ndarray:
    s = np.zeros(t.v)
    w = t.edge_weights if t.weighted else [1.0] * t.e
    for (a, b), x in zip(t.edges, w):
        s[a] += x
        s[b] += x
    return s


def _eigen(t: Topology, seed) -> np.ndarray:
    return np.asarray(spectral.eigenvector_centrality(t).value, float)


def _efficiency(t: Topology, seed) -> np.ndarray:
    return np.asarray(distance.global_efficiency(t).witness["per_node"], float)


def _edge_cc(t: Topology, seed) -> np.ndarray:
    vals = clustering.edge_clustering_coefficient(t).value
    return np.array([np.inf if isinstance(x, Undefined) else x for x in vals], float)


# key -> (entity, scorer, descending)
RANKINGS = {
    "degree": ("node", _degree, True),
    "strength": ("node", _strength, True),
    "betweenness": ("node", lambda t, s: np.asarray(throughput.betweenness(t).value), True),
    "eigenvector": ("node", _eigen, True),
    "efficiency": ("node", _efficiency, True),
    "edge_betweenness": ("edge", lambda t, s: np.asarray(throughput.betweenness(t, "edge").value), True),
    # low edge clustering marks edges between communities, so those go first
    "edge_clustering": ("edge", _edge_cc, False),
}


# -- tracked metrics -------------------------------------------------------

def _giant(t: Topology, v0: int) -> float:
    return components(t).largest / v0 if t.v else 0.0


def _reach(t: Topology, v0: int) -> float:
    if v0 < 2:
        return 1.0
    if t.v < 2:
        return 0.0
    return connectivity.reachability(t) * t.v * (t.v - 1) / (v0 * (v0 - 1))


def _eff(t: Topology, v0: int):
    if t.v < 2:
        return 0.0
    return distance.global_efficiency(t).value * t.v * (t.v - 1) / (v0 * (v0 - 1))


def _needs(k: int, fn):
    def run(t: Topology, v0: int):
        if t.v < k:
            return Undefined(f"fewer than {k} surviving nodes")
        return fn(t)
    return run


TRACKERS = {
    "giant_fraction": _giant,
    "reachability": _reach,
    "components": lambda t, v0: components(t).count,
    "mean_component_size": lambda t, v0: float(np.mean(components(t).sizes)) if t.v else 0.0,
    "global_efficiency": _eff,
    "aspl": _needs(2, lambda t: distance.aspl(t, "finite_only").value),
    "dik": _needs(2, lambda t: distance.aspl(t, "dik").value),
    "diameter": _needs(1, lambda t: distance.diameter(t, "finite_only").value),
    "algebraic_connectivity": _needs(2, lambda t: spectral.algebraic_connectivity(t).value),
    "natural_connectivity": _needs(1, lambda t: spectral.natural_connectivity(t).value),
}


# -- scenario and trace ----------------------------------------------------

@dataclass
class ChallengeScenario:
    """What to remove, what to watch and when to look.

    ``params`` by strategy: random_failure takes ``p`` or ``count`` (and
    ``entity``); targeted takes ``metric``, ``adaptive`` and optionally
    ``fraction`` (upper bound on removals); geographic takes ``events``, a list
    of ``(region, probability)``; cascade takes ``alpha`` or ``capacities``,
    ``trigger`` and ``load`` (``"betweenness"`` or ``"effective_load"``) with ``A``.
    ``schedule`` lists removal fractions at which snapshots are taken; ``None``
    snapshots every step.
    """
    strategy: str
    params: dict = field(default_factory=dict)
    tracked: tuple = ("giant_fraction",)
    schedule: tuple | None = None
    seed: int | None = 0
    on_undefined: str = "record"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ScenarioError(f"unknown strategy {self.strategy!r}")
        bad = [k for k in self.tracked if k not in TRACKERS]
        if bad:
            raise ScenarioError(f"unknown tracked metric(s): {', '.join(bad)}")
        if self.on_undefined not in ("record", "error"):
            raise ScenarioError("on_undefined must be 'record' or 'error'")
        self.tracked = tuple(self.tracked)
        if self.schedule is not None:
            self.schedule = tuple(sorted(float(x) for x in self.schedule))


@dataclass
class StepRecord:
    removed: tuple
    fraction: float
    snapshot: dict


@dataclass
class ChallengeTrace:
    entity: str
    total: int
    baseline: dict
    steps: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def curve(self, key: str) -> list:
        """``(fraction_removed, value)`` rows, baseline first, snapshot steps only."""
        rows = [(0.0, self.baseline[key])]
        rows += [(s.fraction, s.snapshot[key]) for s in self.steps if key in s.snapshot]
        return rows

    @property
    def removal_order(self) -> list:
        return [x for s in self.steps for x in s.removed]

    def first_fraction_below(self, key: str, level: float):
        """Smallest removal fraction at which ``key`` is at or below ``level``."""
        for f, x in self.curve(key):
            if not isinstance(x, Undefined) and x <= level:
                return f
        return None


class _State:
    """Surviving nodes or edges of one run plus the snapshot bookkeeping."""

    def __init__(self, t: Topology, scenario: ChallengeScenario, entity: str):
        self.t, self.sc, self.entity = t, scenario, entity
        self.total = t.v if entity == "node" else t.e
        self.alive = np.ones(self.total, bool)
        self.trace = ChallengeTrace(entity, self.total, self.measure())
        self.pending = list(scenario.schedule) if scenario.schedule is not None else None

    def survivor(self) -> Topology:
        if self.entity == "node":
            return self.t.induced(np.flatnonzero(self.alive))
        return self.t.without_edges(np.flatnonzero(~self.alive))

    def measure(self) -> dict:
        sub = self.survivor()
        out = {}
        for k in self.sc.tracked:
            val = TRACKERS[k](sub, self.t.v)
            if isinstance(val, Undefined) and self.sc.on_undefined == "error":
                raise ScenarioError(f"tracked metric {k} undefined: {val.reason}")
            out[k] = val if isinstance(val, Undefined) else float(val)
        return out

    def remove(self, batch) -> None:
        batch = tuple(int(x) for x in batch if self.alive[x])
        if not batch:
            return
        self.alive[list(batch)] = False
        frac = float((~self.alive).sum() / self.total)
        due = self.pending is None
        if self.pending is not None:
            while self.pending and self.pending[0] <= frac + 1e-12:
                self.pending.pop(0)
                due = True
        self.trace.steps.append(StepRecord(batch, frac, self.measure() if due else {}))

    def finish(self, **extra) -> ChallengeTrace:
        self.trace.summary = {"removed": int((~self.alive).sum()),
                              "fraction_removed": float((~self.alive).sum() / max(self.total, 1)),
                              "final": self.measure(), **extra}
        return self.trace


def _count(params: dict, total: int) -> int:
    if "count" in params:
        n = int(params["count"])
    else:
        p = float(params.get("p", params.get("fraction", 1.0)))
        if not 0 <= p <= 1:
            raise ScenarioError("removal fraction must lie in [0, 1]")
        n = int(round(p * total))
    if not 0 <= n <= total:
        raise ScenarioError("removal count out of range")
    return n


def _ranked(scores: np.ndarray, ids: np.ndarray, descending: bool) -> np.ndarray:
    """Entity ids by score, ties to the lowest id."""
    key = -scores if descending else scores
    return ids[np.lexsort((ids, key))]


def _targeted(state: _State, params: dict) -> None:
    metric = params.get("metric", "degree")
    if metric not in RANKINGS:
        raise ScenarioError(f"unknown ranking metric {metric!r}")
    _, score, desc = RANKINGS[metric]
    desc = params.get("descending", desc)
    n = _count(params, state.total)
    seed = state.sc.seed
    if not params.get("adaptive", True):
        order = _ranked(score(state.t, seed), np.arange(state.total), desc)
        for x in order[:n]:
            state.remove([x])
        return
    for _ in range(n):
        ids = np.flatnonzero(state.alive)
        if not len(ids):
            break
        sub = state.survivor()  # survivors keep ascending id order
        state.remove([_ranked(score(sub, seed), ids, desc)[0]])


def run_challenge(t: Topology, scenario: ChallengeScenario) -> ChallengeTrace:
    """Apply a failure, attack or geographic scenario and record degradation."""
    if scenario.strategy == "cascade":
        p = scenario.params
        return run_cascade(t, alpha=p.get("alpha"), capacities=p.get("capacities"),
                           trigger=p.get("trigger"), load=p.get("load", "betweenness"),
                           A=p.get("A", 1.0), tracked=scenario.tracked, seed=scenario.seed)
    params = scenario.params
    rng = np.random.default_rng(scenario.seed)
    if scenario.strategy == "targeted":
        metric = params.get("metric", "degree")
        entity = RANKINGS[metric][0] if metric in RANKINGS else "node"
    else:
        entity = params.get("entity", "node")
    if entity not in ("node", "edge"):
        raise ScenarioError("entity must be 'node' or 'edge'")
    state = _State(t, scenario, entity)
    if scenario.strategy == "random_failure":
        n = _count(params, state.total)
        for x in rng.permutation(state.total)[:n]:
            state.remove([x])
    elif scenario.strategy == "targeted":
        _targeted(state, params)
    else:
        if entity != "node":
            raise ScenarioError("geographic events remove nodes")
        hit = []
        for region, prob in params.get("events", []):
            if rng.random() < prob:
                hit.append(True)
                state.remove(np.flatnonzero(region.contains(t)))
            else:
                hit.append(False)
        return state.finish(events_occurred=hit)
    return state.finish()


# -- overload cascades -----------------------------------------------------

def _loads(t: Topology, alive: np.ndarray, load: str, A: float, seed) -> np.ndarray:
    if load == "betweenness":
        node, _ = _paths.brandes(t, node_alive=alive)
        return node / 2 if not t.directed else node
    if load == "effective_load":
        return np.asarray(throughput.effective_load(t, A, seed=seed, node_alive=alive).mean_node)
    raise ScenarioError(f"unknown load metric {load!r}")


def run_cascade(t: Topology, alpha: float | None = None, capacities=None, trigger=None,
                load: str = "betweenness", A: float = 1.0, tracked=("giant_fraction",),
                seed=0) -> ChallengeTrace:
    """Motter-Lai style overload cascade after removing ``trigger``.

    Capacities are ``(1 + alpha)`` times the intact loads unless given
    explicitly. Each wave recomputes loads on the survivors and removes every
    overloaded node at once; the run stops at the first wave with no overload.
    The default trigger is the most loaded node (lowest id on ties).
    """
    base = _loads(t, np.ones(t.v, bool), load, A, seed)
    if capacities is None:
        if alpha is None:
            raise ScenarioError("give alpha or explicit capacities")
        if alpha < 0:
            raise ScenarioError("alpha must be non-negative")
        cap = (1.0 + alpha) * base
    else:
        cap = np.asarray(capacities, float)
        if cap.shape != (t.v,):
            raise ScenarioError("one capacity per node required")
    tol = 1e-9 * max(1.0, float(base.max(initial=0.0)))
    if np.any(base > cap + tol):
        raise ScenarioError("baseline overload: intact loads exceed capacities")
    if trigger is None:
        trigger = int(_ranked(base, np.arange(t.v), True)[0])
    if not 0 <= trigger < t.v:
        raise ScenarioError("trigger out of range")
    state = _State(t, ChallengeScenario("cascade", tracked=tracked, seed=seed), "node")
    state.remove([trigger])
    waves = []
    while True:
        cur = _loads(t, state.alive, load, A, seed)
        over = np.flatnonzero(state.alive & (cur > cap + tol))
        if not len(over):
            break
        waves.append(len(over))
        state.remove(over)
    size = int(sum(waves))
    trace = state.finish(trigger=trigger, avalanche=size, waves=waves)
    return trace
