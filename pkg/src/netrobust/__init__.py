"""Topological robustness metrics, challenge simulation and reporting for Internet-like graphs."""
__version__ = "0.1.0"

from .graph import (UNREACHABLE, ComponentReport, DistanceView, MetricResult, Topology,
                    TopologyError, Undefined, build_topology, components, is_connected,
                    is_undefined, shortest_paths)
from .generators import generate
from .oracles import brute_force_oracle
from .challenge import ChallengeScenario, ChallengeTrace, run_cascade, run_challenge
from .io import ingest
from .report import ReportDocument, analyze
