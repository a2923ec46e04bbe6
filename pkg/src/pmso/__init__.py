"""PMSO swarm optimizer, benchmark testbed and solar array reconfiguration."""

from .geometry import Bounds, compose_wave, direction_angles, euclidean_distance
from .optimizer import RunResult, SwarmConfig, run
from .solar import DiscreteConfig, PVParams, baseline_tct, brute_force_best, run_discrete_pmso, short_wide_shadow
from .testbed import make_spec, make_suite

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "DiscreteConfig",
    "PVParams",
    "RunResult",
    "SwarmConfig",
    "baseline_tct",
    "brute_force_best",
    "compose_wave",
    "direction_angles",
    "euclidean_distance",
    "make_spec",
    "make_suite",
    "run",
    "run_discrete_pmso",
    "short_wide_shadow",
]
