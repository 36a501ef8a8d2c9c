"""Simulation and statistical verification toolkit for step-reinforced random walks.

Two equivalent samplers (direct recursion; random recursive forest with
Bernoulli edge retention and i.i.d. spins), diagnostic functionals for the
phase transition at alpha = 1/2, and numerical certification of the drift
inequalities behind the recurrence/transience results.
"""

from __future__ import annotations

__version__ = "1.0.0"

from .model import (
    DistributionSpecError,
    ModelParams,
    StepDistribution,
    WhiteningMap,
    discrete,
    erw_alpha,
    erw_memory_p,
    erw_step_probability,
    gaussian,
    genuine_dimension,
    parse_distribution,
    rademacher,
    symmetric_pareto,
    uniform_directions,
    whitening_map,
)
from .engine import (
    CheckpointSchedule,
    CheckpointSeries,
    Trajectory,
    WalkConfig,
    WalkState,
    exact_small_n_pmf,
    run_walk,
    step,
)
from .forest import (
    Forest,
    SpinAssignment,
    cluster_size_trace,
    estimate_W,
    forest_small_n_pmf,
    grow_forest,
    read_forest,
    walk_from_forest,
    write_forest,
)
from .rng import RNG_IDENTITY, generator, replica_seed, selection_rng_pair

__all__ = [
    "__version__",
    "DistributionSpecError",
    "ModelParams",
    "StepDistribution",
    "WhiteningMap",
    "discrete",
    "erw_alpha",
    "erw_memory_p",
    "erw_step_probability",
    "gaussian",
    "genuine_dimension",
    "parse_distribution",
    "rademacher",
    "symmetric_pareto",
    "uniform_directions",
    "whitening_map",
    "CheckpointSchedule",
    "CheckpointSeries",
    "Trajectory",
    "WalkConfig",
    "WalkState",
    "exact_small_n_pmf",
    "run_walk",
    "step",
    "Forest",
    "SpinAssignment",
    "cluster_size_trace",
    "estimate_W",
    "forest_small_n_pmf",
    "grow_forest",
    "read_forest",
    "walk_from_forest",
    "write_forest",
    "RNG_IDENTITY",
    "generator",
    "replica_seed",
    "selection_rng_pair",
]
