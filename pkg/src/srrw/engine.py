"""Trajectory generation by the direct recursive construction.

A walk either copies a uniformly chosen past step (probability alpha) or
takes a fresh draw from the step law.  Two simulator modes exist:

* full mode keeps every step and literally replays the two-stage
  copy-or-fresh recursion;
* counts mode (discrete laws only) tracks per-support-point counts and
  draws each step from the single collapsed categorical law
  P(v) = alpha N(v)/n + (1-alpha) p(v).

Both produce the same step-sequence law; the equivalence is itself a test
target.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import ModelParams, StepDistribution
from .rng import selection_rng_pair

__all__ = [
    "CheckpointSchedule",
    "WalkConfig",
    "WalkState",
    "Trajectory",
    "CheckpointSeries",
    "step",
    "run_walk",
    "exact_small_n_pmf",
    "write_trajectory",
    "read_trajectory",
]

_COUNTS_MODE_MAX_SUPPORT = 64


@dataclass(frozen=True)
class CheckpointSchedule:
    """Geometric checkpoint times: start, start*ratio, ... capped at horizon."""

    start: int = 64
    ratio: float = 2.0

    def __post_init__(self):
        if self.start < 1:
            raise ValueError("checkpoint start must be >= 1")
        if self.ratio <= 1.0:
            raise ValueError("checkpoint ratio must exceed 1")

    def times(self, horizon: int) -> np.ndarray:
        ts = []
        t = float(self.start)
        while t <= horizon:
            it = int(round(t))
            if not ts or it > ts[-1]:
                ts.append(it)
            t *= self.ratio
        if not ts or ts[-1] != horizon:
            ts.append(horizon)
        return np.array([t for t in ts if t <= horizon], dtype=np.int64)


@dataclass(frozen=True)
class WalkConfig:
    """Everything that determines one replica."""

    params: ModelParams
    dist: StepDistribution
    horizon: int
    seed: int
    checkpoints: CheckpointSchedule = field(default_factory=CheckpointSchedule)
    mode: str = "auto"  # full | counts | auto
    keep_trajectory: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.mode not in ("full", "counts", "auto"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "counts" and not self.dist.is_discrete:
            raise ValueError("counts mode requires a discrete distribution")
        if self.params.d != self.dist.d:
            raise ValueError("params.d and dist.d disagree")

    def resolved_mode(self) -> str:
        if self.mode != "auto":
            return self.mode
        if self.dist.is_discrete and len(self.dist.probs) <= _COUNTS_MODE_MAX_SUPPORT:
            return "counts"
        return "full"


@dataclass
class WalkState:
    """Mutable single-walk state for step-by-step simulation (full mode)."""

    params: ModelParams
    dist: StepDistribution
    history: list
    rng: np.random.Generator

    @classmethod
    def start(cls, params, dist, rng) -> "WalkState":
        first = dist.sample(rng, 1)[0]
        return cls(params=params, dist=dist, history=[first], rng=rng)

    @property
    def n(self) -> int:
        return len(self.history)

    @property
    def position(self) -> np.ndarray:
        return np.sum(self.history, axis=0)


def step(state: WalkState) -> WalkState:
    """Advance one step: copy a uniform past step w.p. alpha, else fresh draw."""
    rng = state.rng
    if rng.random() < state.params.alpha:
        j = int(rng.integers(0, state.n))
        nxt = state.history[j]
    else:
        nxt = state.dist.sample(rng, 1)[0]
    state.history.append(nxt)
    return state


@dataclass
class Trajectory:
    """Steps and positions of one replica, retained in memory."""

    steps: np.ndarray      # (n, d)
    positions: np.ndarray  # (n, d)
    config: WalkConfig

    @property
    def n(self) -> int:
        return self.steps.shape[0]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.positions, axis=1)


@dataclass
class CheckpointSeries:
    """Per-replica observations at geometric checkpoint times."""

    ns: np.ndarray                 # (m,)
    positions: np.ndarray          # (m, d)
    norms: np.ndarray              # (m,)
    running_max_norm: np.ndarray   # (m,)
    observables: dict = field(default_factory=dict)
    overflow: bool = False
    trajectory: Trajectory | None = None

    def __post_init__(self):
        if not np.all(np.diff(self.ns) > 0):
            raise ValueError("checkpoint times must be strictly increasing")


def _simulate_steps(config: WalkConfig) -> np.ndarray:
    sel_rng, fresh_rng = selection_rng_pair(config.seed)
    n = config.horizon
    if config.resolved_mode() == "counts":
        idx = _kernels.assemble_counts_walk(
            sel_rng,
            np.ascontiguousarray(config.dist.support),
            np.ascontiguousarray(config.dist.probs),
            n,
            config.params.alpha,
        )
        return config.dist.support[idx]
    fresh = config.dist.sample(fresh_rng, n)
    return _kernels.assemble_walk(sel_rng, np.ascontiguousarray(fresh), config.params.alpha)


def run_walk(config: WalkConfig, observers: dict | None = None) -> CheckpointSeries:
    """Simulate one replica; a fixed seed gives a bit-identical result.

    ``observers`` maps names to callables ``f(ns, steps, positions)``
    returning one value per checkpoint; results land in
    ``CheckpointSeries.observables``.
    """
    steps = _simulate_steps(config)
    positions = np.cumsum(steps, axis=0)
    norms = np.linalg.norm(positions, axis=1)

    ns = config.checkpoints.times(config.horizon)
    idx = ns - 1
    running_max = np.maximum.accumulate(norms)

    overflow = not np.all(np.isfinite(norms))
    if overflow:
        bad = int(np.argmax(~np.isfinite(norms)))
        ns = ns[idx < bad]
        idx = idx[: len(ns)]

    series = CheckpointSeries(
        ns=ns,
        positions=positions[idx],
        norms=norms[idx],
        running_max_norm=running_max[idx],
        overflow=overflow,
    )
    for name, fn in (observers or {}).items():
        series.observables[name] = np.asarray(fn(ns, steps, positions))
    if config.keep_trajectory:
        series.trajectory = Trajectory(steps=steps, positions=positions, config=config)
    return series


def exact_small_n_pmf(dist: StepDistribution, alpha: float, n: int) -> dict:
    """Exact pmf of S_n by enumeration over count states.

    The conditional step law depends on the history only through the
    per-support-point counts, so the enumeration runs over count vectors
    with exact probability weights.  Positions are returned as coordinate
    tuples; weights sum to 1 within 1e-12.
    """
    if not dist.is_discrete:
        raise ValueError("exact enumeration needs a discrete distribution")
    k = len(dist.probs)
    if n > 8 or k > 4:
        raise ValueError(f"instance too large for enumeration (n={n}, support={k})")

    probs = dist.probs
    states = {tuple(int(i == v) for i in range(k)): probs[v] for v in range(k) if probs[v] > 0}
    for m in range(1, n):
        nxt: dict = {}
        for counts, w in states.items():
            for v in range(k):
                p = alpha * counts[v] / m + (1.0 - alpha) * probs[v]
                if p <= 0.0:
                    continue
                upd = list(counts)
                upd[v] += 1
                key = tuple(upd)
                nxt[key] = nxt.get(key, 0.0) + w * p
        states = nxt

    pmf: dict = {}
    for counts, w in states.items():
        pos = tuple(np.round(np.array(counts) @ dist.support, 12))
        pmf[pos] = pmf.get(pos, 0.0) + w
    total = sum(pmf.values())
    if abs(total - 1.0) > 1e-12:
        raise AssertionError(f"enumeration weights sum to {total!r}")
    return pmf


# --- binary trajectory dump -------------------------------------------------
#
# Layout (all little-endian):
#   8 bytes   magic b"SRRWTRJ\x00"
#   u32       format version (1)
#   u32       dimension d
#   f64       alpha
#   u64       seed entropy (0 when the seed is not a plain integer)
#   u64       step count n
#   u32       descriptor byte length, then that many UTF-8 bytes
#   n * d     f64 step coordinates, row-major

_TRAJ_MAGIC = b"SRRWTRJ\x00"
_TRAJ_VERSION = 1


def write_trajectory(path, trajectory: Trajectory) -> None:
    import struct

    cfg = trajectory.config
    desc = cfg.dist.descriptor().encode("utf-8")
    seed = cfg.seed if isinstance(cfg.seed, int) else 0
    with open(path, "wb") as fh:
        fh.write(_TRAJ_MAGIC)
        fh.write(struct.pack("<IId", _TRAJ_VERSION, cfg.dist.d, cfg.params.alpha))
        fh.write(struct.pack("<QQ", seed, trajectory.n))
        fh.write(struct.pack("<I", len(desc)))
        fh.write(desc)
        fh.write(np.ascontiguousarray(trajectory.steps, dtype="<f8").tobytes())


def read_trajectory(path):
    """Return (steps, header dict) from a binary trajectory dump."""
    import struct

    with open(path, "rb") as fh:
        if fh.read(8) != _TRAJ_MAGIC:
            raise ValueError("not a trajectory dump")
        version, d, alpha = struct.unpack("<IId", fh.read(16))
        if version != _TRAJ_VERSION:
            raise ValueError(f"unsupported trajectory format version {version}")
        seed, n = struct.unpack("<QQ", fh.read(16))
        (dlen,) = struct.unpack("<I", fh.read(4))
        descriptor = fh.read(dlen).decode("utf-8")
        steps = np.frombuffer(fh.read(8 * n * d), dtype="<f8").reshape(n, d).copy()
    header = {
        "version": version,
        "d": d,
        "alpha": alpha,
        "seed": seed,
        "n": n,
        "descriptor": descriptor,
    }
    return steps, header
