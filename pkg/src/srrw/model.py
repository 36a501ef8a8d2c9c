"""Step distributions, model parameters and linear-algebra reductions.

Everything downstream (walk engine, forest construction, diagnostics)
consumes the types defined here.  A ``StepDistribution`` carries declared
moment metadata next to its sampler so that experiments can assert which
moment assumptions a run exercises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "StepDistribution",
    "ModelParams",
    "WhiteningMap",
    "erw_alpha",
    "erw_memory_p",
    "erw_step_probability",
    "whitening_map",
    "genuine_dimension",
    "sample_step",
    "parse_distribution",
    "DistributionSpecError",
]

_PROB_TOL = 1e-12
_RANK_TOL = 1e-9


class DistributionSpecError(ValueError):
    """Malformed distribution specification string."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"at position {position}: {message}"
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class StepDistribution:
    """A sampleable step law on R^d with declared moment/tail metadata.

    ``moment_order`` is the largest s such that E||X||^s < inf is declared
    finite (``inf`` for bounded or gaussian laws; equals the tail index,
    exclusive, for the symmetric Pareto family).
    """

    kind: str
    d: int
    mean: np.ndarray
    moment_order: float
    support: np.ndarray | None = None       # (k, d) for discrete kinds
    probs: np.ndarray | None = None         # (k,) for discrete kinds
    tail_index: float | None = None         # symmetric-pareto only
    scale: float | None = None              # symmetric-pareto only

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        if self.d < 1:
            raise ValueError("dimension must be a positive integer")
        if self.mean.shape != (self.d,):
            raise ValueError(f"mean must have shape ({self.d},)")
        if self.support is not None:
            support = np.asarray(self.support, dtype=float)
            probs = np.asarray(self.probs, dtype=float)
            object.__setattr__(self, "support", support)
            object.__setattr__(self, "probs", probs)
            if support.ndim != 2 or support.shape[1] != self.d:
                raise ValueError("support must be a (k, d) array")
            if probs.shape != (support.shape[0],):
                raise ValueError("probs must match the support length")
            if np.any(probs < 0):
                raise ValueError("probabilities must be nonnegative")
            if abs(probs.sum() - 1.0) > _PROB_TOL:
                raise ValueError(
                    f"probabilities sum to {probs.sum():.17g}, not 1"
                )
            # Dirac mass at 0 is excluded by standing assumption.
            norms = np.linalg.norm(support, axis=1)
            if np.all(norms[probs > 0] == 0.0):
                raise ValueError("distribution must not be the Dirac mass at 0")

    @property
    def is_discrete(self) -> bool:
        return self.support is not None

    @property
    def is_mean_zero(self) -> bool:
        return bool(np.all(self.mean == 0.0))

    def covariance(self) -> np.ndarray:
        """Exact covariance E[X X^T] (requires moment_order > 2 or bounded law)."""
        if self.kind == "gaussian-standard":
            return np.eye(self.d)
        if self.is_discrete:
            return np.einsum("k,ki,kj->ij", self.probs, self.support, self.support)
        if self.kind == "symmetric-pareto":
            a, scale = self.tail_index, self.scale
            if a <= 2:
                raise ValueError(
                    f"second moment infinite for tail index a={a} <= 2"
                )
            # E|X|^2 = a scale^2 / (a - 2) for survival (x/scale)^-a.
            return np.array([[a * scale**2 / (a - 2.0)]])
        raise ValueError(f"no covariance rule for kind {self.kind!r}")

    def second_moment(self) -> float:
        """E||X||^2, exact."""
        return float(np.trace(self.covariance()))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. steps as a (size, d) array."""
        if self.is_discrete:
            idx = rng.choice(len(self.probs), size=size, p=self.probs)
            return self.support[idx]
        if self.kind == "gaussian-standard":
            return rng.standard_normal((size, self.d))
        if self.kind == "symmetric-pareto":
            sign = rng.integers(0, 2, size=size) * 2 - 1
            mag = self.scale * rng.random(size) ** (-1.0 / self.tail_index)
            return (sign * mag)[:, None]
        raise ValueError(f"no sampler for kind {self.kind!r}")

    def self_check(self, rng: np.random.Generator, n: int = 100_000) -> None:
        """Cheap validation of the declared mean against an empirical one.

        Raises if any coordinate of the empirical mean deviates from the
        declared mean by more than 5 standard errors.  Skipped when the
        declared moment order does not cover the variance.
        """
        if self.moment_order <= 2:
            return
        draws = self.sample(rng, n)
        emp_mean = draws.mean(axis=0)
        se = draws.std(axis=0, ddof=1) / math.sqrt(n)
        se = np.maximum(se, 1e-300)
        worst = np.max(np.abs(emp_mean - self.mean) / se)
        if worst > 5.0:
            raise ValueError(
                f"declared mean fails self-test: {worst:.2f} standard errors off"
            )

    def descriptor(self) -> str:
        """Canonical one-line description (used in output metadata)."""
        if self.kind == "gaussian-standard":
            return f"gaussian(d={self.d})"
        if self.kind == "rademacher-1d":
            return "rademacher"
        if self.kind == "symmetric-pareto":
            return f"pareto(a={self.tail_index:g}, scale={self.scale:g})"
        if self.kind == "uniform-directions":
            pts = ",".join(
                "(" + ",".join(f"{c:g}" for c in v) + ")" for v in self.support
            )
            return f"directions[{pts}]"
        pts = ",".join(
            "(" + ",".join(f"{c:g}" for c in v) + f"):{p:g}"
            for v, p in zip(self.support, self.probs)
        )
        return f"discrete[{pts}]"


def rademacher() -> StepDistribution:
    """Steps +-1 with probability 1/2 each."""
    return StepDistribution(
        kind="rademacher-1d",
        d=1,
        mean=np.zeros(1),
        moment_order=math.inf,
        support=np.array([[1.0], [-1.0]]),
        probs=np.array([0.5, 0.5]),
    )


def gaussian(d: int) -> StepDistribution:
    return StepDistribution(
        kind="gaussian-standard", d=d, mean=np.zeros(d), moment_order=math.inf
    )


def uniform_directions(directions) -> StepDistribution:
    directions = np.asarray(directions, dtype=float)
    k, d = directions.shape
    probs = np.full(k, 1.0 / k)
    mean = directions.mean(axis=0)
    if np.max(np.abs(mean)) < 1e-14:
        mean = np.zeros(d)
    return StepDistribution(
        kind="uniform-directions",
        d=d,
        mean=mean,
        moment_order=math.inf,
        support=directions,
        probs=probs,
    )


def discrete(support, probs) -> StepDistribution:
    support = np.atleast_2d(np.asarray(support, dtype=float))
    probs = np.asarray(probs, dtype=float)
    mean = probs @ support
    if np.max(np.abs(mean)) < 1e-14:
        mean = np.zeros(support.shape[1])
    return StepDistribution(
        kind="discrete",
        d=support.shape[1],
        mean=mean,
        moment_order=math.inf,
        support=support,
        probs=probs,
    )


def symmetric_pareto(a: float, scale: float = 1.0) -> StepDistribution:
    """Symmetric heavy-tailed law: sign +-1, |X| with survival (x/scale)^-a."""
    if a <= 1.0:
        raise ValueError("tail index must exceed 1 (integrable steps)")
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    return StepDistribution(
        kind="symmetric-pareto",
        d=1,
        mean=np.zeros(1),
        moment_order=a,
        tail_index=a,
        scale=scale,
    )


@dataclass(frozen=True)
class ModelParams:
    """Reinforcement parameter and ambient dimension."""

    alpha: float
    d: int

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.d < 1:
            raise ValueError("dimension must be positive")


@dataclass(frozen=True)
class WhiteningMap:
    """Symmetric positive-definite T with T Cov T = I."""

    matrix: np.ndarray
    covariance: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Whiten positions or steps; x has shape (..., d)."""
        return x @ self.matrix.T


def erw_alpha(p: float, k: int) -> float:
    """Map a memory parameter p on k directions to the reinforcement parameter.

    alpha = (k p - 1) / (k - 1).  Memory below 1/k would mean negative
    reinforcement and is rejected.
    """
    if k < 2:
        raise ValueError("need at least 2 directions")
    if not 1.0 / k <= p <= 1.0:
        raise ValueError(
            f"memory parameter p={p} outside [1/{k}, 1]; "
            "negative reinforcement is not supported"
        )
    return (k * p - 1.0) / (k - 1.0)


def erw_memory_p(alpha: float, k: int) -> float:
    """Inverse of erw_alpha: p = ((k-1) alpha + 1) / k."""
    if k < 2:
        raise ValueError("need at least 2 directions")
    return ((k - 1.0) * alpha + 1.0) / k


def erw_step_probability(counts, n: int, alpha: float, k: int) -> np.ndarray:
    """Conditional law of the next direction given per-direction counts.

    P(v) = alpha * N_n(v)/n + (1 - alpha)/k.  ``counts`` is a length-k
    array (or mapping values) of direction counts summing to n.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (k,):
        raise ValueError(f"expected {k} direction counts")
    if n < 1:
        raise ValueError("n must be >= 1")
    if counts.sum() != n:
        raise ValueError(f"counts sum to {counts.sum():g}, expected n={n}")
    p = alpha * counts / n + (1.0 - alpha) / k
    return p


def whitening_map(dist: StepDistribution) -> WhiteningMap:
    """Inverse square root of the step covariance.

    Raises if the covariance is singular; reduce with genuine_dimension
    first in that case.
    """
    cov = dist.covariance()
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[0] <= _RANK_TOL * eigvals[-1]:
        raise ValueError(
            "covariance is singular; project with genuine_dimension before whitening"
        )
    inv_sqrt = (eigvecs * (1.0 / np.sqrt(eigvals))) @ eigvecs.T
    return WhiteningMap(matrix=inv_sqrt, covariance=cov)


def genuine_dimension(dist: StepDistribution):
    """Rank of the step covariance and the projector onto the support span.

    Returns ``(k, g)`` where g(x) = (A^T A)^{-1} A^T x for an orthonormal
    basis matrix A of the span, so x = A g(x) for all support points.
    """
    cov = dist.covariance()
    eigvals, eigvecs = np.linalg.eigh(cov)
    mask = eigvals > _RANK_TOL * max(eigvals[-1], 0.0)
    k = int(mask.sum())
    basis = eigvecs[:, mask]  # (d, k), orthonormal columns

    def project(x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ basis

    project.basis = basis
    return k, project


def sample_step(dist: StepDistribution, rng: np.random.Generator) -> np.ndarray:
    """One independent draw from the step law."""
    return dist.sample(rng, 1)[0]


# ---------------------------------------------------------------------------
# Distribution specification grammar
#
#   spec        := name | name "(" kwargs ")" | name "[" vectors "]"
#   name        := "rademacher" | "gaussian" | "pareto" | "directions" | "discrete"
#   kwargs      := key "=" number { "," key "=" number }
#   vectors     := vector { "," vector }          (directions)
#   vector      := "(" number { "," number } ")"
#   discrete entries:  vector ":" weight
#
# Examples:  "pareto(a=1.5, scale=1.0)"
#            "directions[(2,0),(-2,0),(1,1.7320508),(-1,-1.7320508)]"
#            "discrete[(1,0):0.5,(-1,0):0.5]"


class _SpecReader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> DistributionSpecError:
        return DistributionSpecError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def read_name(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_-"
        ):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a distribution name")
        return self.text[start : self.pos]

    def read_number(self) -> float:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isdigit() or self.text[self.pos] in "+-.eE"
        ):
            self.pos += 1
        token = self.text[start : self.pos]
        try:
            return float(token)
        except ValueError:
            self.pos = start
            raise self.error(f"expected a number, got {token!r}")

    def read_vector(self) -> list:
        self.expect("(")
        coords = [self.read_number()]
        while self.peek() == ",":
            self.pos += 1
            coords.append(self.read_number())
        self.expect(")")
        return coords

    def read_kwargs(self) -> dict:
        self.expect("(")
        kwargs = {}
        while True:
            key = self.read_name()
            self.expect("=")
            kwargs[key] = self.read_number()
            if self.peek() != ",":
                break
            self.pos += 1
        self.expect(")")
        return kwargs

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def parse_distribution(spec: str) -> StepDistribution:
    """Parse a distribution specification string.

    Rejects malformed input with a position-annotated
    ``DistributionSpecError``.
    """
    reader = _SpecReader(spec)
    name = reader.read_name()

    if name == "rademacher":
        dist = rademacher()
    elif name == "gaussian":
        kwargs = reader.read_kwargs() if reader.peek() == "(" else {"d": 1}
        d = kwargs.pop("d", 1)
        if kwargs:
            raise reader.error(f"unknown gaussian parameters {sorted(kwargs)}")
        if d != int(d) or d < 1:
            raise reader.error(f"gaussian dimension must be a positive integer, got {d}")
        dist = gaussian(int(d))
    elif name == "pareto":
        kwargs = reader.read_kwargs()
        a = kwargs.pop("a", None)
        scale = kwargs.pop("scale", 1.0)
        if a is None:
            raise reader.error("pareto requires a tail index, e.g. pareto(a=1.5)")
        if kwargs:
            raise reader.error(f"unknown pareto parameters {sorted(kwargs)}")
        try:
            dist = symmetric_pareto(a, scale)
        except ValueError as exc:
            raise reader.error(str(exc))
    elif name == "directions":
        reader.expect("[")
        vectors = [reader.read_vector()]
        while reader.peek() == ",":
            reader.pos += 1
            vectors.append(reader.read_vector())
        reader.expect("]")
        lengths = {len(v) for v in vectors}
        if len(lengths) != 1:
            raise reader.error("direction vectors must share one dimension")
        dist = uniform_directions(vectors)
    elif name == "discrete":
        reader.expect("[")
        vectors, weights = [], []
        while True:
            vectors.append(reader.read_vector())
            reader.expect(":")
            weights.append(reader.read_number())
            if reader.peek() != ",":
                break
            reader.pos += 1
        reader.expect("]")
        lengths = {len(v) for v in vectors}
        if len(lengths) != 1:
            raise reader.error("support vectors must share one dimension")
        try:
            dist = discrete(vectors, weights)
        except ValueError as exc:
            raise reader.error(str(exc))
    else:
        raise reader.error(f"unknown distribution {name!r}")

    if not reader.at_end():
        raise reader.error("trailing input after distribution specification")
    return dist
