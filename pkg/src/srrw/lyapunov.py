"""Numerical certification of the deterministic Taylor-drift inequalities.

Three piecewise Lyapunov functions drive the recurrence and transience
arguments: L(x) = sqrt(|x|) in dimension 1, f(x) = sqrt(log ||x||) in
dimension 2, and h(x) = ||x||^(-delta/4) in dimension >= 3.  Each comes
with a pointwise inequality bounding the increment along a displacement y
by an explicit quadratic form; this module samples the inequalities
adversarially, reports worst violations, and searches for admissible
constants.

The inverse-power bound is certified with prefactor exponent
2 + delta/4 on ||x||.  The alternative exponent 2 + delta/2 fails at
first order in y (the increment of ||x||^(-delta/4) along -x scales as
||x||^(-(2 + delta/4)) x.y, which dominates any candidate bound carrying
the extra ||x||^(delta/4) decay, with no quadratic term to rescue it), so
no finite constants certify it; see the fail-closed behavior of
``check_h_inequality(exponent_offset="half")``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LyapunovFn",
    "CertificationResult",
    "sqrt_abs",
    "sqrt_log",
    "inverse_power",
    "taylor_radius",
    "check_L_inequality",
    "check_f_inequalities",
    "check_h_inequality",
    "find_constants",
]

NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class LyapunovFn:
    """A piecewise Lyapunov function with its applicability dimension."""

    kind: str  # sqrt-abs | sqrt-log | inverse-power
    d: int
    delta: float | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "sqrt-abs":
            return np.sqrt(np.abs(x))
        norms = np.linalg.norm(np.atleast_2d(x), axis=-1)
        if self.kind == "sqrt-log":
            return np.where(norms >= 1.0, np.sqrt(np.log(np.maximum(norms, 1.0))), 0.0)
        if self.kind == "inverse-power":
            return np.where(
                norms >= 1.0, np.maximum(norms, 1.0) ** (-self.delta / 4.0), 1.0
            )
        raise ValueError(f"unknown kind {self.kind!r}")


def sqrt_abs() -> LyapunovFn:
    return LyapunovFn(kind="sqrt-abs", d=1)


def sqrt_log() -> LyapunovFn:
    return LyapunovFn(kind="sqrt-log", d=2)


def inverse_power(delta: float, d: int = 3) -> LyapunovFn:
    if delta <= 0:
        raise ValueError("delta must be positive")
    if d < 3:
        raise ValueError("inverse-power certification targets d >= 3")
    return LyapunovFn(kind="inverse-power", d=d, delta=delta)


@dataclass
class CertificationResult:
    """Outcome of sampling one inequality at fixed constants."""

    inequality: str
    constants: dict
    n_samples: int
    seed: int
    max_violation: float      # max over samples of LHS - RHS (signed slack)
    worst_x: np.ndarray
    worst_y: np.ndarray
    passed: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "srrw-certification-v1",
                "inequality": self.inequality,
                "constants": {k: float(v) for k, v in self.constants.items()},
                "n_samples": self.n_samples,
                "seed": self.seed,
                "max_violation": float(self.max_violation),
                "worst_x": np.atleast_1d(self.worst_x).tolist(),
                "worst_y": np.atleast_1d(self.worst_y).tolist(),
                "passed": bool(self.passed),
            },
            indent=2,
            sort_keys=True,
        )


def taylor_radius(tol: float = 1e-12) -> float:
    """Largest epsilon with sqrt(1+t) - 1 <= t/2 - t^2/10 on [-eps, eps].

    The constraint g(t) = sqrt(1+t) - 1 - t/2 + t^2/10 <= 0 holds on all
    of (-1, 0] and fails only past a single positive root, which bisection
    brackets to the requested tolerance (returning the lower endpoint, so
    the certified interval is conservative).
    """

    def g(t: float) -> float:
        return math.sqrt(1.0 + t) - 1.0 - t / 2.0 + t * t / 10.0

    lo, hi = 0.25, 1.0
    if not (g(lo) < 0.0 < g(hi)):
        raise AssertionError("bisection bracket lost")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def _summarize(inequality, constants, seed, lhs, rhs, xs, ys) -> CertificationResult:
    slack = lhs - rhs
    floor = NOISE_FLOOR * (np.abs(lhs) + np.abs(rhs))
    worst = int(np.argmax(slack - floor))
    return CertificationResult(
        inequality=inequality,
        constants=dict(constants),
        n_samples=len(lhs),
        seed=seed,
        max_violation=float(slack[worst]),
        worst_x=np.atleast_1d(xs[worst]).copy(),
        worst_y=np.atleast_1d(ys[worst]).copy(),
        passed=bool(np.all(slack <= floor)),
    )


def _log_uniform(rng, lo, hi, size):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=size))


def _sample_L_pairs(epsilon: float, n: int, rng):
    """(x, y) pairs covering both indicator branches and the branch boundary."""
    x = _log_uniform(rng, 1e-3, 1e6, n) * rng.choice([-1.0, 1.0], size=n)
    t = np.empty(n)
    kind = rng.random(n)
    bulk = kind < 0.6
    t[bulk] = _log_uniform(rng, 1e-8, 1e4, bulk.sum())
    slab = (kind >= 0.6) & (kind < 0.9)  # within 1% of the indicator boundary
    t[slab] = epsilon * rng.uniform(0.99, 1.01, slab.sum())
    t[~bulk & ~slab] = rng.uniform(0.0, 2.0, (~bulk & ~slab).sum())
    t *= rng.choice([-1.0, 1.0], size=n)
    return x, t * x


def check_L_inequality(
    epsilon: float, C: float, n_samples: int = 10**6, seed: int = 0
) -> CertificationResult:
    """Certify the square-root drift bound in dimension 1.

    L(x+y) - L(x) <= sqrt(|x|) (y/(2x) - y^2/(10 x^2)
                                + C y^2 1{|y| > eps |x|} / x^2)
    over all sampled x != 0 and real y.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if C <= 1.0:
        raise ValueError("C must exceed 1")
    rng = np.random.default_rng(seed)
    x, y = _sample_L_pairs(epsilon, n_samples, rng)
    # Normalize by sqrt(|x|): both sides are homogeneous of degree 1/2, and
    # the increment sqrt(|1+t|) - 1 with t = y/x admits a cancellation-free
    # form (|1+t| - 1) / (sqrt(|1+t|) + 1).
    t = y / x
    abs1pt = np.abs(1.0 + t)
    numer = np.where(t >= -1.0, t, -2.0 - t)  # |1+t| - 1, exactly
    lhs = numer / (np.sqrt(abs1pt) + 1.0)
    indicator = np.abs(t) > epsilon
    rhs = t / 2.0 - t**2 / 10.0 + C * t**2 * indicator
    scale = np.sqrt(np.abs(x))
    return _summarize(
        "sqrt-abs-drift", {"epsilon": epsilon, "C": C}, seed, scale * lhs, scale * rhs, x, y
    )


def _random_directions(rng, n, d):
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _sample_region_pairs(epsilon, r, n, d, rng, x_hi=1e6):
    """x with ||x|| >= r and y in the truncated displacement region.

    The region is ||y|| <= ||x||^(1-eps).  Stratification: a log-uniform
    bulk, a slab within 1% of the region boundary, and alignment extremes
    (y nearly parallel, antiparallel, or orthogonal to x).
    """
    norms = _log_uniform(rng, r, x_hi, n)
    xdir = _random_directions(rng, n, d)
    x = norms[:, None] * xdir

    ymax = norms ** (1.0 - epsilon)
    u = np.empty(n)
    kind = rng.random(n)
    bulk = kind < 0.5
    u[bulk] = _log_uniform(rng, 1e-6, 1.0, bulk.sum())
    u[~bulk] = rng.uniform(0.99, 1.0, (~bulk).sum())  # boundary slab

    align = rng.random(n)
    ydir = _random_directions(rng, n, d)
    tilt = rng.standard_normal((n, 1)) * 1e-3
    near_par = align < 0.25
    near_anti = (align >= 0.25) & (align < 0.5)
    near_orth = (align >= 0.5) & (align < 0.75)
    ydir[near_par] = _renormalize(xdir[near_par] + tilt[near_par] * ydir[near_par])
    ydir[near_anti] = _renormalize(-xdir[near_anti] + tilt[near_anti] * ydir[near_anti])
    orth = ydir[near_orth] - (
        np.sum(ydir[near_orth] * xdir[near_orth], axis=1, keepdims=True)
        * xdir[near_orth]
    )
    ydir[near_orth] = _renormalize(orth + tilt[near_orth] * xdir[near_orth] * 1e-6)
    y = (u * ymax)[:, None] * ydir
    return x, y


def _renormalize(v):
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def check_f_inequalities(
    epsilon: float,
    r: float,
    C: float,
    n_samples: int = 10**6,
    seed: int = 0,
) -> dict:
    """Certify the two sqrt-log drift bounds in dimension 2.

    First order, all x != 0 and all y:
        f(x+y) - f(x) <= 1 + ||y|| / ||x||.
    Second order, ||x|| >= r and ||y|| <= ||x||^(1-eps):
        f(x+y) - f(x) <= (1 / (2 sqrt(log||x||)))
                           (x.y/||x||^2 + ||y||^2/(2||x||^2)
                            - (x.y)^2/||x||^4 + C ||y||^2/||x||^(2+eps))
                         - (x.y)^2 / (8 log^{3/2}||x|| ||x||^4)
                         + C ||y||^2 / (||x||^(2+eps) log^{3/2}||x||).
    Returns {"first_order": result, "second_order": result}.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if r <= 1.0:
        raise ValueError("r must exceed 1 (sqrt-log vanishes below norm 1)")
    f = sqrt_log()
    rng = np.random.default_rng(seed)

    # first-order bound: unrestricted y
    norms = _log_uniform(rng, 1e-3, 1e6, n_samples)
    x1 = norms[:, None] * _random_directions(rng, n_samples, 2)
    rel = _log_uniform(rng, 1e-6, 1e3, n_samples)
    y1 = (rel * norms)[:, None] * _random_directions(rng, n_samples, 2)
    lhs1 = f(x1 + y1) - f(x1)
    rhs1 = 1.0 + rel
    first = _summarize(
        "sqrt-log-first-order", {"epsilon": epsilon}, seed, lhs1, rhs1, x1, y1
    )

    # second-order bound on the restricted region
    x, y = _sample_region_pairs(epsilon, r, n_samples, 2, rng)
    xn = np.linalg.norm(x, axis=1)
    yn2 = np.einsum("ij,ij->i", y, y)
    dot = np.einsum("ij,ij->i", x, y)
    L = np.log(xn)
    # stable increment: f(x+y) - f(x) = dl / (sqrt(L + dl) + sqrt(L)) with
    # dl = log(||x+y|| / ||x||) = 0.5 log1p(s); piecewise branch when the
    # displaced point falls inside the unit disc.
    s = (2.0 * dot + yn2) / xn**2
    dl = 0.5 * np.log1p(s)
    newL = L + dl
    lhs = np.where(
        newL <= 0.0,
        -np.sqrt(L),
        dl / (np.sqrt(np.maximum(newL, 0.0)) + np.sqrt(L)),
    )
    rhs = (
        1.0
        / (2.0 * np.sqrt(L))
        * (dot / xn**2 + yn2 / (2.0 * xn**2) - dot**2 / xn**4 + C * yn2 / xn ** (2.0 + epsilon))
        - dot**2 / (8.0 * L**1.5 * xn**4)
        + C * yn2 / (xn ** (2.0 + epsilon) * L**1.5)
    )
    second = _summarize(
        "sqrt-log-second-order",
        {"epsilon": epsilon, "r": r, "C": C},
        seed,
        lhs,
        rhs,
        x,
        y,
    )
    return {"first_order": first, "second_order": second}


def check_h_inequality(
    delta: float,
    epsilon: float,
    r: float,
    C: float,
    n_samples: int = 10**6,
    seed: int = 0,
    dims=(3, 4),
    exponent_offset: str = "quarter",
) -> CertificationResult:
    """Certify the inverse-power drift bound in dimension >= 3.

    For ||x|| >= r and ||y|| <= ||x||^(1-eps):
        h(x+y) - h(x) <= (-delta / (4 ||x||^(2 + delta/4)))
                         (x.y + ||y||^2/2 - (1 + delta/8)(x.y)^2/||x||^2
                          - C ||y||^2 / ||x||^eps).
    ``exponent_offset`` selects the prefactor exponent: "quarter" is the
    certified 2 + delta/4; "half" (2 + delta/2) is retained to demonstrate
    that no constants make it hold.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if r <= 1.0:
        raise ValueError("r must exceed 1")
    if exponent_offset not in ("quarter", "half"):
        raise ValueError("exponent_offset must be 'quarter' or 'half'")
    power = delta / 4.0 if exponent_offset == "quarter" else delta / 2.0
    rng = np.random.default_rng(seed)

    per_dim = n_samples // len(dims)
    all_lhs, all_rhs, all_x, all_y = [], [], [], []
    for d in dims:
        x, y = _sample_region_pairs(epsilon, r, per_dim, d, rng)
        xn = np.linalg.norm(x, axis=1)
        yn2 = np.einsum("ij,ij->i", y, y)
        dot = np.einsum("ij,ij->i", x, y)
        # stable increment: h(x+y) - h(x) = h(x) expm1(-(delta/8) log1p(s))
        # with s = ||x+y||^2/||x||^2 - 1; piecewise branch inside the unit
        # ball where h is constant 1.
        s = (2.0 * dot + yn2) / xn**2
        hx = xn ** (-delta / 4.0)
        lhs = np.where(
            (1.0 + s) * xn**2 < 1.0,
            1.0 - hx,
            hx * np.expm1(-(delta / 8.0) * np.log1p(s)),
        )
        rhs = (-delta / (4.0 * xn ** (2.0 + power))) * (
            dot
            + yn2 / 2.0
            - (1.0 + delta / 8.0) * dot**2 / xn**2
            - C * yn2 / xn**epsilon
        )
        # pad to a common width so dims 3 and 4 share one report
        all_lhs.append(lhs)
        all_rhs.append(rhs)
        width = max(dims)
        all_x.append(np.pad(x, ((0, 0), (0, width - d))))
        all_y.append(np.pad(y, ((0, 0), (0, width - d))))
    lhs = np.concatenate(all_lhs)
    rhs = np.concatenate(all_rhs)
    xs = np.concatenate(all_x)
    ys = np.concatenate(all_y)
    return _summarize(
        "inverse-power-drift",
        {"delta": delta, "epsilon": epsilon, "r": r, "C": C},
        seed,
        lhs,
        rhs,
        xs,
        ys,
    )


def find_constants(
    inequality: str,
    epsilon: float,
    r_grid=None,
    C_grid=None,
    delta: float = 1.0,
    n_samples: int = 10**5,
    seed: int = 0,
):
    """Smallest grid point (r, C) certifying an inequality at fixed epsilon.

    ``inequality`` is one of "sqrt-abs-drift" (C only; r ignored),
    "sqrt-log-second-order", or "inverse-power-drift".  Grid points are
    scanned in increasing (r, C) order and the first fully admissible one
    is returned along with its certification.  If the grid is exhausted a
    failure report lists the worst violation per grid point.
    """
    if C_grid is None:
        C_grid = [2.0**k for k in range(0, 11)]
    if r_grid is None:
        r_grid = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0]

    failures = []
    if inequality == "sqrt-abs-drift":
        for C in sorted(C_grid):
            if C <= 1.0:
                continue
            result = check_L_inequality(epsilon, C, n_samples, seed)
            if result.passed:
                return {"r": None, "C": C, "result": result}
            failures.append(((None, C), result.max_violation))
    elif inequality == "sqrt-log-second-order":
        for r in sorted(r_grid):
            for C in sorted(C_grid):
                result = check_f_inequalities(epsilon, r, C, n_samples, seed)[
                    "second_order"
                ]
                if result.passed:
                    return {"r": r, "C": C, "result": result}
                failures.append(((r, C), result.max_violation))
    elif inequality == "inverse-power-drift":
        for r in sorted(r_grid):
            for C in sorted(C_grid):
                result = check_h_inequality(delta, epsilon, r, C, n_samples, seed)
                if result.passed:
                    return {"r": r, "C": C, "result": result}
                failures.append(((r, C), result.max_violation))
    else:
        raise ValueError(f"unknown inequality {inequality!r}")
    raise RuntimeError(
        "grid exhausted without an admissible pair; worst violations: "
        + ", ".join(f"{pt}: {v:.3e}" for pt, v in failures)
    )
