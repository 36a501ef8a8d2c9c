"""Diagnostic functionals for reinforced-walk trajectories.

Covers the empirical-deviation process Delta_n(h) and its martingale
decomposition, the deterministic beta/gamma weight sequences, escape
exponents, iterated-logarithm ratios, angular convergence, recurrence and
exit-time statistics, and the logarithmic radial diagnostic x_n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.special import gammaln

from . import _kernels
from .engine import Trajectory, WalkConfig
from .model import StepDistribution
from .rng import selection_rng_pair

__all__ = [
    "FunctionalSpec",
    "DiagnosticsReport",
    "coordinate",
    "norm_squared",
    "cross_moment",
    "norm_power",
    "indicator_tail",
    "delta_n",
    "delta_matrix_series",
    "beta_gamma",
    "delta_recursion_residual",
    "mz_rate_trace",
    "escape_exponent",
    "lil_ratio",
    "angular_series",
    "recurrence_stats",
    "exit_time",
    "xn_trace",
]


@dataclass(frozen=True)
class FunctionalSpec:
    """A scalar functional h with its exact (or high-precision) mean."""

    name: str
    evaluate: callable          # (n, d) steps -> (n,) values
    reference: float            # E h(X_1)
    moment_demand: float = 1.0  # finiteness of E|h|^s needs moment_order >= demand

    def values(self, steps: np.ndarray) -> np.ndarray:
        return self.evaluate(steps)


def coordinate(i: int, dist: StepDistribution) -> FunctionalSpec:
    return FunctionalSpec(
        name=f"coordinate({i})",
        evaluate=lambda steps: steps[:, i],
        reference=float(dist.mean[i]),
        moment_demand=1.0,
    )


def norm_squared(dist: StepDistribution) -> FunctionalSpec:
    return FunctionalSpec(
        name="norm2",
        evaluate=lambda steps: np.einsum("ij,ij->i", steps, steps),
        reference=dist.second_moment(),
        moment_demand=2.0,
    )


def cross_moment(i: int, j: int, dist: StepDistribution) -> FunctionalSpec:
    cov = dist.covariance()
    return FunctionalSpec(
        name=f"cross({i},{j})",
        evaluate=lambda steps: steps[:, i] * steps[:, j],
        reference=float(cov[i, j]),
        moment_demand=2.0,
    )


def _norm_power_reference(q: float, dist: StepDistribution) -> float:
    if dist.is_discrete:
        norms = np.linalg.norm(dist.support, axis=1)
        return float(np.sum(dist.probs * norms**q))
    if dist.kind == "gaussian-standard":
        d = dist.d
        # E ||Z||^q for standard gaussian: chi distribution moment.
        return float(math.exp(q / 2 * math.log(2) + gammaln((d + q) / 2) - gammaln(d / 2)))
    if dist.kind == "symmetric-pareto":
        a, s = dist.tail_index, dist.scale
        if q >= a:
            raise ValueError(f"E|X|^{q} infinite for tail index {a}")
        return float(a * s**q / (a - q))
    raise ValueError(f"no norm-power rule for {dist.kind!r}")


def norm_power(q: float, dist: StepDistribution) -> FunctionalSpec:
    return FunctionalSpec(
        name=f"norm^{q:g}",
        evaluate=lambda steps: np.linalg.norm(steps, axis=1) ** q,
        reference=_norm_power_reference(q, dist),
        moment_demand=q,
    )


def _indicator_tail_reference(K: float, dist: StepDistribution) -> float:
    if dist.is_discrete:
        norms = np.linalg.norm(dist.support, axis=1)
        return float(np.sum(dist.probs * norms**2 * (norms >= K)))
    if dist.kind == "gaussian-standard":
        # E ||Z||^2 1{||Z|| >= K} = d P(chi2_{d+2} >= K^2)
        return float(dist.d * sps.chi2.sf(K * K, dist.d + 2))
    if dist.kind == "symmetric-pareto":
        a, s = dist.tail_index, dist.scale
        if a <= 2:
            raise ValueError("tail second moment infinite for a <= 2")
        K = max(K, s)
        return float(a * s**a * K ** (2 - a) / (a - 2))
    raise ValueError(f"no indicator-tail rule for {dist.kind!r}")


def indicator_tail(K: float, dist: StepDistribution) -> FunctionalSpec:
    def _eval(steps, K=K):
        norms = np.linalg.norm(steps, axis=1)
        return norms**2 * (norms >= K)

    return FunctionalSpec(
        name=f"norm2.tail({K:g})",
        evaluate=_eval,
        reference=_indicator_tail_reference(K, dist),
        moment_demand=2.0,
    )


@dataclass
class DiagnosticsReport:
    """Per-checkpoint functional values plus summary scalars."""

    ns: np.ndarray
    series: dict = field(default_factory=dict)     # name -> (m,) array
    summary: dict = field(default_factory=dict)    # name -> scalar
    meta: dict = field(default_factory=dict)

    def add_series(self, name: str, values) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape[0] != len(self.ns):
            raise ValueError("series length must match checkpoint count")
        if np.any(np.isnan(values)):
            raise ValueError(f"NaN in series {name!r}")
        self.series[name] = values

    def to_json(self) -> str:
        payload = {
            "schema": "srrw-diagnostics-v1",
            "checkpoints": self.ns.tolist(),
            "series": {k: v.tolist() for k, v in self.series.items()},
            "summary": {k: float(v) for k, v in self.summary.items()},
            "meta": self.meta,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv_rows(self):
        """Long rows: (n, metric, value)."""
        for name, values in sorted(self.series.items()):
            for n, v in zip(self.ns, values):
                yield int(n), name, float(v)


def _warn_if_moments_missing(h: FunctionalSpec, dist: StepDistribution) -> bool:
    return h.moment_demand >= dist.moment_order


def delta_n(h: FunctionalSpec, trajectory: Trajectory, ns=None):
    """Empirical deviation Delta_n(h) = mean of h over the first n steps minus E h.

    Returns (ns, values, moment_warning); values exist pathwise even when
    the declared moments do not cover h, in which case the warning flag is
    set.
    """
    if ns is None:
        ns = trajectory.config.checkpoints.times(trajectory.n)
    ns = np.asarray(ns, dtype=np.int64)
    running = np.cumsum(h.values(trajectory.steps))
    values = running[ns - 1] / ns - h.reference
    warn = _warn_if_moments_missing(h, trajectory.config.dist)
    return ns, values, warn


def delta_matrix_series(trajectory: Trajectory, ns=None):
    """Frobenius norm of the matrix deviation Delta_n(x x^T) at checkpoints."""
    dist = trajectory.config.dist
    if ns is None:
        ns = trajectory.config.checkpoints.times(trajectory.n)
    ns = np.asarray(ns, dtype=np.int64)
    steps = trajectory.steps
    d = steps.shape[1]
    cov = dist.covariance()
    outer = np.einsum("ni,nj->nij", steps, steps)
    running = np.cumsum(outer, axis=0)
    devs = running[ns - 1] / ns[:, None, None] - cov
    return ns, np.linalg.norm(devs.reshape(len(ns), d * d), axis=1)


def beta_gamma(n_max: int, alpha: float):
    """Weight sequences gamma_n = (1-alpha)/(n+1), beta_n = prod(1 - gamma_k).

    beta is computed in log space.  Returns (beta, gamma, beta * n^(1-alpha))
    for n = 1..n_max (index 0 is n = 1, with beta_1 = 1).
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1, dtype=float)
    gamma = (1.0 - alpha) / (n + 1.0)
    log_beta = np.concatenate(([0.0], np.cumsum(np.log1p(-gamma[:-1]))))
    beta = np.exp(log_beta)
    return beta, gamma, beta * n ** (1.0 - alpha)


def beta_limit_constant(alpha: float) -> float:
    """Limit of beta_n n^(1-alpha): 1 / Gamma(1 + alpha)."""
    return 1.0 / math.gamma(1.0 + alpha)


def delta_recursion_residual(h: FunctionalSpec, trajectory: Trajectory, alpha: float):
    """Pathwise check of the deviation recursion and its closed form.

    The recursion Delta_{n+1} - Delta_n = gamma_n (-Delta_n + eps_{n+1})
    with eps_{n+1} = (h(X_{n+1}) - E h - alpha Delta_n)/(1 - alpha) is an
    algebraic identity; so is the closed form
    Delta_n = beta_n (h(X_1) - E h + sum_{j<n} gamma_j / beta_{j+1} eps_{j+1}).
    Returns the maximum relative residual of each.
    """
    if not alpha < 1.0:
        raise ValueError("decomposition requires alpha < 1")
    hv = h.values(trajectory.steps)
    n = len(hv)
    ns = np.arange(1, n + 1)
    delta = np.cumsum(hv) / ns - h.reference

    beta, gamma, _ = beta_gamma(n, alpha)
    eps = (hv[1:] - h.reference - alpha * delta[:-1]) / (1.0 - alpha)

    scale = 1.0 + np.abs(delta).max() + np.abs(hv).max()
    rec_lhs = delta[1:] - delta[:-1]
    rec_rhs = gamma[:-1] * (-delta[:-1] + eps)
    rec_residual = np.max(np.abs(rec_lhs - rec_rhs)) / scale

    weights = gamma[:-1] / beta[1:]
    series = np.concatenate(([0.0], np.cumsum(weights * eps)))
    closed = beta * (hv[0] - h.reference + series)
    closed_residual = np.max(np.abs(closed - delta)) / scale
    return {"recursion": float(rec_residual), "closed_form": float(closed_residual)}


def mz_rate_trace(trajectory: Trajectory, nu: float, h: FunctionalSpec, ns=None):
    """Normalized deviation series n^nu |Delta_n(h)| at checkpoints.

    The decay claim holds for alpha <= 1/2 and nu < 1 - 1/s where s is the
    finite moment order of h; outside that range the series is still
    returned with a warning flag.
    """
    ns, deltas, _ = delta_n(h, trajectory, ns)
    alpha = trajectory.config.params.alpha
    s = min(trajectory.config.dist.moment_order / max(h.moment_demand, 1e-300), 2.0)
    asserted = alpha <= 0.5 and s > 1.0 and nu < 1.0 - 1.0 / s
    return ns, ns**nu * np.abs(deltas), not asserted


def escape_exponent(ns, norms) -> dict:
    """Escape-speed exponent: slope of log ||S_n|| against log n.

    Least-squares fit over the last decade of checkpoints (zero-norm
    checkpoints dropped), plus the pointwise ratio at the final time.
    """
    ns = np.asarray(ns, dtype=float)
    norms = np.asarray(norms, dtype=float)
    keep = norms > 0
    ns, norms = ns[keep], norms[keep]
    if len(ns) < 4 or ns[-1] / ns[0] < 100.0:
        raise ValueError("need >= 4 checkpoints spanning >= 2 decades")
    last_decade = ns >= ns[-1] / 10.0
    x = np.log(ns[last_decade])
    y = np.log(norms[last_decade])
    slope = float(np.polyfit(x, y, 1)[0])
    ratio = float(np.log(norms[-1]) / np.log(ns[-1]))
    return {"slope": slope, "final_ratio": ratio}


def lil_ratio(trajectory: Trajectory, alpha: float, variance: float, ns=None):
    """Iterated-logarithm ratio for a one-dimensional walk.

    Normalizer sqrt(2 n log log n) * sqrt(Var / (1 - 2 alpha)) in the
    diffusive regime and sqrt(2 n log n log log log n) * sqrt(Var) at
    alpha = 1/2; rejected above 1/2 where no such normalization is
    asserted.  Returns the checkpoint ratio series and its running
    maximum over checkpoints.
    """
    if trajectory.steps.shape[1] != 1:
        raise ValueError("iterated-logarithm ratio is one-dimensional")
    if alpha > 0.5:
        raise ValueError("no iterated-logarithm normalization for alpha > 1/2")
    if ns is None:
        ns = trajectory.config.checkpoints.times(trajectory.n)
    ns = np.asarray(ns, dtype=np.int64)
    ns = ns[ns >= 16]
    mean_step = float(trajectory.config.dist.mean[0])
    centered = trajectory.positions[:, 0] - mean_step * np.arange(1, trajectory.n + 1)

    nf = ns.astype(float)
    if alpha < 0.5:
        normalizer = np.sqrt(2.0 * nf * np.log(np.log(nf))) * math.sqrt(
            variance / (1.0 - 2.0 * alpha)
        )
    else:
        normalizer = np.sqrt(
            2.0 * nf * np.log(nf) * np.log(np.log(np.log(nf)))
        ) * math.sqrt(variance)
    ratio = centered[ns - 1] / normalizer
    return ns, ratio, np.maximum.accumulate(ratio)


def angular_series(positions_at_checkpoints: np.ndarray) -> dict:
    """Unit direction vectors at checkpoints and their tail oscillation.

    The direction of the zero vector is the zero vector.  Tail oscillation
    is the maximum pairwise distance among the last four checkpoint
    directions; it lies in [0, 2].
    """
    pos = np.atleast_2d(np.asarray(positions_at_checkpoints, dtype=float))
    norms = np.linalg.norm(pos, axis=1)
    units = np.zeros_like(pos)
    nz = norms > 0
    units[nz] = pos[nz] / norms[nz, None]
    tail = units[-4:]
    osc = 0.0
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            osc = max(osc, float(np.linalg.norm(tail[i] - tail[j])))
    return {"units": units, "tail_oscillation": osc}


def recurrence_stats(trajectory: Trajectory, r: float) -> dict:
    """Return counts, a liminf proxy, and lattice site visits near the origin.

    A "return" is an entry into the closed ball B(0, r) after an excursion
    beyond 2r, which avoids counting dithering at the boundary.  The
    liminf proxy is the minimum norm over the final half of the
    trajectory.  Site visits are tallied for integer-lattice walks only.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    norms = trajectory.norms()
    count = int(_kernels.return_count(norms, r))
    half = norms[len(norms) // 2 :]
    liminf_proxy = float(half.min()) if len(half) else float(norms.min())

    site_visits: dict = {}
    dist = trajectory.config.dist
    if dist.is_discrete and np.allclose(dist.support, np.round(dist.support)):
        near = norms <= r
        for p in np.round(trajectory.positions[near]).astype(int):
            key = tuple(int(c) for c in p)
            site_visits[key] = site_visits.get(key, 0) + 1
    return {
        "return_count": count,
        "liminf_proxy": liminf_proxy,
        "site_visits": site_visits,
    }


def exit_time(
    config: WalkConfig,
    radius: float,
    safety_horizon: int = 10**9,
) -> dict:
    """First time the walk leaves B(0, radius), simulated until exit.

    Returns {"exit_time": n or None, "hit_safety_horizon": bool}.  The
    walk starts at the origin, so radius 0 exits at time 0.  The history
    buffer grows geometrically; randomness streams are aligned so the
    trajectory does not depend on the chunk schedule.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius == 0.0:
        return {"exit_time": 0, "hit_safety_horizon": False}
    sel_rng, fresh_rng = selection_rng_pair(config.seed)
    d = config.dist.d
    cap = 4096
    steps = np.empty((cap, d))
    position = np.zeros(d)
    n_filled = 0
    while n_filled < safety_horizon:
        if n_filled == steps.shape[0]:
            grown = np.empty((steps.shape[0] * 2, d))
            grown[: steps.shape[0]] = steps
            steps = grown
        budget = steps.shape[0] - n_filled
        fresh = config.dist.sample(fresh_rng, budget)
        exit_n, n_filled, _used = _kernels.continue_until_exit(
            sel_rng, steps, position, n_filled, np.ascontiguousarray(fresh), config.params.alpha, radius
        )
        if exit_n >= 0:
            return {"exit_time": int(exit_n), "hit_safety_horizon": False}
    return {"exit_time": None, "hit_safety_horizon": True}


def xn_trace(trajectory: Trajectory, kappa: float, ns=None):
    """Logarithmic radial diagnostic x_n = log(||S_n||^2 + n^kappa) / log n."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    if ns is None:
        ns = trajectory.config.checkpoints.times(trajectory.n)
    ns = np.asarray(ns, dtype=np.int64)
    ns = ns[ns >= 2]
    norms = trajectory.norms()[ns - 1]
    nf = ns.astype(float)
    return ns, np.log(norms**2 + nf**kappa) / np.log(nf)
