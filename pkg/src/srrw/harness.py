"""Replicated experiments: deterministic seeding, aggregation, sweeps.

A cell is one (alpha, d, dist, n) point; replicas within a cell get
independent streams derived from the master seed by the documented
splitting scheme, so results are bit-identical at any parallelism degree.
Aggregation always runs in replica-index order after the parallel phase.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import __version__, _kernels, stats
from .engine import CheckpointSchedule, WalkConfig, exact_small_n_pmf, run_walk
from .forest import forest_small_n_pmf
from .model import ModelParams, StepDistribution, parse_distribution, rademacher
from .rng import RNG_IDENTITY, generator, replica_seed
from .stats import escape_exponent

__all__ = [
    "CellSpec",
    "ReplicaSummary",
    "SweepTable",
    "run_replicas",
    "sweep_phase_diagram",
    "equivalence_suite",
    "exact_second_moment",
    "make_provenance",
]


@dataclass(frozen=True)
class CellSpec:
    """One experiment cell plus the diagnostics to evaluate per replica."""

    alpha: float
    d: int
    dist: str                 # distribution specification string
    n: int
    replicas: int
    diagnostics: tuple = ()   # names from the registry below
    options: dict = field(default_factory=dict)
    mode: str = "auto"

    def cell_id(self) -> str:
        extra = ",".join(f"{k}={self.options[k]}" for k in sorted(self.options))
        return f"alpha={self.alpha:g};d={self.d};dist={self.dist};n={self.n};{extra}"


@dataclass
class ReplicaSummary:
    """Checkpoint series and scalar diagnostics from one replica."""

    replica: int
    ns: np.ndarray
    norms: np.ndarray
    positions: np.ndarray       # (m, d) checkpoint positions
    scalars: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)   # name -> per-checkpoint array


# --- per-replica diagnostics -------------------------------------------------
#
# Each entry maps a name to (needs_trajectory, fn); fn fills the summary in
# place.  Series-level diagnostics read only checkpoint data.


def _diag_escape(summary, cell, series, trajectory):
    out = escape_exponent(summary.ns, summary.norms)
    summary.scalars["escape_slope"] = out["slope"]
    summary.scalars["escape_ratio"] = out["final_ratio"]


def _diag_xn(summary, cell, series, trajectory):
    kappa = cell.options.get("kappa", 0.9)
    ns = summary.ns.astype(float)
    vals = np.log(summary.norms**2 + ns**kappa) / np.log(ns)
    summary.series["xn"] = vals
    summary.scalars["xn_final"] = float(vals[-1])


def _diag_angular(summary, cell, series, trajectory):
    out = stats.angular_series(summary.positions)
    summary.scalars["tail_oscillation"] = out["tail_oscillation"]


def _diag_mz(summary, cell, series, trajectory):
    # Delta_n(identity) = S_n / n for a mean-zero one-dimensional law.
    nu = cell.options.get("nu", 0.2)
    ns = summary.ns.astype(float)
    vals = ns**nu * np.abs(summary.positions[:, 0]) / ns
    summary.series["mz_rate"] = vals


def _diag_wlimit(summary, cell, series, trajectory):
    scaled = summary.positions / summary.ns[:, None].astype(float) ** cell.alpha
    summary.scalars["w_norm"] = float(np.linalg.norm(scaled[-1]))
    summary.series["w_cauchy"] = np.concatenate(
        ([np.nan], np.linalg.norm(np.diff(scaled, axis=0), axis=1))
    )


def _diag_returns(summary, cell, series, trajectory):
    radius = cell.options.get("radius", 1.0)
    horizons = cell.options.get("horizons", (summary.ns[-1],))
    norms = trajectory.norms()
    for hz in horizons:
        hz = int(hz)
        summary.scalars[f"returns@{hz}"] = float(
            _kernels.return_count(norms[:hz], radius)
        )


def _diag_norm2(summary, cell, series, trajectory):
    summary.series["norm2"] = summary.norms**2


DIAGNOSTICS = {
    "escape": (False, _diag_escape),
    "xn": (False, _diag_xn),
    "angular": (False, _diag_angular),
    "mz": (False, _diag_mz),
    "wlimit": (False, _diag_wlimit),
    "returns": (True, _diag_returns),
    "norm2": (False, _diag_norm2),
}


def _run_one_replica(cell: CellSpec, master_seed: int, replica: int) -> ReplicaSummary:
    needs_traj = any(DIAGNOSTICS[name][0] for name in cell.diagnostics)
    dist = parse_distribution(cell.dist)
    config = WalkConfig(
        params=ModelParams(alpha=cell.alpha, d=cell.d),
        dist=dist,
        horizon=cell.n,
        seed=replica_seed(master_seed, cell.cell_id(), replica),
        mode=cell.mode,
        keep_trajectory=needs_traj,
    )
    series = run_walk(config)
    summary = ReplicaSummary(
        replica=replica, ns=series.ns, norms=series.norms, positions=series.positions
    )
    for name in cell.diagnostics:
        DIAGNOSTICS[name][1](summary, cell, series, series.trajectory)
    summary_series = summary  # trajectory stays in the worker
    return summary_series


def run_replicas(cell: CellSpec, master_seed: int, threads: int = 1) -> list:
    """All replica summaries of one cell, in replica-index order.

    The result is a pure function of (cell, master_seed): each replica owns
    a stream split from the master seed, and the parallelism degree only
    affects scheduling, never values.
    """
    if cell.replicas < 1:
        raise ValueError("need at least one replica")
    for name in cell.diagnostics:
        if name not in DIAGNOSTICS:
            raise ValueError(f"unknown diagnostic {name!r}")
    indices = range(cell.replicas)
    if threads <= 1:
        return [_run_one_replica(cell, master_seed, i) for i in indices]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_one_replica, cell, master_seed, i) for i in indices]
        results = [f.result() for f in futures]
    results.sort(key=lambda s: s.replica)
    return results


def aggregate(values) -> dict:
    """Summary row: mean, std, median, q05, q95, normal-approximation CI.

    The CI half-width is 1.959964 * std / sqrt(R) (95% two-sided normal).
    """
    v = np.asarray(values, dtype=float)
    v = v[~np.isnan(v)]
    r = len(v)
    std = float(v.std(ddof=1)) if r > 1 else 0.0
    return {
        "mean": float(v.mean()),
        "std": std,
        "median": float(np.median(v)),
        "q05": float(np.quantile(v, 0.05)),
        "q95": float(np.quantile(v, 0.95)),
        "ci_half_width": 1.959964 * std / math.sqrt(r) if r > 0 else float("nan"),
        "replicas": r,
    }


@dataclass
class SweepTable:
    """Aggregate rows keyed by (alpha, d, dist, n, metric)."""

    rows: list = field(default_factory=list)    # dicts with key fields + aggregates
    replica_rows: list = field(default_factory=list)  # long-format tuples
    provenance: dict = field(default_factory=dict)

    def add_cell(self, cell: CellSpec, summaries, metrics) -> None:
        for metric in metrics:
            values = [s.scalars[metric] for s in summaries]
            row = {"alpha": cell.alpha, "d": cell.d, "dist": cell.dist,
                   "n": cell.n, "metric": metric}
            row.update(aggregate(values))
            self.rows.append(row)
            for s in summaries:
                self.replica_rows.append(
                    (cell.alpha, cell.d, cell.dist, cell.n, s.replica, metric,
                     s.scalars[metric])
                )

    def to_csv(self) -> str:
        """Long format: alpha,d,dist,n,replica,metric,value."""
        lines = [f"# {k}={v}" for k, v in sorted(self.provenance.items())]
        lines.append("alpha,d,dist,n,replica,metric,value")
        for a, d, dist, n, rep, metric, value in self.replica_rows:
            lines.append(f"{a:g},{d},{dist},{n},{rep},{metric},{value:.17g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "srrw-sweep-v1",
                "provenance": self.provenance,
                "rows": self.rows,
            },
            indent=2,
            sort_keys=True,
        )


def make_provenance(seed: int, config: dict) -> dict:
    canonical = json.dumps(config, sort_keys=True, default=str)
    return {
        "tool": f"srrw {__version__}",
        "seed": seed,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest()[:16],
        "rng": RNG_IDENTITY,
    }


def sweep_phase_diagram(
    alpha_grid,
    d: int,
    dist: str,
    n: int,
    replicas: int,
    master_seed: int,
    threads: int = 1,
) -> SweepTable:
    """Replica-median escape exponent across a reinforcement-parameter grid."""
    table = SweepTable(
        provenance=make_provenance(
            master_seed,
            {"op": "sweep", "alpha": list(alpha_grid), "d": d, "dist": dist,
             "n": n, "replicas": replicas},
        )
    )
    for alpha in alpha_grid:
        cell = CellSpec(
            alpha=float(alpha), d=d, dist=dist, n=n, replicas=replicas,
            diagnostics=("escape",),
        )
        summaries = run_replicas(cell, master_seed, threads)
        table.add_cell(cell, summaries, ["escape_slope", "escape_ratio"])
    return table


def emit_plot_data(table: SweepTable, out_dir: str) -> None:
    """Phase-diagram curve data: alpha against the escape exponent.

    fig1b.csv carries the exponent curve with quantile bands; fig1a.csv the
    derived diffusive/superdiffusive regime flag (exponent above 0.55).
    """
    os.makedirs(out_dir, exist_ok=True)
    slope_rows = [r for r in table.rows if r["metric"] == "escape_slope"]
    with open(os.path.join(out_dir, "fig1b.csv"), "w") as fh:
        fh.write("alpha,exponent_median,exponent_q05,exponent_q95\n")
        for r in sorted(slope_rows, key=lambda r: r["alpha"]):
            fh.write(f"{r['alpha']:g},{r['median']:.6f},{r['q05']:.6f},{r['q95']:.6f}\n")
    with open(os.path.join(out_dir, "fig1a.csv"), "w") as fh:
        fh.write("alpha,superdiffusive\n")
        for r in sorted(slope_rows, key=lambda r: r["alpha"]):
            fh.write(f"{r['alpha']:g},{int(r['median'] > 0.55)}\n")


def exact_second_moment(alpha: float, n_max: int, step_second_moment: float = 1.0):
    """E ||S_n||^2 for mean-zero steps by the exact recursion.

    m_1 = E||X||^2 and m_{n+1} = m_n (1 + 2 alpha / n) + E||X||^2; returns
    the array for n = 1..n_max.
    """
    m = np.empty(n_max)
    m[0] = step_second_moment
    for n in range(1, n_max):
        m[n] = m[n - 1] * (1.0 + 2.0 * alpha / n) + step_second_moment
    return m


def _chi_square_two_sample(a: np.ndarray, b: np.ndarray, min_expected: float = 5.0):
    """Two-sample chi-square homogeneity test on pooled integer-valued data."""
    values = np.union1d(np.unique(a), np.unique(b))
    ca = np.array([(a == v).sum() for v in values], dtype=float)
    cb = np.array([(b == v).sum() for v in values], dtype=float)
    # pool sparse cells from both ends toward the center
    pooled = []
    acc_a = acc_b = 0.0
    for i in range(len(values)):
        acc_a += ca[i]
        acc_b += cb[i]
        if acc_a + acc_b >= 2 * min_expected:
            pooled.append((acc_a, acc_b))
            acc_a = acc_b = 0.0
    if acc_a + acc_b > 0:
        if pooled:
            la, lb = pooled[-1]
            pooled[-1] = (la + acc_a, lb + acc_b)
        else:
            pooled.append((acc_a, acc_b))
    ca = np.array([p[0] for p in pooled])
    cb = np.array([p[1] for p in pooled])
    na, nb = ca.sum(), cb.sum()
    k = math.sqrt(nb / na)
    stat = float(np.sum((k * ca - cb / k) ** 2 / (ca + cb)))
    df = max(len(pooled) - 1, 1)
    return stat, df, float(sps.chi2.sf(stat, df))


def equivalence_suite(
    n_small: int = 6,
    alpha_grid=(0.0, 0.25, 0.5, 0.75, 1.0),
    n_large: int = 10**3,
    samples_per_side: int = 10**5,
    master_seed: int = 0,
    significance: float = 1e-3,
    atom_tol: float = 1e-12,
) -> dict:
    """Exact and statistical comparison of the two walk constructions.

    Exact part: atom-wise pmf equality between the direct-recursion
    enumeration and the forest enumeration for n <= n_small.  Statistical
    part: two-sample chi-square between sampled endpoints of both
    constructions at n_large.  Returns a report dict with overall pass.
    """
    dist = rademacher()
    report = {"exact": [], "statistical": [], "passed": True}
    for alpha in alpha_grid:
        for n in range(1, n_small + 1):
            a = exact_small_n_pmf(dist, alpha, n)
            b = forest_small_n_pmf(dist, alpha, n)
            keys = set(a) | set(b)
            worst_key = max(keys, key=lambda k: abs(a.get(k, 0.0) - b.get(k, 0.0)))
            gap = float(abs(a.get(worst_key, 0.0) - b.get(worst_key, 0.0)))
            ok = bool(gap <= atom_tol)
            report["exact"].append(
                {"alpha": alpha, "n": n, "max_atom_gap": gap,
                 "worst_atom": [float(c) for c in worst_key], "passed": ok}
            )
            report["passed"] &= ok
    for alpha in alpha_grid:
        rng_a = generator(replica_seed(master_seed, f"equiv-engine;alpha={alpha:g}", 0))
        rng_b = generator(replica_seed(master_seed, f"equiv-forest;alpha={alpha:g}", 0))
        ns = np.array([n_large], dtype=np.int64)
        side_a = _kernels.ensemble_counts_1d(
            rng_a, n_large, alpha, samples_per_side, ns
        )[:, 0]
        side_b = _kernels.forest_walk_ensemble_1d(rng_b, n_large, alpha, samples_per_side)
        stat, df, pvalue = _chi_square_two_sample(side_a, side_b)
        ok = bool(pvalue >= significance)
        report["statistical"].append(
            {"alpha": alpha, "n": n_large, "chi2": stat, "df": df,
             "pvalue": pvalue, "passed": ok}
        )
        report["passed"] &= ok
    report["provenance"] = make_provenance(
        master_seed,
        {"op": "equivalence", "n_small": n_small, "alpha": list(alpha_grid),
         "n_large": n_large, "samples": samples_per_side},
    )
    return report
