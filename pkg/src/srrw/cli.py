"""Command-line interface.

Subcommands: simulate, sweep, equivalence, lemma-check, moments,
exit-times.  Global flags --seed, --threads, --out, --config.  Exit code 0
on success, 1 when a statistical or certification check fails, 2 on usage
errors (including malformed config files).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, _kernels, harness, lyapunov, stats
from .engine import CheckpointSchedule, WalkConfig, run_walk
from .harness import make_provenance
from .model import DistributionSpecError, ModelParams, parse_distribution
from .rng import generator, replica_seed

__all__ = ["main", "ConfigError", "load_config"]


class ConfigError(ValueError):
    """Malformed config file, annotated with file position."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")


def load_config(path: str) -> dict:
    """Parse a ``key = value`` config file with optional ``[section]`` tables.

    Returns a flat dict; keys inside a section are prefixed ``section.key``.
    Blank lines and ``#`` comments are ignored.
    """
    out: dict = {}
    section = ""
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]") or len(line) < 3:
                    raise ConfigError(path, line_no, f"malformed section header {line!r}")
                section = line[1:-1].strip() + "."
                continue
            if "=" not in line:
                raise ConfigError(path, line_no, f"expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not key:
                raise ConfigError(path, line_no, "empty key")
            if not value:
                raise ConfigError(path, line_no, f"empty value for key {key!r}")
            out[section + key] = value
    return out


def _int_arg(text: str) -> int:
    return int(float(text))


def _alpha_grid(text: str):
    """Either a comma list (0.25,0.5) or start:stop:step with stop inclusive."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        return list(np.arange(start, stop + step / 2.0, step))
    return [float(p) for p in text.split(",")]


def _float_list(text: str):
    return [float(p) for p in text.split(",")]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srrw",
        description="Simulation and verification toolkit for step-reinforced random walks.",
    )
    parser.add_argument("--version", action="version", version=f"srrw {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_int_arg, default=0, help="master seed")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--config", default=None, help="key = value config file")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="one replica, checkpoint CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--dist", default="rademacher")
    p.add_argument("--n", type=_int_arg, default=10**5)
    p.add_argument("--mode", default="auto", choices=["auto", "full", "counts"])

    p = sub.add_parser("sweep", parents=[common], help="phase-diagram sweep")
    p.add_argument("--alpha", type=_alpha_grid, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--dist", default="gaussian(d=3)")
    p.add_argument("--n", type=_int_arg, default=10**6)
    p.add_argument("--replicas", type=_int_arg, default=200)
    p.add_argument("--emit-plot-data", action="store_true")

    p = sub.add_parser("equivalence", parents=[common], help="construction equivalence suite")
    p.add_argument("--n", type=_int_arg, default=6, help="max exact enumeration size")
    p.add_argument("--n-large", type=_int_arg, default=10**3)
    p.add_argument("--samples", type=_int_arg, default=10**5)

    p = sub.add_parser("lemma-check", parents=[common], help="drift inequality certification")
    p.add_argument(
        "--inequality",
        default="all",
        choices=["all", "sqrt-abs", "sqrt-log", "inverse-power"],
    )
    p.add_argument("--samples", type=_int_arg, default=10**6)

    p = sub.add_parser("moments", parents=[common], help="second moment vs exact recursion")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--dist", default="rademacher")
    p.add_argument("--n", type=_int_arg, default=10**3)
    p.add_argument("--replicas", type=_int_arg, default=10**5)
    p.add_argument("--max-se", type=float, default=4.0, help="allowed standard errors")

    p = sub.add_parser("exit-times", parents=[common], help="exit time scaling in R")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--dist", default="gaussian(d=2)")
    p.add_argument("--radii", type=_float_list, default=[10.0, 20.0, 40.0, 80.0])
    p.add_argument("--replicas", type=_int_arg, default=10**3)
    p.add_argument("--max-ratio", type=float, default=3.0)
    return parser


def _apply_config(args: argparse.Namespace, parser_defaults: dict) -> None:
    """Config values fill in flags the user left at their defaults."""
    if not args.config:
        return
    cfg = load_config(args.config)
    for key, value in cfg.items():
        name = key.split(".")[-1].replace("-", "_")
        if not hasattr(args, name):
            continue
        if getattr(args, name) != parser_defaults.get(name):
            continue  # explicit flag wins
        current = parser_defaults.get(name)
        if isinstance(current, bool):
            setattr(args, name, value.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, name, _int_arg(value))
        elif isinstance(current, float):
            setattr(args, name, float(value))
        elif isinstance(current, list):
            setattr(args, name, _float_list(value))
        else:
            setattr(args, name, value)


def _write_text(out, text, default_stream=None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        (default_stream or sys.stdout).write(text)


def _cmd_simulate(args) -> int:
    dist = parse_distribution(args.dist)
    config = WalkConfig(
        params=ModelParams(alpha=args.alpha, d=dist.d),
        dist=dist,
        horizon=args.n,
        seed=replica_seed(args.seed, f"simulate;alpha={args.alpha:g};dist={args.dist}", 0),
        mode=args.mode,
    )
    series = run_walk(config)
    prov = make_provenance(args.seed, {"op": "simulate", "alpha": args.alpha,
                                       "dist": args.dist, "n": args.n})
    lines = [f"# {k}={v}" for k, v in sorted(prov.items())]
    coord_cols = ",".join(f"x{i}" for i in range(dist.d))
    lines.append(f"n,norm,running_max_norm,{coord_cols}")
    for i, n in enumerate(series.ns):
        coords = ",".join(f"{c:.17g}" for c in series.positions[i])
        lines.append(
            f"{n},{series.norms[i]:.17g},{series.running_max_norm[i]:.17g},{coords}"
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_sweep(args) -> int:
    table = harness.sweep_phase_diagram(
        args.alpha, args.d, args.dist, args.n, args.replicas, args.seed, args.threads
    )
    if args.emit_plot_data:
        harness.emit_plot_data(table, args.out or ".")
    if args.out and not args.emit_plot_data:
        _write_text(args.out, table.to_csv())
        with open(args.out + ".json", "w") as fh:
            fh.write(table.to_json())
    elif not args.out:
        sys.stdout.write(table.to_csv())
    return 0


def _cmd_equivalence(args) -> int:
    report = harness.equivalence_suite(
        n_small=args.n,
        n_large=args.n_large,
        samples_per_side=args.samples,
        master_seed=args.seed,
    )
    _write_text(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if report["passed"] else 1


def _cmd_lemma_check(args) -> int:
    reports = []
    ok = True
    if args.inequality in ("all", "sqrt-abs"):
        eps = lyapunov.taylor_radius()
        res = lyapunov.check_L_inequality(eps, eps**-1.5, args.samples, args.seed)
        reports.append(res)
        ok &= res.passed
    if args.inequality in ("all", "sqrt-log"):
        found = lyapunov.find_constants(
            "sqrt-log-second-order", 1.0 / 16, n_samples=args.samples // 10 or 1,
            seed=args.seed,
        )
        both = lyapunov.check_f_inequalities(
            1.0 / 16, found["r"], found["C"], args.samples, args.seed
        )
        reports.extend([both["first_order"], both["second_order"]])
        ok &= both["first_order"].passed and both["second_order"].passed
    if args.inequality in ("all", "inverse-power"):
        found = lyapunov.find_constants(
            "inverse-power-drift", 1.0 / 8, n_samples=args.samples // 10 or 1,
            seed=args.seed,
        )
        res = lyapunov.check_h_inequality(
            1.0, 1.0 / 8, found["r"], found["C"], args.samples, args.seed
        )
        reports.append(res)
        ok &= res.passed
    text = "[\n" + ",\n".join(r.to_json() for r in reports) + "\n]\n"
    _write_text(args.out, text)
    return 0 if ok else 1


def _cmd_moments(args) -> int:
    dist = parse_distribution(args.dist)
    if dist.kind != "rademacher-1d":
        print("moments: only the rademacher step law is supported", file=sys.stderr)
        return 2
    checkpoints = CheckpointSchedule().times(args.n)
    rng = generator(replica_seed(args.seed, f"moments;alpha={args.alpha:g}", 0))
    values = _kernels.ensemble_counts_1d(
        rng, args.n, args.alpha, args.replicas, checkpoints
    )
    sq = values**2
    emp = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / np.sqrt(args.replicas)
    oracle = harness.exact_second_moment(args.alpha, args.n)[checkpoints - 1]
    z = np.abs(emp - oracle) / se
    rel = np.max(np.abs(emp - oracle) / oracle)
    report = {
        "checkpoints": checkpoints.tolist(),
        "empirical": emp.tolist(),
        "oracle": oracle.tolist(),
        "max_standard_errors": float(z.max()),
        "max_relative_gap": float(rel),
        "passed": bool(z.max() <= args.max_se),
        "provenance": make_provenance(
            args.seed, {"op": "moments", "alpha": args.alpha, "n": args.n,
                        "replicas": args.replicas}),
    }
    _write_text(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if report["passed"] else 1


def _cmd_exit_times(args) -> int:
    dist = parse_distribution(args.dist)
    means = {}
    for radius in args.radii:
        samples = []
        for rep in range(args.replicas):
            config = WalkConfig(
                params=ModelParams(alpha=args.alpha, d=dist.d),
                dist=dist,
                horizon=1,
                seed=replica_seed(
                    args.seed, f"exit;alpha={args.alpha:g};R={radius:g}", rep
                ),
            )
            result = stats.exit_time(config, radius)
            if result["hit_safety_horizon"]:
                print(f"exit-times: safety horizon hit at R={radius}", file=sys.stderr)
                return 1
            samples.append(result["exit_time"])
        means[f"{radius:g}"] = float(np.mean(samples)) / radius**2
    ratio = max(means.values()) / min(means.values())
    report = {
        "mean_exit_over_R2": means,
        "max_over_min_ratio": ratio,
        "passed": bool(ratio < args.max_ratio),
        "provenance": make_provenance(
            args.seed, {"op": "exit-times", "alpha": args.alpha,
                        "radii": args.radii, "replicas": args.replicas}),
    }
    _write_text(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0 if report["passed"] else 1


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "equivalence": _cmd_equivalence,
    "lemma-check": _cmd_lemma_check,
    "moments": _cmd_moments,
    "exit-times": _cmd_exit_times,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    chosen = parser._subparsers._group_actions[0].choices[args.command]
    defaults = {action.dest: action.default for action in chosen._actions}
    try:
        _apply_config(args, defaults)
        return _COMMANDS[args.command](args)
    except (ConfigError, DistributionSpecError, FileNotFoundError) as exc:
        print(f"srrw: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
