"""Diagnostic functionals: weights, deviations, recurrence, exit times."""

import json
import math

import numpy as np
import pytest

from srrw.engine import Trajectory, WalkConfig, run_walk
from srrw.model import ModelParams, gaussian, rademacher, symmetric_pareto
from srrw.stats import (
    DiagnosticsReport,
    angular_series,
    beta_gamma,
    beta_limit_constant,
    coordinate,
    cross_moment,
    delta_matrix_series,
    delta_n,
    delta_recursion_residual,
    escape_exponent,
    exit_time,
    indicator_tail,
    lil_ratio,
    mz_rate_trace,
    norm_power,
    norm_squared,
    recurrence_stats,
    xn_trace,
)


def synthetic_trajectory(steps, alpha=0.5, dist=None):
    steps = np.asarray(steps, dtype=float)
    dist = dist or rademacher()
    cfg = WalkConfig(
        params=ModelParams(alpha=alpha, d=steps.shape[1]),
        dist=dist, horizon=steps.shape[0], seed=0,
    )
    return Trajectory(steps=steps, positions=np.cumsum(steps, axis=0), config=cfg)


def simulated_trajectory(alpha, dist, n, seed):
    cfg = WalkConfig(
        params=ModelParams(alpha=alpha, d=dist.d), dist=dist, horizon=n,
        seed=seed, keep_trajectory=True,
    )
    return run_walk(cfg).trajectory


class TestWeightSequences:
    def test_no_reinforcement_closed_form(self):
        beta, gamma, scaled = beta_gamma(1000, 0.0)
        n = np.arange(1, 1001, dtype=float)
        np.testing.assert_allclose(beta, 1.0 / n, rtol=1e-12)
        np.testing.assert_allclose(gamma, 1.0 / (n + 1.0), rtol=1e-12)
        np.testing.assert_allclose(scaled, 1.0, rtol=1e-12)

    def test_limit_constant(self):
        assert beta_limit_constant(0.0) == pytest.approx(1.0)
        assert beta_limit_constant(1.0) == pytest.approx(1.0)
        assert beta_limit_constant(0.5) == pytest.approx(
            1.0 / math.gamma(1.5)
        )

    def test_domain(self):
        with pytest.raises(ValueError):
            beta_gamma(10, 1.0)
        with pytest.raises(ValueError):
            beta_gamma(0, 0.5)


class TestFunctionalReferences:
    def test_discrete_and_gaussian(self):
        r = rademacher()
        assert coordinate(0, r).reference == 0.0
        assert norm_squared(r).reference == 1.0
        assert cross_moment(0, 0, r).reference == 1.0
        g3 = gaussian(3)
        # mean norm of a 3d standard gaussian
        assert norm_power(1.0, g3).reference == pytest.approx(
            2.0 * math.sqrt(2.0 / math.pi)
        )
        assert norm_power(2.0, g3).reference == pytest.approx(3.0)
        assert indicator_tail(0.0, g3).reference == pytest.approx(3.0)

    def test_pareto(self):
        p = symmetric_pareto(1.5, scale=2.0)
        # E |X|^q = a scale^q / (a - q)
        assert norm_power(1.0, p).reference == pytest.approx(1.5 * 2.0 / 0.5)
        with pytest.raises(ValueError):
            norm_power(1.5, p)
        with pytest.raises(ValueError):
            indicator_tail(1.0, p)

    def test_evaluation(self):
        steps = np.array([[3.0, 4.0], [0.0, 1.0]])
        np.testing.assert_allclose(
            norm_squared(gaussian(2)).values(steps), [25.0, 1.0]
        )
        np.testing.assert_allclose(
            indicator_tail(2.0, gaussian(2)).values(steps), [25.0, 0.0]
        )


class TestDeviations:
    def test_known_values(self):
        traj = synthetic_trajectory([[1.0], [-1.0], [1.0], [1.0]])
        ns, values, warn = delta_n(
            coordinate(0, rademacher()), traj, ns=[1, 2, 4]
        )
        np.testing.assert_allclose(values, [1.0, 0.0, 0.5])
        assert not warn

    def test_moment_warning(self):
        from srrw.stats import FunctionalSpec

        p = symmetric_pareto(1.5)
        traj = simulated_trajectory(0.5, p, 64, seed=1)
        # demand at the declared moment order: values exist, warning set
        heavy = FunctionalSpec(
            name="abs^1.4",
            evaluate=lambda steps: np.abs(steps[:, 0]) ** 1.4,
            reference=norm_power(1.4, p).reference,
            moment_demand=1.6,
        )
        _, values, warn = delta_n(heavy, traj)
        assert warn
        assert np.all(np.isfinite(values))
        _, _, light_warn = delta_n(coordinate(0, p), traj)
        assert not light_warn

    def test_matrix_series_shrinks(self):
        traj = simulated_trajectory(0.0, gaussian(2), 2**14, seed=2)
        ns, series = delta_matrix_series(traj)
        assert series.shape == ns.shape
        assert series[-1] < series[0]

    def test_recursion_and_closed_form(self):
        for alpha, dist, h in [
            (0.3, rademacher(), coordinate(0, rademacher())),
            (0.6, gaussian(2), norm_squared(gaussian(2))),
            (0.5, symmetric_pareto(1.5), coordinate(0, symmetric_pareto(1.5))),
        ]:
            traj = simulated_trajectory(alpha, dist, 4096, seed=3)
            res = delta_recursion_residual(h, traj, alpha)
            assert res["recursion"] < 1e-12
            assert res["closed_form"] < 1e-12

    def test_mz_trace(self):
        p = symmetric_pareto(1.5)
        traj = simulated_trajectory(0.5, p, 4096, seed=4)
        h = coordinate(0, p)
        ns, vals, warn = mz_rate_trace(traj, 0.2, h)
        assert not warn  # s = 1.5, nu = 0.2 < 1 - 1/s
        _, _, warn_fast = mz_rate_trace(traj, 0.9, h)
        assert warn_fast


class TestEscapeAndRadial:
    def test_deterministic_power_law(self):
        ns = np.unique(np.geomspace(10, 10**6, 40).astype(int))
        out = escape_exponent(ns, ns.astype(float) ** 0.7)
        assert out["slope"] == pytest.approx(0.7, abs=1e-9)

    def test_zero_norms_dropped_and_guards(self):
        ns = np.array([10, 100, 1000, 10000, 100000])
        norms = np.array([0.0, 1.0, 2.0, 4.0, 8.0])
        out = escape_exponent(ns, norms)
        assert math.isfinite(out["slope"])
        with pytest.raises(ValueError):
            escape_exponent([10, 20, 40], [1, 2, 3])

    def test_xn_trace_floor_and_ceiling(self):
        kappa = 0.9
        zero = synthetic_trajectory(np.zeros((256, 1)))
        ns, vals = xn_trace(zero, kappa)
        np.testing.assert_allclose(vals, kappa, rtol=1e-12)

        n = 256
        steps = np.zeros((n, 1))
        pos_target = np.sqrt(np.arange(1, n + 1) - np.arange(1, n + 1) ** kappa)
        steps[:, 0] = np.diff(np.concatenate(([0.0], pos_target)))
        traj = synthetic_trajectory(steps)
        ns, vals = xn_trace(traj, kappa)
        np.testing.assert_allclose(vals, 1.0, rtol=1e-9)

        with pytest.raises(ValueError):
            xn_trace(zero, 1.5)

    def test_lil_ratio(self):
        traj = simulated_trajectory(0.25, rademacher(), 2**15, seed=5)
        ns, ratio, running = lil_ratio(traj, 0.25, 1.0)
        assert np.all(ns >= 16)
        assert np.all(np.diff(running) >= 0)
        assert np.all(running >= ratio)
        with pytest.raises(ValueError):
            lil_ratio(traj, 0.75, 1.0)
        wide = simulated_trajectory(0.25, gaussian(2), 64, seed=6)
        with pytest.raises(ValueError):
            lil_ratio(wide, 0.25, 1.0)


class TestAngular:
    def test_fixed_direction(self):
        pos = np.outer(np.arange(1, 9, dtype=float), [3.0, 4.0])
        out = angular_series(pos)
        np.testing.assert_allclose(out["units"][-1], [0.6, 0.8])
        assert out["tail_oscillation"] == pytest.approx(0.0, abs=1e-12)

    def test_alternating_direction(self):
        pos = np.array([[1.0, 0.0], [-1.0, 0.0]] * 4)
        out = angular_series(pos)
        assert out["tail_oscillation"] == pytest.approx(2.0)

    def test_zero_vector_convention(self):
        out = angular_series(np.zeros((4, 2)))
        np.testing.assert_allclose(out["units"], 0.0)


class TestRecurrenceAndExit:
    def test_return_counting(self):
        steps = np.diff(
            np.concatenate(([0.0], [1.0, 3.0, 1.0, 3.0, 1.0]))
        )[:, None]
        traj = synthetic_trajectory(steps)
        out = recurrence_stats(traj, 1.0)
        assert out["return_count"] == 2
        assert out["liminf_proxy"] == 1.0
        assert out["site_visits"] == {(1,): 3}
        with pytest.raises(ValueError):
            recurrence_stats(traj, 0.0)

    def test_exit_time_edge_cases(self):
        dist = rademacher()
        cfg = WalkConfig(
            params=ModelParams(alpha=0.0, d=1), dist=dist, horizon=1, seed=7
        )
        assert exit_time(cfg, 0.0) == {
            "exit_time": 0, "hit_safety_horizon": False
        }
        # the very first +-1 step already leaves the unit ball
        assert exit_time(cfg, 1.0)["exit_time"] == 1

    def test_exit_time_diffusive_scaling(self):
        # without reinforcement the mean exit time from [-R, R] is R^2
        dist, radius, reps = rademacher(), 10.0, 200
        samples = []
        for rep in range(reps):
            cfg = WalkConfig(
                params=ModelParams(alpha=0.0, d=1), dist=dist, horizon=1,
                seed=1000 + rep,
            )
            samples.append(exit_time(cfg, radius)["exit_time"])
        ratio = float(np.mean(samples)) / radius**2
        assert 0.8 <= ratio <= 1.2, ratio


class TestDiagnosticsReport:
    def test_serialization(self):
        rep = DiagnosticsReport(ns=np.array([10, 20]))
        rep.add_series("a", [1.0, 2.0])
        rep.summary["final"] = 2.0
        payload = json.loads(rep.to_json())
        assert payload["schema"] == "srrw-diagnostics-v1"
        assert payload["series"]["a"] == [1.0, 2.0]
        rows = list(rep.to_csv_rows())
        assert rows == [(10, "a", 1.0), (20, "a", 2.0)]

    def test_validation(self):
        rep = DiagnosticsReport(ns=np.array([10, 20]))
        with pytest.raises(ValueError):
            rep.add_series("short", [1.0])
        with pytest.raises(ValueError):
            rep.add_series("nan", [1.0, float("nan")])
