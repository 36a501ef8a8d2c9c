"""Step distributions, parameter maps and linear-algebra reductions."""

import math

import numpy as np
import pytest

from srrw.model import (
    DistributionSpecError,
    StepDistribution,
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


class TestParsing:
    def test_basic_specs(self):
        assert parse_distribution("rademacher").kind == "rademacher-1d"
        assert parse_distribution("gaussian(d=3)").d == 3
        assert parse_distribution("gaussian").d == 1
        p = parse_distribution("pareto(a=1.5, scale=2.0)")
        assert p.tail_index == 1.5 and p.scale == 2.0
        dd = parse_distribution("directions[(1,0),(-1,0),(0,1),(0,-1)]")
        assert dd.d == 2 and len(dd.probs) == 4
        dc = parse_distribution("discrete[(1,0):0.5,(-1,0):0.5]")
        assert dc.d == 2

    def test_errors_carry_positions(self):
        with pytest.raises(DistributionSpecError) as exc:
            parse_distribution("pareto(a=0.5)")
        assert exc.value.position is not None
        with pytest.raises(DistributionSpecError):
            parse_distribution("gaussian(d=0)")
        with pytest.raises(DistributionSpecError):
            parse_distribution("frobnicate(a=1)")
        with pytest.raises(DistributionSpecError):
            parse_distribution("discrete[(1,0):0.6,(0,1):0.3]")
        with pytest.raises(DistributionSpecError):
            parse_distribution("rademacher junk")
        with pytest.raises(DistributionSpecError):
            parse_distribution("directions[(1,0),(1,0,0)]")

    def test_descriptor_round_trip(self):
        for spec in ("rademacher", "pareto(a=1.5, scale=1)",
                     "directions[(1,0),(-1,0)]"):
            dist = parse_distribution(spec)
            again = parse_distribution(dist.descriptor())
            assert again.kind == dist.kind
            assert again.d == dist.d


class TestDistributions:
    def test_dirac_at_zero_rejected(self):
        with pytest.raises(ValueError):
            discrete([[0.0, 0.0]], [1.0])

    def test_rademacher_moments(self):
        r = rademacher()
        assert r.second_moment() == 1.0
        assert r.is_mean_zero
        np.testing.assert_allclose(r.covariance(), [[1.0]])

    def test_pareto_tail_index_guard(self):
        with pytest.raises(ValueError):
            symmetric_pareto(1.0)
        with pytest.raises(ValueError):
            symmetric_pareto(1.5).covariance()
        p = symmetric_pareto(3.0, scale=2.0)
        assert p.second_moment() == pytest.approx(3.0 * 4.0 / 1.0)

    def test_pareto_survival_matches_declared_tail(self):
        a, scale = 1.5, 1.0
        dist = symmetric_pareto(a, scale)
        rng = np.random.default_rng(0)
        n = 200_000
        draws = np.abs(dist.sample(rng, n)[:, 0])
        for x in (2.0, 5.0, 20.0):
            p = (x / scale) ** (-a)
            emp = (draws > x).mean()
            se = math.sqrt(p * (1 - p) / n)
            assert abs(emp - p) <= 3.0 * se, (x, emp, p)

    def test_self_check_accepts_and_rejects(self):
        rng = np.random.default_rng(1)
        rademacher().self_check(rng)
        gaussian(3).self_check(rng)
        bad = StepDistribution(
            kind="discrete", d=1, mean=np.array([0.5]), moment_order=math.inf,
            support=np.array([[1.0], [-1.0]]), probs=np.array([0.5, 0.5]),
        )
        with pytest.raises(ValueError):
            bad.self_check(rng)

    def test_sampling_shapes(self):
        rng = np.random.default_rng(2)
        assert gaussian(4).sample(rng, 7).shape == (7, 4)
        assert rademacher().sample(rng, 5).shape == (5, 1)
        assert symmetric_pareto(2.5).sample(rng, 5).shape == (5, 1)


class TestReinforcementMaps:
    def test_memory_to_reinforcement(self):
        assert erw_alpha(1.0, 2) == 1.0
        assert erw_alpha(0.5, 2) == 0.0
        assert erw_alpha(7.0 / 12.0, 6) == pytest.approx(0.5)

    def test_round_trip(self):
        for k in (2, 4, 6):
            for alpha in (0.0, 0.3, 0.5, 1.0):
                p = erw_memory_p(alpha, k)
                assert erw_alpha(p, k) == pytest.approx(alpha)

    def test_negative_reinforcement_rejected(self):
        with pytest.raises(ValueError):
            erw_alpha(0.1, 2)
        with pytest.raises(ValueError):
            erw_alpha(0.5, 1)

    def test_conditional_direction_law(self):
        p = erw_step_probability([3, 1], 4, 0.5, 2)
        np.testing.assert_allclose(p, [0.625, 0.375])
        assert p.sum() == pytest.approx(1.0)
        rng = np.random.default_rng(3)
        for _ in range(20):
            k = int(rng.integers(2, 6))
            counts = rng.multinomial(30, np.full(k, 1.0 / k))
            alpha = float(rng.random())
            q = erw_step_probability(counts, 30, alpha, k)
            assert q.sum() == pytest.approx(1.0)
            assert np.all(q >= 0)
        with pytest.raises(ValueError):
            erw_step_probability([1, 1], 3, 0.5, 2)


class TestWhitening:
    def test_diagonal_case(self):
        dist = discrete(
            [[2, 1], [2, -1], [-2, 1], [-2, -1]], [0.25, 0.25, 0.25, 0.25]
        )
        np.testing.assert_allclose(dist.covariance(), np.diag([4.0, 1.0]))
        w = whitening_map(dist)
        np.testing.assert_allclose(w.matrix, np.diag([0.5, 1.0]), atol=1e-12)
        np.testing.assert_allclose(
            w.matrix @ dist.covariance() @ w.matrix, np.eye(2), atol=1e-12
        )

    def test_six_direction_set(self):
        angles = np.arange(6) * math.pi / 3.0
        dirs = np.column_stack([np.cos(angles), np.sin(angles)])
        dist = uniform_directions(dirs)
        assert dist.is_mean_zero
        w = whitening_map(dist)
        np.testing.assert_allclose(
            w.matrix @ dist.covariance() @ w.matrix, np.eye(2), atol=1e-10
        )
        whitened = w.apply(dist.support)
        cov = np.einsum("k,ki,kj->ij", dist.probs, whitened, whitened)
        np.testing.assert_allclose(cov, np.eye(2), atol=1e-10)

    def test_singular_covariance_rejected(self):
        dist = discrete([[1, 1], [-1, -1]], [0.5, 0.5])
        with pytest.raises(ValueError):
            whitening_map(dist)


class TestGenuineDimension:
    def test_rank_one_support(self):
        dist = discrete([[1, 1], [-1, -1], [2, 2]], [0.4, 0.4, 0.2])
        k, project = genuine_dimension(dist)
        assert k == 1
        coords = project(dist.support)
        assert coords.shape == (3, 1)
        recovered = coords @ project.basis.T
        np.testing.assert_allclose(recovered, dist.support, atol=1e-10)

    def test_full_rank(self):
        k, project = genuine_dimension(gaussian(3))
        assert k == 3
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(project.basis @ project(x), x, atol=1e-10)
