import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from saddlescape.oracles import (
    StochasticGradientOracle,
    build_per_sample_eigen_oracle,
    exact_oracle,
    gaussian_oracle,
    sample_gradient,
    sample_minibatch_gradient,
    sphere_oracle,
)
from saddlescape.problems import DimensionError, eigen_problem, quadratic, random_eigen_problem

from conftest import ball_point


def _oracles(d=10, sigma=1.0):
    p = random_eigen_problem(d, seed=3)
    return [
        gaussian_oracle(p, sigma, seed=1),
        sphere_oracle(p, sigma, seed=2),
        build_per_sample_eigen_oracle(p, n=50, seed=4),
    ]


class TestSampleGradient:
    def test_zero_sigma_is_exact(self):
        p = random_eigen_problem(6, seed=0)
        o = gaussian_oracle(p, 0.0, seed=5)
        x = np.arange(6.0) / 6
        g, _ = sample_gradient(o, x)
        np.testing.assert_array_equal(g, p.grad(x))

    def test_gaussian_mean(self):
        d, n = 10, 100_000
        p = random_eigen_problem(d, seed=1)
        o = gaussian_oracle(p, 1.0, seed=7)
        x = np.full(d, 0.1)
        G = o.sample_batch(x, n)
        # per-coordinate noise has standard deviation sigma/sqrt(d)
        se = (1.0 / np.sqrt(d)) / np.sqrt(n)
        assert np.all(np.abs(G.mean(axis=0) - p.grad(x)) <= 3 * se * np.sqrt(d))

    def test_sphere_norm_exact(self):
        p = quadratic([1.0, -1.0, 2.0])
        o = sphere_oracle(p, 0.7, seed=0)
        x = np.array([0.1, 0.2, 0.3])
        for _ in range(100):
            g, _ = o.sample_gradient(x)
            assert np.linalg.norm(g - p.grad(x)) == pytest.approx(0.7, rel=1e-12)

    def test_theta_ids_increase(self):
        o = gaussian_oracle(quadratic([1.0, -1.0]), 1.0, seed=0)
        ids = [o.sample_gradient(np.zeros(2))[1] for _ in range(5)]
        assert ids == [0, 1, 2, 3, 4]

    def test_same_seed_same_draws(self):
        p = random_eigen_problem(5, seed=2)
        a, b = gaussian_oracle(p, 1.0, seed=9), gaussian_oracle(p, 1.0, seed=9)
        x = np.ones(5)
        for _ in range(10):
            np.testing.assert_array_equal(a.sample_gradient(x)[0], b.sample_gradient(x)[0])

    def test_fork_is_independent_copy(self):
        o = gaussian_oracle(quadratic([1.0, -1.0]), 1.0, seed=0)
        f1, f2 = o.fork(3), o.fork(3)
        np.testing.assert_array_equal(f1.sample_gradient(np.zeros(2))[0], f2.sample_gradient(np.zeros(2))[0])
        assert o.calls == 0

    def test_dimension_mismatch(self):
        o = gaussian_oracle(quadratic([1.0, -1.0]), 1.0)
        with pytest.raises(DimensionError):
            o.sample_gradient(np.zeros(3))

    def test_unknown_noise(self):
        with pytest.raises(ValueError):
            StochasticGradientOracle(quadratic([1.0, -1.0]), "cauchy", 1.0)


class TestMinibatch:
    def test_m1_matches_single_sample(self):
        p = random_eigen_problem(4, seed=5)
        a, b = gaussian_oracle(p, 1.0, seed=3), gaussian_oracle(p, 1.0, seed=3)
        x = np.ones(4)
        for _ in range(5):
            np.testing.assert_array_equal(sample_minibatch_gradient(a, x, 1), sample_gradient(b, x)[0])

    def test_variance_shrinks_with_m(self):
        d, trials = 10, 10_000
        p = random_eigen_problem(d, seed=6)
        x = np.full(d, 0.2)
        o1, o100 = gaussian_oracle(p, 1.0, seed=1), gaussian_oracle(p, 1.0, seed=2)
        g = p.grad(x)
        v1 = np.mean([np.sum((o1.sample_minibatch_gradient(x, 1) - g) ** 2) for _ in range(trials)])
        v100 = np.mean([np.sum((o100.sample_minibatch_gradient(x, 100) - g) ** 2) for _ in range(trials)])
        assert v1 / v100 == pytest.approx(100.0, rel=0.2)

    @pytest.mark.parametrize("m", [1, 7, 50])
    def test_zero_sigma_any_m(self, m):
        p = random_eigen_problem(5, seed=1)
        o = gaussian_oracle(p, 0.0, seed=0)
        x = np.linspace(-1, 1, 5)
        np.testing.assert_array_equal(o.sample_minibatch_gradient(x, m), p.grad(x))

    def test_rejects_zero_batch(self):
        with pytest.raises(ValueError):
            exact_oracle(quadratic([1.0, -1.0])).sample_minibatch_gradient(np.zeros(2), 0)


class TestPerSample:
    def test_average_is_recentred_gradient(self):
        p = random_eigen_problem(6, seed=8)
        o = build_per_sample_eigen_oracle(p, n=40, seed=1)
        np.testing.assert_allclose(o.base.matrix, p.matrix, atol=1e-10)
        x = np.random.default_rng(0).standard_normal(6)
        avg = np.mean([o.per_sample_gradient(x, i) for i in range(40)], axis=0)
        np.testing.assert_allclose(avg, o.base.grad(x), atol=1e-10)

    def test_per_sample_lipschitz(self):
        p = random_eigen_problem(5, seed=2)
        o = build_per_sample_eigen_oracle(p, n=30, seed=3)
        rng = np.random.default_rng(4)
        R = o.base.test_radius
        for _ in range(500):
            i = int(rng.integers(30))
            x1, x2 = ball_point(rng, 5, R), ball_point(rng, 5, R)
            lhs = np.linalg.norm(o.per_sample_gradient(x1, i) - o.per_sample_gradient(x2, i))
            assert lhs <= o.sg_lipschitz * np.linalg.norm(x1 - x2) * (1 + 1e-12)

    def test_origin_gives_zero(self):
        o = build_per_sample_eigen_oracle(random_eigen_problem(4, seed=0), n=10, seed=0)
        for i in range(10):
            np.testing.assert_array_equal(o.per_sample_gradient(np.zeros(4), i), np.zeros(4))

    def test_noise_bounded_by_declared_sigma(self):
        o = build_per_sample_eigen_oracle(random_eigen_problem(4, seed=1), n=20, seed=2)
        rng = np.random.default_rng(0)
        R = o.base.test_radius
        for _ in range(200):
            x = ball_point(rng, 4, R)
            G = o.sample_batch(x, 20)
            assert np.max(np.linalg.norm(G - o.base.grad(x), axis=1)) <= o.sigma

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            build_per_sample_eigen_oracle(random_eigen_problem(5, seed=0), n=3)


class TestAssumptions:
    """Unbiasedness and norm-subGaussian tails for every noise model."""

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_unbiased_within_four_standard_errors(self, k):
        n = 100_000
        rng = np.random.default_rng(k)
        for _ in range(5):
            o = _oracles()[k]
            x = 0.5 * ball_point(rng, 10, min(o.base.test_radius, 2.0))
            D = o.sample_batch(x, n) - o.base.grad(x)
            se = D.std(axis=0, ddof=1) / np.sqrt(n)
            assert np.all(np.abs(D.mean(axis=0)) <= 4 * se + 1e-12)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_tail_dominated(self, k):
        n = 100_000
        o = _oracles()[k]
        x = np.full(10, 0.3)
        norms = np.linalg.norm(o.sample_batch(x, n) - o.base.grad(x), axis=1)
        s = o.sigma
        for t in (s, 2 * s, 3 * s):
            assert np.mean(norms >= t) <= 2 * np.exp(-t**2 / (2 * s**2)) + 3 / np.sqrt(n)


@given(st.floats(0.0, 3.0), st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_gaussian_noise_is_additive(sigma, m, seed):
    p = eigen_problem([2.0, 1.0])
    o = gaussian_oracle(p, sigma, seed=seed)
    x = np.array([0.3, -0.4])
    g = o.sample_minibatch_gradient(x, m)
    assert g.shape == (2,)
    assert np.all(np.isfinite(g))
    if sigma == 0.0:
        np.testing.assert_array_equal(g, p.grad(x))
