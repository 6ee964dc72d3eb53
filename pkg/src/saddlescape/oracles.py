"""Stochastic gradient sources with norm-subGaussian noise."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .problems import EigenProblem, SmoothObjective, _check_dim, eigen_problem_from_matrix

NOISE_KINDS = ("none", "gaussian", "bounded_sphere", "per_sample")


@dataclass(eq=False)
class StochasticGradientOracle:
    """Unbiased noisy gradients g(x; theta) of ``base``.

    Noise models:

    * ``gaussian`` -- additive N(0, (sigma^2/d) I), so E|g - grad f|^2 = sigma^2;
    * ``bounded_sphere`` -- additive, uniform on the radius-sigma sphere;
    * ``per_sample`` -- g(x; i) = (x x^T - a_i a_i^T) x with i uniform over the samples;
    * ``none`` -- exact gradients.

    ``sg_lipschitz`` is the per-theta Lipschitz constant of x -> g(x; theta);
    ``inf`` means it is not available.  The oracle owns its random stream; use
    :meth:`fork` to get an independent copy for another run.
    """

    base: SmoothObjective
    noise: str = "gaussian"
    sigma: float = 0.0
    sg_lipschitz: float = np.inf
    seed: object = 0
    samples: Optional[np.ndarray] = field(default=None, repr=False)
    calls: int = field(default=0, init=False)

    def __post_init__(self):
        if self.noise not in NOISE_KINDS:
            raise ValueError(f"unknown noise model {self.noise!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.noise == "per_sample" and self.samples is None:
            raise ValueError("per_sample oracle needs a sample matrix")
        self.rng = np.random.default_rng(self.seed)

    @property
    def dim(self) -> int:
        return self.base.dim

    def fork(self, seed) -> "StochasticGradientOracle":
        return replace(self, seed=seed)

    def _noise(self, m: int) -> np.ndarray:
        d = self.dim
        if self.noise == "gaussian":
            return (self.sigma / np.sqrt(d)) * self.rng.standard_normal((m, d))
        z = self.rng.standard_normal((m, d))
        return self.sigma * z / np.linalg.norm(z, axis=1, keepdims=True)

    def sample_gradient(self, x) -> tuple[np.ndarray, int]:
        """One stochastic gradient and the id of the draw (call index)."""
        theta = self.calls
        return self.sample_minibatch_gradient(x, 1), theta

    def sample_minibatch_gradient(self, x, m: int = 1) -> np.ndarray:
        if m < 1:
            raise ValueError("mini-batch size must be >= 1")
        x = _check_dim(x, self.dim)
        self.calls += m
        if self.noise == "none" or (self.noise != "per_sample" and self.sigma == 0.0):
            return self.base.grad_fn(x)
        if self.noise == "per_sample":
            idx = self.rng.integers(self.samples.shape[0], size=m)
            A = self.samples[idx]
            if m == 1:
                a = A[0]
                return x * (x @ x) - a * (a @ x)
            return x * (x @ x) - A.T @ (A @ x) / m
        z = self._noise(m)
        g = self.base.grad_fn(x)
        return g + (z[0] if m == 1 else z.mean(axis=0))

    def sample_batch(self, x, n: int) -> np.ndarray:
        """n independent single-sample gradients as rows of an (n, d) array."""
        x = _check_dim(x, self.dim)
        self.calls += n
        g = self.base.grad_fn(x)
        if self.noise == "none" or (self.noise != "per_sample" and self.sigma == 0.0):
            return np.tile(g, (n, 1))
        if self.noise == "per_sample":
            idx = self.rng.integers(self.samples.shape[0], size=n)
            A = self.samples[idx]
            return (x @ x) * x[None, :] - (A @ x)[:, None] * A
        return g[None, :] + self._noise(n)

    def per_sample_gradient(self, x, i: int) -> np.ndarray:
        """g(x; i) for a fixed sample index (shared-theta probes)."""
        if self.noise == "per_sample":
            a = self.samples[i]
            return x * (x @ x) - a * (a @ x)
        raise ValueError("per-sample gradients only exist for the per_sample model")


def gaussian_oracle(base: SmoothObjective, sigma: float, seed=0, sg_lipschitz=None) -> StochasticGradientOracle:
    # additive noise independent of x keeps g(., theta) exactly as Lipschitz as grad f
    lip = base.grad_lipschitz if sg_lipschitz is None else sg_lipschitz
    return StochasticGradientOracle(base, "gaussian", sigma, lip, seed)


def sphere_oracle(base: SmoothObjective, sigma: float, seed=0, sg_lipschitz=None) -> StochasticGradientOracle:
    lip = base.grad_lipschitz if sg_lipschitz is None else sg_lipschitz
    return StochasticGradientOracle(base, "bounded_sphere", sigma, lip, seed)


def exact_oracle(base: SmoothObjective) -> StochasticGradientOracle:
    return StochasticGradientOracle(base, "none", 0.0, base.grad_lipschitz, 0)


def sample_gradient(o: StochasticGradientOracle, x):
    return o.sample_gradient(x)


def sample_minibatch_gradient(o: StochasticGradientOracle, x, m: int) -> np.ndarray:
    return o.sample_minibatch_gradient(x, m)


def build_per_sample_eigen_oracle(p: EigenProblem, n: int, seed=0) -> StochasticGradientOracle:
    """Finite-sum oracle whose samples satisfy (1/n) sum a_i a_i^T = M.

    Gaussian draws z_i are whitened by their empirical second moment S and
    coloured by M^(1/2): a_i = M^(1/2) S^(-1/2) z_i.  The returned oracle's
    ``base`` is the EigenProblem of the recentred matrix.
    """
    d = p.dim
    if n < d:
        raise ValueError(f"need n >= d samples (n={n}, d={d})")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, d))
    S = Z.T @ Z / n
    w, U = np.linalg.eigh(S)
    S_inv_half = (U / np.sqrt(w)) @ U.T
    lam = np.clip(p.eigenvalues, 0.0, None)
    M_half = (p.eigenvectors * np.sqrt(lam)) @ p.eigenvectors.T
    A = Z @ (M_half @ S_inv_half).T
    base = eigen_problem_from_matrix(A.T @ A / n)
    R = base.test_radius
    a2 = np.max(np.sum(A * A, axis=1))
    # Jacobian of g(.; i) is |x|^2 I + 2 x x^T - a_i a_i^T, bounded by 3R^2 + |a_i|^2 on the ball
    lip = 3.0 * R**2 + a2
    # noise (M - a_i a_i^T) x is bounded by (|M| + |a_i|^2) R on the ball
    sigma = (base.lambda1 + a2) * R
    return StochasticGradientOracle(base, "per_sample", float(sigma), float(lip), seed, samples=A)
