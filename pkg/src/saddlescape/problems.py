"""Benchmark objectives with exact derivatives and declared smoothness constants."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

MIN_CLASS = "global-min"
SADDLE_CLASS = "strict-saddle"
DEDUP_TOL = 1e-12


class DimensionError(ValueError):
    pass


def _check_dim(x: np.ndarray, d: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise DimensionError(f"{name} has shape {x.shape}, expected ({d},)")
    return x


@dataclass(frozen=True, eq=False)
class SmoothObjective:
    """A smooth f with gradient, optional Hessian-vector product and declared constants.

    ``grad_lipschitz`` (l) and ``hessian_lipschitz`` (rho) are only promised on the
    ball of radius ``test_radius`` around the origin (``inf`` means global).
    """

    dim: int
    grad_lipschitz: float
    hessian_lipschitz: float
    value_fn: Callable[[np.ndarray], float]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    hvp_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    test_radius: float = np.inf
    name: str = "objective"

    def value(self, x) -> float:
        return float(self.value_fn(_check_dim(x, self.dim)))

    def grad(self, x) -> np.ndarray:
        return self.grad_fn(_check_dim(x, self.dim))

    def hvp(self, x, v) -> np.ndarray:
        x = _check_dim(x, self.dim)
        v = _check_dim(v, self.dim, "v")
        if self.hvp_fn is None:
            return fd_hvp(self.grad_fn, x, v)
        return self.hvp_fn(x, v)

    @property
    def has_hvp(self) -> bool:
        return self.hvp_fn is not None

    def hessian(self, x) -> np.ndarray:
        """Dense Hessian assembled column by column from HVPs (test/oracle use)."""
        eye = np.eye(self.dim)
        H = np.column_stack([self.hvp(x, e) for e in eye])
        return 0.5 * (H + H.T)


def fd_hvp(grad: Callable[[np.ndarray], np.ndarray], x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Central-difference Hessian-vector product, step sqrt(eps)*(1+|x|)/|v|."""
    vn = np.linalg.norm(v)
    if vn == 0.0:
        return np.zeros_like(x)
    h = np.sqrt(np.finfo(float).eps) * (1.0 + np.linalg.norm(x)) / vn
    return (grad(x + h * v) - grad(x - h * v)) / (2.0 * h)


def fd_directional(value: Callable[[np.ndarray], float], x: np.ndarray, v: np.ndarray) -> float:
    """Central-difference directional derivative, step eps^(1/3)*(1+|x|)."""
    h = np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + np.linalg.norm(x))
    return (value(x + h * v) - value(x - h * v)) / (2.0 * h)


def random_orthogonal(d: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# f(x) = 1/4 ||x x^T - M||_F^2, whose gradient is (x x^T - M) x
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EigenProblem(SmoothObjective):
    matrix: np.ndarray = field(default=None, repr=False)
    eigenvalues: np.ndarray = field(default=None, repr=False)
    eigenvectors: np.ndarray = field(default=None, repr=False)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def eigengap(self) -> float:
        return float(self.eigenvalues[0] - self.eigenvalues[1]) if self.dim > 1 else np.inf

    @property
    def f_star(self) -> float:
        return 0.25 * float(np.sum(self.eigenvalues[1:] ** 2))


def eigen_problem(spectrum, orientation=None) -> EigenProblem:
    """Build the leading-eigenvector objective for M = Q diag(spectrum) Q^T.

    ``orientation`` is an orthogonal matrix, an integer seed for a random one,
    or None for the coordinate axes.
    """
    lam = np.asarray(spectrum, dtype=float)
    d = lam.size
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    if lam[-1] < 0:
        raise ValueError("M must be positive semidefinite")
    if d > 1 and not lam[0] > lam[1]:
        raise ValueError("EigenProblem needs a strict gap lambda1 > lambda2")
    if orientation is None:
        Q = np.eye(d)
    elif np.ndim(orientation) == 2:
        Q = np.asarray(orientation, dtype=float)
    else:
        Q = random_orthogonal(d, orientation)
    Q = Q[:, order]
    M = (Q * lam) @ Q.T
    M = 0.5 * (M + M.T)
    return _eigen_from_parts(M, lam, Q)


def eigen_problem_from_matrix(M) -> EigenProblem:
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    lam, Q = np.linalg.eigh(M)
    lam, Q = lam[::-1], Q[:, ::-1]
    lam = np.where(np.abs(lam) < 1e-14 * max(1.0, abs(lam[0])), 0.0, lam)
    if lam[-1] < 0:
        raise ValueError("M must be positive semidefinite")
    if M.shape[0] > 1 and not lam[0] > lam[1]:
        raise ValueError("EigenProblem needs a strict gap lambda1 > lambda2")
    return _eigen_from_parts(M, lam, Q)


def _eigen_from_parts(M, lam, Q) -> EigenProblem:
    d = lam.size
    lam1 = float(lam[0])
    # Constants hold on the ball |x| <= R with R = 2 sqrt(lambda1):
    #   Hess = |x|^2 I + 2 x x^T - M has spectrum in [-|M|, 3|x|^2], so
    #   l = 3 R^2 + |M| = 13 lambda1 bounds |Hess| on the ball;
    #   |Hess(x) - Hess(y)| <= (|x|+|y|)|x-y| + 2(|x|+|y|)|x-y| <= 6R|x-y|,
    #   declared conservatively as rho = 12 R.
    R = 2.0 * np.sqrt(lam1)
    ell = 3.0 * R**2 + lam1
    rho = 12.0 * R

    def value(x):
        # the 1/4 scaling makes grad = (xx^T - M)x and Hess = |x|^2 I + 2xx^T - M exact derivatives
        xx = x @ x
        return 0.25 * (xx * xx - 2.0 * (x @ (M @ x)) + fro2)

    def grad(x):
        return x * (x @ x) - M @ x

    def hvp(x, v):
        return (x @ x) * v + 2.0 * x * (x @ v) - M @ v

    fro2 = float(np.sum(M * M))
    return EigenProblem(
        dim=d,
        grad_lipschitz=float(ell),
        hessian_lipschitz=float(rho),
        value_fn=value,
        grad_fn=grad,
        hvp_fn=hvp,
        test_radius=float(R),
        name=f"eigen-d{d}",
        matrix=M,
        eigenvalues=np.asarray(lam, dtype=float),
        eigenvectors=np.asarray(Q, dtype=float),
    )


def eigen_grad(p: EigenProblem, x) -> np.ndarray:
    return p.grad(x)


def eigen_hvp(p: EigenProblem, x, v) -> np.ndarray:
    return p.hvp(x, v)


def eigen_stationary_catalog(p: EigenProblem) -> list[tuple[np.ndarray, str]]:
    """All stationary points 0 and +-sqrt(lambda_i) v_i with their class."""
    if not p.eigengap > 0:
        raise ValueError("catalog requires a strict eigengap")
    d = p.dim
    entries: list[tuple[np.ndarray, str]] = [(np.zeros(d), SADDLE_CLASS)]
    for i, lam in enumerate(p.eigenvalues):
        cls = MIN_CLASS if i == 0 else SADDLE_CLASS
        for sign in (1.0, -1.0):
            pt = sign * np.sqrt(lam) * p.eigenvectors[:, i]
            if any(np.linalg.norm(pt - q) <= DEDUP_TOL for q, _ in entries):
                continue
            entries.append((pt, cls))
    return entries


def random_eigen_problem(d: int, seed, lambda1: float = 1.0, gap: float = 0.5) -> EigenProblem:
    """Random orientation; lambda_2..lambda_d uniform in [0, lambda1 - gap]."""
    rng = np.random.default_rng(seed)
    rest = np.sort(rng.uniform(0.0, lambda1 - gap, size=d - 1))[::-1]
    rest[0] = lambda1 - gap
    return eigen_problem(np.concatenate([[lambda1], rest]), orientation=random_orthogonal(d, rng))


# ---------------------------------------------------------------------------
# f(x) = 1/2 x^T H x
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadraticObjective(SmoothObjective):
    spectrum: np.ndarray = field(default=None, repr=False)
    basis: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def hessian_matrix(self) -> np.ndarray:
        if self.basis is None:
            return np.diag(self.spectrum)
        return (self.basis * self.spectrum) @ self.basis.T

    @property
    def lambda_min(self) -> float:
        return float(np.min(self.spectrum))

    @property
    def min_eigvec(self) -> np.ndarray:
        i = int(np.argmin(self.spectrum))
        if self.basis is None:
            e = np.zeros(self.dim)
            e[i] = 1.0
            return e
        return self.basis[:, i].copy()

    def gd_map(self, eta: float) -> np.ndarray:
        return np.eye(self.dim) - eta * self.hessian_matrix


QuadraticSaddle = QuadraticObjective


def quadratic(spectrum, basis=None, test_radius: float = 10.0) -> QuadraticObjective:
    lam = np.asarray(spectrum, dtype=float)
    d = lam.size
    if basis is not None and np.ndim(basis) != 2:
        basis = random_orthogonal(d, basis)
    if basis is None:
        # diagonal fast path, no d x d matrix
        def grad(x):
            return lam * x

        def hvp(x, v):
            return lam * v

        def value(x):
            return 0.5 * float(x @ (lam * x))
    else:
        B = np.asarray(basis, dtype=float)
        H = (B * lam) @ B.T
        H = 0.5 * (H + H.T)

        def grad(x):
            return H @ x

        def hvp(x, v):
            return H @ v

        def value(x):
            return 0.5 * float(x @ (H @ x))

    return QuadraticObjective(
        dim=d,
        grad_lipschitz=float(np.max(np.abs(lam))),
        hessian_lipschitz=0.0,
        value_fn=value,
        grad_fn=grad,
        hvp_fn=hvp,
        test_radius=test_radius,
        name=f"quadratic-d{d}",
        spectrum=lam,
        basis=None if basis is None else np.asarray(basis, dtype=float),
    )


def quadratic_saddle_build(spectrum, basis=None) -> QuadraticObjective:
    """Strict-saddle quadratic; rejects spectra without a negative entry."""
    lam = np.asarray(spectrum, dtype=float)
    if not np.any(lam < 0):
        raise ValueError("quadratic saddle needs at least one negative eigenvalue")
    return quadratic(lam, basis=basis)


def fixed_curvature_saddle(d: int, curvature: float, ell: float = 1.0, seed=None) -> QuadraticObjective:
    """Saddle ensemble member: one eigenvalue -curvature, the rest log-spaced in [curvature, ell].

    Only ``d`` changes between members built with the same curvature and ell.
    """
    pos = np.geomspace(curvature, ell, d - 1) if d > 1 else np.empty(0)
    spectrum = np.concatenate([[-curvature], pos])
    return quadratic_saddle_build(spectrum, basis=seed)
