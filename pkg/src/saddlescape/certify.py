"""First- and second-order stationarity certification from gradients and HVPs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import SmoothObjective


@dataclass(frozen=True)
class EigenEstimate:
    value: float
    vector: np.ndarray
    err: float
    converged: bool
    hvp_count: int


@dataclass(frozen=True)
class StationarityReport:
    grad_norm: float
    lambda_min_est: Optional[float]
    err: Optional[float]
    min_eigvec_est: Optional[np.ndarray]
    is_fosp: bool
    is_sosp: Optional[bool]
    hvp_count: int
    threshold: float

    @property
    def indeterminate(self) -> bool:
        return self.is_fosp and self.is_sosp is None

    def sosp(self, pessimistic: bool = True) -> bool:
        """Collapse the tri-state verdict; indeterminate maps to ``not pessimistic``."""
        if self.is_sosp is None:
            return not pessimistic
        return self.is_sosp

    def csv_row(self) -> dict:
        return {
            "grad_norm": repr(self.grad_norm),
            "lambda_min_est": "" if self.lambda_min_est is None else repr(self.lambda_min_est),
            "err": "" if self.err is None else repr(self.err),
            "is_fosp": str(self.is_fosp).lower(),
            "is_sosp": "indeterminate" if self.is_sosp is None else str(self.is_sosp).lower(),
            "hvp_count": str(self.hvp_count),
        }


REPORT_COLUMNS = ("grad_norm", "lambda_min_est", "err", "is_fosp", "is_sosp", "hvp_count")


def estimate_lambda_min(
    obj: SmoothObjective,
    x,
    ell: Optional[float] = None,
    tol: float = 1e-6,
    max_iters: int = 2000,
    seed=0,
    restarts: int = 3,
) -> EigenEstimate:
    """Smallest Hessian eigenvalue by power iteration on ``ell*I - H``.

    Each restart starts from an independent Gaussian vector and stops once the
    residual |H v - lambda v| drops below ``tol``.  The restart with the smallest
    Rayleigh quotient wins; ``err`` is its residual, which bounds the distance
    from ``value`` to some eigenvalue of H.
    """
    x = np.asarray(x, dtype=float)
    d = obj.dim
    shift = obj.grad_lipschitz if ell is None else ell
    if not np.isfinite(shift):
        raise ValueError("need a finite upper bound on the Hessian norm")
    # a small margin keeps ell*I - H positive definite when the bound is tight
    shift = 1.01 * shift + 1e-12
    rng = np.random.default_rng(seed)
    best = None
    count = 0
    for _ in range(max(1, restarts)):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        Hv = obj.hvp(x, v)
        count += 1
        lam = float(v @ Hv)
        res = float(np.linalg.norm(Hv - lam * v))
        it = 0
        while res > tol and it < max_iters:
            w = shift * v - Hv
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            Hv = obj.hvp(x, v)
            count += 1
            lam = float(v @ Hv)
            res = float(np.linalg.norm(Hv - lam * v))
            it += 1
        v = v / np.linalg.norm(v)
        cand = (lam, v, res, res <= tol)
        if best is None or cand[0] < best[0]:
            best = cand
    lam, v, res, conv = best
    return EigenEstimate(lam, v, res, conv, count)


def certify(
    obj: SmoothObjective,
    x,
    eps: float,
    rho: Optional[float] = None,
    budget: int = 2000,
    tol: Optional[float] = None,
    seed=0,
) -> StationarityReport:
    """Check |grad f| <= eps and lambda_min(Hess f) >= -sqrt(rho*eps).

    The eigenvalue estimate only runs when the gradient test passes.
    ``is_sosp`` is None when the estimator did not converge and its upper
    bound on lambda_min does not already rule the point out.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    rho = obj.hessian_lipschitz if rho is None else rho
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = np.asarray(x, dtype=float)
    thr = float(np.sqrt(rho * eps))
    gn = float(np.linalg.norm(obj.grad(x)))
    if gn > eps:
        return StationarityReport(gn, None, None, None, False, False, 0, thr)
    tol = thr / 10.0 if tol is None else tol
    est = estimate_lambda_min(obj, x, tol=tol, max_iters=budget, seed=seed)
    if est.converged:
        sosp: Optional[bool] = est.value + est.err >= -thr
    elif est.value < -thr:
        # Rayleigh quotients bound lambda_min from above
        sosp = False
    else:
        sosp = None
    return StationarityReport(gn, est.value, est.err, est.vector, True, sosp, est.hvp_count, thr)


def first_hit_time(trajectory, obj: SmoothObjective, eps: float, rho: Optional[float] = None,
                   stride: int = 1, seed=0) -> Optional[int]:
    """Smallest stored iterate index (on the stride) certified as an eps-SOSP."""
    for rec in trajectory.records:
        if rec.x is None or rec.t % stride:
            continue
        if rec.grad_norm > eps:
            continue
        if certify(obj, rec.x, eps, rho, seed=seed).sosp(pessimistic=True):
            return rec.t
    return None
