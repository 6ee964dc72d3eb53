"""Norm-subGaussian samplers and Monte Carlo checks of the vector concentration bounds.

Every check is one-sided: it estimates how often a bound is exceeded and
passes when that rate is at most the promised failure probability plus
``3/sqrt(trials)``.  Trials are simulated together as arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import constants
from .oracles import build_per_sample_eigen_oracle
from .problems import eigen_problem

KINDS = ("bounded", "one_dim_subgaussian", "isotropic_subgaussian")
LEMMAS = ("hoeffding", "squares", "inner", "adaptive")


@dataclass
class NSGSampler:
    """Zero-mean nSG vectors in R^d.

    ``bounded``: uniform on the radius-sigma ball; ``one_dim_subgaussian``:
    xi e_1 with xi ~ N(0, sigma^2); ``isotropic_subgaussian``: N(0, sigma^2/d I).
    """

    kind: str
    sigma: float
    d: int
    seed: object = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        self.rng = np.random.default_rng(self.seed)

    def sample(self, n: int, trials: Optional[int] = None) -> np.ndarray:
        """Draws of shape (n, d), or (trials, n, d) when ``trials`` is given."""
        shape = (n,) if trials is None else (trials, n)
        d, s = self.d, self.sigma
        if self.kind == "isotropic_subgaussian":
            return (s / math.sqrt(d)) * self.rng.standard_normal(shape + (d,))
        if self.kind == "one_dim_subgaussian":
            out = np.zeros(shape + (d,))
            out[..., 0] = s * self.rng.standard_normal(shape)
            return out
        z = self.rng.standard_normal(shape + (d,))
        z /= np.linalg.norm(z, axis=-1, keepdims=True)
        rad = s * self.rng.random(shape + (1,)) ** (1.0 / d)
        return rad * z


def sample_nsg(s: NSGSampler, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return s.sample(n)


@dataclass(frozen=True)
class CheckResult:
    lemma: str
    kind: str
    n: int
    d: int
    iota: float
    trials: int
    exceedance: float
    bound: float
    slack: float
    constant: float

    @property
    def passed(self) -> bool:
        return self.exceedance <= self.bound + self.slack

    def row(self) -> dict:
        return {
            "lemma": self.lemma,
            "kind": self.kind,
            "n": self.n,
            "d": self.d,
            "iota": self.iota,
            "trials": self.trials,
            "constant": self.constant,
            "exceedance": repr(self.exceedance),
            "bound": repr(self.bound),
            "slack": repr(self.slack),
            "passed": str(self.passed).lower(),
        }


CHECK_COLUMNS = ("lemma", "kind", "n", "d", "iota", "trials", "constant", "exceedance", "bound", "slack", "passed")


def _min_trials(trials):
    if trials < 1000:
        raise ValueError("need at least 1000 trials")


def check_hoeffding_sum(s: NSGSampler, n: int, iota: float, trials: int = 10_000,
                        C: float = constants.HOEFFDING_C) -> CheckResult:
    """Pr(|sum X_i| > C sqrt(n sigma^2 iota)) <= 2 d e^-iota."""
    _min_trials(trials)
    X = s.sample(n, trials)
    norms = np.linalg.norm(X.sum(axis=1), axis=1)
    thr = C * math.sqrt(n * s.sigma**2 * iota)
    rate = float(np.mean(norms > thr))
    return CheckResult("hoeffding", s.kind, n, s.d, iota, trials, rate,
                       min(1.0, 2 * s.d * math.exp(-iota)), constants.mc_slack(trials), C)


def check_sum_of_squares(s: NSGSampler, n: int, iota: float, trials: int = 10_000,
                         C: float = constants.SQUARES_C) -> CheckResult:
    """Pr(sum |X_i|^2 > C sigma^2 (n + iota)) <= e^-iota."""
    _min_trials(trials)
    if n == 0:
        rate = 0.0
    else:
        X = s.sample(n, trials)
        sq = np.sum(X * X, axis=(1, 2))
        rate = float(np.mean(sq > C * s.sigma**2 * (n + iota)))
    return CheckResult("squares", s.kind, n, s.d, iota, trials, rate, math.exp(-iota),
                       constants.mc_slack(trials), C)


PREDICTABLE_RULES = ("zero", "fixed", "adversarial")
NON_PREDICTABLE_RULES = ("lookahead",)


def _u_sequence(rule: Union[str, Callable], X: np.ndarray) -> np.ndarray:
    """u_i for every trial, computed from X_1..X_{i-1} only."""
    trials, n, d = X.shape
    if callable(rule):
        U = np.empty_like(X)
        for i in range(n):
            past = X[:, :i, :].copy()
            past.setflags(write=False)
            U[:, i, :] = rule(past)
        return U
    if rule in NON_PREDICTABLE_RULES:
        raise ValueError(f"u rule {rule!r} looks at X_i itself; u_i must depend only on X_1..X_(i-1)")
    if rule == "zero":
        return np.zeros_like(X)
    if rule == "fixed":
        U = np.zeros_like(X)
        U[..., 0] = 1.0
        return U
    if rule == "adversarial":
        # u_i = normalised partial sum of the past, e_1 before anything is observed
        csum = np.cumsum(X, axis=1)
        prev = np.concatenate([np.zeros((trials, 1, d)), csum[:, :-1, :]], axis=1)
        nrm = np.linalg.norm(prev, axis=2, keepdims=True)
        U = np.where(nrm > 0, prev / np.where(nrm > 0, nrm, 1.0), 0.0)
        U[:, 0, 0] = 1.0
        return U
    raise ValueError(f"unknown u rule {rule!r}")


def check_inner_product(s: NSGSampler, n: int, lam: Optional[float], iota: float, trials: int = 10_000,
                        u_rule: Union[str, Callable] = "fixed", C: float = constants.INNER_C) -> CheckResult:
    """Pr(sum <u_i, X_i> > C lam sum |u_i|^2 sigma^2 + iota/lam) <= e^-iota.

    ``lam=None`` uses sqrt(iota/(C n sigma^2)), the minimiser of the bound for unit u_i.
    """
    _min_trials(trials)
    if lam is None:
        lam = math.sqrt(iota / (C * n * s.sigma**2))
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X = s.sample(n, trials)
    U = _u_sequence(u_rule, X)
    lhs = np.sum(U * X, axis=(1, 2))
    rhs = C * lam * np.sum(U * U, axis=(1, 2)) * s.sigma**2 + iota / lam
    rate = float(np.mean(lhs > rhs))
    return CheckResult("inner", s.kind, n, s.d, iota, trials, rate, math.exp(-iota),
                       constants.mc_slack(trials), C)


def check_adaptive_sum(n: int = 100, d: int = 10, iota: float = 8.0, trials: int = 10_000, seed=0,
                       C: float = constants.HOEFFDING_C, eta: float = 0.05) -> CheckResult:
    """Random-sigma variant along the per-sample oracle path.

    X_i is the per-sample gradient noise at the i-th iterate of a stochastic
    gradient walk on a leading-eigenvector objective; its bound
    sigma_i = (|M| + max|a|^2)|x_i| is fixed by the past.  Checks
    Pr(sum sigma_i^2 < B and |sum X_i| > C sqrt(max(sum sigma_i^2, b) iota))
    <= 2 d log(B/b) e^-iota.
    """
    _min_trials(trials)
    rng = np.random.default_rng(seed)
    lam = np.linspace(1.0, 0.2, d)
    p = eigen_problem(lam, orientation=int(rng.integers(2**31)))
    orc = build_per_sample_eigen_oracle(p, n=4 * d, seed=int(rng.integers(2**31)))
    A, M = orc.samples, orc.base.matrix
    bound_coef = orc.base.lambda1 + float(np.max(np.sum(A * A, axis=1)))
    x = 0.5 * rng.standard_normal((trials, d)) / math.sqrt(d)
    S = np.zeros((trials, d))
    sig2 = np.zeros(trials)
    for _ in range(n):
        idx = rng.integers(A.shape[0], size=trials)
        a = A[idx]
        noise = x @ M - a * np.sum(a * x, axis=1, keepdims=True)
        sig2 += (bound_coef * np.linalg.norm(x, axis=1)) ** 2
        S += noise
        g = x * np.sum(x * x, axis=1, keepdims=True) - x @ M + noise
        x = x - eta * g
    B = float(np.quantile(sig2, 0.9))
    b = B / 1000.0
    viol = (sig2 < B) & (np.linalg.norm(S, axis=1) > C * np.sqrt(np.maximum(sig2, b) * iota))
    rate = float(np.mean(viol))
    bound = min(1.0, 2 * d * math.log(B / b) * math.exp(-iota))
    return CheckResult("adaptive", "per_sample", n, d, iota, trials, rate, bound, constants.mc_slack(trials), C)


def run_check(lemma: str, trials: int = 10_000, seed=0, kind: str = "isotropic_subgaussian",
              n: int = 100, d: int = 10, iota: float = 5.0, sigma: float = 1.0,
              u_rule: str = "fixed") -> CheckResult:
    """Dispatch used by the command line: one lemma at the calibration point."""
    if lemma not in LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}; choose from {LEMMAS}")
    if lemma == "adaptive":
        return check_adaptive_sum(n=n, d=d, iota=max(iota, 8.0), trials=trials, seed=seed)
    s = NSGSampler(kind, sigma, d, seed)
    if lemma == "hoeffding":
        return check_hoeffding_sum(s, n, iota, trials)
    if lemma == "squares":
        return check_sum_of_squares(s, n, iota, trials)
    return check_inner_product(s, n, None, iota, trials, u_rule=u_rule)


def calibrate_constants(n: int = 100, d: int = 10, iota: float = 5.0) -> dict:
    """Exact Gaussian quantiles behind the frozen constants (before rounding up).

    Both Gaussian families have closed-form laws.  Isotropic N(0, sigma^2/d I):
    |sum X_i|^2 = (n sigma^2/d) chi2_d and sum |X_i|^2 = (sigma^2/d) chi2_(nd).
    One-dimensional xi e_1: |sum X_i|^2 = n sigma^2 chi2_1 and
    sum |X_i|^2 = sigma^2 chi2_n.  A constant has to cover the worse of the two.
    """
    from scipy.stats import chi2

    p_sum, p_sq = 2 * d * math.exp(-iota), math.exp(-iota)
    hoeffding = max(chi2.isf(p_sum, d) / (d * iota), chi2.isf(p_sum, 1) / iota)
    squares = max(chi2.isf(p_sq, n * d) / (d * (n + iota)), chi2.isf(p_sq, n) / (n + iota))
    return {
        "hoeffding": math.sqrt(hoeffding),
        "squares": squares,
        "inner": 0.5,
    }
