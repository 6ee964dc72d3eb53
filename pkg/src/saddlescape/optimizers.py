"""Perturbed (stochastic) gradient descent loops and their parameter schedules.

Random streams: a run seed is split into two child streams, the first for the
injected perturbations and the second for the stochastic-gradient oracle.  This
is what makes PGD(r=0) == GD, PSGD(sigma=0) == PGD and minibatch(m=1) == PSGD
hold bit for bit.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .certify import certify, estimate_lambda_min
from .oracles import StochasticGradientOracle
from .problems import SmoothObjective

PRESETS = ("theory-pgd", "theory-psgd", "theory-minibatch", "practical")
STORE_X_MAX_DIM = 100


class NonFiniteError(ArithmeticError):
    pass


class DegenerateRegimeWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamSet:
    eta: float
    r: float
    script_T: int
    script_F: float
    script_S: float
    iota: float
    frak_N: float
    frak_M: float
    budget_T: int
    preset: str
    eps: float = 0.0
    rho: float = 0.0
    ell: float = 0.0
    m: int = 1

    def __post_init__(self):
        for name in ("eta", "script_F", "script_S", "iota"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.r < 0:
            raise ValueError("r must be non-negative")
        if self.script_T < 1 or self.frak_N < 1 or self.frak_M < 1 or self.budget_T < 1:
            raise ValueError("script_T, frak_N, frak_M and budget_T must be >= 1")

    def with_(self, **changes) -> "ParamSet":
        from dataclasses import replace

        return replace(self, **changes)

    @property
    def omega(self) -> float:
        """Stuck-region width threshold 2^(2-iota) * l * S."""
        return 2.0 ** (2.0 - self.iota) * self.ell * self.script_S

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def frak_n(sigma: float, eps: float, ell: float, rho: float, sg_lipschitz: float, d: int) -> float:
    """1 + min{sigma^2/eps^2 + lt^2/(l sqrt(rho eps)), sigma^2 d / eps^2}; lt = inf drops the first branch."""
    s2 = sigma**2 / eps**2
    lip_term = sg_lipschitz**2 / (ell * math.sqrt(rho * eps)) if math.isfinite(sg_lipschitz) else math.inf
    return 1.0 + min(s2 + lip_term, s2 * d)


def frak_m(sigma, eps, ell, rho, sg_lipschitz, d, m: int) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    return 1.0 + (frak_n(sigma, eps, ell, rho, sg_lipschitz, d) - 1.0) / m


def _iota(log_arg: float, multiplier: float, iota: Optional[float]) -> float:
    if iota is not None:
        return float(iota)
    return max(1.0, multiplier * math.log(max(log_arg, 1.0)))


def _check_positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def _warn_degenerate(ell, rho, eps):
    if ell / math.sqrt(rho * eps) < 1:
        warnings.warn(
            "l/sqrt(rho*eps) < 1: every eps-first-order stationary point is already second order",
            DegenerateRegimeWarning,
            stacklevel=3,
        )


def params_pgd_variant(ell, rho, eps, delta_f, d, delta=0.1, iota_multiplier=1.0, iota=None) -> ParamSet:
    """Constants for the occasionally-perturbed variant (uniform-ball perturbation)."""
    _check_positive(ell=ell, rho=rho, eps=eps, delta_f=delta_f, d=d)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    _warn_degenerate(ell, rho, eps)
    io = _iota(d * ell * delta_f / (rho * eps * delta), iota_multiplier, iota)
    eta = 1.0 / ell
    r = eps / (400.0 * io**3)
    T = math.ceil(ell / math.sqrt(rho * eps) * io)
    F = math.sqrt(eps**3 / rho) / (50.0 * io**3)
    S = math.sqrt(eps / rho) / (4.0 * io)
    budget = math.ceil(8.0 * max(delta_f * T / F, delta_f / (eta * eps**2)))
    return ParamSet(eta, r, T, F, S, io, 1.0, 1.0, budget, "theory-pgd", eps, rho, ell, 1)


def params_psgd(ell, rho, eps, sigma=0.0, sg_lipschitz=math.inf, d=1, delta_f=1.0, delta=0.1, m=1,
                iota_multiplier=1.0, preset="practical", iota=None, r_scale=1.0,
                budget_factor=50.0) -> ParamSet:
    """Step size, perturbation radius and analysis windows for (mini-batch) PSGD.

    ``theory-*`` presets use the high-probability constants
    (eta = 1/(iota^9 l N), r = iota eps sqrt(N), T = iota/(eta sqrt(rho eps)),
    F = sqrt(eps^3/rho)/iota^5, S = 2 sqrt(eps/rho)/iota^2); ``theory-pgd`` is the
    sigma = 0 case.  ``practical`` keeps the single log factor in the escape
    window but drops the iota powers: eta = 1/(l N), r = r_scale * eps sqrt(N),
    F = sqrt(eps^3/rho)/50, S = sqrt(eps/rho)/4, budget = budget_factor * l dF N/eps^2.
    N is replaced by the mini-batch factor whenever m > 1 (or for ``theory-minibatch``).
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    _check_positive(ell=ell, rho=rho, eps=eps, delta_f=delta_f, d=d, m=m)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if not sg_lipschitz > 0:
        raise ValueError("sg_lipschitz must be in (0, inf]")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    _warn_degenerate(ell, rho, eps)
    if preset == "theory-pgd":
        sigma = 0.0
    N = frak_n(sigma, eps, ell, rho, sg_lipschitz, d)
    Mf = frak_m(sigma, eps, ell, rho, sg_lipschitz, d, m)
    scale = Mf if (m > 1 or preset == "theory-minibatch") else N
    io = _iota(d * ell * delta_f * scale / (rho * eps * delta), iota_multiplier, iota)
    if preset.startswith("theory"):
        eta = 1.0 / (io**9 * ell * scale)
        r = io * eps * math.sqrt(scale)
        T = math.ceil(io / (eta * math.sqrt(rho * eps)))
        F = math.sqrt(eps**3 / rho) / io**5
        S = 2.0 * math.sqrt(eps / rho) / io**2
        budget = math.ceil(100.0 * max(delta_f * T / F, delta_f / (eta * eps**2)))
    else:
        eta = 1.0 / (ell * scale)
        r = r_scale * eps * math.sqrt(scale)
        T = math.ceil(io / (eta * math.sqrt(rho * eps)))
        F = math.sqrt(eps**3 / rho) / 50.0
        S = math.sqrt(eps / rho) / 4.0
        budget = math.ceil(budget_factor * ell * delta_f * scale / eps**2)
    return ParamSet(eta, r, T, F, S, io, N, Mf, budget, preset, eps, rho, ell, m)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class Record:
    t: int
    f: float
    grad_norm: float
    event: str = "step"
    x: Optional[np.ndarray] = None
    lambda_min_est: Optional[float] = None


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    seed: object = None
    params: Optional[ParamSet] = None
    problem_id: str = ""
    hit_time: Optional[int] = None
    stop_time: Optional[int] = None
    n_steps: int = 0
    x_final: Optional[np.ndarray] = None
    f_final: float = math.nan
    perturb_times: list = field(default_factory=list)

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    @property
    def f(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([r.grad_norm for r in self.records])

    @property
    def xs(self) -> np.ndarray:
        return np.array([r.x for r in self.records])

    def events(self, kind: str) -> list[int]:
        return [r.t for r in self.records if r.event == kind]

    def csv_rows(self, run_id) -> Iterable[dict]:
        for r in self.records:
            yield {
                "run_id": run_id,
                "t": r.t,
                "f": repr(r.f),
                "grad_norm": repr(r.grad_norm),
                "lambda_min_est": "" if r.lambda_min_est is None else repr(r.lambda_min_est),
                "event": r.event,
            }

    def random_iterate(self, seed=0) -> Record:
        """Pick a stored iterate uniformly at random (random-output mode)."""
        rng = np.random.default_rng(seed)
        return self.records[int(rng.integers(len(self.records)))]


TRAJECTORY_COLUMNS = ("run_id", "t", "f", "grad_norm", "lambda_min_est", "event")

Hook = Callable[[int, np.ndarray], Optional[bool]]


def run_streams(seed) -> tuple[np.random.Generator, np.random.SeedSequence]:
    """Perturbation generator and the oracle's seed sequence for one run."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    pert, orc = ss.spawn(2)
    return np.random.default_rng(pert), orc


def uniform_ball(rng: np.random.Generator, d: int, r: float) -> np.ndarray:
    """Uniform draw from the radius-r ball: Gaussian direction, radius r U^(1/d)."""
    z = rng.standard_normal(d)
    z /= np.linalg.norm(z)
    return r * rng.random() ** (1.0 / d) * z


class _Monitor:
    """Records, certification-based hit detection and hooks for one run."""

    def __init__(self, obj, params, seed, record_every, store_x, certify_every, eps, rho,
                 stop_at_hit, hooks, problem_id):
        self.obj = obj
        self.record_every = max(1, int(record_every)) if record_every else 0
        self.store_x = obj.dim <= STORE_X_MAX_DIM if store_x is None else store_x
        self.eps = eps
        self.rho = rho
        self.certify_every = certify_every
        if eps is not None and certify_every is None:
            T = params.script_T if params is not None else 10
            self.certify_every = max(1, T // 10)
        self.stop_at_hit = stop_at_hit
        self.hooks = list(hooks or ())
        self.traj = Trajectory(seed=seed, params=params, problem_id=problem_id or obj.name)
        self.cert_seed = 0

    def observe(self, t: int, x: np.ndarray, g_true: Optional[np.ndarray], event: str = "step") -> bool:
        """Return True if the run should stop before stepping from x_t."""
        obj = self.obj
        rec = None
        lam = None
        hit = False
        if self.certify_every and self.traj.hit_time is None and t % self.certify_every == 0:
            g = obj.grad_fn(x) if g_true is None else g_true
            g_true = g
            if np.linalg.norm(g) <= self.eps:
                rep = certify(obj, x, self.eps, self.rho, seed=self.cert_seed)
                lam = rep.lambda_min_est
                if rep.sosp(pessimistic=True):
                    hit = True
                    self.traj.hit_time = t
                    event = "sosp-hit"
        if hit or event != "step" or (self.record_every and t % self.record_every == 0):
            g = obj.grad_fn(x) if g_true is None else g_true
            f = float(obj.value_fn(x))
            gn = float(np.linalg.norm(g))
            if not (math.isfinite(f) and math.isfinite(gn)):
                raise NonFiniteError(f"non-finite iterate at t={t}: f={f}, |grad|={gn}")
            rec = Record(t, f, gn, event, x.copy() if self.store_x else None, lam)
            self.traj.records.append(rec)
        stop = hit and self.stop_at_hit
        for h in self.hooks:
            if h(t, x):
                stop = True
        return stop

    def finish(self, t: int, x: np.ndarray, stopped: bool) -> Trajectory:
        tr = self.traj
        tr.n_steps = t
        tr.stop_time = t if stopped else None
        tr.x_final = x.copy()
        tr.f_final = float(self.obj.value_fn(x))
        if not math.isfinite(tr.f_final):
            raise NonFiniteError(f"non-finite final value {tr.f_final}")
        return tr


def _check_finite(g, t):
    if not np.all(np.isfinite(g)):
        raise NonFiniteError(f"non-finite gradient at t={t}")


def _driver(obj: SmoothObjective, x0, eta: float, r: float, T: int, seed, *, params=None,
            oracle: Optional[StochasticGradientOracle] = None, m: int = 1, hooks=(),
            record_every=1, store_x=None, certify_every=None, eps=None, rho=None,
            stop_at_hit=False, problem_id="") -> Trajectory:
    """x_{t+1} = x_t - eta (g_t + xi_t) with xi_t ~ N(0, (r^2/d) I); g_t exact or from ``oracle``."""
    if not eta > 0:
        raise ValueError("step size must be positive")
    x = np.array(x0, dtype=float)
    d = obj.dim
    if x.shape != (d,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({d},)")
    pert_rng, orc_ss = run_streams(seed)
    if oracle is not None:
        oracle = oracle.fork(orc_ss)
    mon = _Monitor(obj, params, seed, record_every, store_x, certify_every, eps, rho,
                   stop_at_hit, hooks, problem_id)
    scale = r / math.sqrt(d)
    grad_fn = obj.grad_fn
    stopped = False
    t = 0
    for t in range(T + 1):
        if oracle is None:
            g = grad_fn(x)
            _check_finite(g, t)
            if mon.observe(t, x, g):
                stopped = True
                break
        else:
            if mon.observe(t, x, None):
                stopped = True
                break
        if t == T:
            break
        if oracle is not None:
            g = oracle.sample_minibatch_gradient(x, m)
            _check_finite(g, t)
        if r > 0:
            x = x - eta * (g + scale * pert_rng.standard_normal(d))
        else:
            x = x - eta * g
    return mon.finish(t, x, stopped)


def run_gd(obj, x0, eta, T, hooks=(), **kw) -> Trajectory:
    """Plain gradient descent x_{t+1} = x_t - eta grad f(x_t)."""
    return _driver(obj, x0, eta, 0.0, T, seed=0, hooks=hooks, **kw)


def run_pgd(obj, x0, params: ParamSet, T=None, seed=0, hooks=(), **kw) -> Trajectory:
    """Gradient descent with a fresh Gaussian perturbation, E|xi|^2 = r^2, at every step."""
    T = params.budget_T if T is None else T
    return _driver(obj, x0, params.eta, params.r, T, seed, params=params, hooks=hooks, **kw)


def run_psgd(oracle: StochasticGradientOracle, x0, params: ParamSet, T=None, seed=0, hooks=(), **kw) -> Trajectory:
    T = params.budget_T if T is None else T
    return _driver(oracle.base, x0, params.eta, params.r, T, seed, params=params, oracle=oracle,
                   m=1, hooks=hooks, **kw)


def run_minibatch_psgd(oracle: StochasticGradientOracle, x0, params: ParamSet, m: int, T=None, seed=0,
                       hooks=(), **kw) -> Trajectory:
    if m < 1:
        raise ValueError("m must be >= 1")
    T = params.budget_T if T is None else T
    return _driver(oracle.base, x0, params.eta, params.r, T, seed, params=params, oracle=oracle,
                   m=m, hooks=hooks, **kw)


def run_pgd_variant(obj, x0, params: ParamSet, eps: float, T=None, seed=0, hooks=(),
                    record_every=1, store_x=None, certify_every=None, rho=None,
                    stop_at_hit=False, problem_id="") -> Trajectory:
    """Perturb with xi ~ Uniform(B_0(r)) only when |grad f| <= eps and the last
    perturbation is more than script_T steps old; otherwise a plain GD step."""
    T = params.budget_T if T is None else T
    x = np.array(x0, dtype=float)
    d = obj.dim
    pert_rng, _ = run_streams(seed)
    mon = _Monitor(obj, params, seed, record_every, store_x, certify_every,
                   eps if certify_every else None, rho, stop_at_hit, hooks, problem_id)
    eta, window = params.eta, params.script_T
    t_perturb = 0
    stopped = False
    t = 0
    for t in range(T + 1):
        g = obj.grad_fn(x)
        _check_finite(g, t)
        event = "step"
        if t < T and np.linalg.norm(g) <= eps and t - t_perturb > window:
            x = x - eta * uniform_ball(pert_rng, d, params.r)
            t_perturb = t
            mon.traj.perturb_times.append(t)
            event = "perturb"
            g = obj.grad_fn(x)
        if mon.observe(t, x, g, event):
            stopped = True
            break
        if t == T:
            break
        x = x - eta * g
    return mon.finish(t, x, stopped)


def min_eigvec(obj: SmoothObjective, x, seed=0) -> tuple[float, np.ndarray]:
    if isinstance(getattr(obj, "spectrum", None), np.ndarray):
        return obj.lambda_min, obj.min_eigvec
    est = estimate_lambda_min(obj, x, tol=1e-10, max_iters=20000, seed=seed)
    return est.value, est.vector


@dataclass
class CoupledPair:
    first: Trajectory
    second: Trajectory
    diff_norms: np.ndarray
    decrease_first: float
    decrease_second: float
    e1: np.ndarray
    lambda_min: float

    @property
    def min_decrease(self) -> float:
        return min(self.decrease_first, self.decrease_second)


def coupled_gd_pair(obj, x_tilde, r0: float, params: ParamSet, T=None, seed=0, record_every=1) -> CoupledPair:
    """Two GD runs from x~ + eta(xi_perp +- (r0/2) e1), xi ~ Uniform(B_0(r)).

    They share the perturbation outside the minimum-eigenvector direction e1
    and start eta*r0 apart along e1.  Decreases are measured from each run's
    own starting value.
    """
    if r0 < 0:
        raise ValueError("r0 must be non-negative")
    T = params.script_T if T is None else T
    x_tilde = np.asarray(x_tilde, dtype=float)
    lam, e1 = min_eigvec(obj, x_tilde, seed=seed)
    if lam >= 0:
        raise ValueError(f"lambda_min = {lam:.3g} >= 0: no escape direction at x~")
    rng, _ = run_streams(seed)
    xi = uniform_ball(rng, obj.dim, params.r)
    xi_perp = xi - (xi @ e1) * e1
    base = x_tilde + params.eta * xi_perp
    x0 = base + 0.5 * params.eta * r0 * e1
    y0 = base - 0.5 * params.eta * r0 * e1
    a = run_gd(obj, x0, params.eta, T, record_every=record_every, store_x=True)
    b = run_gd(obj, y0, params.eta, T, record_every=record_every, store_x=True)
    diffs = np.linalg.norm(a.xs - b.xs, axis=1)
    return CoupledPair(a, b, diffs, a.f_final - a.f[0], b.f_final - b.f[0], e1, lam)
