"""Sweep orchestration, hit-time statistics, slopes, escape rates and CSV output.

Files written by :func:`run_experiment` into the output directory:

``<name>.csv``
    one row per (cell, seed): dim, epsilon, m, seed, hit_time, censored,
    f_final, wallclock_ms.  ``hit_time`` is empty for censored runs.
``<name>_summary.csv``
    one row per cell, gnuplot-ready: ``set datafile separator ','`` and
    ``plot '<name>_summary.csv' using 2:7:8:9 with yerrorbars`` draws median
    hit time against epsilon with its interquartile range.  Censored runs
    enter the order statistics as +inf (beyond the budget); a median or
    quartile that lands on a censored run is flagged and left empty.
``manifest.json``
    schema version, library version, config hash and the files written.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .certify import certify
from .config import ConfigError, ExperimentConfig
from .oracles import build_per_sample_eigen_oracle, exact_oracle, gaussian_oracle, sphere_oracle
from .optimizers import (
    TRAJECTORY_COLUMNS,
    ParamSet,
    coupled_gd_pair,
    params_pgd_variant,
    params_psgd,
    run_gd,
    run_minibatch_psgd,
    run_pgd,
    run_pgd_variant,
    run_psgd,
    run_streams,
    uniform_ball,
)
from .problems import (
    EigenProblem,
    QuadraticObjective,
    SmoothObjective,
    eigen_problem,
    eigen_stationary_catalog,
    fixed_curvature_saddle,
    quadratic,
    random_eigen_problem,
)

SCHEMA_VERSION = 1
AXES = ("dim", "epsilon", "m")
RUN_COLUMNS = AXES + ("seed", "hit_time", "censored", "f_final", "wallclock_ms")
SUMMARY_COLUMNS = AXES + ("n_seeds", "n_censored", "median", "q1", "q3",
                          "median_censored", "q3_censored", "median_convention")
MEDIAN_CONVENTION = "censored-at-budget"


class OutputError(OSError):
    pass


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# building one cell
# ---------------------------------------------------------------------------


@dataclass
class Instance:
    obj: SmoothObjective
    oracle: object
    params: ParamSet
    x0: np.ndarray
    rho: float
    target: str
    algorithm: str
    certify_every: int
    budget: int


def _orientation_seed(cfg: ExperimentConfig):
    s = cfg.problem.orientation_seed
    return cfg.output.master_seed if s is None else s


def build_problem(cfg: ExperimentConfig, dim: int) -> SmoothObjective:
    p = cfg.problem
    seed = _orientation_seed(cfg)
    if p.kind == "eigen":
        if p.spectrum is not None:
            return eigen_problem(p.spectrum, orientation=seed)
        return random_eigen_problem(dim, seed, lambda1=p.lambda1, gap=p.eigengap)
    if p.spectrum is not None:
        return quadratic(p.spectrum)
    return fixed_curvature_saddle(dim, p.curvature, p.ell, seed=seed)


def default_saddle(obj: SmoothObjective) -> np.ndarray:
    """Canonical strict saddle: the origin for quadratics, sqrt(l_2) v_2 for eigen problems."""
    if isinstance(obj, EigenProblem) and obj.dim > 1:
        v = obj.eigenvectors[:, 1]
        # fix the sign so the first nonzero coordinate is positive
        k = int(np.argmax(np.abs(v) > 1e-12))
        v = v if v[k] > 0 else -v
        return math.sqrt(max(obj.eigenvalues[1], 0.0)) * v
    return np.zeros(obj.dim)


def default_rho(obj: SmoothObjective, eps: float, rho: Optional[float] = None) -> float:
    """Hessian-Lipschitz parameter used by the schedules and the certifier.

    Quadratics have rho = 0, so they get the value for which sqrt(rho eps)
    equals their most negative curvature.
    """
    if rho is not None:
        return float(rho)
    if isinstance(obj, QuadraticObjective):
        return float(obj.lambda_min) ** 2 / eps
    return float(obj.hessian_lipschitz)


def _start(cfg: ExperimentConfig, obj: SmoothObjective) -> np.ndarray:
    mode = cfg.problem.start
    if mode in ("auto", "origin"):
        return np.zeros(obj.dim)
    if mode == "saddle":
        return default_saddle(obj)
    rng = np.random.default_rng([cfg.output.master_seed, obj.dim, 17])
    return rng.standard_normal(obj.dim) / math.sqrt(obj.dim)


def build_instance(cfg: ExperimentConfig, dim: int, eps: float, m: int) -> Instance:
    obj = build_problem(cfg, dim)
    o, opt = cfg.oracle, cfg.optimizer
    stochastic = opt.algorithm in ("psgd", "minibatch-psgd")
    oracle = None
    sigma, sgl = 0.0, math.inf
    if stochastic:
        if o.noise == "per_sample":
            if not isinstance(obj, EigenProblem):
                raise ConfigError("oracle.noise", "per_sample needs an eigen problem")
            oracle = build_per_sample_eigen_oracle(obj, o.samples, seed=o.seed)
            obj = oracle.base
        elif o.noise == "gaussian":
            oracle = gaussian_oracle(obj, o.sigma, seed=o.seed, sg_lipschitz=o.sg_lipschitz)
        elif o.noise == "bounded_sphere":
            oracle = sphere_oracle(obj, o.sigma, seed=o.seed, sg_lipschitz=o.sg_lipschitz)
        else:
            oracle = exact_oracle(obj)
        sigma, sgl = oracle.sigma, oracle.sg_lipschitz
    ell = obj.grad_lipschitz
    rho = default_rho(obj, eps, cfg.problem.rho)
    x0 = _start(cfg, obj)
    if cfg.problem.delta_f is not None:
        delta_f = cfg.problem.delta_f
    elif isinstance(obj, EigenProblem):
        delta_f = max(obj.value_fn(x0) - obj.f_star, eps**2 / ell)
    else:
        delta_f = 1.0
    if opt.algorithm == "pgd-variant":
        params = params_pgd_variant(ell, rho, eps, delta_f, obj.dim, opt.delta, opt.iota_multiplier, opt.iota)
    else:
        params = params_psgd(ell, rho, eps, sigma=sigma, sg_lipschitz=sgl, d=obj.dim, delta_f=delta_f,
                             delta=opt.delta, m=m, iota_multiplier=opt.iota_multiplier, preset=opt.preset,
                             iota=opt.iota, r_scale=opt.r_scale, budget_factor=opt.budget_factor)
    if opt.eta is not None:
        params = params.with_(eta=opt.eta)
    if opt.r is not None:
        params = params.with_(r=opt.r)
    if opt.algorithm == "gd":
        params = params.with_(r=0.0)
    budget = params.budget_T if opt.budget is None else opt.budget
    target = opt.target
    if target == "auto":
        target = "escape" if isinstance(obj, QuadraticObjective) else "sosp"
    if target == "sosp" and isinstance(obj, QuadraticObjective):
        raise ConfigError("optimizer.target", "an unbounded quadratic has no second-order stationary point")
    every = opt.certify_every or max(1, params.script_T // 10)
    return Instance(obj, oracle, params, x0, rho, target, opt.algorithm, every, budget)


def run_single(inst: Instance, seed, record_every: int = 0):
    """One run; returns (hit_time or None, f_final, trajectory)."""
    obj, params = inst.obj, inst.params
    hooks = []
    kw = dict(record_every=record_every, store_x=False)
    if inst.target == "escape":
        f0 = obj.value_fn(inst.x0)
        F = params.script_F
        hooks.append(lambda t, x: obj.value_fn(x) - f0 <= -F)
    else:
        kw.update(eps=params.eps, rho=inst.rho, certify_every=inst.certify_every, stop_at_hit=True)
    alg, T = inst.algorithm, inst.budget
    if alg == "gd":
        tr = run_gd(obj, inst.x0, params.eta, T, hooks=hooks, **kw)
    elif alg == "pgd":
        tr = run_pgd(obj, inst.x0, params, T=T, seed=seed, hooks=hooks, **kw)
    elif alg == "psgd":
        tr = run_psgd(inst.oracle, inst.x0, params, T=T, seed=seed, hooks=hooks, **kw)
    elif alg == "minibatch-psgd":
        tr = run_minibatch_psgd(inst.oracle, inst.x0, params, params.m, T=T, seed=seed, hooks=hooks, **kw)
    else:
        kw.pop("eps", None)
        if inst.target == "escape":
            kw["certify_every"] = None
        tr = run_pgd_variant(obj, inst.x0, params, params.eps, T=T, seed=seed, hooks=hooks, **kw)
    hit = tr.stop_time if inst.target == "escape" else tr.hit_time
    return hit, tr.f_final, tr


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunRow:
    dim: int
    epsilon: float
    m: int
    seed: int
    hit_time: Optional[int]
    f_final: float
    wallclock_ms: float

    @property
    def censored(self) -> bool:
        return self.hit_time is None

    def key(self):
        return (self.dim, self.epsilon, self.m, self.seed)

    def csv(self) -> list:
        return [self.dim, repr(self.epsilon), self.m, self.seed,
                "" if self.hit_time is None else self.hit_time,
                str(self.censored).lower(), repr(self.f_final), f"{self.wallclock_ms:.3f}"]


@dataclass(frozen=True)
class CellSummary:
    dim: int
    epsilon: float
    m: int
    n_seeds: int
    n_censored: int
    median: Optional[float]
    q1: Optional[float]
    q3: Optional[float]
    median_censored: bool
    q3_censored: bool
    budget: int = 0

    @property
    def censored(self) -> bool:
        return self.median_censored

    @property
    def iqr(self) -> Optional[float]:
        if self.q1 is None or self.q3 is None:
            return None
        return self.q3 - self.q1

    def csv(self) -> list:
        def num(v):
            return "" if v is None else repr(float(v))

        return [self.dim, repr(self.epsilon), self.m, self.n_seeds, self.n_censored, num(self.median),
                num(self.q1), num(self.q3), str(self.median_censored).lower(),
                str(self.q3_censored).lower(), MEDIAN_CONVENTION]


def summarize(hits: Sequence[Optional[int]]):
    """Median and quartiles with censored runs ordered after every hit.

    Returns (median, q1, q3, median_censored, q3_censored, n_censored); a
    statistic that depends on a censored run is None and flagged.
    """
    n = len(hits)
    done = sorted(h for h in hits if h is not None)
    n_cens = n - len(done)
    vals = np.array(done + [math.inf] * n_cens, dtype=float)

    def q(p):
        # linear interpolation between order statistics, as numpy's default
        pos = p * (n - 1)
        lo, hi = int(math.floor(pos)), int(math.ceil(pos))
        if not math.isfinite(vals[hi]):
            return None, True
        return float(vals[lo] + (vals[hi] - vals[lo]) * (pos - lo)), False

    med, med_c = q(0.5)
    q1, _ = q(0.25)
    q3, q3_c = q(0.75)
    return med, q1, q3, med_c, q3_c, n_cens


@dataclass
class SweepResult:
    name: str
    rows: list
    cells: list
    config_hash: str
    version: str = __version__
    schema_version: int = SCHEMA_VERSION
    files: dict = field(default_factory=dict)

    def cell(self, **axes) -> CellSummary:
        for c in self.cells:
            if all(getattr(c, k) == v for k, v in axes.items()):
                return c
        raise KeyError(axes)

    def slope(self) -> "SlopeResult":
        return loglog_slope([(c.epsilon, c.median, c.censored) for c in self.cells])

    def growth(self, axis: str) -> Optional[float]:
        """Median at the largest axis value over the median at the smallest; None if censored."""
        cs = sorted(self.cells, key=lambda c: getattr(c, axis))
        a, b = cs[0], cs[-1]
        if a.censored or b.censored or not a.median:
            return None
        return b.median / a.median


def _cells(cfg: ExperimentConfig):
    ax = cfg.axes()
    return list(product(ax["dim"], ax["epsilon"], ax["m"]))


def run_seed_sequence(master: int, cell_index: int, seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, cell_index, seed])


_INSTANCE_CACHE: dict = {}


def _instance(cfg: ExperimentConfig, cell) -> Instance:
    key = (cfg.canonical(), cell)
    inst = _INSTANCE_CACHE.get(key)
    if inst is None:
        if len(_INSTANCE_CACHE) > 64:
            _INSTANCE_CACHE.clear()
        inst = _INSTANCE_CACHE[key] = build_instance(cfg, *cell)
    return inst


def _run_task(cfg_dict: dict, cell_index: int, cell, seed: int, traj_dir: Optional[str]):
    cfg = ExperimentConfig.from_dict(cfg_dict)
    inst = _instance(cfg, cell)
    ss = run_seed_sequence(cfg.output.master_seed, cell_index, seed)
    rec = max(1, inst.params.script_T // 10) if traj_dir else 0
    t0 = time.perf_counter()
    hit, f_final, tr = run_single(inst, ss, record_every=rec)
    ms = 1000.0 * (time.perf_counter() - t0)
    if traj_dir:
        run_id = f"c{cell_index}-s{seed}"
        with open(os.path.join(traj_dir, f"{run_id}.csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, TRAJECTORY_COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(tr.csv_rows(run_id))
    d, eps, m = cell
    return RunRow(d, eps, m, seed, hit, f_final, ms), inst.budget


def ensure_writable(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"output directory {out} is not writable: {exc.strerror}") from None
    return out


def _write_csv(path: Path, header, rows, comments=()):
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def run_experiment(cfg: ExperimentConfig, name: str = "run", out_dir=None, jobs: int = 1,
                   write: bool = True) -> SweepResult:
    """Run every (cell, seed) of the configured sweep and write the CSV files.

    Per-run seeds come from SeedSequence([master_seed, cell_index, seed]) so
    the results do not depend on ``jobs`` or on completion order.
    """
    out = None
    traj_dir = None
    if write:
        out = ensure_writable(out_dir or cfg.output.dir)
        if cfg.output.trajectories:
            traj_dir = out / f"{name}_trajectories"
            traj_dir.mkdir(exist_ok=True)
            traj_dir = str(traj_dir)
    cells = _cells(cfg)
    for cell in cells:
        _instance(cfg, cell)  # fail on a bad cell before any run starts
    tasks = [(ci, cell, s) for ci, cell in enumerate(cells) for s in range(cfg.sweep.seeds)]
    cfg_dict = cfg.to_dict()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_run_task, cfg_dict, ci, cell, s, traj_dir) for ci, cell, s in tasks]
            results = [f.result() for f in futs]
    else:
        results = [_run_task(cfg_dict, ci, cell, s, traj_dir) for ci, cell, s in tasks]
    budgets = {}
    rows = []
    for (ci, cell, s), (row, budget) in zip(tasks, results):
        budgets[cell] = budget
        rows.append((ci, row))
    rows.sort(key=lambda t: (t[0], t[1].seed))
    rows = [r for _, r in rows]
    summaries = []
    for cell in cells:
        hits = [r.hit_time for r in rows if (r.dim, r.epsilon, r.m) == cell]
        med, q1, q3, mc, q3c, nc = summarize(hits)
        summaries.append(CellSummary(*cell, len(hits), nc, med, q1, q3, mc, q3c, budgets[cell]))
    res = SweepResult(name, rows, summaries, cfg.hash())
    if write:
        runs_path = out / f"{name}.csv"
        _write_csv(runs_path, RUN_COLUMNS, [r.csv() for r in rows])
        sum_path = out / f"{name}_summary.csv"
        _write_csv(sum_path, SUMMARY_COLUMNS, [c.csv() for c in summaries], comments=(
            "set datafile separator ','",
            f"plot '{sum_path.name}' using 2:7:8:9 with yerrorbars  # median hit time vs epsilon, IQR bars",
            "censored runs rank after all hits; flagged statistics are left empty",
        ))
        res.files = {"runs": runs_path.name, "summary": sum_path.name}
        if traj_dir:
            res.files["trajectories"] = Path(traj_dir).name
        write_manifest(out, cfg, name, res.files, columns={"runs": RUN_COLUMNS, "summary": SUMMARY_COLUMNS})
    return res


def write_manifest(out: Path, cfg: Optional[ExperimentConfig], command: str, files: dict, columns: dict) -> Path:
    path = out / "manifest.json"
    manifest = {}
    if path.exists():
        try:
            manifest = json.loads(path.read_text())
        except (OSError, ValueError):
            manifest = {}
    entry = {
        "files": files,
        "columns": {k: list(v) for k, v in columns.items()},
    }
    if cfg is not None:
        entry["config_hash"] = cfg.hash()
        entry["config"] = cfg.to_dict()
    manifest.update({"schema_version": SCHEMA_VERSION, "library_version": __version__})
    manifest.setdefault("commands", {})[command] = entry
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# scaling statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlopeResult:
    slope: float
    intercept: float
    residual: float
    n_cells: int
    available: bool
    reason: str = ""


def loglog_slope(cells) -> SlopeResult:
    """Least-squares slope of log(median hit time) against log(epsilon).

    Cells are (epsilon, median) or (epsilon, median, censored).  A censored
    or missing median makes the slope unavailable rather than biased.
    """
    cells = list(cells)
    if len(cells) < 3:
        raise ValueError("need at least 3 cells for a slope")
    eps, med = [], []
    for c in cells:
        e, h = c[0], c[1]
        cens = bool(c[2]) if len(c) > 2 else False
        if cens or h is None or not math.isfinite(h):
            return SlopeResult(math.nan, math.nan, math.nan, len(cells), False, f"censored cell at epsilon={e}")
        if not (e > 0 and h > 0):
            raise ValueError("epsilon and hit times must be positive")
        eps.append(e)
        med.append(h)
    X = np.log(np.asarray(eps, dtype=float))
    Y = np.log(np.asarray(med, dtype=float))
    A = np.column_stack([X, np.ones_like(X)])
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = float(np.linalg.norm(A @ coef - Y))
    return SlopeResult(float(coef[0]), float(coef[1]), resid, len(cells), True)


def wilson_interval(successes: int, trials: int, conf: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("need at least one trial")
    z = statistics.NormalDist().inv_cdf(0.5 + conf / 2)
    p = successes / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    # the closed form only reaches the endpoints up to rounding
    lo = 0.0 if successes == 0 else max(0.0, mid - half)
    hi = 1.0 if successes == trials else min(1.0, mid + half)
    return lo, hi


# ---------------------------------------------------------------------------
# escape experiments
# ---------------------------------------------------------------------------


def check_saddle(obj: SmoothObjective, x, eps: float, rho: float) -> None:
    """Refuse unless |grad f(x)| <= eps and lambda_min <= -sqrt(rho eps).

    The eigenvalue test accepts when the estimate is within its certified
    error of the threshold.
    """
    rep = certify(obj, x, eps, rho, tol=1e-9, budget=20000)
    if not rep.is_fosp:
        raise PreconditionError(f"|grad f| = {rep.grad_norm:.3g} > eps = {eps:.3g}: not a first-order stationary point")
    if rep.lambda_min_est - rep.err > -rep.threshold:
        raise PreconditionError(
            f"lambda_min ~ {rep.lambda_min_est:.3g} > -sqrt(rho eps) = {-rep.threshold:.3g}: not a strict saddle")


@dataclass(frozen=True)
class EscapeResult:
    rate: float
    lower: float
    upper: float
    successes: int
    trials: int
    threshold: float

    def row(self) -> dict:
        return {"trials": self.trials, "successes": self.successes, "rate": repr(self.rate),
                "lower": repr(self.lower), "upper": repr(self.upper), "threshold": repr(self.threshold)}


ESCAPE_COLUMNS = ("trials", "successes", "rate", "lower", "upper", "threshold")


def escape_rate(obj: SmoothObjective, saddle, params: ParamSet, seeds: int, eps: Optional[float] = None,
                rho: Optional[float] = None, master_seed: int = 0, mode: str = "single",
                steps: Optional[int] = None, check: bool = True) -> EscapeResult:
    """Fraction of seeds with f(x_T) - f(x~) <= -F/2, T = script_T steps.

    ``mode="single"``: one perturbation x~ - eta xi, xi ~ Uniform(B_0(r)),
    then plain gradient descent.  ``mode="pgd"``: perturbed gradient descent
    with a fresh Gaussian perturbation every step.  ``check=False`` skips the
    strict-saddle precondition (for points whose curvature is negative but
    above -sqrt(rho eps)).
    """
    eps = params.eps if eps is None else eps
    rho = params.rho if rho is None else rho
    x_tilde = np.asarray(saddle, dtype=float)
    if check:
        check_saddle(obj, x_tilde, eps, rho)
    if mode not in ("single", "pgd"):
        raise ValueError(f"unknown mode {mode!r}")
    T = params.script_T if steps is None else steps
    f0 = obj.value_fn(x_tilde)
    thr = -params.script_F / 2
    wins = 0
    for i in range(seeds):
        ss = np.random.SeedSequence([master_seed, i])
        if mode == "single":
            rng, _ = run_streams(ss)
            x0 = x_tilde - params.eta * uniform_ball(rng, obj.dim, params.r)
            tr = run_gd(obj, x0, params.eta, T, record_every=0)
            dec = tr.f_final - f0
        else:
            tr = run_pgd(obj, x_tilde, params, T=T, seed=ss, record_every=0,
                         hooks=[lambda t, x: obj.value_fn(x) - f0 <= thr])
            dec = thr if tr.stop_time is not None else tr.f_final - f0
        wins += bool(dec <= thr)
    lo, hi = wilson_interval(wins, seeds)
    return EscapeResult(wins / seeds, lo, hi, wins, seeds, thr)


@dataclass(frozen=True)
class ProbeRow:
    r0: float
    omega: float
    trials: int
    successes: int
    single_successes: int
    rate: float
    single_rate: float
    lower: float
    upper: float

    def row(self) -> dict:
        return {k: (repr(v) if isinstance(v, float) else v) for k, v in self.__dict__.items()}


PROBE_COLUMNS = ("r0", "omega", "trials", "successes", "single_successes", "rate", "single_rate", "lower", "upper")


def stuck_region_probe(obj: SmoothObjective, saddle, r0_grid, seeds: int, params: ParamSet,
                       eps: Optional[float] = None, rho: Optional[float] = None,
                       master_seed: int = 0) -> list[ProbeRow]:
    """Min-of-pair escape rate of coupled GD runs for each separation r0.

    Success means min(decrease of the two runs) <= -F over script_T steps;
    ``single_rate`` counts the first run alone.
    """
    eps = params.eps if eps is None else eps
    rho = params.rho if rho is None else rho
    x_tilde = np.asarray(saddle, dtype=float)
    check_saddle(obj, x_tilde, eps, rho)
    out = []
    for r0 in r0_grid:
        wins = single = 0
        for i in range(seeds):
            pair = coupled_gd_pair(obj, x_tilde, float(r0), params, seed=np.random.SeedSequence([master_seed, i]),
                                   record_every=max(1, params.script_T))
            wins += bool(pair.min_decrease <= -params.script_F)
            single += bool(pair.decrease_first <= -params.script_F)
        lo, hi = wilson_interval(wins, seeds)
        out.append(ProbeRow(float(r0), params.omega, seeds, wins, single, wins / seeds, single / seeds, lo, hi))
    return out


# ---------------------------------------------------------------------------
# problem strings used by the command line
# ---------------------------------------------------------------------------


def parse_problem(text: str, orientation=None) -> SmoothObjective:
    """``eigen:2,1`` (spectrum of M) or ``quadratic:1,-1`` (Hessian spectrum)."""
    kind, _, rest = text.partition(":")
    try:
        vals = [float(v) for v in rest.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("--problem", f"cannot parse spectrum {rest!r}") from None
    if not vals:
        raise ConfigError("--problem", "expected kind:v1,v2,...")
    if kind == "eigen":
        if any(v < 0 for v in vals):
            raise ConfigError("--problem", "an eigen problem needs a positive semidefinite spectrum")
        return eigen_problem(vals, orientation=orientation)
    if kind == "quadratic":
        return quadratic(vals)
    raise ConfigError("--problem", f"unknown problem kind {kind!r}; use eigen or quadratic")


def saddle_params(obj: SmoothObjective, saddle, eps: float, rho: Optional[float] = None,
                  r_scale: float = 1.0, delta: float = 0.1) -> ParamSet:
    """Practical deterministic parameters for escape experiments at ``saddle``."""
    rho = default_rho(obj, eps, rho)
    if isinstance(obj, EigenProblem):
        delta_f = max(obj.value_fn(saddle) - obj.f_star, eps**2 / obj.grad_lipschitz)
    else:
        delta_f = 1.0
    return params_psgd(obj.grad_lipschitz, rho, eps, d=obj.dim, delta_f=delta_f, delta=delta, r_scale=r_scale)


def catalog_saddles(obj: EigenProblem) -> list:
    return [x for x, kind in eigen_stationary_catalog(obj) if kind == "strict-saddle"]
