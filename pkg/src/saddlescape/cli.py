"""Command line: ``saddlescape <command> [options]``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure,
3 an ``--assert`` check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certify import REPORT_COLUMNS, certify
from .concentration import CHECK_COLUMNS, KINDS, LEMMAS, run_check
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (
    ESCAPE_COLUMNS,
    PROBE_COLUMNS,
    OutputError,
    PreconditionError,
    build_problem,
    default_rho,
    default_saddle,
    ensure_writable,
    escape_rate,
    parse_problem,
    run_experiment,
    saddle_params,
    stuck_region_probe,
    write_manifest,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_ASSERT = 0, 1, 2, 3

# acceptance thresholds used by --assert unless overridden
SLOPE_BANDS = {"stochastic": (-4.8, -3.2), "deterministic": (-2.6, -1.4)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global(p):
    p.add_argument("--config", metavar="PATH", help="experiment config file")
    p.add_argument("--seed", type=int, help="master seed (overrides output.master_seed)")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--assert", dest="check", action="store_true", help="exit 3 if the acceptance check fails")


def _point_args(p):
    p.add_argument("--problem", help="eigen:l1,l2,... or quadratic:h1,h2,...; default from --config")
    p.add_argument("--point", help="comma separated coordinates; default is the canonical saddle")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--rho", type=float, help="Hessian-Lipschitz parameter (default: declared, or curvature^2/eps for quadratics)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="saddlescape", description="Saddle-escape experiments for perturbed gradient methods.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run every cell of the configured sweep")
    _global(p)
    p.add_argument("--max-m-ratio", type=float, help="with --assert: median at the largest m over m=1 must not exceed this")

    p = sub.add_parser("sweep-dim", help="dimension sweep; reports median growth")
    _global(p)
    p.add_argument("--max-ratio", type=float, default=3.0)

    p = sub.add_parser("sweep-eps", help="epsilon sweep; reports the log-log slope")
    _global(p)
    p.add_argument("--slope-min", type=float)
    p.add_argument("--slope-max", type=float)

    p = sub.add_parser("escape-rate", help="escape probability from a strict saddle")
    _global(p)
    _point_args(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--r-scale", type=float, default=1.0, help="multiply the perturbation radius")
    p.add_argument("--mode", choices=("single", "pgd"), default="single")
    p.add_argument("--min-rate", type=float, default=0.9)
    p.add_argument("--min-lower", type=float, default=0.85)

    p = sub.add_parser("couple", help="coupled GD pairs across separations r0")
    _global(p)
    _point_args(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--r0", help="comma separated separations (absolute)")
    p.add_argument("--r0-omega", default="0,0.5,2,10", help="separations as multiples of omega")
    p.add_argument("--min-rate", type=float, default=0.9)

    p = sub.add_parser("conc-check", help="Monte Carlo check of one concentration bound")
    _global(p)
    p.add_argument("--lemma", choices=LEMMAS, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--kind", choices=KINDS, default="isotropic_subgaussian")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--iota", type=float, default=5.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--u-rule", choices=("zero", "fixed", "adversarial"), default="fixed")

    p = sub.add_parser("certify", help="first/second-order stationarity report for one point")
    _global(p)
    _point_args(p)
    p.add_argument("--point-file", help="file of whitespace or comma separated coordinates")
    p.add_argument("--budget", type=int, default=2000, help="HVP budget per restart")
    return parser


# ---------------------------------------------------------------------------


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg.output.master_seed = args.seed
    if args.out is not None:
        cfg.output.dir = args.out
    if args.jobs < 1:
        raise ConfigError("--jobs", "must be >= 1")
    return cfg


def _emit(rows, columns, out_dir, name, cfg=None):
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())
    if out_dir is not None:
        out = ensure_writable(out_dir)
        (out / f"{name}.csv").write_text(buf.getvalue())
        write_manifest(out, cfg, name, {"rows": f"{name}.csv"}, {"rows": columns})


def _parse_point(text: str, d: int, key: str) -> np.ndarray:
    try:
        x = np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError:
        raise ConfigError(key, "cannot parse coordinates") from None
    if x.shape != (d,):
        raise ConfigError(key, f"expected {d} coordinates, got {x.size}")
    return x


def _objective_and_point(args, cfg):
    if args.problem:
        obj = parse_problem(args.problem)
    elif args.config:
        obj = build_problem(cfg, cfg.problem.dim)
    else:
        raise ConfigError("--problem", "give --problem or a --config with a problem block")
    point_file = getattr(args, "point_file", None)
    if point_file:
        try:
            text = Path(point_file).read_text()
        except OSError as exc:
            raise ConfigError("--point-file", exc.strerror) from None
        x = _parse_point(text, obj.dim, "--point-file")
    elif args.point:
        x = _parse_point(args.point, obj.dim, "--point")
    else:
        x = default_saddle(obj)
    return obj, x


def _out_dir(args):
    return args.out


def cmd_run(args, cfg):
    res = run_experiment(cfg, "run", jobs=args.jobs)
    ok = all(not c.censored for c in res.cells)
    msg = f"{len(res.cells)} cells, {sum(c.n_censored for c in res.cells)} censored runs"
    if args.max_m_ratio is not None:
        g = res.growth("m")
        ok = ok and g is not None and g <= args.max_m_ratio
        msg += f"; median(m max)/median(m min) = {g}"
    print(msg, file=sys.stderr)
    return ok


def cmd_sweep_dim(args, cfg):
    if len(cfg.axes()["dim"]) < 2:
        raise ConfigError("sweep.dims", "a dimension sweep needs at least two dimensions")
    res = run_experiment(cfg, "sweep_dim", jobs=args.jobs)
    g = res.growth("dim")
    print(f"median growth over dims: {g}", file=sys.stderr)
    return g is not None and g <= args.max_ratio


def cmd_sweep_eps(args, cfg):
    if len(cfg.axes()["epsilon"]) < 3:
        raise ConfigError("sweep.epsilons", "a slope needs at least three epsilons")
    if len(cfg.axes()["dim"]) != 1 or len(cfg.axes()["m"]) != 1:
        raise ConfigError("sweep", "an epsilon sweep must fix dims and minibatches")
    res = run_experiment(cfg, "sweep_eps", jobs=args.jobs)
    s = res.slope()
    kind = "stochastic" if cfg.optimizer.algorithm in ("psgd", "minibatch-psgd") else "deterministic"
    lo, hi = SLOPE_BANDS[kind]
    lo = lo if args.slope_min is None else args.slope_min
    hi = hi if args.slope_max is None else args.slope_max
    if s.available:
        print(f"log-log slope {s.slope:.4f} (residual {s.residual:.3g}); band [{lo}, {hi}]", file=sys.stderr)
    else:
        print(f"slope unavailable: {s.reason}", file=sys.stderr)
    return s.available and lo <= s.slope <= hi


def cmd_escape_rate(args, cfg):
    obj, x = _objective_and_point(args, cfg)
    params = saddle_params(obj, x, args.epsilon, args.rho)
    params = params.with_(r=params.r * args.r_scale)
    res = escape_rate(obj, x, params, args.trials, master_seed=cfg.output.master_seed, mode=args.mode)
    _emit([res.row()], ESCAPE_COLUMNS, _out_dir(args), "escape_rate", cfg if args.config else None)
    return res.rate >= args.min_rate and res.lower >= args.min_lower


def cmd_couple(args, cfg):
    obj, x = _objective_and_point(args, cfg)
    params = saddle_params(obj, x, args.epsilon, args.rho)
    try:
        if args.r0:
            grid = [float(v) for v in args.r0.split(",")]
        else:
            grid = [float(v) * params.omega for v in args.r0_omega.split(",")]
    except ValueError:
        raise ConfigError("--r0", "cannot parse separations") from None
    rows = stuck_region_probe(obj, x, grid, args.trials, params, master_seed=cfg.output.master_seed)
    _emit([r.row() for r in rows], PROBE_COLUMNS, _out_dir(args), "couple", cfg if args.config else None)
    return all(r.rate >= args.min_rate for r in rows if r.r0 > r.omega)


def cmd_conc_check(args, cfg):
    seed = cfg.output.master_seed
    try:
        res = run_check(args.lemma, trials=args.trials, seed=seed, kind=args.kind, n=args.n, d=args.d,
                        iota=args.iota, sigma=args.sigma, u_rule=args.u_rule)
    except ValueError as exc:
        raise ConfigError("conc-check", str(exc)) from None
    _emit([res.row()], CHECK_COLUMNS, _out_dir(args), "conc_check", None)
    return res.passed


def cmd_certify(args, cfg):
    obj, x = _objective_and_point(args, cfg)
    rho = default_rho(obj, args.epsilon, args.rho)
    rep = certify(obj, x, args.epsilon, rho, budget=args.budget, seed=cfg.output.master_seed)
    _emit([rep.csv_row()], REPORT_COLUMNS, _out_dir(args), "certify", None)
    return rep.is_sosp is True


COMMANDS = {
    "run": cmd_run,
    "sweep-dim": cmd_sweep_dim,
    "sweep-eps": cmd_sweep_eps,
    "escape-rate": cmd_escape_rate,
    "couple": cmd_couple,
    "conc-check": cmd_conc_check,
    "certify": cmd_certify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        ok = COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, PreconditionError, ArithmeticError, ValueError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.check and not ok:
        print("acceptance check failed", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
