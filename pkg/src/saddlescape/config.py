"""Experiment configuration: INI-style sections of flat key = value pairs.

Example::

    [problem]
    kind = eigen
    lambda1 = 10
    eigengap = 5
    orientation_seed = 7

    [oracle]
    noise = gaussian
    sigma = 0.1
    sg_lipschitz = unbounded

    [optimizer]
    algorithm = psgd
    preset = practical

    [sweep]
    dims = 20
    epsilons = 0.2, 0.1, 0.05, 0.025
    seeds = 50

    [output]
    dir = results/psgd-eps
    master_seed = 0

Lists are comma separated.  ``auto`` selects the documented default.
Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ProblemBlock:
    kind: str = "eigen"
    dim: int = 20
    spectrum: Optional[list] = None
    lambda1: float = 10.0
    eigengap: float = 5.0
    curvature: float = 0.1
    ell: float = 1.0
    orientation_seed: Optional[int] = None
    rho: Optional[float] = None
    start: str = "auto"
    delta_f: Optional[float] = None


@dataclass
class OracleBlock:
    noise: str = "none"
    sigma: float = 0.0
    sg_lipschitz: Optional[float] = None  # None = auto, inf = unbounded
    samples: int = 200
    seed: int = 0


@dataclass
class OptimizerBlock:
    algorithm: str = "pgd"
    preset: str = "practical"
    epsilon: float = 0.05
    delta: float = 0.1
    iota_multiplier: float = 1.0
    iota: Optional[float] = None
    eta: Optional[float] = None
    r: Optional[float] = None
    r_scale: float = 1.0
    budget: Optional[int] = None
    budget_factor: float = 50.0
    certify_every: Optional[int] = None
    minibatch: int = 1
    target: str = "auto"


@dataclass
class SweepBlock:
    dims: Optional[list] = None
    epsilons: Optional[list] = None
    minibatches: Optional[list] = None
    seeds: int = 10


@dataclass
class OutputBlock:
    dir: str = "results"
    master_seed: int = 0
    trajectories: bool = False


@dataclass
class ExperimentConfig:
    problem: ProblemBlock = field(default_factory=ProblemBlock)
    oracle: OracleBlock = field(default_factory=OracleBlock)
    optimizer: OptimizerBlock = field(default_factory=OptimizerBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def axes(self) -> dict:
        """Sweep axes with defaults filled in from the single-run settings."""
        return {
            "dim": list(self.sweep.dims or [self.problem.dim]),
            "epsilon": list(self.sweep.epsilons or [self.optimizer.epsilon]),
            "m": list(self.sweep.minibatches or [self.optimizer.minibatch]),
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["oracle"]["sg_lipschitz"] == math.inf:
            d["oracle"]["sg_lipschitz"] = "unbounded"
        return d

    def canonical(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = json.loads(json.dumps(d))
        if d.get("oracle", {}).get("sg_lipschitz") == "unbounded":
            d["oracle"]["sg_lipschitz"] = math.inf
        return cls(
            ProblemBlock(**d.get("problem", {})),
            OracleBlock(**d.get("oracle", {})),
            OptimizerBlock(**d.get("optimizer", {})),
            SweepBlock(**d.get("sweep", {})),
            OutputBlock(**d.get("output", {})),
        )


SECTIONS = {
    "problem": ProblemBlock,
    "oracle": OracleBlock,
    "optimizer": OptimizerBlock,
    "sweep": SweepBlock,
    "output": OutputBlock,
}

CHOICES = {
    "problem.kind": ("eigen", "quadratic"),
    "problem.start": ("auto", "origin", "saddle", "random"),
    "oracle.noise": ("none", "gaussian", "bounded_sphere", "per_sample"),
    "optimizer.algorithm": ("gd", "pgd", "pgd-variant", "psgd", "minibatch-psgd"),
    "optimizer.preset": ("practical", "theory-pgd", "theory-psgd", "theory-minibatch"),
    "optimizer.target": ("auto", "sosp", "escape"),
}

_INT = {"dim", "orientation_seed", "samples", "seed", "budget", "certify_every", "minibatch", "seeds", "master_seed"}
_FLOAT_LIST = {"spectrum", "epsilons"}
_INT_LIST = {"dims", "minibatches"}
_BOOL = {"trajectories"}
_STR = {"kind", "start", "noise", "algorithm", "preset", "target", "dir"}


def _convert(section: str, key: str, raw: str):
    path = f"{section}.{key}"
    raw = raw.strip()
    try:
        if raw.lower() in ("auto", "none", ""):
            if key in ("kind", "algorithm", "preset", "noise", "dir"):
                raise ConfigError(path, "a value is required")
            return "auto" if key in ("start", "target") else None
        if key in _STR:
            val = raw
        elif key in _BOOL:
            if raw.lower() not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            val = raw.lower() in ("true", "yes", "1")
        elif key == "sg_lipschitz" and raw.lower() in ("unbounded", "inf"):
            val = math.inf
        elif key in _FLOAT_LIST:
            val = [float(v) for v in raw.split(",") if v.strip()]
        elif key in _INT_LIST:
            val = [int(v) for v in raw.split(",") if v.strip()]
        elif key in _INT:
            val = int(raw)
        else:
            val = float(raw)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(path, f"cannot parse {raw!r}") from None
    if path in CHOICES and val not in CHOICES[path]:
        raise ConfigError(path, f"{val!r} is not one of {CHOICES[path]}")
    return val


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc)) from None
    blocks = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")
        known = SECTIONS[section].__dataclass_fields__
        values = {}
        for key, raw in cp.items(section):
            if key not in known:
                raise ConfigError(f"{section}.{key}", "unknown key")
            values[key] = _convert(section, key, raw)
        blocks[section] = SECTIONS[section](**values)
    cfg = ExperimentConfig(**blocks)
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def validate(cfg: ExperimentConfig) -> None:
    p, o, opt, sw = cfg.problem, cfg.oracle, cfg.optimizer, cfg.sweep
    if sw.seeds < 1:
        raise ConfigError("sweep.seeds", "seed count must be >= 1")
    for name in ("dims", "epsilons", "minibatches"):
        val = getattr(sw, name)
        if val is not None and len(val) == 0:
            raise ConfigError(f"sweep.{name}", "axis must be non-empty")
    if p.spectrum is not None and sw.dims is not None and any(d != len(p.spectrum) for d in sw.dims):
        raise ConfigError("sweep.dims", "an explicit spectrum fixes the dimension")
    for d in cfg.axes()["dim"]:
        if d < 1:
            raise ConfigError("sweep.dims", "dimensions must be positive")
    for e in cfg.axes()["epsilon"]:
        if not e > 0:
            raise ConfigError("sweep.epsilons", "epsilon must be positive")
    for m in cfg.axes()["m"]:
        if m < 1:
            raise ConfigError("sweep.minibatches", "mini-batch sizes must be >= 1")
    if p.kind == "eigen" and p.spectrum is None and not 0 < p.eigengap <= p.lambda1:
        raise ConfigError("problem.eigengap", "need 0 < eigengap <= lambda1")
    if p.kind == "quadratic" and p.spectrum is None and not p.curvature > 0:
        raise ConfigError("problem.curvature", "curvature must be positive")
    if p.kind == "quadratic" and p.spectrum is not None and min(p.spectrum) >= 0:
        raise ConfigError("problem.spectrum", "a quadratic saddle needs a negative eigenvalue")
    if o.sigma < 0:
        raise ConfigError("oracle.sigma", "sigma must be non-negative")
    if o.noise == "per_sample" and p.kind != "eigen":
        raise ConfigError("oracle.noise", "per_sample noise is only defined for eigen problems")
    stochastic = opt.algorithm in ("psgd", "minibatch-psgd")
    if stochastic and o.noise == "none" and o.sigma > 0:
        raise ConfigError("oracle.noise", "sigma given without a noise model")
    if not 0 < opt.delta < 1:
        raise ConfigError("optimizer.delta", "delta must lie in (0, 1)")
    if opt.algorithm != "minibatch-psgd" and any(m != 1 for m in cfg.axes()["m"]):
        raise ConfigError("sweep.minibatches", "mini-batch sizes need algorithm = minibatch-psgd")
