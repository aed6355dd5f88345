"""Run configuration: flat key-value text with typed sections.

Config files are diff-able and hash-stable::

    [run]
    seed = 7
    workers = 1

    [domain]
    kind = interval
    a = -1
    b = 1

    [potential]
    kind = counterexample
    w = 0.3
    r = 0.2

Sections flatten to ``section.key`` entries; the sha256 hash of the sorted
flattened lines is recorded in every output artifact.  Command-line flags
override file values.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .domains import BallDomain, BallUnionDomain, Domain, IntervalDomain, WholeSpace
from .errors import ConfigError
from .params import BallSpec, StableParams
from .potentials import (
    PotentialSpec,
    constant_potential,
    counterexample_potential,
    holder_cusp_potential,
    parabolic_cap_potential,
    smooth_bump_potential,
    zero_potential,
)
from .reporting import config_hash


@dataclass
class RunConfig:
    subcommand: str
    values: dict = field(default_factory=dict)   # flattened section.key -> str

    def get(self, key: str, default=None, cast=str):
        if key not in self.values or self.values[key] == "":
            return default
        raw = self.values[key]
        try:
            if cast is bool:
                return str(raw).strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse '{key}' = '{raw}' as {cast.__name__}",
                              field=key) from exc

    def set_if_missing(self, key: str, value):
        if value is not None and (key not in self.values or self.values[key] == ""):
            self.values[key] = str(value)

    def override(self, key: str, value):
        if value is not None:
            self.values[key] = str(value)

    @property
    def hash(self) -> str:
        return config_hash({**self.values, "subcommand": self.subcommand})

    @property
    def seed(self) -> int:
        return self.get("run.seed", 0, int)

    @property
    def workers(self) -> int:
        w = self.get("run.workers", 1, int)
        if w < 1:
            raise ConfigError("run.workers must be a positive integer", field="run.workers")
        return w


def load_config_file(path) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file '{path}'")
    flat = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[f"{section}.{key}"] = value
    return flat


def build_domain(cfg: RunConfig) -> Domain:
    kind = cfg.get("domain.kind", "interval")
    if kind == "interval":
        return IntervalDomain(cfg.get("domain.a", -1.0, float), cfg.get("domain.b", 1.0, float))
    if kind == "ball":
        center = np.asarray(
            [float(v) for v in str(cfg.get("domain.center", "0")).split(",")], dtype=float
        )
        return BallDomain(BallSpec(center, cfg.get("domain.radius", 1.0, float)))
    if kind == "whole-space":
        return WholeSpace(cfg.get("domain.d", 1, int))
    if kind == "union":
        spec = str(cfg.get("domain.balls", "")).strip()
        balls = []
        for part in spec.split(";"):
            *cs, r = [float(v) for v in part.split(",")]
            balls.append(BallSpec(np.asarray(cs), r))
        if not balls:
            raise ConfigError("domain.balls must list center,radius groups", "domain.balls")
        return BallUnionDomain(balls)
    raise ConfigError(f"unknown domain kind '{kind}'", field="domain.kind")


def build_potential(cfg: RunConfig, alpha: float, d: int = 1) -> PotentialSpec:
    kind = cfg.get("potential.kind", "zero")
    if kind == "zero":
        return zero_potential(d)
    if kind == "constant":
        return constant_potential(cfg.get("potential.c", 0.0, float), d)
    if kind == "counterexample":
        return counterexample_potential(cfg.get("potential.w", 0.3, float),
                                        cfg.get("potential.r", 0.2, float), alpha, d)
    if kind == "cap":
        return parabolic_cap_potential(cfg.get("potential.w", 0.3, float),
                                       cfg.get("potential.r", 0.2, float), d)
    if kind == "bump":
        return smooth_bump_potential(cfg.get("potential.center", 0.0, float),
                                     cfg.get("potential.width", 0.4, float),
                                     cfg.get("potential.amplitude", 1.0, float), d)
    if kind == "cusp":
        return holder_cusp_potential(cfg.get("potential.center", 0.2, float),
                                     cfg.get("potential.amplitude", 0.5, float),
                                     cfg.get("potential.eta", 0.8, float), d)
    raise ConfigError(f"unknown potential kind '{kind}'", field="potential.kind")


def parse_potential_flag(text: str) -> dict:
    """Translate CLI shorthand like 'counterexample:w=0.3,r=0.2' to config entries."""
    if ":" not in text:
        return {"potential.kind": text}
    kind, args = text.split(":", 1)
    out = {"potential.kind": kind}
    for item in args.split(","):
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"potential argument '{item}' must look like key=value")
        k, v = item.split("=", 1)
        out[f"potential.{k.strip()}"] = v.strip()
    return out


def parse_domain_flag(text: str) -> dict:
    """Translate CLI shorthand like 'interval:-1,1' or 'ball:0,0,1' to config entries."""
    if ":" not in text:
        return {"domain.kind": text}
    kind, args = text.split(":", 1)
    out = {"domain.kind": kind}
    vals = [v for v in args.split(",") if v != ""]
    if kind == "interval":
        if len(vals) != 2:
            raise ConfigError("interval takes 'a,b'", field="domain")
        out["domain.a"], out["domain.b"] = vals
    elif kind == "ball":
        out["domain.center"] = ",".join(vals[:-1])
        out["domain.radius"] = vals[-1]
    elif kind == "whole-space":
        out["domain.d"] = vals[0] if vals else "1"
    else:
        raise ConfigError(f"unknown domain shorthand '{kind}'", field="domain")
    return out


def stable_params(cfg: RunConfig) -> StableParams:
    return StableParams(cfg.get("run.d", 1, int), cfg.get("run.alpha", 1.0, float))


def build_boundary(cfg: RunConfig):
    from .potentials import constant_data, interval_far_side_data

    kind = cfg.get("boundary.kind", "constant")
    if kind == "constant":
        return constant_data(cfg.get("boundary.c", 1.0, float))
    if kind == "left-of":
        return interval_far_side_data(cfg.get("boundary.threshold", -1.0, float), "left")
    if kind == "right-of":
        return interval_far_side_data(cfg.get("boundary.threshold", 1.0, float), "right")
    raise ConfigError(f"unknown boundary kind '{kind}'", field="boundary.kind")


def parse_boundary_flag(text: str) -> dict:
    """CLI shorthand: 'const:1', 'left-of:-1.5', 'right-of:0.9'."""
    if ":" not in text:
        return {"boundary.kind": text}
    kind, arg = text.split(":", 1)
    if kind in ("const", "constant"):
        return {"boundary.kind": "constant", "boundary.c": arg}
    if kind in ("left-of", "right-of"):
        return {"boundary.kind": kind, "boundary.threshold": arg}
    raise ConfigError(f"unknown boundary shorthand '{kind}'", field="boundary")
