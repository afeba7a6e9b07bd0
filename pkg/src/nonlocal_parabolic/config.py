"""Experiment configuration: dataclasses loaded from TOML with path-qualified validation errors."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCENARIOS = ("membership", "inequalities", "harnack", "holder", "full")
SCENARIO_CRITERIA = {
    "membership": (2, 3),
    "inequalities": (1, 4, 5),
    "harnack": (6, 9),
    "holder": (7, 8),
    "full": (1, 2, 3, 4, 5, 6, 7, 8, 9),
}


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "fractional"
    normalization: str = "simple"
    alpha0: float = 0.4
    lam: float = 10.0
    coeff: str = "unit"
    dim: int = 1


@dataclass(frozen=True)
class GridConfig:
    h: float = 0.05
    h_holder: float = 0.02


@dataclass(frozen=True)
class SolverConfig:
    theta: float = 1.0
    dt: Optional[float] = None


@dataclass(frozen=True)
class InequalityConfig:
    alphas: tuple = (0.5, 1.0, 1.5, 1.9, 1.99)
    suite_scale: float = 1.0
    n_probes: int = 100
    sobolev_radius: float = 1.0
    steklov_fields: int = 100


@dataclass(frozen=True)
class MembershipConfig:
    alphas: tuple = (0.5, 1.0, 1.5, 1.9, 1.99)
    lam: float = 10.0
    cone_alphas: tuple = (1.0, 1.5)
    cone_lam: float = 100.0
    aperture: float = 0.5


@dataclass(frozen=True)
class Thresholds:
    uniformity: float = 10.0
    operator_tol: float = 0.03
    operator_rate: float = 1.0
    steklov_slope: float = 0.9
    fit_residual: float = 0.2
    scaling_tol: float = 0.05
    beta0: float = 0.15
    eps0: float = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "full"
    seed: int = 0
    out: str = "results"
    threads: int = 1
    alphas: tuple = (1.5, 1.9, 1.99)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    inequalities: InequalityConfig = field(default_factory=InequalityConfig)
    membership: MembershipConfig = field(default_factory=MembershipConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)

    @property
    def criteria(self) -> tuple:
        return SCENARIO_CRITERIA[self.scenario]

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {self.scenario!r} (expected one of {', '.join(SCENARIOS)})")
        if self.threads < 1:
            raise ConfigError("threads", "must be at least 1")
        k = self.kernel
        if k.kind != "fractional":
            raise ConfigError("kernel.kind", "only 'fractional' benchmark kernels are configurable")
        if k.normalization not in ("simple", "exact"):
            raise ConfigError("kernel.normalization", "must be 'simple' or 'exact'")
        if k.coeff not in ("unit", "oscillating"):
            raise ConfigError("kernel.coeff", "must be 'unit' or 'oscillating'")
        if k.dim != 1:
            raise ConfigError("kernel.dim", "benchmarks run in d = 1")
        if not 0 < k.alpha0 < 2:
            raise ConfigError("kernel.alpha0", "must lie in (0, 2)")
        _positive("kernel.lam", k.lam)
        if not self.alphas:
            raise ConfigError("alphas", "must be non-empty")
        for i, a in enumerate(self.alphas):
            _alpha(f"alphas[{i}]", a, k.alpha0)
        for i, a in enumerate(self.inequalities.alphas):
            _alpha(f"inequalities.alphas[{i}]", a, k.alpha0)
        for i, a in enumerate(self.membership.alphas):
            _alpha(f"membership.alphas[{i}]", a, k.alpha0)
        for i, a in enumerate(self.membership.cone_alphas):
            _alpha(f"membership.cone_alphas[{i}]", a, k.alpha0)
        _positive("membership.lam", self.membership.lam)
        _positive("membership.cone_lam", self.membership.cone_lam)
        if not 0 < self.membership.aperture < 1:
            raise ConfigError("membership.aperture", "must lie in (0, 1)")
        _positive("grid.h", self.grid.h)
        _positive("grid.h_holder", self.grid.h_holder)
        if self.grid.h > 0.25:
            raise ConfigError("grid.h", "must be at most 0.25")
        if not 0.5 <= self.solver.theta <= 1:
            raise ConfigError("solver.theta", "must lie in [1/2, 1]")
        if self.solver.dt is not None:
            _positive("solver.dt", self.solver.dt)
        _positive("inequalities.suite_scale", self.inequalities.suite_scale)
        if self.inequalities.n_probes < 1:
            raise ConfigError("inequalities.n_probes", "must be at least 1")
        if self.inequalities.steklov_fields < 1:
            raise ConfigError("inequalities.steklov_fields", "must be at least 1")
        if not 0 < self.inequalities.sobolev_radius <= 2:
            raise ConfigError("inequalities.sobolev_radius", "must lie in (0, 2]")
        for f in fields(Thresholds):
            _positive(f"thresholds.{f.name}", getattr(self.thresholds, f.name))
        return self


def _positive(path, v):
    if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise ConfigError(path, f"must be a positive finite number, got {v!r}")


def _alpha(path, a, alpha0):
    if not isinstance(a, (int, float)) or not alpha0 < a < 2:
        raise ConfigError(path, f"alpha must lie in (alpha0={alpha0:g}, 2), got {a!r}")


def _section(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(path, "must be a table")
    known = {f.name: f for f in fields(cls)}
    out = {}
    for key, val in data.items():
        if key not in known:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")
        default = getattr(cls(), key) if key in known else None
        out[key] = _coerce(val, default, f"{path}.{key}" if path else key)
    return cls(**out)


def _coerce(val, default, path):
    if isinstance(default, tuple):
        if not isinstance(val, list):
            raise ConfigError(path, "must be an array")
        for i, v in enumerate(val):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}[{i}]", f"must be a number, got {v!r}")
        return tuple(float(v) for v in val)
    if isinstance(default, bool):
        if not isinstance(val, bool):
            raise ConfigError(path, "must be a boolean")
        return val
    if isinstance(default, int):
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(path, f"must be an integer, got {val!r}")
        return val
    if isinstance(default, float) or default is None:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(path, f"must be a number, got {val!r}")
        return float(val)
    if isinstance(default, str):
        if not isinstance(val, str):
            raise ConfigError(path, f"must be a string, got {val!r}")
        return val
    return val


SECTIONS = {
    "kernel": KernelConfig,
    "grid": GridConfig,
    "solver": SolverConfig,
    "inequalities": InequalityConfig,
    "membership": MembershipConfig,
    "thresholds": Thresholds,
}


def from_dict(data: dict) -> ExperimentConfig:
    top = {}
    base = ExperimentConfig()
    for key, val in data.items():
        if key in SECTIONS:
            top[key] = _section(SECTIONS[key], val, key)
        elif key in ("scenario", "seed", "out", "threads", "alphas"):
            top[key] = _coerce(val, getattr(base, key), key)
        else:
            raise ConfigError(key, "unknown field")
    return replace(base, **top).validate()


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("<file>", f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"invalid TOML: {exc}") from exc
    return from_dict(data)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(cfg, **kw).validate()
