"""Experiment configuration: defaults, JSON loading, and validation.

One JSON document configures a whole experiment. Every constant of the
simulator appears here with its default; unknown keys are rejected so
typos fail loudly before any simulation starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .behaviors import ParamSpace
from .learning import LearningConfig
from .runner import RunConfig

MISSIONS = ("convoy", "box")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class LibraryConfig:
    theta_lo: float = 0.05
    theta_hi: float = 1.1
    phi_lo: tuple[float, float] = (-1.0, -1.0)
    phi_hi: tuple[float, float] = (1.0, 1.0)

    def to_space(self) -> ParamSpace:
        return ParamSpace(self.theta_lo, self.theta_hi,
                          tuple(self.phi_lo), tuple(self.phi_hi))


@dataclass(frozen=True)
class ConvoyConfig:
    z0: tuple[float, float] = (-1.2, -0.7)
    v_z: tuple[float, float] = (0.03, 0.015)
    sigma: float = 0.01
    delta: float = 0.5
    bins: int = 10
    bin_width: float = 0.3
    delta_known: bool = True


@dataclass(frozen=True)
class BoxConfig:
    e0: tuple[float, float] = (0.8, -0.5)
    goal: tuple[float, float] = (-0.8, 0.5)
    rho: float = 0.2
    kappa: float = 0.1
    grid: tuple[int, int] = (8, 5)
    goal_tol: float = 0.05
    push_offset: float = 0.4
    coupling: str = "displacement"  # or "teleport"


@dataclass(frozen=True)
class ExperimentConfig:
    mission: str = "convoy"
    n_robots: int = 5
    out_dir: str | None = None
    run: RunConfig = field(default_factory=RunConfig)
    learning: LearningConfig = field(default_factory=LearningConfig)
    library: LibraryConfig = field(default_factory=LibraryConfig)
    convoy: ConvoyConfig = field(default_factory=ConvoyConfig)
    box: BoxConfig = field(default_factory=BoxConfig)

    def validate(self) -> None:
        if self.mission not in MISSIONS:
            raise ConfigError(f"mission must be one of {MISSIONS}, got {self.mission!r}")
        if self.n_robots < 2:
            raise ConfigError(f"n_robots must be >= 2 (got {self.n_robots})")
        try:
            self.run.validate("run")
            self.learning.validate("learning")
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        lib = self.library
        if not (math.isfinite(lib.theta_lo) and math.isfinite(lib.theta_hi)
                and 0 < lib.theta_lo <= lib.theta_hi):
            raise ConfigError(f"library.theta_lo/theta_hi must satisfy 0 < lo <= hi "
                              f"(got {lib.theta_lo}, {lib.theta_hi})")
        for k in range(2):
            if not lib.phi_lo[k] <= lib.phi_hi[k]:
                raise ConfigError(f"library.phi_lo[{k}] must be <= phi_hi[{k}]")
        cv = self.convoy
        if cv.sigma < 0:
            raise ConfigError(f"convoy.sigma must be >= 0 (got {cv.sigma})")
        if cv.delta <= 0:
            raise ConfigError(f"convoy.delta must be > 0 (got {cv.delta})")
        if cv.bins < 2:
            raise ConfigError(f"convoy.bins must be >= 2 (got {cv.bins})")
        if cv.bin_width <= 0:
            raise ConfigError(f"convoy.bin_width must be > 0 (got {cv.bin_width})")
        bx = self.box
        if bx.rho <= 0:
            raise ConfigError(f"box.rho must be > 0 (got {bx.rho})")
        if bx.kappa < 0:
            raise ConfigError(f"box.kappa must be >= 0 (got {bx.kappa})")
        if bx.grid[0] < 1 or bx.grid[1] < 1 or bx.grid[0] * bx.grid[1] < 2:
            raise ConfigError(f"box.grid must have >= 2 cells (got {bx.grid})")
        if bx.goal_tol <= 0:
            raise ConfigError(f"box.goal_tol must be > 0 (got {bx.goal_tol})")
        if bx.push_offset < 0:
            raise ConfigError(f"box.push_offset must be >= 0 (got {bx.push_offset})")
        if bx.coupling not in ("displacement", "teleport"):
            raise ConfigError(f"box.coupling must be 'displacement' or 'teleport' "
                              f"(got {bx.coupling!r})")

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "run": RunConfig,
    "learning": LearningConfig,
    "library": LibraryConfig,
    "convoy": ConvoyConfig,
    "box": BoxConfig,
}

_TUPLE_FIELDS = {"z0", "v_z", "e0", "goal", "grid", "phi_lo", "phi_hi"}


def _build_section(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}")
    coerced = {k: tuple(v) if k in _TUPLE_FIELDS else v for k, v in data.items()}
    return cls(**coerced)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Merge a (possibly partial) plain dict into the defaults and validate."""
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be an object")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        else:
            kwargs[key] = value
    try:
        cfg = ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return config_from_dict(data)


def override(cfg: ExperimentConfig, seed: int | None = None,
             out_dir: str | None = None) -> ExperimentConfig:
    """Apply command-line overrides without mutating the original."""
    from dataclasses import replace

    if seed is not None:
        cfg = replace(cfg, run=replace(cfg.run, seed=int(seed)))
    if out_dir is not None:
        cfg = replace(cfg, out_dir=str(out_dir))
    return cfg
