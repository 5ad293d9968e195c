# this_file: fracsis/src/fracsis/common/config.py
"""Experiment configuration for fracsis.

One experiment per file, in a flat ``section.name = value`` format::

    # bump-cost refinement study, alpha = 1
    model.alpha = 1
    model.rho = 1.5
    grid.x_max = 10
    cost.variant = bump
    run.kind = converge
    run.levels = 0.1, 0.05, 0.025

Environment variables ``FRACSIS_<SECTION>_<NAME>`` override file values.
"""

from __future__ import annotations

import math
import os
from enum import Enum
from pathlib import Path
from typing import Any

from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from fracsis.common.errors import ConfigurationError, ParameterError
from fracsis.common.types import ExitCostSpec, ExitCostVariant, FeedbackPairing, Grid1D, ModelParams
from fracsis.costs import exit_cost_on_grid, table_spec_from_csv
from fracsis.hjb import build_grid
from fracsis.model import validate_params

ENV_PREFIX = "FRACSIS_"
SECTIONS = ("model", "grid", "cost", "run")
DEFAULT_RHO = 1.5


class ExperimentKind(str, Enum):
    """Batch runs available through ``run.kind``."""

    PROFILES = "profiles"
    TRAJECTORIES = "trajectories"
    CONVERGE = "converge"
    SWEEP = "sweep"
    STATIONARY = "stationary"


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ModelSection(BaseModel):
    """Model parameters; ``rho`` may replace ``beta`` (β = γρ)."""

    alpha: float = 1.0
    beta: float | None = None
    rho: float | None = None
    gamma: float = 1.0
    n_pop: float = 2.25
    m_alpha: float = 1.0

    @model_validator(mode="after")
    def _beta_or_rho(self) -> ModelSection:
        if self.beta is not None and self.rho is not None:
            msg = "set either model.beta or model.rho, not both"
            raise ValueError(msg)
        return self

    def params(self) -> ModelParams:
        beta = self.beta if self.beta is not None else self.gamma * (self.rho if self.rho is not None else DEFAULT_RHO)
        return validate_params(
            ModelParams(alpha=self.alpha, beta=beta, gamma=self.gamma, n_pop=self.n_pop, m_alpha=self.m_alpha)
        )


class GridSection(BaseModel):
    x_max: float = 4.0
    t_max: float = 5.0
    n_x: int = 200
    n_t: int = 4000

    def build(self) -> Grid1D:
        return build_grid(self.x_max, self.t_max, self.n_x, self.n_t)


class CostSection(BaseModel):
    variant: ExitCostVariant = ExitCostVariant.LINEAR
    table: Path | None = None

    def spec(self) -> ExitCostSpec:
        if self.variant is ExitCostVariant.TABLE:
            if self.table is None:
                msg = "cost.variant = table needs cost.table"
                raise ConfigurationError(msg)
            return table_spec_from_csv(self.table)
        return ExitCostSpec(variant=self.variant)


class RunOptions(BaseModel):
    """Kind-specific options; unused ones are ignored by the selected run."""

    kind: ExperimentKind = ExperimentKind.PROFILES
    snapshot_times: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 5.0])
    initial_states: list[float] = Field(default_factory=lambda: [0.5, 1.25])
    levels: list[float] = Field(default_factory=lambda: [0.1, 0.05, 0.025, 0.0125, 0.00625])
    alphas: list[float] = Field(default_factory=lambda: [0.5, 0.75, 1.0])
    domains: list[float] = Field(default_factory=lambda: [4.0, 8.0, 16.0])
    horizons: list[float] = Field(default_factory=list)
    radius: float = Field(default=5.0, gt=0.0)
    pairing: FeedbackPairing = FeedbackPairing.REMAINING
    workers: int = Field(default=1, ge=1)
    cfl_limit: float = Field(default=1.0, gt=0.0)
    plot: bool = False
    out: Path | None = None

    @field_validator("snapshot_times", "initial_states", "levels", "alphas", "domains", "horizons", mode="before")
    @classmethod
    def split_lists(cls, value: Any) -> Any:
        return _split_list(value)


class ExperimentConfig(BaseModel):
    """A complete experiment: model, grid, exit cost and run options."""

    model: ModelSection = Field(default_factory=ModelSection)
    grid: GridSection = Field(default_factory=GridSection)
    cost: CostSection = Field(default_factory=CostSection)
    run: RunOptions = Field(default_factory=RunOptions)

    def validate_all(self) -> None:
        """Run the module-level checks on every referenced value."""
        try:
            self.model.params()
            grid = self.grid.build()
            exit_cost_on_grid(self.cost.spec(), grid)
            if any(not 0.0 <= a <= 1.0 for a in self.run.alphas):
                msg = f"run.alphas must lie in [0, 1], got {self.run.alphas}"
                raise ConfigurationError(msg)
        except ParameterError as e:
            msg = f"Invalid experiment configuration: {e.message}"
            raise ConfigurationError(msg, details=e.details) from e
        except OSError as e:
            msg = f"Failed to read exit cost table: {e}"
            raise ConfigurationError(msg, details={"path": str(self.cost.table)}) from e
        self.validate_run()

    def validate_run(self, kind: ExperimentKind | None = None) -> None:
        """Range checks on the run options that ``kind`` (default ``run.kind``) reads."""
        kind = self.run.kind if kind is None else kind
        run, grid = self.run, self.grid
        if kind is ExperimentKind.PROFILES:
            _check_within("run.snapshot_times", run.snapshot_times, grid.t_max, "t_max")
        elif kind is ExperimentKind.TRAJECTORIES:
            _check_within("run.initial_states", run.initial_states, grid.x_max, "x_max")
        elif kind is ExperimentKind.CONVERGE:
            levels = run.levels
            if not levels or any(b >= a for a, b in zip(levels, levels[1:])):
                msg = f"run.levels must be strictly decreasing, got {levels}"
                raise ConfigurationError(msg, details={"levels": levels})
            for dx in levels:
                nodes_for(grid.x_max, dx)
        elif kind is ExperimentKind.SWEEP:
            dx = grid.x_max / grid.n_x
            for domain in run.domains:
                nodes_for(domain, dx)
        elif kind is ExperimentKind.STATIONARY and run.horizons:
            if any(t <= 0.0 for t in run.horizons):
                msg = f"run.horizons must be positive, got {run.horizons}"
                raise ConfigurationError(msg, details={"horizons": run.horizons})
            if run.radius > grid.x_max:
                msg = f"run.radius {run.radius:g} exceeds x_max {grid.x_max:g}"
                raise ConfigurationError(msg, details={"radius": run.radius, "x_max": grid.x_max})


def _check_within(key: str, values: list[float], upper: float, bound: str) -> None:
    outside = [v for v in values if not 0.0 <= v <= upper + 1e-12]
    if outside:
        msg = f"{key} outside [0, {bound}={upper:g}]: {outside}"
        raise ConfigurationError(msg, details={"values": outside, bound: upper})


def nodes_for(x_max: float, dx: float) -> int:
    """Number of intervals of width ``dx`` covering [0, x_max] exactly."""
    n_x = round(x_max / dx) if dx > 0.0 else 0
    if n_x < 2 or not math.isclose(n_x * dx, x_max, rel_tol=1e-9):
        msg = f"dx={dx:g} does not divide x_max={x_max:g}"
        raise ConfigurationError(msg, details={"dx": dx, "x_max": x_max})
    return n_x


def parse_flat(text: str, source: str = "<string>") -> dict[str, dict[str, str]]:
    """Parse ``section.name = value`` lines into nested sections."""
    sections: dict[str, dict[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            msg = f"Failed to parse {source}:{lineno}: expected 'section.name = value', got {raw!r}"
            raise ConfigurationError(msg, details={"line": lineno})
        if section not in SECTIONS:
            msg = f"Failed to parse {source}:{lineno}: unknown section {section!r}"
            raise ConfigurationError(msg, details={"line": lineno, "section": section})
        sections.setdefault(section, {})[name.strip()] = value.strip()
    return sections


def load_env_config(environ: dict[str, str] | None = None) -> dict[str, dict[str, str]]:
    """Collect ``FRACSIS_<SECTION>_<NAME>`` overrides."""
    environ = dict(os.environ) if environ is None else environ
    overrides: dict[str, dict[str, str]] = {}
    for key, value in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        section, _, name = key[len(ENV_PREFIX) :].lower().partition("_")
        if section in SECTIONS and name:
            overrides.setdefault(section, {})[name] = value
    return overrides


def merge_config(base: dict[str, dict[str, Any]], overrides: dict[str, dict[str, Any]]) -> dict[str, dict[str, Any]]:
    merged = {section: dict(values) for section, values in base.items()}
    for section, values in overrides.items():
        merged.setdefault(section, {}).update(values)
    return merged


def build_config(sections: dict[str, dict[str, Any]], base_dir: Path | None = None) -> ExperimentConfig:
    """Validate parsed sections into an ExperimentConfig."""
    try:
        config = ExperimentConfig.model_validate(sections)
    except ValidationError as e:
        msg = f"Invalid experiment configuration: {e.error_count()} error(s): {e.errors()[0]['msg']}"
        raise ConfigurationError(msg, details={"errors": e.errors()}) from e
    if base_dir is not None and config.cost.table is not None and not config.cost.table.is_absolute():
        config.cost.table = base_dir / config.cost.table
    config.validate_all()
    return config


def load_config(path: Path | str, use_env: bool = True, kind: ExperimentKind | None = None) -> ExperimentConfig:
    """Load, override from the environment and validate an experiment file.

    A ``kind`` replaces ``run.kind`` before validation.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        msg = f"Failed to read config {path}: {e}"
        raise ConfigurationError(msg, details={"path": str(path)}) from e

    sections = parse_flat(text, source=str(path))
    if use_env:
        env = load_env_config()
        if env:
            logger.debug(f"Applying environment overrides: {env}")
        sections = merge_config(sections, env)
    if kind is not None:
        sections = merge_config(sections, {"run": {"kind": kind.value}})
    config = build_config(sections, base_dir=path.parent)
    logger.debug(f"Loaded {config.run.kind.value} experiment from {path}")
    return config


def _format_value(value: Any) -> str:
    if isinstance(value, list):
        return ", ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def save_config(config: ExperimentConfig, path: Path | str) -> None:
    """Write ``config`` back in the flat format (round-trips through load_config)."""
    path = Path(path)
    lines = []
    for section in SECTIONS:
        for name, value in getattr(config, section):
            if value is not None:
                lines.append(f"{section}.{name} = {_format_value(value)}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as e:
        msg = f"Failed to save config to {path}: {e}"
        raise ConfigurationError(msg, details={"path": str(path)}) from e
