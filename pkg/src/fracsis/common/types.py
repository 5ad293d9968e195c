# this_file: fracsis/src/fracsis/common/types.py
"""Common types for the fracsis package.

Parameter-like values are frozen pydantic models; array-carrying results are
dataclasses holding numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class ModelParams(BaseModel):
    """Parameters (α, β, γ, N, M(α)) of the fractional SIS model."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float
    gamma: float
    n_pop: float
    m_alpha: float = 1.0

    @property
    def rho(self) -> float:
        """Reproduction factor β/γ."""
        return self.beta / self.gamma

    @classmethod
    def from_rho(
        cls, alpha: float, rho: float, gamma: float = 1.0, n_pop: float = 2.25, m_alpha: float = 1.0
    ) -> ModelParams:
        """Build parameters from the reproduction factor (β = γρ)."""
        return cls(alpha=alpha, beta=gamma * rho, gamma=gamma, n_pop=n_pop, m_alpha=m_alpha)


class Equilibrium(BaseModel):
    """A rest point of the reduced dynamics with its stability flag."""

    model_config = ConfigDict(frozen=True)

    value: float
    stable: bool


class EquilibriumSet(BaseModel):
    """Disease-free and (optional) endemic equilibria."""

    model_config = ConfigDict(frozen=True)

    disease_free: Equilibrium
    endemic: Equilibrium | None = None

    @property
    def attractor(self) -> float:
        """The asymptotically stable equilibrium value."""
        if self.endemic is not None and self.endemic.stable:
            return self.endemic.value
        return self.disease_free.value


class SaturatedParams(BaseModel):
    """Coefficients of the saturated incidence/treatment form."""

    model_config = ConfigDict(frozen=True)

    lambda_a: float
    r_a: float
    k_a: float


class Grid1D(BaseModel):
    """Uniform space-time grid on [0, x_max] × [0, t_max]."""

    model_config = ConfigDict(frozen=True)

    x_max: float
    t_max: float
    n_x: int
    n_t: int

    @property
    def dx(self) -> float:
        return self.x_max / self.n_x

    @property
    def dt(self) -> float:
        return self.t_max / self.n_t

    @property
    def x_nodes(self) -> np.ndarray:
        return np.arange(self.n_x + 1) * self.dx

    @property
    def t_nodes(self) -> np.ndarray:
        return np.arange(self.n_t + 1) * self.dt

    def level_of(self, t: float) -> int:
        """Nearest time level to ``t`` (clipped to the grid)."""
        return int(min(max(round(t / self.dt), 0), self.n_t))


class ExitCostVariant(str, Enum):
    """Available terminal costs φ."""

    LINEAR = "linear"
    KINKED = "kinked"
    BUMP = "bump"
    TABLE = "table"


class FeedbackPairing(str, Enum):
    """Which value level drives the control at trajectory step n.

    REMAINING uses level N_t − n (remaining horizon); ELAPSED uses level n.
    """

    REMAINING = "remaining"
    ELAPSED = "elapsed"


class ExitCostSpec(BaseModel):
    """Selection of the exit cost φ, with samples for the tabulated variant."""

    model_config = ConfigDict(frozen=True)

    variant: ExitCostVariant = ExitCostVariant.LINEAR
    table: tuple[tuple[float, float], ...] | None = None


class CflReport(BaseModel):
    """Courant numbers observed during one HJB march."""

    max_ratio: float = 0.0
    at_step: int = 0
    limit: float = 1.0
    exceeded_steps: int = 0

    @property
    def exceeded(self) -> bool:
        return self.max_ratio > self.limit


class ErrorNorms(BaseModel):
    """Discrete discrepancy between two node-value sequences."""

    model_config = ConfigDict(frozen=True)

    l_inf: float = Field(ge=0.0)
    l_2: float = Field(ge=0.0)

    @property
    def l_2_squared(self) -> float:
        return self.l_2 * self.l_2


class KinkDiagnostic(BaseModel):
    """Location and strength of the largest interior second-difference spike."""

    model_config = ConfigDict(frozen=True)

    position: float
    magnitude: float
    spike_ratio: float

    def present(self, threshold: float = 10.0) -> bool:
        return self.spike_ratio > threshold


@dataclass
class ValueField:
    """Samples U_i^n of the value function on a grid, with stored snapshots."""

    grid: Grid1D
    current: np.ndarray
    phi0: float
    step_index: int = 0
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    history: list[np.ndarray] | None = None
    cfl: CflReport = field(default_factory=CflReport)
    last_increment: float = math.inf

    @property
    def time(self) -> float:
        return self.step_index * self.grid.dt

    def level(self, n: int) -> np.ndarray:
        """Values at level ``n`` from the history or the snapshots."""
        if self.history is not None and 0 <= n < len(self.history):
            return self.history[n]
        if n in self.snapshots:
            return self.snapshots[n]
        if n == self.step_index:
            return self.current
        msg = f"time level {n} was not stored"
        raise KeyError(msg)


@dataclass
class StationaryField:
    """Stationary solution v̄ sampled on the grid nodes."""

    x_nodes: np.ndarray
    values: np.ndarray
    phi0: float


@dataclass
class FeedbackField:
    """Nodal feedback ξ at one time level, linearly interpolated in between."""

    x_nodes: np.ndarray
    values: np.ndarray
    level: int = 0

    def __call__(self, x: float | np.ndarray) -> float | np.ndarray:
        return np.interp(x, self.x_nodes, self.values)


@dataclass
class TrajectoryRecord:
    """Time series of a (controlled or free) trajectory and its cost."""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    running_cost: np.ndarray
    terminal_cost: float = 0.0
    total_cost: float = 0.0
    clamp_events: int = 0
    label: str = ""
    controlled: bool = False

    @property
    def final_state(self) -> float:
        return float(self.states[-1])

    @property
    def max_control(self) -> float:
        return float(np.max(np.abs(self.controls))) if self.controls.size else 0.0


class ConvergenceLevel(BaseModel):
    """One refinement level of a convergence study."""

    dx: float
    n_x: int
    n_t: int
    l_inf: float
    l_2: float
    l_2_squared: float
    max_cfl: float


class ConvergenceReport(BaseModel):
    """Errors per refinement level and least-squares convergence orders."""

    alpha: float
    rho: float
    levels: list[ConvergenceLevel]
    order_l_inf: float
    order_l_2: float
    order_l_2_squared: float


class SweepRow(BaseModel):
    """Final-time sup-norms of U and of the merged gradient for one sweep cell."""

    alpha: float
    domain: float
    u_norm: float
    du_norm: float


class ScenarioSummary(BaseModel):
    """Outcome of one trajectory scenario."""

    label: str
    x0: float
    controlled: bool
    final_state: float
    total_cost: float
    max_control: float
    clamp_events: int
