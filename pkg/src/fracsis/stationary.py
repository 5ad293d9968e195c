# this_file: fracsis/src/fracsis/stationary.py
"""Stationary oracle v̄ for the long-horizon value function.

v̄(x) = φ(0) + ∫₀ˣ b_α(s) + √(b_α(s)² + s²) ds solves the horizon-free HJB
equation; the marched solution approaches it on bounded sets as T grows.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid, trapezoid

from fracsis.common.errors import BadDimensionsError, LengthMismatchError, OrderOutOfRangeError
from fracsis.common.types import ErrorNorms, ExitCostSpec, ModelParams, StationaryField, TrajectoryRecord
from fracsis.common.utils import write_csv
from fracsis.costs import exit_cost_eval
from fracsis.model import drift


def stationary_integrand(p: ModelParams, s: float | np.ndarray) -> float | np.ndarray:
    """b_α(s) + √(b_α(s)² + s²), written without cancellation where b_α < 0."""
    s = np.asarray(s, dtype=float)
    b = drift(p, s)
    root = np.hypot(b, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        cancelled = np.square(s) / (root - b)
    result = np.where(b >= 0.0, b + root, cancelled)
    return float(result) if result.ndim == 0 else result


def stationary_value(p: ModelParams, phi0: float, x_nodes: np.ndarray) -> StationaryField:
    """Trapezoidal quadrature of the integrand on ``x_nodes`` starting from ``phi0``."""
    x = np.asarray(x_nodes, dtype=float)
    if x.ndim != 1 or x.size == 0:
        msg = "stationary_value needs a non-empty one-dimensional node sequence"
        raise BadDimensionsError(msg, details={"shape": x.shape})
    if x.size == 1:
        return StationaryField(x_nodes=x, values=np.array([phi0]), phi0=phi0)
    g = np.asarray(stationary_integrand(p, x))
    values = phi0 + cumulative_trapezoid(g, x, initial=0.0)
    return StationaryField(x_nodes=x, values=values, phi0=phi0)


def closed_form_constant(p: ModelParams) -> float:
    """C₀(β, γ, N): fixes v̄(0) = φ(0) in the α = 1 closed form."""
    a = p.beta - p.gamma
    c = p.beta / p.n_pop
    root = math.sqrt(a * a + 1.0)
    return (0.5 * a * a * root - (a * a + 1.0) ** 1.5 / 3.0 + 0.5 * a * math.asinh(a)) / c**2


def closed_form_alpha1(p: ModelParams, phi0: float, x: float | np.ndarray) -> float | np.ndarray:
    """Closed-form v̄ for α = 1, with y(x) = β − γ − (β/N)x.

    v̄(x) = φ(0) + C₀ + (β−γ)x²/2 − (β/N)x³/3
           + (N/β)²[⅓(y²+1)^{3/2} − ½(β−γ)(y√(y²+1) + asinh y)]
    """
    if p.alpha != 1.0:
        msg = f"the closed-form stationary solution needs alpha = 1, got {p.alpha}"
        raise OrderOutOfRangeError(msg, details={"alpha": p.alpha})
    x = np.asarray(x, dtype=float)
    a = p.beta - p.gamma
    c = p.beta / p.n_pop
    y = a - c * x
    root = np.sqrt(y * y + 1.0)
    bracket = (y * y + 1.0) ** 1.5 / 3.0 - 0.5 * a * (y * root + np.arcsinh(y))
    result = phi0 + closed_form_constant(p) + a * x**2 / 2.0 - c * x**3 / 3.0 + bracket / c**2
    return float(result) if result.ndim == 0 else result


def compare_fields(u_final: np.ndarray, v_bar: np.ndarray, dx: float) -> ErrorNorms:
    """L∞ and discrete L² (√(Δx Σ diff²)) distances between aligned node values."""
    u = np.asarray(u_final, dtype=float)
    v = np.asarray(v_bar, dtype=float)
    if u.shape != v.shape:
        msg = f"cannot compare fields of lengths {u.size} and {v.size}"
        raise LengthMismatchError(msg, details={"u": u.size, "v_bar": v.size})
    diff = np.abs(u - v)
    if diff.size == 0:
        return ErrorNorms(l_inf=0.0, l_2=0.0)
    return ErrorNorms(l_inf=float(diff.max()), l_2=math.sqrt(dx * float(np.sum(diff**2))))


def stationary_feedback(p: ModelParams, x: float | np.ndarray) -> float | np.ndarray:
    """Stationary closed-loop control ξ̄ = −v̄′(x)."""
    return -stationary_integrand(p, x)


def stationary_closed_loop(
    p: ModelParams, x0: float, horizon: float, dt: float, spec: ExitCostSpec | None = None
) -> TrajectoryRecord:
    """Forward Euler run of y′ = b_α(y) + ξ̄(y) = −√(b_α(y)² + y²)."""
    n_steps = max(1, round(horizon / dt))
    h = horizon / n_steps
    states = np.empty(n_steps + 1)
    controls = np.empty(n_steps + 1)
    y = float(x0)
    for n in range(n_steps + 1):
        xi = float(stationary_feedback(p, y))
        states[n], controls[n] = y, xi
        y = max(0.0, y + h * (drift(p, y) + xi))

    times = np.arange(n_steps + 1) * h
    running = 0.5 * (states**2 + controls**2)
    terminal = float(exit_cost_eval(spec, states[-1])) if spec is not None else 0.0
    return TrajectoryRecord(
        times=times,
        states=states,
        controls=controls,
        running_cost=running,
        terminal_cost=terminal,
        total_cost=float(trapezoid(running, times)) + terminal,
        label=f"stationary_x{x0:g}",
        controlled=True,
    )


def export_stationary(field: StationaryField, path: Path | str) -> Path:
    """CSV with header ``x,v_bar``."""
    logger.debug(f"Exporting stationary field with {field.values.size} nodes")
    return write_csv(path, ("x", "v_bar"), (field.x_nodes, field.values))
