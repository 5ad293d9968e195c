# this_file: fracsis/src/fracsis/control.py
"""Feedback synthesis from a marched value field and forward-Euler trajectories."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid

from fracsis.common.errors import HistoryMissingError, OutOfRangeError
from fracsis.common.types import (
    ExitCostSpec,
    FeedbackField,
    FeedbackPairing,
    Grid1D,
    ModelParams,
    ScenarioSummary,
    TrajectoryRecord,
    ValueField,
)
from fracsis.common.utils import write_csv, write_model_json
from fracsis.costs import exit_cost_eval
from fracsis.hjb import merged_gradient
from fracsis.model import drift


def feedback(values: np.ndarray, grid: Grid1D, level: int = 0) -> FeedbackField:
    """Nodal control ξ_i = −[(D_L U)_i⁺ + (D_R U)_i⁻] for one value level."""
    return FeedbackField(x_nodes=grid.x_nodes, values=-merged_gradient(values, grid.dx), level=level)


def feedback_levels(levels: np.ndarray, dx: float) -> np.ndarray:
    """Feedback for a stack of value levels (shape ``(n_levels, n_nodes)``)."""
    u = np.atleast_2d(np.asarray(levels, dtype=float))
    diff = np.diff(u, axis=1) / dx
    zeros = np.zeros((u.shape[0], 1))
    d_left = np.hstack((zeros, diff))
    d_right = np.hstack((diff, zeros))
    return -(np.maximum(d_left, 0.0) + np.minimum(d_right, 0.0))


def _level_for_step(n: int, n_t: int, pairing: FeedbackPairing) -> int:
    return n_t - n if pairing is FeedbackPairing.REMAINING else n


def euler_trajectory(
    p: ModelParams,
    field: ValueField,
    x0: float,
    spec: ExitCostSpec | None = None,
    *,
    pairing: FeedbackPairing | str = FeedbackPairing.REMAINING,
    controlled: bool = True,
) -> TrajectoryRecord:
    """Integrate y′ = b_α(y) + ξⁿ(y) on the value field's time grid.

    With the default remaining-horizon pairing, step n reads the feedback of value
    level N_t − n, since u(·, t) is the optimal cost with t time units left. States
    are clamped to [0, x_max]; clamps are counted and reported.

    Raises:
        HistoryMissingError: ``controlled`` is set but the field has no full history.
        OutOfRangeError: ``x0`` lies outside [0, x_max].
    """
    grid = field.grid
    pairing = FeedbackPairing(pairing)
    if not 0.0 <= x0 <= grid.x_max:
        msg = f"initial state {x0:g} outside [0, {grid.x_max:g}]"
        raise OutOfRangeError(msg, details={"x0": x0, "x_max": grid.x_max})
    if controlled and (field.history is None or len(field.history) < grid.n_t + 1):
        stored = 0 if field.history is None else len(field.history)
        msg = f"trajectory synthesis needs all {grid.n_t + 1} value levels, {stored} stored"
        raise HistoryMissingError(msg, details={"stored": stored, "needed": grid.n_t + 1})

    x_nodes = grid.x_nodes
    dt = grid.dt
    states = np.empty(grid.n_t + 1)
    controls = np.zeros(grid.n_t + 1)
    clamps = 0
    y = float(x0)
    xi_table = feedback_levels(np.asarray(field.history), grid.dx) if controlled else None

    for n in range(grid.n_t + 1):
        if controlled:
            level = _level_for_step(n, grid.n_t, pairing)
            controls[n] = float(np.interp(y, x_nodes, xi_table[level]))
        states[n] = y
        if n == grid.n_t:
            break
        y_next = y + dt * (float(drift(p, y)) + controls[n])
        if y_next < 0.0 or y_next > grid.x_max:
            clamps += 1
            y_next = min(max(y_next, 0.0), grid.x_max)
        y = y_next

    if clamps:
        logger.warning(f"trajectory from x0={x0:g} was clamped {clamps} time(s)")

    traj = TrajectoryRecord(
        times=grid.t_nodes,
        states=states,
        controls=controls,
        running_cost=0.5 * (states**2 + controls**2),
        clamp_events=clamps,
        label=f"{'ctrl' if controlled else 'free'}_x{x0:g}",
        controlled=controlled,
    )
    traj.total_cost = running_cost_integral(traj)
    if spec is not None:
        traj.terminal_cost = float(exit_cost_eval(spec, traj.final_state))
        traj.total_cost += traj.terminal_cost
    return traj


def running_cost_integral(traj: TrajectoryRecord) -> float:
    """Trapezoidal ∫ ½(y² + ξ²) dt; zero for a single sample."""
    if traj.times.size < 2:
        return 0.0
    return float(trapezoid(0.5 * (traj.states**2 + traj.controls**2), traj.times))


def trajectory_cost(traj: TrajectoryRecord, spec: ExitCostSpec) -> float:
    """Trapezoidal ∫ ½(y² + ξ²) dt plus φ(y(T))."""
    return running_cost_integral(traj) + float(exit_cost_eval(spec, traj.final_state))


def summarize_trajectory(traj: TrajectoryRecord) -> ScenarioSummary:
    return ScenarioSummary(
        label=traj.label,
        x0=float(traj.states[0]),
        controlled=traj.controlled,
        final_state=traj.final_state,
        total_cost=traj.total_cost,
        max_control=traj.max_control,
        clamp_events=traj.clamp_events,
    )


def export_trajectory(traj: TrajectoryRecord, out_dir: Path | str) -> Path:
    """Write ``<label>.csv`` (``t,y,xi,running_cost``) and a ``<label>.json`` summary."""
    out_dir = Path(out_dir)
    path = write_csv(
        out_dir / f"{traj.label}.csv",
        ("t", "y", "xi", "running_cost"),
        (traj.times, traj.states, traj.controls, traj.running_cost),
    )
    write_model_json(out_dir / f"{traj.label}.json", summarize_trajectory(traj))
    return path
