# this_file: fracsis/src/fracsis/hjb.py
"""Explicit upwind solver for the Hamilton-Jacobi-Bellman equation

    u_t + H(x, Du) = 0,   H(x, p) = −b_α(x)p + ½p² − ½x²,   u(x, 0) = φ(x),

on a uniform grid over [0, x_max] × [0, T]. The unknown u(x, t) is the optimal
cost with remaining horizon t. The left boundary is pinned to φ(0); at the right
boundary only the backward difference contributes.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Iterable
from pathlib import Path

import numpy as np
from loguru import logger

from fracsis.common.errors import BadDimensionsError, CflExceededError, NumericalBlowupError, OutOfRangeError
from fracsis.common.types import CflReport, ExitCostSpec, Grid1D, KinkDiagnostic, ModelParams, ValueField
from fracsis.common.utils import format_tag, write_csv
from fracsis.costs import exit_cost_on_grid
from fracsis.model import drift

BLOWUP_THRESHOLD = 1e6
LOWER_BOUND_TOL = 1e-9


def build_grid(x_max: float, t_max: float, n_x: int, n_t: int) -> Grid1D:
    """Validated uniform grid with Δx = x_max/n_x and Δt = t_max/n_t."""
    if not (math.isfinite(x_max) and x_max > 0.0 and math.isfinite(t_max) and t_max > 0.0):
        msg = f"grid extents must be positive, got x_max={x_max}, t_max={t_max}"
        raise BadDimensionsError(msg, details={"x_max": x_max, "t_max": t_max})
    if int(n_x) != n_x or int(n_t) != n_t or n_x < 2 or n_t < 1:
        msg = f"need integer n_x >= 2 and n_t >= 1, got n_x={n_x}, n_t={n_t}"
        raise BadDimensionsError(msg, details={"n_x": n_x, "n_t": n_t})
    return Grid1D(x_max=float(x_max), t_max=float(t_max), n_x=int(n_x), n_t=int(n_t))


def numerical_hamiltonian(
    x: float | np.ndarray,
    b: float | np.ndarray,
    d_left: float | np.ndarray,
    d_right: float | np.ndarray,
) -> float | np.ndarray:
    """Upwind Hamiltonian (−b + ½d_L)⁺·d_L + (−b + ½d_R)⁻·d_R − ½x².

    The p-independent running-cost source −½x² needs no upwinding and is added as is.
    """
    left = np.maximum(-b + 0.5 * d_left, 0.0) * d_left
    right = np.minimum(-b + 0.5 * d_right, 0.0) * d_right
    result = left + right - 0.5 * np.square(x)
    return float(result) if np.ndim(result) == 0 else result


def one_sided_slopes(values: np.ndarray, dx: float) -> tuple[np.ndarray, np.ndarray]:
    """Backward and forward differences on every node; missing neighbours give 0."""
    diff = np.diff(values) / dx
    d_left = np.concatenate(([0.0], diff))
    d_right = np.concatenate((diff, [0.0]))
    return d_left, d_right


def merged_gradient(values: np.ndarray, dx: float) -> np.ndarray:
    """Upwind-merged gradient (D_L U)⁺ + (D_R U)⁻ per node.

    Node 0 only has the forward branch and the last node only the backward one.
    """
    d_left, d_right = one_sided_slopes(np.asarray(values, dtype=float), dx)
    return np.maximum(d_left, 0.0) + np.minimum(d_right, 0.0)


def _speeds(values: np.ndarray, b: np.ndarray, dx: float) -> np.ndarray:
    # |∂H/∂p| = |−b + p| on the branches the upwind selector keeps
    d_left, d_right = one_sided_slopes(values, dx)
    left = np.where(-b + 0.5 * d_left > 0.0, np.abs(-b + d_left), 0.0)
    right = np.where(-b + 0.5 * d_right < 0.0, np.abs(-b + d_right), 0.0)
    return np.maximum(left, right)[1:]


def _cfl_ratio(values: np.ndarray, b: np.ndarray, grid: Grid1D) -> float:
    return grid.dt / grid.dx * float(np.max(_speeds(values, b, grid.dx)))


def cfl_number(p: ModelParams, grid: Grid1D, field: ValueField) -> float:
    """Courant number Δt·max|−b_α + p|/Δx at the current numerical slopes."""
    return _cfl_ratio(field.current, drift(p, grid.x_nodes), grid)


def _advance(values: np.ndarray, b: np.ndarray, x: np.ndarray, grid: Grid1D, phi0: float, step: int) -> np.ndarray:
    d_left, d_right = one_sided_slopes(values, grid.dx)
    updated = values - grid.dt * numerical_hamiltonian(x, b, d_left, d_right)
    updated[0] = phi0
    if not np.all(np.isfinite(updated)) or np.max(np.abs(updated)) > BLOWUP_THRESHOLD:
        finite = updated[np.isfinite(updated)]
        peak = float(np.max(np.abs(finite))) if finite.size else math.inf
        msg = f"HJB march blew up at step {step} (max |U| = {peak:g}); check the CFL ratio"
        raise NumericalBlowupError(msg, step_index=step, details={"max_abs": peak})
    return updated


def init_field(grid: Grid1D, spec: ExitCostSpec, keep_history: bool = False) -> ValueField:
    """Level 0 of the march: U⁰_i = φ(x_i)."""
    initial = exit_cost_on_grid(spec, grid)
    return ValueField(
        grid=grid,
        current=initial,
        phi0=float(initial[0]),
        history=[initial.copy()] if keep_history else None,
    )


def step(field: ValueField, p: ModelParams) -> ValueField:
    """Advance ``field`` by one time level and return the new field."""
    grid = field.grid
    if field.step_index >= grid.n_t:
        msg = f"field is already at the final level {grid.n_t}"
        raise BadDimensionsError(msg, details={"step_index": field.step_index})
    b = drift(p, grid.x_nodes)
    updated = _advance(field.current, b, grid.x_nodes, grid, field.phi0, field.step_index + 1)
    if updated.min() < field.phi0 - LOWER_BOUND_TOL:
        logger.warning(f"U fell below phi(0) at level {field.step_index + 1}: min = {updated.min():.3g}")
    history = None if field.history is None else [*field.history, updated]
    return dataclasses.replace(
        field,
        current=updated,
        step_index=field.step_index + 1,
        history=history,
        last_increment=float(np.max(np.abs(updated - field.current))),
    )


def snapshot_levels(grid: Grid1D, snapshot_times: Iterable[float]) -> dict[int, float]:
    """Map requested times to their nearest grid level."""
    levels: dict[int, float] = {}
    for t in snapshot_times:
        if not 0.0 <= t <= grid.t_max + 1e-12:
            msg = f"snapshot time {t:g} outside [0, {grid.t_max:g}]"
            raise OutOfRangeError(msg, details={"time": t, "t_max": grid.t_max})
        levels[grid.level_of(t)] = float(t)
    return levels


def solve(
    p: ModelParams,
    grid: Grid1D,
    spec: ExitCostSpec,
    snapshot_times: Iterable[float] = (),
    *,
    keep_history: bool = False,
    cfl_limit: float = 1.0,
    strict_cfl: bool = False,
) -> ValueField:
    """March the scheme over all ``grid.n_t`` levels.

    Args:
        p: Validated model parameters.
        grid: Space-time grid.
        spec: Exit cost used as initial datum.
        snapshot_times: Times stored in ``field.snapshots`` (nearest level).
        keep_history: Store every level; needed for trajectory synthesis.
        cfl_limit: Courant number above which a warning is logged.
        strict_cfl: Raise CflExceededError instead of warning.

    Returns:
        The field at level ``n_t`` with snapshots, optional history and a CFL report.

    Raises:
        NumericalBlowupError: values became non-finite or exceeded 1e6.
        CflExceededError: only with ``strict_cfl``.
    """
    field = init_field(grid, spec, keep_history=keep_history)
    wanted = snapshot_levels(grid, snapshot_times)
    x = grid.x_nodes
    b = drift(p, x)
    values = field.current
    report = CflReport(limit=cfl_limit)
    increment = math.inf
    low_warned = False

    if 0 in wanted:
        field.snapshots[0] = values.copy()

    for n in range(grid.n_t):
        ratio = _cfl_ratio(values, b, grid)
        if ratio > report.max_ratio:
            report.max_ratio, report.at_step = ratio, n
        if ratio > cfl_limit:
            if strict_cfl:
                msg = f"CFL ratio {ratio:.3g} exceeds {cfl_limit:g} at step {n}"
                raise CflExceededError(msg, ratio=ratio, details={"step": n, "limit": cfl_limit})
            if report.exceeded_steps == 0:
                logger.warning(f"CFL ratio {ratio:.3g} exceeds {cfl_limit:g} at step {n}")
            report.exceeded_steps += 1

        updated = _advance(values, b, x, grid, field.phi0, n + 1)
        if not low_warned and updated.min() < field.phi0 - LOWER_BOUND_TOL:
            logger.warning(f"U fell below phi(0) at level {n + 1}: min = {updated.min():.3g}")
            low_warned = True
        increment = float(np.max(np.abs(updated - values)))
        values = updated
        if field.history is not None:
            field.history.append(values)
        if n + 1 in wanted:
            field.snapshots[n + 1] = values.copy()

    field.current = values
    field.step_index = grid.n_t
    field.cfl = report
    field.last_increment = increment
    logger.debug(
        f"HJB solve: alpha={p.alpha:g} rho={p.rho:g} n_x={grid.n_x} n_t={grid.n_t} "
        f"max CFL={report.max_ratio:.3g} last increment={increment:.2e}"
    )
    return field


def kink_locator(values: np.ndarray, dx: float) -> KinkDiagnostic:
    """Largest interior second-difference magnitude, its node and its ratio to the median."""
    u = np.asarray(values, dtype=float)
    if u.size < 3:
        msg = "kink_locator needs at least 3 nodes"
        raise BadDimensionsError(msg, details={"size": u.size})
    curvature = np.abs(u[2:] - 2.0 * u[1:-1] + u[:-2]) / dx**2
    idx = int(np.argmax(curvature))
    peak = float(curvature[idx])
    median = float(np.median(curvature))
    if median > 0.0:
        ratio = peak / median
    else:
        ratio = math.inf if peak > 0.0 else 0.0
    return KinkDiagnostic(position=(idx + 1) * dx, magnitude=peak, spike_ratio=ratio)


def export_snapshots(field: ValueField, out_dir: Path | str) -> list[Path]:
    """Write one ``u_t<time>.csv`` (header ``x,u``) per stored snapshot."""
    grid = field.grid
    paths = []
    for level, values in sorted(field.snapshots.items()):
        name = f"u_t{format_tag(level * grid.dt)}.csv"
        paths.append(write_csv(Path(out_dir) / name, ("x", "u"), (grid.x_nodes, values)))
    return paths
