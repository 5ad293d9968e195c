# this_file: fracsis/src/fracsis/costs.py
"""Exit costs φ: the terminal penalty on the infected population."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from fracsis.common.errors import OutOfRangeError, ParameterError
from fracsis.common.types import ExitCostSpec, ExitCostVariant, Grid1D
from fracsis.common.utils import read_csv_columns

MIN_TOL = 1e-12


def exit_cost_eval(spec: ExitCostSpec, x: float | np.ndarray) -> float | np.ndarray:
    """Evaluate φ(x) for the selected variant.

    - linear: φ(x) = x
    - kinked: φ(x) = min{2x + 1/2, 6x²}
    - bump:   φ(x) = x + exp(−40(x − 1/2)²)
    - table:  linear interpolation between samples

    Raises:
        OutOfRangeError: a state falls outside the sampled range of a table.
    """
    xs = np.asarray(x, dtype=float)
    if spec.variant is ExitCostVariant.LINEAR:
        values = xs.copy()
    elif spec.variant is ExitCostVariant.KINKED:
        values = np.minimum(2.0 * xs + 0.5, 6.0 * xs**2)
    elif spec.variant is ExitCostVariant.BUMP:
        values = xs + np.exp(-40.0 * (xs - 0.5) ** 2)
    else:
        table_x, table_phi = _table_arrays(spec)
        if np.any(xs < table_x[0] - MIN_TOL) or np.any(xs > table_x[-1] + MIN_TOL):
            msg = f"state outside tabulated range [{table_x[0]:g}, {table_x[-1]:g}]"
            raise OutOfRangeError(msg, details={"min": float(xs.min()), "max": float(xs.max())})
        values = np.interp(xs, table_x, table_phi)
    return float(values) if values.ndim == 0 else values


def _table_arrays(spec: ExitCostSpec) -> tuple[np.ndarray, np.ndarray]:
    if not spec.table or len(spec.table) < 2:
        msg = "the table exit cost needs at least two (x, phi) samples"
        raise ParameterError(msg)
    pairs = np.asarray(spec.table, dtype=float)
    order = np.argsort(pairs[:, 0], kind="stable")
    return pairs[order, 0], pairs[order, 1]


def exit_cost_on_grid(spec: ExitCostSpec, grid: Grid1D) -> np.ndarray:
    """Φ_i = φ(x_i) on the grid nodes, after checking the admissibility of φ there."""
    values = np.asarray(exit_cost_eval(spec, grid.x_nodes), dtype=float)
    check_exit_cost(values)
    return values


def check_exit_cost(values: np.ndarray) -> None:
    """φ must be finite, non-negative and minimal at x = 0 on the sampled nodes."""
    if not np.all(np.isfinite(values)):
        msg = "exit cost is not finite on the grid"
        raise ParameterError(msg)
    if np.min(values) < -MIN_TOL:
        msg = f"exit cost must be non-negative, min is {np.min(values):g}"
        raise ParameterError(msg, details={"min": float(np.min(values))})
    if np.any(values < values[0] - MIN_TOL):
        i = int(np.argmin(values))
        msg = f"exit cost must attain its minimum at x = 0, but phi[{i}] < phi[0]"
        raise ParameterError(msg, details={"index": i, "phi0": float(values[0]), "min": float(values[i])})


def table_spec_from_csv(path: Path | str) -> ExitCostSpec:
    """Load a tabulated exit cost from a CSV file with header ``x,phi``."""
    columns = read_csv_columns(path)
    if "x" not in columns or "phi" not in columns:
        msg = f"{path}: expected columns 'x' and 'phi', found {sorted(columns)}"
        raise ParameterError(msg)
    pairs = tuple(zip(columns["x"].tolist(), columns["phi"].tolist(), strict=True))
    return ExitCostSpec(variant=ExitCostVariant.TABLE, table=pairs)
