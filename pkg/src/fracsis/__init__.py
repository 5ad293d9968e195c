# this_file: fracsis/src/fracsis/__init__.py
"""Optimal control of the fractional (Caputo-Fabrizio) SIS model via its HJB equation."""

from importlib_metadata import PackageNotFoundError, version

from fracsis.common.types import (
    ExitCostSpec,
    ExitCostVariant,
    FeedbackPairing,
    Grid1D,
    ModelParams,
    TrajectoryRecord,
    ValueField,
)
from fracsis.control import euler_trajectory, feedback, trajectory_cost
from fracsis.costs import exit_cost_eval
from fracsis.hjb import build_grid, cfl_number, numerical_hamiltonian, solve, step
from fracsis.model import drift, drift_derivative, equilibria, integrate_uncontrolled, validate_params
from fracsis.stationary import closed_form_alpha1, compare_fields, stationary_integrand, stationary_value

try:
    __version__ = version("fracsis")
except PackageNotFoundError:
    __version__ = "0.0.0"

__all__ = [
    "ExitCostSpec",
    "ExitCostVariant",
    "FeedbackPairing",
    "Grid1D",
    "ModelParams",
    "TrajectoryRecord",
    "ValueField",
    "build_grid",
    "cfl_number",
    "closed_form_alpha1",
    "compare_fields",
    "drift",
    "drift_derivative",
    "equilibria",
    "euler_trajectory",
    "exit_cost_eval",
    "feedback",
    "integrate_uncontrolled",
    "numerical_hamiltonian",
    "solve",
    "stationary_integrand",
    "stationary_value",
    "step",
    "trajectory_cost",
    "validate_params",
]
