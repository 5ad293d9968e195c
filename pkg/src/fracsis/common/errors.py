# this_file: fracsis/src/fracsis/common/errors.py
"""Exception hierarchy for fracsis.

All errors carry a human-readable ``message`` and a ``details`` dict with the
offending values, so callers (and the CLI) can report them without parsing strings.

    FracsisError
    ├── ConfigurationError
    ├── ParameterError
    │   ├── NonPositiveParameterError
    │   ├── ViolatedAdmissibilityError
    │   ├── BadDimensionsError
    │   ├── OrderOutOfRangeError
    │   ├── DegenerateRateError
    │   ├── OutOfRangeError
    │   └── LengthMismatchError
    ├── NumericalError
    │   ├── NumericalBlowupError
    │   ├── StepTooLargeError
    │   └── CflExceededError
    └── HistoryMissingError
"""

from typing import Any


class FracsisError(Exception):
    """Base exception for all fracsis errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(FracsisError):
    """Experiment configuration is malformed or references invalid values."""


class ParameterError(FracsisError):
    """A model, grid or cost parameter violates its invariants."""


class NonPositiveParameterError(ParameterError):
    """A parameter that must be strictly positive (or in range) is not."""


class ViolatedAdmissibilityError(ParameterError):
    """The admissibility condition α + (1−α)(β−γ) ≤ M(α) fails."""


class BadDimensionsError(ParameterError):
    """Grid extents or node counts are not usable."""


class OrderOutOfRangeError(ParameterError):
    """The fractional order is outside the range an operation supports."""


class DegenerateRateError(ParameterError):
    """A closed-form expression is singular for the given rates (β = γ)."""


class OutOfRangeError(ParameterError):
    """A state lies outside the range where a tabulated function is defined."""


class LengthMismatchError(ParameterError):
    """Two node-value sequences that must align have different lengths."""


class NumericalError(FracsisError):
    """A numerical procedure became unstable."""


class NumericalBlowupError(NumericalError):
    """The explicit HJB march produced non-finite or huge values."""

    def __init__(self, message: str, step_index: int, details: dict[str, Any] | None = None):
        details = {"step_index": step_index, **(details or {})}
        super().__init__(message, details=details)
        self.step_index = step_index


class StepTooLargeError(NumericalError):
    """An ODE integration left the admissible state band [0, 2N]."""


class CflExceededError(NumericalError):
    """The monitored CFL ratio went above the configured limit."""

    def __init__(self, message: str, ratio: float, details: dict[str, Any] | None = None):
        details = {"ratio": ratio, **(details or {})}
        super().__init__(message, details=details)
        self.ratio = ratio


class HistoryMissingError(FracsisError):
    """Trajectory synthesis needs value levels that were not stored."""
