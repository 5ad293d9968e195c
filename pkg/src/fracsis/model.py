# this_file: fracsis/src/fracsis/model.py
"""Fractional (Caputo-Fabrizio) SIS model reduced to the infected population.

With S = N − I the fractional system collapses to the autonomous ODE

    I' = b_α(I) = (β − γ − (β/N) I) I · α / (M(α) − (1−α)(β − γ − (2β/N) I)),

which is the logistic equation for α = 1. This module validates parameters,
evaluates b_α and b_α', locates equilibria, rewrites the drift in saturated
incidence/treatment form, integrates free trajectories and provides a
Caputo-Fabrizio quadrature used to cross-check the reduction.

Note on the saturated form: the coefficients printed in the source derivation have
unbalanced parentheses, an extra ``/N`` in r_α and an extra ``−(1−α)`` in the
denominator of k_α. :func:`saturated_params` returns the unique coefficients that
reproduce b_α exactly.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from typing import Any

import numpy as np
from loguru import logger
from pydantic import ValidationError as PydanticValidationError
from scipy.integrate import trapezoid
from scipy.signal import lfilter

from fracsis.common.errors import (
    BadDimensionsError,
    DegenerateRateError,
    NonPositiveParameterError,
    OrderOutOfRangeError,
    StepTooLargeError,
    ViolatedAdmissibilityError,
)
from fracsis.common.types import Equilibrium, EquilibriumSet, ModelParams, SaturatedParams, TrajectoryRecord

ADMISSIBILITY_TOL = 1e-12
CLAMP_TOL = 1e-12
DEFAULT_DT = 1e-3

Numeric = float | np.ndarray


def validate_params(raw: ModelParams | Mapping[str, Any]) -> ModelParams:
    """Check every ModelParams invariant and return the validated parameters.

    Raises:
        NonPositiveParameterError: β, γ, N or M(α) is not a positive finite number.
        OrderOutOfRangeError: α lies outside [0, 1].
        ViolatedAdmissibilityError: α + (1−α)(β−γ) > M(α), or the drift pole x₀ is not negative.
    """
    if isinstance(raw, ModelParams):
        params = raw
    else:
        try:
            params = ModelParams(**dict(raw))
        except PydanticValidationError as e:
            msg = f"Malformed model parameters: {e.error_count()} error(s)"
            raise NonPositiveParameterError(msg, details={"errors": e.errors()}) from e

    for name in ("beta", "gamma", "n_pop", "m_alpha"):
        value = getattr(params, name)
        if not (math.isfinite(value) and value > 0):
            msg = f"{name} must be a positive finite number, got {value}"
            raise NonPositiveParameterError(msg, details={"field": name, "value": value})

    alpha = params.alpha
    if not (math.isfinite(alpha) and 0.0 <= alpha <= 1.0):
        msg = f"alpha must lie in [0, 1], got {alpha}"
        raise OrderOutOfRangeError(msg, details={"field": "alpha", "value": alpha})

    lhs = alpha + (1.0 - alpha) * (params.beta - params.gamma)
    if lhs > params.m_alpha + ADMISSIBILITY_TOL:
        msg = f"admissibility fails: alpha + (1-alpha)(beta-gamma) = {lhs:g} > M(alpha) = {params.m_alpha:g}"
        raise ViolatedAdmissibilityError(msg, details={"lhs": lhs, "m_alpha": params.m_alpha})

    if alpha < 1.0:
        x0 = drift_pole(params)
        if not x0 < 0.0:
            msg = f"drift pole x0 = {x0:g} must be negative"
            raise ViolatedAdmissibilityError(msg, details={"x0": x0})

    return params


def drift_pole(p: ModelParams) -> float:
    """Root x₀ of the drift denominator; b_α is defined on (x₀, +∞). Infinite for α = 1."""
    if p.alpha >= 1.0:
        return -math.inf
    return ((p.beta - p.gamma) * (1.0 - p.alpha) - p.m_alpha) * 2.0 * p.n_pop / (p.beta * (1.0 - p.alpha))


def _denominator(p: ModelParams, x: Numeric) -> Numeric:
    return p.m_alpha - (1.0 - p.alpha) * (p.beta - p.gamma - (2.0 * p.beta / p.n_pop) * x)


def drift(p: ModelParams, x: Numeric) -> Numeric:
    """Reduced drift b_α(x); works elementwise on arrays."""
    growth = p.beta - p.gamma - (p.beta / p.n_pop) * x
    return growth * x * p.alpha / _denominator(p, x)


def drift_derivative(p: ModelParams, x: Numeric) -> Numeric:
    """Derivative b_α'(x) from the quotient rule."""
    slope = p.beta - p.gamma - (2.0 * p.beta / p.n_pop) * x
    growth = p.beta - p.gamma - (p.beta / p.n_pop) * x
    den = _denominator(p, x)
    return p.alpha * slope / den - 2.0 * (1.0 - p.alpha) * p.alpha * (p.beta / p.n_pop) * x * growth / den**2


def equilibria(p: ModelParams) -> EquilibriumSet:
    """Disease-free and endemic equilibria with their stability flags."""
    if p.rho > 1.0:
        endemic = p.n_pop * (1.0 - 1.0 / p.rho)
        return EquilibriumSet(
            disease_free=Equilibrium(value=0.0, stable=False),
            endemic=Equilibrium(value=endemic, stable=True),
        )
    return EquilibriumSet(disease_free=Equilibrium(value=0.0, stable=True), endemic=None)


def saturated_params(p: ModelParams) -> SaturatedParams:
    """Coefficients (λ_α, r_α, k_α) of the saturated incidence/treatment form."""
    d0 = p.m_alpha - (1.0 - p.alpha) * (p.beta - p.gamma)
    return SaturatedParams(
        lambda_a=p.alpha * p.beta / (p.n_pop * d0),
        r_a=p.alpha * p.gamma / d0,
        k_a=2.0 * p.beta * (1.0 - p.alpha) / (p.n_pop * d0),
    )


def saturated_incidence(sp: SaturatedParams, x: Numeric) -> Numeric:
    """H_α(I) = λ_α I / (1 + k_α I)."""
    return sp.lambda_a * x / (1.0 + sp.k_a * x)


def saturated_treatment(sp: SaturatedParams, x: Numeric) -> Numeric:
    """T_α(I) = r_α I / (1 + k_α I)."""
    return sp.r_a * x / (1.0 + sp.k_a * x)


def saturated_rhs(sp: SaturatedParams, p: ModelParams, x: Numeric) -> Numeric:
    """Right-hand side S·H_α(I) − T_α(I) with S = N − I; equals b_α(I)."""
    return (p.n_pop - x) * saturated_incidence(sp, x) - saturated_treatment(sp, x)


def susceptible(p: ModelParams, states: Numeric) -> Numeric:
    """Susceptible population S = N − I."""
    return p.n_pop - states


def logistic_closed_form(p: ModelParams, i0: float, t: Numeric) -> Numeric:
    """Exact solution of the α = 1 (logistic) dynamics started at ``i0``."""
    if p.alpha != 1.0:
        msg = f"the logistic closed form needs alpha = 1, got {p.alpha}"
        raise OrderOutOfRangeError(msg, details={"alpha": p.alpha})
    if p.beta == p.gamma:
        msg = "the logistic closed form is singular for beta = gamma"
        raise DegenerateRateError(msg, details={"beta": p.beta, "gamma": p.gamma})
    r = p.beta - p.gamma
    with np.errstate(over="ignore"):
        decay = np.exp(np.multiply(t, -r))
    result = p.n_pop * i0 * r / (decay * (p.n_pop * r - p.beta * i0) + p.beta * i0)
    return float(result) if np.ndim(result) == 0 else result


def _check_state(p: ModelParams, y: float, step: int) -> float:
    if -CLAMP_TOL <= y < 0.0:
        return 0.0
    if y < 0.0 or y > 2.0 * p.n_pop or not math.isfinite(y):
        msg = f"state {y:g} left [0, 2N] at step {step}"
        raise StepTooLargeError(msg, details={"state": y, "step": step, "upper": 2.0 * p.n_pop})
    return y


def integrate_uncontrolled(
    p: ModelParams, i0: float, horizon: float, dt: float = DEFAULT_DT
) -> TrajectoryRecord:
    """Classical RK4 integration of I' = b_α(I) on [0, horizon].

    The step is adjusted so that an integer number of steps covers the horizon.
    Round-off negatives down to −1e−12 are clamped to 0; anything leaving [0, 2N]
    raises StepTooLargeError.
    """
    if dt <= 0.0 or horizon <= 0.0:
        msg = f"horizon and dt must be positive, got horizon={horizon}, dt={dt}"
        raise BadDimensionsError(msg, details={"horizon": horizon, "dt": dt})
    n_steps = max(1, round(horizon / dt))
    h = horizon / n_steps

    states = np.empty(n_steps + 1)
    y = _check_state(p, float(i0), 0)
    states[0] = y
    for n in range(n_steps):
        k1 = drift(p, y)
        k2 = drift(p, y + 0.5 * h * k1)
        k3 = drift(p, y + 0.5 * h * k2)
        k4 = drift(p, y + h * k3)
        y = _check_state(p, y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, n + 1)
        states[n + 1] = y

    times = np.arange(n_steps + 1) * h
    running = 0.5 * states**2
    logger.debug(f"RK4 free trajectory: i0={i0:g}, {n_steps} steps, final={states[-1]:.6g}")
    return TrajectoryRecord(
        times=times,
        states=states,
        controls=np.zeros_like(states),
        running_cost=running,
        terminal_cost=0.0,
        total_cost=float(trapezoid(running, times)),
        label=f"free_x{i0:g}",
    )


def cf_derivative(samples: np.ndarray, dt: float, alpha: float, m_alpha: float = 1.0) -> np.ndarray:
    """Caputo-Fabrizio derivative of uniformly sampled data.

    f' comes from second-order differences (one-sided at the ends); the
    exponential-kernel convolution is accumulated with the trapezoidal rule on each
    sub-interval, which turns into a first-order recursive filter.
    """
    if not 0.0 <= alpha < 1.0:
        msg = f"the Caputo-Fabrizio kernel needs 0 <= alpha < 1, got {alpha}"
        raise OrderOutOfRangeError(msg, details={"alpha": alpha})
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or f.size < 2:
        msg = "cf_derivative needs a one-dimensional series with at least 2 samples"
        raise BadDimensionsError(msg, details={"shape": f.shape})

    df = np.gradient(f, dt, edge_order=2 if f.size >= 3 else 1)
    decay = math.exp(-alpha / (1.0 - alpha) * dt)
    scale = m_alpha / (1.0 - alpha) * 0.5 * dt
    increments = np.zeros_like(f)
    increments[1:] = scale * (decay * df[:-1] + df[1:])
    return lfilter([1.0], [1.0, -decay], increments)


def cf_residual(p: ModelParams, traj: TrajectoryRecord) -> np.ndarray:
    """D^CF_α I(t) minus the incidence balance g(I) = (β−γ−(β/N)I)I along a trajectory.

    The reduced ODE fixes D^CF_α I − g(I) only up to a transient: their difference
    solves G' = −(α/(1−α)) G with G(0) = −g(I₀), since D^CF_α I(0) = 0. The residual
    returned here removes that transient, so it vanishes up to quadrature error.
    """
    dt = float(traj.times[1] - traj.times[0])
    d_cf = cf_derivative(traj.states, dt, p.alpha, p.m_alpha)
    balance = (p.beta - p.gamma - (p.beta / p.n_pop) * traj.states) * traj.states
    transient = balance[0] * np.exp(-p.alpha / (1.0 - p.alpha) * (traj.times - traj.times[0]))
    return d_cf - balance + transient
