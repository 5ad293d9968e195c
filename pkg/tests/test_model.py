"""Tests for fracsis.model module."""

import math

import numpy as np
import pytest

from fracsis.common.errors import (
    BadDimensionsError,
    DegenerateRateError,
    NonPositiveParameterError,
    OrderOutOfRangeError,
    StepTooLargeError,
    ViolatedAdmissibilityError,
)
from fracsis.common.types import ModelParams
from fracsis.model import (
    cf_derivative,
    cf_residual,
    drift,
    drift_derivative,
    drift_pole,
    equilibria,
    integrate_uncontrolled,
    logistic_closed_form,
    saturated_params,
    saturated_rhs,
    susceptible,
    validate_params,
)


class TestValidateParams:
    """Test parameter validation."""

    def test_reference_parameters(self, params_alpha_half):
        assert validate_params(params_alpha_half) is params_alpha_half

    def test_from_mapping(self):
        p = validate_params({"alpha": 1.0, "beta": 1.5, "gamma": 1.0, "n_pop": 2.25})
        assert p.m_alpha == 1.0

    def test_malformed_mapping(self):
        with pytest.raises(NonPositiveParameterError, match="Malformed"):
            validate_params({"alpha": 1.0, "beta": 1.5})

    @pytest.mark.parametrize("field", ["beta", "gamma", "n_pop", "m_alpha"])
    def test_non_positive(self, field):
        raw = ModelParams.from_rho(0.5, 1.5).model_dump()
        raw[field] = 0.0
        with pytest.raises(NonPositiveParameterError) as exc_info:
            validate_params(raw)
        assert exc_info.value.details["field"] == field

    def test_nan_rejected(self):
        with pytest.raises(NonPositiveParameterError):
            validate_params(ModelParams(alpha=1.0, beta=math.nan, gamma=1.0, n_pop=2.25))

    @pytest.mark.parametrize("alpha", [-0.1, 1.5])
    def test_alpha_out_of_range(self, alpha):
        with pytest.raises(OrderOutOfRangeError):
            validate_params(ModelParams.from_rho(alpha, 1.5))

    def test_admissibility(self):
        # 0.5 + 0.5 * (4 - 1) = 2 > M = 1
        with pytest.raises(ViolatedAdmissibilityError):
            validate_params(ModelParams(alpha=0.5, beta=4.0, gamma=1.0, n_pop=2.25))

    def test_pole_on_boundary(self):
        # alpha = 0 with beta - gamma = M puts the pole exactly at 0
        p = ModelParams(alpha=0.0, beta=2.0, gamma=1.0, n_pop=2.25)
        assert drift_pole(p) == 0.0
        with pytest.raises(ViolatedAdmissibilityError):
            validate_params(p)

    def test_pole_negative(self, params_alpha_half):
        assert drift_pole(params_alpha_half) < 0.0

    def test_pole_infinite_for_alpha1(self, params_alpha1):
        assert drift_pole(params_alpha1) == -math.inf


class TestDrift:
    """Test the reduced drift and its derivative."""

    def test_zero_at_origin(self, params_alpha_half):
        assert drift(params_alpha_half, 0.0) == 0.0

    def test_reference_value(self, params_alpha_half):
        assert drift(params_alpha_half, 0.5) == pytest.approx(1.0 / 26.0, rel=1e-12)

    def test_logistic_for_alpha1(self, params_alpha1):
        x = np.linspace(0.0, 4.0, 9)
        np.testing.assert_allclose(drift(params_alpha1, x), (0.5 - x / 1.5) * x, atol=1e-14)

    def test_zero_at_endemic(self, params_alpha_half):
        assert drift(params_alpha_half, 0.75) == pytest.approx(0.0, abs=1e-14)

    def test_vanishes_for_alpha0(self, params_no_drift):
        np.testing.assert_array_equal(drift(params_no_drift, np.linspace(0, 4, 5)), 0.0)

    @pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 2.5])
    def test_derivative_matches_differences(self, params_alpha_half, x):
        h = 1e-5
        fd = (drift(params_alpha_half, x + h) - drift(params_alpha_half, x - h)) / (2 * h)
        assert drift_derivative(params_alpha_half, x) == pytest.approx(fd, abs=1e-8)

    def test_derivative_at_origin(self, params_alpha_half):
        # alpha (beta - gamma) / (M - (1 - alpha)(beta - gamma))
        assert drift_derivative(params_alpha_half, 0.0) == pytest.approx(1.0 / 3.0)


class TestEquilibria:
    def test_endemic(self, params_alpha_half):
        eq = equilibria(params_alpha_half)
        assert eq.endemic is not None
        assert eq.endemic.value == pytest.approx(0.75)
        assert eq.endemic.stable
        assert not eq.disease_free.stable
        assert eq.attractor == pytest.approx(0.75)

    @pytest.mark.parametrize("rho", [0.5, 1.0])
    def test_disease_free(self, rho):
        eq = equilibria(validate_params(ModelParams.from_rho(0.5, rho)))
        assert eq.endemic is None
        assert eq.disease_free.stable
        assert eq.attractor == 0.0


class TestSaturatedForm:
    """Test the saturated incidence/treatment rewrite."""

    def test_coefficients(self, params_alpha_half):
        sp = saturated_params(params_alpha_half)
        assert sp.lambda_a == pytest.approx(4.0 / 9.0)
        assert sp.r_a == pytest.approx(2.0 / 3.0)
        assert sp.k_a == pytest.approx(8.0 / 9.0)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.9, 1.0])
    def test_reproduces_drift(self, alpha):
        p = validate_params(ModelParams.from_rho(alpha, 1.5))
        x = np.random.default_rng(0).uniform(0.0, 2.0 * p.n_pop, 1000)
        np.testing.assert_allclose(saturated_rhs(saturated_params(p), p, x), drift(p, x), atol=1e-12)

    def test_susceptible(self, params_alpha1):
        np.testing.assert_allclose(susceptible(params_alpha1, np.array([0.0, 1.0])), [2.25, 1.25])


class TestLogistic:
    """Test the α = 1 closed form."""

    def test_reference_value(self, params_alpha1):
        assert logistic_closed_form(params_alpha1, 0.5, 1.0) == pytest.approx(0.57548, abs=1e-5)

    def test_initial_value(self, params_alpha1):
        assert logistic_closed_form(params_alpha1, 1.25, 0.0) == pytest.approx(1.25)

    def test_needs_alpha1(self, params_alpha_half):
        with pytest.raises(OrderOutOfRangeError):
            logistic_closed_form(params_alpha_half, 0.5, 1.0)

    def test_degenerate(self):
        p = validate_params(ModelParams.from_rho(1.0, 1.0))
        with pytest.raises(DegenerateRateError):
            logistic_closed_form(p, 0.5, 1.0)


class TestIntegrateUncontrolled:
    """Test the RK4 free dynamics."""

    def test_matches_closed_form(self, params_alpha1):
        traj = integrate_uncontrolled(params_alpha1, 0.5, 10.0, dt=1e-3)
        exact = logistic_closed_form(params_alpha1, 0.5, traj.times)
        assert np.max(np.abs(traj.states - exact)) <= 1e-6

    def test_record_layout(self, params_alpha1):
        traj = integrate_uncontrolled(params_alpha1, 0.5, 1.0, dt=0.1)
        assert traj.times.size == 11
        assert traj.times[-1] == pytest.approx(1.0)
        np.testing.assert_array_equal(traj.controls, 0.0)
        assert traj.label == "free_x0.5"
        assert not traj.controlled

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    @pytest.mark.parametrize("i0", [0.1, 0.5, 1.25, 2.0])
    def test_endemic_attractor(self, alpha, i0):
        p = validate_params(ModelParams.from_rho(alpha, 1.5))
        traj = integrate_uncontrolled(p, i0, 50.0, dt=1e-2)
        assert abs(traj.final_state - 0.75) < 1e-3

    @pytest.mark.parametrize("i0", [0.5, 2.0])
    def test_disease_free_attractor(self, i0):
        p = validate_params(ModelParams.from_rho(0.5, 0.5))
        traj = integrate_uncontrolled(p, i0, 50.0, dt=1e-2)
        assert traj.final_state < 1e-3

    def test_zero_stays_zero(self, params_alpha_half):
        traj = integrate_uncontrolled(params_alpha_half, 0.0, 5.0)
        np.testing.assert_array_equal(traj.states, 0.0)

    @pytest.mark.parametrize("i0", [-1.0, 5.0])
    def test_outside_band(self, params_alpha1, i0):
        with pytest.raises(StepTooLargeError):
            integrate_uncontrolled(params_alpha1, i0, 1.0)

    def test_bad_horizon(self, params_alpha1):
        with pytest.raises(BadDimensionsError):
            integrate_uncontrolled(params_alpha1, 0.5, 0.0)


class TestCaputoFabrizio:
    """Test the Caputo-Fabrizio quadrature and the reduction residual."""

    def test_linear_function(self):
        dt = 1e-3
        t = np.arange(1001) * dt
        d = cf_derivative(t, dt, alpha=0.5)
        # (M / (1 - alpha)) * integral of exp(-(t - s)) over [0, 1]
        assert d[0] == 0.0
        assert d[-1] == pytest.approx(2.0 * (1.0 - math.exp(-1.0)), abs=1e-6)

    def test_constant_function(self):
        np.testing.assert_allclose(cf_derivative(np.full(50, 3.0), 0.01, alpha=0.3), 0.0, atol=1e-14)

    @pytest.mark.parametrize("alpha", [1.0, -0.2])
    def test_order_range(self, alpha):
        with pytest.raises(OrderOutOfRangeError):
            cf_derivative(np.zeros(5), 0.1, alpha=alpha)

    def test_too_short(self):
        with pytest.raises(BadDimensionsError):
            cf_derivative(np.zeros(1), 0.1, alpha=0.5)

    def test_reduction_residual(self, params_alpha_half):
        traj = integrate_uncontrolled(params_alpha_half, 0.5, 5.0, dt=1e-3)
        assert np.max(np.abs(cf_residual(params_alpha_half, traj))) <= 5e-3
