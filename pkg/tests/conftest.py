"""Pytest configuration and shared fixtures for fracsis tests."""

import os
import sys
from pathlib import Path

import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from fracsis.common.types import ExitCostSpec, ExitCostVariant, ModelParams
from fracsis.hjb import build_grid, solve
from fracsis.model import validate_params


@pytest.fixture(scope="session")
def params_alpha1():
    """Reference parameters: α = 1, ρ = 1.5, γ = 1, N = 2.25, M = 1."""
    return validate_params(ModelParams.from_rho(1.0, 1.5))


@pytest.fixture(scope="session")
def params_alpha_half():
    """Reference parameters with α = 1/2."""
    return validate_params(ModelParams.from_rho(0.5, 1.5))


@pytest.fixture(scope="session")
def params_no_drift():
    """α = 0 makes the drift vanish identically."""
    return validate_params(ModelParams.from_rho(0.0, 1.5))


@pytest.fixture(scope="session")
def reference_grid():
    """[0, 4] × [0, 5] with 200 × 4000 intervals (Δx = 0.02, Δt = 0.00125)."""
    return build_grid(4.0, 5.0, 200, 4000)


@pytest.fixture
def small_grid():
    """Coarse grid for fast unit tests (Δx = 0.1, Δt = 0.01)."""
    return build_grid(1.0, 1.0, 10, 100)


@pytest.fixture(scope="session")
def linear_cost():
    return ExitCostSpec(variant=ExitCostVariant.LINEAR)


@pytest.fixture(scope="session")
def zero_cost():
    """φ ≡ 0 on [0, 10] through the tabulated variant."""
    return ExitCostSpec(variant=ExitCostVariant.TABLE, table=((0.0, 0.0), (10.0, 0.0)))


@pytest.fixture(scope="session")
def solved_alpha1(params_alpha1, reference_grid, linear_cost):
    """Linear-cost march for α = 1 with every level stored."""
    return solve(params_alpha1, reference_grid, linear_cost, keep_history=True)


@pytest.fixture(scope="session")
def solved_alpha_half(params_alpha_half, reference_grid, linear_cost):
    """Linear-cost march for α = 1/2 with every level stored."""
    return solve(params_alpha_half, reference_grid, linear_cost, keep_history=True)


@pytest.fixture
def write_config(tmp_path):
    """Write a flat experiment file and return its path."""

    def _write(text: str, name: str = "experiment.cfg") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Drop FRACSIS_* overrides inherited from the calling shell."""
    for key in list(os.environ):
        if key.startswith("FRACSIS_"):
            monkeypatch.delenv(key)


@pytest.fixture(autouse=True)
def reset_loguru():
    """Reset loguru configuration for each test."""
    from loguru import logger

    logger.remove()
    logger.add(sys.stderr, level="INFO")
    yield
    logger.remove()


@pytest.fixture
def log_messages():
    """Collect WARNING-and-above loguru messages emitted during a test."""
    from loguru import logger

    messages: list[str] = []
    sink_id = logger.add(lambda message: messages.append(message.record["message"]), level="WARNING")
    yield messages
    logger.remove(sink_id)


# Marker fixtures
@pytest.fixture
def slow_test(request):
    """Mark test as slow."""
    if request.config.getoption("--skip-slow", default=False):
        pytest.skip("Skipping slow test")


# CLI argument fixtures
def pytest_addoption(parser):
    """Add custom command line options."""
    parser.addoption("--skip-slow", action="store_true", default=False, help="Skip slow tests")
