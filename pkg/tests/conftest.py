import numpy as np
import pytest

from stark.acshift.config import DimensionlessParams, OUTPUT_DIR_ENV, PhysicalParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def no_output_env(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture
def unit_rate_params():
    """Γ_M = 1 with Q = 1, R = 1."""
    return DimensionlessParams(q=1.0, r=1.0).reference_physical()


@pytest.fixture
def make_params():
    def build(q, r):
        return DimensionlessParams(q=q, r=r).reference_physical()
    return build


@pytest.fixture
def far_detuned():
    return PhysicalParams(gamma_s=1.0, omega_rabi=0.5, detuning=10.0, omega0=3.0, lambda_lw=0.25)
