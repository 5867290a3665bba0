import math

import numpy as np
import pytest

from stark.acshift.bath import (
    DiscreteBath,
    gamma_discrete,
    gamma_quadrature,
    gamma_quadrature_dimensionless,
    global_phase,
    lorentzian_kernel_integral,
    phase_phi,
    sample_flat_bath,
    sample_lorentzian_bath,
)
from stark.acshift.config import DimensionlessParams, FrequencyLine, PhysicalParams, Transient
from stark.acshift.core import gamma_dimensionless, gamma_physical
from stark.acshift.errors import DomainError

ONE_MODE = DiscreteBath(omegas=[1.0], weights=[0.04])


def test_gamma_discrete_single_mode():
    assert gamma_discrete(0.0, ONE_MODE) == 0.0
    assert gamma_discrete(math.pi, ONE_MODE) == pytest.approx(0.08, rel=1e-14)


def test_gamma_discrete_rejects_negative_time():
    with pytest.raises(DomainError):
        gamma_discrete(-1.0, ONE_MODE)


def test_gamma_discrete_is_non_negative(rng):
    bath = DiscreteBath(omegas=rng.uniform(-5.0, 5.0, 50), weights=rng.uniform(0.0, 1.0, 50))
    values = gamma_discrete(rng.uniform(0.0, 100.0, 200), bath)
    assert np.all(values >= 0.0)


def test_phase_phi():
    bath = DiscreteBath(omegas=[1.0], weights=[4.0])
    assert phase_phi(0.0, bath) == 0.0
    assert phase_phi(math.pi / 2, bath) == pytest.approx(1.0, rel=1e-15)
    t = np.linspace(-3.0, 3.0, 13)
    two = DiscreteBath(omegas=[0.7, 2.1], weights=[1.0, 0.3])
    np.testing.assert_allclose(phase_phi(-t, two), -phase_phi(t, two), atol=1e-15)


def test_global_phase_derivative_is_integrated_commutator():
    bath = DiscreteBath(omegas=[0.7, -2.1], weights=[1.0, 0.3])
    t = np.linspace(0.5, 10.0, 20)
    h = 1e-6
    numeric = (global_phase(t + h, bath) - global_phase(t - h, bath)) / (2 * h)
    expected = sum(w / 4.0 * (1.0 - np.cos(om * t)) / om for om, w in bath.modes)
    np.testing.assert_allclose(numeric, expected, rtol=1e-6, atol=1e-8)


def test_global_phase_series_is_continuous():
    bath = DiscreteBath(omegas=[1.0], weights=[4.0])
    below = global_phase(0.01 * (1.0 - 1e-9), bath)
    above = global_phase(0.01 * (1.0 + 1e-9), bath)
    assert below == pytest.approx(above, rel=1e-6)
    assert global_phase(1e-3, bath) == pytest.approx(1e-9 / 6.0, rel=1e-6)


def test_bath_rejects_zero_frequency_and_negative_weight():
    with pytest.raises(DomainError):
        DiscreteBath(omegas=[0.0, 1.0], weights=[1.0, 1.0])
    with pytest.raises(DomainError):
        DiscreteBath(omegas=[1.0], weights=[-1.0])


def test_two_modes_are_symmetric(make_params):
    p = make_params(3.0, 1.0)
    bath = sample_lorentzian_bath(p, 2, cutoff_widths=10.0)
    assert len(bath) == 2
    assert bath.omegas.mean() == pytest.approx(p.omega0)
    assert bath.weights[0] == pytest.approx(bath.weights[1], rel=1e-14)


def test_total_weight_is_lorentzian_normalization(make_params):
    p = make_params(2.0, 0.5)
    cutoff = 1000.0
    bath = sample_lorentzian_bath(p, 20000, cutoff_widths=cutoff)
    window = p.gamma_m * p.lambda_lw * 2.0 * math.atan(cutoff) / math.pi
    assert bath.total_weight == pytest.approx(window, rel=1e-6)
    assert bath.total_weight == pytest.approx(p.gamma_m * p.lambda_lw, rel=1e-3)


def test_zero_node_is_split(make_params):
    p = make_params(0.0, 1.0)
    bath = sample_lorentzian_bath(p, 11, cutoff_widths=11.0)
    assert bath.meta["split_zero"]
    assert len(bath) == 12
    assert np.all(bath.omegas != 0.0)
    nodes = [-10.0, -8.0, -6.0, -4.0, -2.0, -0.5, 0.5, 2.0, 4.0, 6.0, 8.0, 10.0]
    cells = [2.0] * 5 + [1.0, 1.0] + [2.0] * 5
    np.testing.assert_allclose(bath.omegas, nodes)
    expected = sum(p.gamma_m / math.pi * c / (w ** 2 + 1.0) for w, c in zip(nodes, cells))
    assert bath.total_weight == pytest.approx(expected, rel=1e-14)


def test_positive_line_clips_window(make_params):
    p = make_params(5.0, 1.0)
    bath = sample_lorentzian_bath(p, 100, cutoff_widths=10.0, line=FrequencyLine.POSITIVE)
    assert np.all(bath.omegas > 0.0)
    assert bath.meta["lo"] == 0.0


@pytest.mark.parametrize("n_modes, cutoff", [(1, 100.0), (10, 5.0)])
def test_sampling_preconditions(make_params, n_modes, cutoff):
    with pytest.raises(DomainError):
        sample_lorentzian_bath(make_params(1.0, 1.0), n_modes, cutoff_widths=cutoff)


@pytest.mark.parametrize("q, r", [(1.0, 1.0), (10.0, 0.01)])
def test_discrete_sum_matches_closed_form(make_params, q, r):
    p = make_params(q, r)
    bath = sample_lorentzian_bath(p, 20000, cutoff_widths=1000.0)
    tau = np.linspace(0.1, 5.0, 50)
    exact = gamma_physical(tau, p, Transient.FULL)
    np.testing.assert_allclose(gamma_discrete(tau, bath), exact, rtol=1e-3)


def test_discrete_error_shrinks_under_grid_doubling(make_params):
    p = make_params(0.37, 1.0)
    exact = gamma_physical(5.0, p, Transient.FULL)
    errors = []
    for n_modes in (500, 1000, 2000):
        bath = sample_lorentzian_bath(p, n_modes, cutoff_widths=200.0)
        assert not bath.meta["split_zero"]
        errors.append(abs(gamma_discrete(5.0, bath) - exact))
    assert errors[0] > errors[1] > errors[2]


def test_flat_bath():
    bath = sample_flat_bath(1.0, 3.0, 4, total_weight=2.0)
    np.testing.assert_allclose(bath.omegas, [1.25, 1.75, 2.25, 2.75])
    assert bath.total_weight == pytest.approx(2.0)
    with pytest.raises(DomainError):
        sample_flat_bath(0.0, 1.0, 4, 1.0)


def test_quadrature_at_zero_time(far_detuned):
    assert gamma_quadrature(0.0, far_detuned) == 0.0
    assert lorentzian_kernel_integral(0.0, 3.0) == 0.0


def test_quadrature_matches_residues_oscillatory_case():
    d = DimensionlessParams(q=10.0, r=0.01)
    exact = gamma_dimensionless(1.0, d, Transient.FULL)
    assert gamma_quadrature_dimensionless(1.0, d) == pytest.approx(exact, rel=1e-7)


def test_quadrature_zero_center_frequency():
    p = PhysicalParams(gamma_s=4.0, omega_rabi=1.0, detuning=10.0, omega0=0.0, lambda_lw=0.3)
    t = np.array([0.5, 3.0, 20.0, 100.0])
    expected = p.gamma_m * (t - (1.0 - np.exp(-0.3 * t)) / 0.3)
    np.testing.assert_allclose(gamma_quadrature(t, p), expected, rtol=1e-7)


def test_quadrature_rejects_tolerance_out_of_range(far_detuned):
    for tol in (1e-15, 1e-3, 0.1):
        with pytest.raises(DomainError):
            gamma_quadrature(1.0, far_detuned, tol=tol)


def test_positive_line_differs_from_full_line(make_params):
    p = make_params(0.5, 1.0)
    full = gamma_quadrature(3.0, p)
    positive = gamma_quadrature(3.0, p, line=FrequencyLine.POSITIVE)
    assert 0.0 < positive < full


@pytest.mark.slow
@pytest.mark.parametrize("q", [0.001, 1.0, 10.0, 100.0])
@pytest.mark.parametrize("r", [1e-5, 0.01, 100.0])
def test_quadrature_matches_residues_on_grid(make_params, q, r):
    p = make_params(q, r)
    tau = np.linspace(0.1, 5.0, 50)
    exact = gamma_physical(tau, p, Transient.FULL)
    np.testing.assert_allclose(gamma_quadrature(tau, p), exact, rtol=1e-6)


@pytest.mark.parametrize("q", [1.0, 10.0])
def test_quadrature_at_tiny_linewidth_times(q):
    d = DimensionlessParams(q=q, r=1e-5)
    tau = np.append(np.linspace(0.01, 1.0, 100), [0.575, 5.0])
    exact = gamma_dimensionless(tau, d, Transient.FULL)
    np.testing.assert_allclose(gamma_quadrature_dimensionless(tau, d), exact, rtol=1e-6)
