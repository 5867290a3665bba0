import json

import numpy as np
import pytest

from stark.acshift.bath import sample_lorentzian_bath
from stark.acshift.errors import OracleError, QuadratureError
from stark.acshift.oracle import (
    REFERENCE,
    Deviation,
    OracleSettings,
    auto_mode_count,
    cross_validate,
    effective_cutoff,
)


def test_single_point_at_zero(make_params):
    report = cross_validate(make_params(1.0, 1.0), [0.0])
    assert report.passed
    for name, values in report.curves.items():
        expected = 1.0 if name.startswith("fock") else 0.0
        assert values.tolist() == [expected], name
    assert report.is_consistent()


def test_oscillatory_case_agrees(make_params):
    p = make_params(10.0, 0.01)
    report = cross_validate(p, np.linspace(0.2, 1.0, 5) / p.gamma_m)
    assert report.passed, report.violations
    assert report.deviations[("quadrature", REFERENCE)].max_rel < 1e-6
    assert "fock" in report.curves
    assert report.meta["q"] == pytest.approx(10.0)
    assert report.meta["r"] == pytest.approx(0.01)
    lengths = {values.size for values in report.curves.values()}
    assert lengths == {5}


def test_markovian_case_skips_fock(make_params):
    p = make_params(0.001, 100.0)
    tau = np.linspace(0.5, 2.0, 4)
    report = cross_validate(p, tau / p.gamma_m)
    assert report.passed, report.violations
    assert "fock" in report.skipped
    assert "fock" not in report.curves
    np.testing.assert_allclose(report.curves[REFERENCE], tau, atol=1.01 / 100.0)


def test_coarse_mode_grid_is_flagged(make_params):
    report = cross_validate(make_params(1.0, 1.0), np.linspace(0.5, 3.0, 6),
                            OracleSettings(n_modes=10, fock=False))
    assert not report.passed
    assert [pair for pair, _, _ in report.violations] == [("discrete", REFERENCE)]
    assert report.skipped["fock"] == "disabled"


def test_member_failure_names_method(make_params, monkeypatch):
    def boom(*args, **kwargs):
        raise QuadratureError("no convergence", achieved=1e-3, requested=1e-8)

    monkeypatch.setattr("stark.acshift.bath.gamma_quadrature", boom)
    with pytest.raises(OracleError) as info:
        cross_validate(make_params(1.0, 1.0), [1.0])
    assert info.value.method == "quadrature"
    assert isinstance(info.value.cause, QuadratureError)


def test_report_serializes(make_params):
    report = cross_validate(make_params(1.0, 1.0), np.linspace(0.0, 2.0, 5))
    payload = json.loads(json.dumps(report.as_dict()))
    assert payload["passed"] is True
    assert payload["meta"]["reference_transient"] == "full"
    methods = {row["method"] for row in payload["deviations"]}
    assert {"quadrature", "discrete", "closed_form_half", "fock"} <= methods
    assert report.is_consistent()


def test_deviation_between():
    dev = Deviation.between([1.0, 2.2, 0.0], [1.0, 2.0, 0.0])
    assert dev.max_abs == pytest.approx(0.2)
    assert dev.max_rel == pytest.approx(0.1)
    assert Deviation.between([0.1], [0.0]).max_rel == float("inf")
    assert Deviation.between([], []) == Deviation(0.0, 0.0)


def test_effective_cutoff():
    assert effective_cutoff(10.0, 1000.0) == 1000.0
    assert effective_cutoff(600.0, 1000.0) == 1100.0


def test_auto_mode_count_avoids_zero_node(make_params):
    p = make_params(0.05, 1.0)
    assert auto_mode_count(p, 1.0, 1000.0) == 20001
    bath = sample_lorentzian_bath(p, 20001, 1000.0)
    assert not bath.meta["split_zero"]
    assert np.min(np.abs(bath.omegas)) > 0.1 * bath.meta["step"]


def test_auto_mode_count_grows_with_time(make_params):
    p = make_params(1.0, 1.0)
    assert auto_mode_count(p, 1.0, 1000.0) == 20000
    assert auto_mode_count(p, 1000.0, 1000.0) > 300000
