from pathlib import Path

import numpy as np
import pytest

from stark.acshift.config import (
    OUTPUT_DIR_ENV,
    DimensionlessParams,
    GridSpacing,
    OutputFormat,
    PhysicalParams,
    RunConfig,
    TimeUnits,
    Transient,
)
from stark.acshift.errors import AdiabaticRegimeWarning, ConfigError, DomainError


def test_defaults():
    config = RunConfig.from_sources(env={})
    assert config.transient is Transient.HALF
    assert config.rescale is TimeUnits.MARKOVIAN
    assert config.output_dir == Path("results")
    np.testing.assert_allclose(config.grid(), np.linspace(0.0, 5.0, 201))


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nq = 3\nr = 0.5   # trailing\ntau-max = 8\noutput_dir = from_file\n",
                    encoding="utf-8")
    config = RunConfig.from_sources({"q": "4"}, config_file=path, env={OUTPUT_DIR_ENV: "from_env"})
    assert config.q == 4.0
    assert config.r == 0.5
    assert config.tau_max == 8.0
    assert config.output_dir == Path("from_env")
    flagged = RunConfig.from_sources({"output_dir": "from_flag"}, config_file=path,
                                     env={OUTPUT_DIR_ENV: "from_env"})
    assert flagged.output_dir == Path("from_flag")


def test_file_errors(tmp_path):
    unknown = tmp_path / "unknown.cfg"
    unknown.write_text("colour = blue\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_sources(config_file=unknown, env={})
    broken = tmp_path / "broken.cfg"
    broken.write_text("q 3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=":1:"):
        RunConfig.from_sources(config_file=broken, env={})


def test_value_parsing():
    config = RunConfig.from_sources({"times": "0, 0.5;2", "fock": "off", "spacing": "log", "fmt": "json",
                                     "n_modes": "none"}, env={})
    assert config.times == (0.0, 0.5, 2.0)
    assert config.fock is False
    assert config.spacing is GridSpacing.LOG
    assert config.fmt is OutputFormat.JSON
    assert config.n_modes is None
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"n_points": "many"}, env={})
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"transient": "quarter"}, env={})


def test_grid_errors():
    for flags in ({"tau_min": "5", "tau_max": "5"}, {"n_points": "1"}, {"tau_min": "-1"},
                  {"spacing": "log"}, {"times": "1,0.5"}, {"times": "-1"}):
        with pytest.raises(ConfigError):
            RunConfig.from_sources(flags, env={}).grid()


def test_log_grid():
    grid = RunConfig.from_sources({"spacing": "log", "tau_min": "0.01", "tau_max": "100", "n_points": "5"},
                                  env={}).grid()
    np.testing.assert_allclose(grid, [0.01, 0.1, 1.0, 10.0, 100.0])


def test_parameter_sources():
    assert RunConfig.from_sources({"q": "2", "r": "3"}, env={}).dimensionless() == DimensionlessParams(2.0, 3.0)
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"q": "2"}, env={}).dimensionless()
    with pytest.raises(ConfigError):
        RunConfig.from_sources(env={}).dimensionless()
    with pytest.raises(ConfigError):
        RunConfig.from_sources({"gamma_s": "1", "omega_rabi": "0.1"}, env={}).physical()
    physical = RunConfig.from_sources({"gamma_s": "1", "omega_rabi": "0.1", "detuning": "2", "omega0": "6",
                                       "lambda_lw": "3"}, env={})
    d = physical.dimensionless()
    assert d.q == pytest.approx(2.0)
    assert d.r == pytest.approx(3.0 / (0.01 / 4.0))


def test_as_dict_is_plain():
    out = RunConfig.from_sources({"times": "1,2"}, env={}).as_dict()
    assert out["times"] == [1.0, 2.0]
    assert out["transient"] == "half"
    assert out["output_dir"] == "results"


def test_physical_params_validation():
    with pytest.raises(DomainError):
        PhysicalParams(gamma_s=0.0, omega_rabi=1.0, detuning=10.0, omega0=1.0, lambda_lw=1.0)
    with pytest.raises(DomainError):
        PhysicalParams(gamma_s=1.0, omega_rabi=1.0, detuning=0.0, omega0=1.0, lambda_lw=1.0)
    with pytest.raises(DomainError):
        PhysicalParams(gamma_s=1.0, omega_rabi=1.0, detuning=10.0, omega0=-1.0, lambda_lw=1.0)
    with pytest.warns(AdiabaticRegimeWarning):
        PhysicalParams(gamma_s=1.0, omega_rabi=1.0, detuning=2.0, omega0=1.0, lambda_lw=1.0)


def test_dimensionless_round_trip(far_detuned):
    d = DimensionlessParams.from_physical(far_detuned)
    assert d.q == pytest.approx(12.0)
    assert d.r == pytest.approx(100.0)
    rebuilt = d.to_physical(far_detuned)
    assert rebuilt.lambda_lw == pytest.approx(far_detuned.lambda_lw)
    assert rebuilt.omega0 == pytest.approx(far_detuned.omega0)
    with pytest.raises(DomainError):
        DimensionlessParams(q=-1.0, r=1.0)
    with pytest.raises(DomainError):
        DimensionlessParams(q=1.0, r=0.0)
