import csv
import json
import math

import numpy as np
import pytest

from stark.acshift.cli import EXIT_BAD_INPUT, EXIT_IO, EXIT_OK, EXIT_TOLERANCE, main
from stark.acshift.config import OUTPUT_DIR_ENV


def read_columns(path):
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    header, body = rows[0], rows[1:]
    return {name: [row[i] for row in body] for i, name in enumerate(header)}


def floats(values):
    return np.array([float(v) for v in values])


def test_markovian_curve(tmp_path):
    assert main(["curve", "--q", "0", "--r", "100", "--output-dir", str(tmp_path)]) == EXIT_OK
    columns = read_columns(tmp_path / "curve.csv")
    assert list(columns) == ["tau", "gamma", "coherence", "markovian_reference"]
    assert len(columns["tau"]) == 201
    np.testing.assert_allclose(floats(columns["coherence"]), floats(columns["markovian_reference"]), rtol=1e-2)
    sidecar = json.loads((tmp_path / "curve.json").read_text(encoding="utf-8"))
    assert sidecar["regime"] == "Markovian"
    assert sidecar["data_file"] == "curve.csv"
    assert sidecar["config"]["q"] == 0.0


def test_ac_curve_columns(tmp_path):
    code = main(["curve", "--q", "30", "--r", "0.01", "--rescale", "ac", "--n-points", "11",
                 "--output-dir", str(tmp_path), "--name", "ac"])
    assert code == EXIT_OK
    columns = read_columns(tmp_path / "ac.csv")
    assert list(columns) == ["tau_prime", "gamma", "coherence", "ac_reference"]


def test_seconds_needs_physical_parameters(tmp_path):
    code = main(["curve", "--q", "1", "--r", "1", "--rescale", "seconds", "--output-dir", str(tmp_path)])
    assert code == EXIT_BAD_INPUT


def test_empty_grid_is_bad_input(tmp_path, capsys):
    assert main(["curve", "--q", "1", "--r", "1", "--tau-max", "0", "--output-dir", str(tmp_path)]) == EXIT_BAD_INPUT
    assert "error:" in capsys.readouterr().err
    assert not (tmp_path / "curve.csv").exists()


def test_figure_writes_every_family(tmp_path):
    assert main(["figure", "--n-points", "11", "--output-dir", str(tmp_path)]) == EXIT_OK
    assert len(list(tmp_path.glob("*.csv"))) == 13
    assert len(list(tmp_path.glob("*.json"))) == 13
    columns = read_columns(tmp_path / "figure_a_q1.csv")
    tau = floats(columns["tau"])
    expected = [t / 2.0 - math.exp(-100.0 * t) * math.sin(100.0 * t) / 400.0 for t in tau]
    np.testing.assert_allclose(floats(columns["gamma"]), expected, rtol=1e-10, atol=1e-15)
    assert (tmp_path / "figure_d_q1000.csv").exists()
    assert list(read_columns(tmp_path / "figure_c_q10.csv"))[0] == "tau_prime"


def test_single_panel_and_unknown_panel(tmp_path):
    assert main(["figure", "b", "--q-values", "0.5", "--n-points", "5", "--output-dir", str(tmp_path)]) == EXIT_OK
    assert [p.name for p in tmp_path.glob("*.csv")] == ["figure_b_q0.5.csv"]
    with pytest.raises(SystemExit):
        main(["figure", "e", "--output-dir", str(tmp_path)])


def test_classify(capsys):
    assert main(["classify", "--q", "0.01", "--r", "100"]) == EXIT_OK
    label, details = capsys.readouterr().out.strip().split("\t")
    assert label == "Markovian"
    assert "Q=0.01" in details


def test_oracle_passes(tmp_path):
    code = main(["oracle", "--q", "10", "--r", "0.01", "--tau-max", "1", "--n-points", "5",
                 "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    columns = read_columns(tmp_path / "oracle.csv")
    assert {"tau", "closed_form", "quadrature", "discrete"} <= set(columns)
    sidecar = json.loads((tmp_path / "oracle.json").read_text(encoding="utf-8"))
    assert sidecar["report"]["passed"] is True


def test_oracle_flags_coarse_grid(tmp_path):
    code = main(["oracle", "--q", "1", "--r", "1", "--tau-min", "0.5", "--tau-max", "3", "--n-points", "6",
                 "--n-modes", "10", "--no-fock", "--output-dir", str(tmp_path)])
    assert code == EXIT_TOLERANCE


def test_oracle_single_zero_time(tmp_path):
    assert main(["oracle", "--q", "1", "--r", "1", "--times", "0", "--output-dir", str(tmp_path)]) == EXIT_OK


def test_oracle_needs_a_target(tmp_path):
    assert main(["oracle", "--output-dir", str(tmp_path)]) == EXIT_BAD_INPUT


def test_compare_without_coupling(tmp_path):
    code = main(["compare", "--gamma-s-over-lambda", "0", "--n-points", "21", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    columns = read_columns(tmp_path / "compare_vacchini_0.csv")
    assert "strong_limit" not in columns
    np.testing.assert_allclose(floats(columns["rho_ee"]), 1.0, atol=1e-12)
    rates = read_columns(tmp_path / "compare_rates.csv")
    assert rates["gamma_s_over_lambda"] == []


def test_compare_rates(tmp_path):
    code = main(["compare", "--gamma-s-over-lambda", "0.001,1000", "--n-points", "21",
                 "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "compare_vacchini_0.001.csv").exists()
    sidecar = json.loads((tmp_path / "compare_vacchini_1000.json").read_text(encoding="utf-8"))
    assert sidecar["nonmarkovian_frequency"] == pytest.approx(math.sqrt(500.0))
    rates = read_columns(tmp_path / "compare_rates.csv")
    np.testing.assert_allclose(floats(rates["naive_over_gamma_ac"]), [1e5, 0.1])


def test_sweep(tmp_path):
    assert main(["sweep", "--output-dir", str(tmp_path)]) == EXIT_OK
    columns = read_columns(tmp_path / "sweep.csv")
    assert len(columns["q"]) == 12
    late = floats(columns["late_time_rate"])
    np.testing.assert_allclose(late, 1.0 / (floats(columns["q"]) ** 2 + 1.0))


def test_runs_are_deterministic(tmp_path):
    for run in ("one", "two"):
        main(["curve", "--q", "3", "--r", "0.5", "--output-dir", str(tmp_path / run)])
    assert (tmp_path / "one" / "curve.csv").read_bytes() == (tmp_path / "two" / "curve.csv").read_bytes()


def test_json_format(tmp_path):
    assert main(["curve", "--q", "3", "--r", "0.5", "--format", "json", "--n-points", "3",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    payload = json.loads((tmp_path / "curve.json").read_text(encoding="utf-8"))
    assert payload["data"]["tau"] == [0.0, 2.5, 5.0]
    assert not (tmp_path / "curve.csv").exists()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    assert main(["curve", "--q", "3", "--r", "0.5", "--n-points", "3"]) == EXIT_OK
    assert (tmp_path / "env" / "curve.csv").exists()


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(f"q = 3\nr = 0.5\nn_points = 4\noutput_dir = {tmp_path / 'cfg'}\n", encoding="utf-8")
    assert main(["curve", "--config", str(path)]) == EXIT_OK
    assert len(read_columns(tmp_path / "cfg" / "curve.csv")["tau"]) == 4


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    code = main(["curve", "--q", "3", "--r", "0.5", "--output-dir", str(blocker / "sub")])
    assert code == EXIT_IO


def test_ac_units_reject_zero_q(tmp_path):
    assert main(["curve", "--q", "0", "--r", "1", "--rescale", "ac", "--output-dir", str(tmp_path)]) == EXIT_BAD_INPUT
    assert not (tmp_path / "curve.csv").exists()
    assert main(["figure", "c", "--q-values", "0", "--output-dir", str(tmp_path)]) == EXIT_BAD_INPUT


def closed_form_half(tau, q, r):
    x = r * tau
    decay = math.exp(-x)
    transient = (q * q - 1.0) * (1.0 - decay * math.cos(q * x)) - 2.0 * q * decay * math.sin(q * x)
    return tau / (q * q + 1.0) + transient / (2.0 * r * (q * q + 1.0) ** 2)


@pytest.mark.parametrize("panel, q, r", [("c", 10.0, 0.01), ("c", 100.0, 0.01), ("d", 100.0, 1e-5),
                                         ("d", 1000.0, 1e-5)])
def test_figure_ac_panels_match_closed_form(tmp_path, panel, q, r):
    assert main(["figure", panel, "--n-points", "11", "--output-dir", str(tmp_path)]) == EXIT_OK
    columns = read_columns(tmp_path / f"figure_{panel}_q{q:g}.csv")
    tau_prime = floats(columns["tau_prime"])
    expected = [closed_form_half(t * q * q, q, r) for t in tau_prime]
    np.testing.assert_allclose(floats(columns["gamma"]), expected, rtol=1e-10, atol=1e-15)
    np.testing.assert_allclose(floats(columns["ac_reference"]), np.exp(-tau_prime))


@pytest.mark.slow
@pytest.mark.parametrize("q", ["0.001", "1", "10", "100"])
@pytest.mark.parametrize("r", ["1e-5", "0.01", "100"])
def test_oracle_passes_on_default_grid(tmp_path, q, r):
    assert main(["oracle", "--q", q, "--r", r, "--output-dir", str(tmp_path)]) == EXIT_OK
