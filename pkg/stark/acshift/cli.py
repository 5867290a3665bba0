"""Command-line front end: curves, figure families, oracle runs, comparisons, classification and sweeps."""

import argparse
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from stark.acshift import comparison
from stark.acshift.config import DimensionlessParams, RunConfig, TimeUnits, Transient
from stark.acshift.core import (
    classify_regime,
    coherence,
    decoherence_curve,
    gamma_ac,
    gamma_dimensionless,
    late_time_rate,
    markovian_times,
)
from stark.acshift.errors import ConfigError, ConsistencyError, DephasingError, DomainError
from stark.acshift.oracle import OracleSettings, cross_validate
from stark.acshift.output import provenance, write_json, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_BAD_INPUT = 2
EXIT_IO = 3

DEFAULT_SWEEP_Q = (0.001, 1.0, 10.0, 100.0)
DEFAULT_SWEEP_R = (1e-5, 0.01, 100.0)
COMPARE_DETUNING = 10.0
COMPARE_RABI = 1.0


@dataclass(frozen=True)
class FigurePanel:
    name: str
    r: float
    q_values: Tuple[float, ...]
    units: TimeUnits


# default Q families; --q-values overrides them
FIGURE_PANELS: Dict[str, FigurePanel] = {
    "a": FigurePanel("a", 100.0, (0.0, 1.0, 3.0, 10.0), TimeUnits.MARKOVIAN),
    "b": FigurePanel("b", 0.01, (0.0, 1.0, 3.0, 10.0), TimeUnits.MARKOVIAN),
    "c": FigurePanel("c", 0.01, (10.0, 30.0, 100.0), TimeUnits.AC),
    "d": FigurePanel("d", 1e-5, (100.0, 1000.0), TimeUnits.AC),
}


def _tag(value: float) -> str:
    return format(value, "g").replace("+", "")


def _stem(config: RunConfig, default: str) -> str:
    return config.name or default


def cmd_curve(config: RunConfig) -> int:
    times = config.grid()
    physical = config.physical()
    d = config.dimensionless()
    units = config.rescale
    if units is TimeUnits.SECONDS and physical is None:
        raise ConfigError("rescale 'seconds' needs the physical parameters")
    curve = decoherence_curve(times, physical if units is TimeUnits.SECONDS else d, config.transient, units)
    reference = np.exp(-times) if units is not TimeUnits.SECONDS else np.exp(-physical.gamma_m * times)
    columns = {units.column: curve.times, "gamma": curve.gamma, "coherence": curve.coherence,
               "markovian_reference" if units is not TimeUnits.AC else "ac_reference": reference}
    sidecar = provenance("curve", config.as_dict(), q=d.q, r=d.r, regime=classify_regime(d).label.value,
                         transient=config.transient.value, time_units=units.value, evaluator="closed_form")
    write_table(config.output_dir / _stem(config, "curve"), columns, sidecar, config.fmt.value)
    return EXIT_OK


def panel_columns(panel: FigurePanel, q: float, times: np.ndarray,
                  transient: Transient = Transient.HALF) -> Dict[str, np.ndarray]:
    d = DimensionlessParams(q=q, r=panel.r)
    tau = markovian_times(times, panel.units, d)
    gamma = np.atleast_1d(gamma_dimensionless(tau, d, transient))
    name = "markovian_reference" if panel.units is TimeUnits.MARKOVIAN else "ac_reference"
    return {panel.units.column: times, "gamma": gamma, "coherence": np.atleast_1d(coherence(gamma)),
            name: np.exp(-times)}


def cmd_figure(config: RunConfig) -> int:
    names = list(FIGURE_PANELS) if config.panel == "all" else [config.panel]
    for name in names:
        if name not in FIGURE_PANELS:
            raise ConfigError(f"unknown panel {name!r}; choose from {', '.join(FIGURE_PANELS)} or all")
    times = config.grid()
    for name in names:
        panel = FIGURE_PANELS[name]
        q_values = config.q_values or panel.q_values
        for q in q_values:
            columns = panel_columns(panel, q, times, config.transient)
            sidecar = provenance("figure", config.as_dict(), panel=name, q=q, r=panel.r,
                                 time_units=panel.units.value, transient=config.transient.value,
                                 regime=classify_regime(DimensionlessParams(q=q, r=panel.r)).label.value)
            stem = f"{_stem(config, 'figure')}_{name}_q{_tag(q)}"
            write_table(config.output_dir / stem, columns, sidecar, config.fmt.value)
        logger.info("panel %s: R=%g, Q in %s", name, panel.r, ", ".join(_tag(q) for q in q_values))
    return EXIT_OK


def _oracle_settings(config: RunConfig) -> OracleSettings:
    return OracleSettings(quad_tol=config.quad_tol, quad_rtol=config.quad_rtol, n_modes=config.n_modes,
                          cutoff_widths=config.cutoff_widths, discrete_rtol=config.discrete_rtol, fock=config.fock)


def _random_sets(config: RunConfig) -> List[DimensionlessParams]:
    rng = np.random.default_rng(config.seed)
    q_values = 10.0 ** rng.uniform(-3.0, 2.0, config.random_sets)
    r_values = 10.0 ** rng.uniform(-5.0, 2.0, config.random_sets)
    return [DimensionlessParams(q=float(q), r=float(r)) for q, r in zip(q_values, r_values)]


def cmd_oracle(config: RunConfig) -> int:
    """Cross-validate on τ; physical parameters, when given, are used with t = τ/Γ_M."""
    tau = config.grid()
    physical = config.physical()
    targets = []
    if physical is not None or config.q is not None or config.r is not None:
        d = config.dimensionless()
        targets.append(physical if physical is not None else d.reference_physical())
    targets.extend(d.reference_physical() for d in _random_sets(config))
    if not targets:
        raise ConfigError("oracle needs q and r, physical parameters, or random_sets > 0")

    settings = _oracle_settings(config)
    status = EXIT_OK
    summary = []
    for index, p in enumerate(targets):
        report = cross_validate(p, tau / p.gamma_m, settings)
        stem = _stem(config, "oracle") if len(targets) == 1 else f"{_stem(config, 'oracle')}_{index:03d}"
        sidecar = provenance("oracle", config.as_dict(), report=report.as_dict())
        columns = {"tau": tau}
        columns.update({name: values for name, values in report.curves.items()})
        write_table(config.output_dir / stem, columns, sidecar, config.fmt.value)
        for pair, value, limit in report.violations:
            logger.error("%s vs %s deviates by %.3e (limit %.1e)", pair[0], pair[1], value, limit)
        if not report.passed:
            status = EXIT_TOLERANCE
        summary.append({"q": report.meta["q"], "r": report.meta["r"], "passed": report.passed})
    if len(targets) > 1:
        write_json(config.output_dir / f"{_stem(config, 'oracle')}_summary.json",
                   provenance("oracle", config.as_dict(), runs=summary))
    return status


def _compare_rows(config: RunConfig) -> Dict[str, List[float]]:
    lam = config.lambda_lw or 1.0
    q = config.q if config.q is not None else 10.0
    rabi = config.omega_rabi or COMPARE_RABI
    detuning = config.detuning or COMPARE_DETUNING
    rows: Dict[str, List[float]] = {"gamma_s_over_lambda": [], "gamma_s": [], "naive_ac_rate": [],
                                    "gamma_ac": [], "naive_over_gamma_ac": [], "q_squared": []}
    for ratio in config.gamma_s_over_lambda:
        if ratio <= 0:
            continue
        gamma_s = ratio * lam
        naive = comparison.naive_ac_rate(lam, rabi, detuning)
        suppressed = gamma_ac(gamma_s * rabi ** 2 / detuning ** 2, q)
        rows["gamma_s_over_lambda"].append(ratio)
        rows["gamma_s"].append(gamma_s)
        rows["naive_ac_rate"].append(naive)
        rows["gamma_ac"].append(suppressed)
        rows["naive_over_gamma_ac"].append(naive / suppressed)
        rows["q_squared"].append(q * q)
    return rows


def cmd_compare(config: RunConfig) -> int:
    lam = config.lambda_lw or 1.0
    # the grid is read in units of 1/λ
    lambda_t = config.grid()
    t = lambda_t / lam
    base = _stem(config, "compare")
    for ratio in config.gamma_s_over_lambda:
        v = comparison.VacchiniParams(lambda_lw=lam, gamma_s=ratio * lam)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            columns = {"lambda_t": lambda_t, "rho_ee": comparison.vacchini_rho_ee(t, v),
                       "weak_limit": comparison.vacchini_weak_limit(t, v)}
            if v.gamma_s > 0:
                columns["strong_limit"] = comparison.vacchini_strong_limit(t, v)
        extra = {"gamma_s_over_lambda": ratio, "lambda_lw": lam, "delta_v": v.delta_v,
                 "warnings": [str(w.message) for w in caught]}
        if v.gamma_s > 0:
            extra["nonmarkovian_frequency"] = comparison.nonmarkovian_frequency(v)
        write_table(config.output_dir / f"{base}_vacchini_{_tag(ratio)}", columns,
                    provenance("compare", config.as_dict(), **extra), config.fmt.value)

    rates_sidecar = provenance("compare", config.as_dict(), table="naive rate against suppressed rate")
    if config.lindblad:
        study = comparison.lindblad_scaling_study()
        rates_sidecar["lindblad"] = {
            "factors": list(study.factors),
            "rates": {name: values.tolist() for name, values in study.rates.items()},
            "exponents": study.exponents,
            "rate_constant": study.rate_constant,
            "flagged": study.flagged,
        }
    write_table(config.output_dir / f"{base}_rates", _compare_rows(config), rates_sidecar, config.fmt.value)
    return EXIT_OK


def cmd_classify(config: RunConfig) -> int:
    label = classify_regime(config.dimensionless())
    details = " ".join(f"{key}={value:.6g}" for key, value in label.diagnostics.items())
    print(f"{label.label.value}\t{details}")
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    q_values = config.q_values or DEFAULT_SWEEP_Q
    r_values = config.r_values or DEFAULT_SWEEP_R
    rows: Dict[str, list] = {"q": [], "r": [], "regime": [], "gamma_end": [], "late_time_rate": []}
    tau_end = float(config.grid()[-1])
    for q in q_values:
        for r in r_values:
            d = DimensionlessParams(q=q, r=r)
            rows["q"].append(q)
            rows["r"].append(r)
            rows["regime"].append(classify_regime(d).label.value)
            rows["gamma_end"].append(gamma_dimensionless(tau_end, d, config.transient))
            rows["late_time_rate"].append(late_time_rate(d))
    sidecar = provenance("sweep", config.as_dict(), tau_end=tau_end, transient=config.transient.value)
    write_table(config.output_dir / _stem(config, "sweep"), rows, sidecar, config.fmt.value)
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "curve": cmd_curve,
    "figure": cmd_figure,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
}


def _params_group(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("parameters")
    group.add_argument("--q", help="quality factor ω₀/λ")
    group.add_argument("--r", help="ratio λ/Γ_M")
    group.add_argument("--gamma-s", dest="gamma_s", help="spontaneous decay rate [rad/s]")
    group.add_argument("--omega-rabi", dest="omega_rabi", help="Rabi frequency [rad/s]")
    group.add_argument("--detuning", help="detuning [rad/s]")
    group.add_argument("--omega0", help="laser center frequency [rad/s]")
    group.add_argument("--lambda-lw", dest="lambda_lw", help="Lorentzian HWHM [rad/s]")


def _grid_group(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("time grid")
    group.add_argument("--tau-min", dest="tau_min")
    group.add_argument("--tau-max", dest="tau_max")
    group.add_argument("--n-points", dest="n_points")
    group.add_argument("--spacing", choices=["linear", "log"])
    group.add_argument("--times", help="explicit comma-separated grid")


class _Choices(list):
    """Choice list that also admits argparse.SUPPRESS (Python < 3.12 checks a suppressed '?' default)."""

    def __contains__(self, item: object) -> bool:
        return item is argparse.SUPPRESS or super().__contains__(item)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="key = value file")
    common.add_argument("--output-dir", dest="output_dir", help="directory for data files")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"])
    common.add_argument("--name", help="stem of the output files")
    common.add_argument("--seed")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="stark-dephasing", argument_default=argparse.SUPPRESS,
                                     description="Non-Markovian light-shift dephasing numerics.")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve", parents=[common], argument_default=argparse.SUPPRESS,
                           help="closed-form decoherence curve")
    _params_group(curve)
    _grid_group(curve)
    curve.add_argument("--rescale", choices=[u.value for u in TimeUnits])
    curve.add_argument("--transient", choices=[t.value for t in Transient])

    figure = sub.add_parser("figure", parents=[common], argument_default=argparse.SUPPRESS,
                            help="curve families per figure panel")
    figure.add_argument("panel", nargs="?", choices=_Choices([*FIGURE_PANELS, "all"]))
    figure.add_argument("--q-values", dest="q_values")
    figure.add_argument("--transient", choices=[t.value for t in Transient])
    _grid_group(figure)

    oracle = sub.add_parser("oracle", parents=[common], argument_default=argparse.SUPPRESS,
                            help="cross-validate the closed form")
    _params_group(oracle)
    _grid_group(oracle)
    oracle.add_argument("--n-modes", dest="n_modes")
    oracle.add_argument("--cutoff-widths", dest="cutoff_widths")
    oracle.add_argument("--quad-tol", dest="quad_tol")
    oracle.add_argument("--quad-rtol", dest="quad_rtol")
    oracle.add_argument("--discrete-rtol", dest="discrete_rtol")
    oracle.add_argument("--fock", action=argparse.BooleanOptionalAction)
    oracle.add_argument("--random-sets", dest="random_sets")

    compare = sub.add_parser("compare", parents=[common], argument_default=argparse.SUPPRESS,
                             help="Lindblad and Lorentzian-bath decay comparisons")
    _params_group(compare)
    _grid_group(compare)
    compare.add_argument("--gamma-s-over-lambda", dest="gamma_s_over_lambda")
    compare.add_argument("--lindblad", action="store_true")

    classify = sub.add_parser("classify", parents=[common], argument_default=argparse.SUPPRESS,
                              help="regime label for (Q, R)")
    _params_group(classify)

    sweep = sub.add_parser("sweep", parents=[common], argument_default=argparse.SUPPRESS,
                           help="regime and late-time table over Q x R")
    sweep.add_argument("--q-values", dest="q_values")
    sweep.add_argument("--r-values", dest="r_values")
    sweep.add_argument("--transient", choices=[t.value for t in Transient])
    _grid_group(sweep)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    values = vars(parser.parse_args(argv))
    command = values.pop("command")
    configure_logging(values.pop("verbose", False), values.pop("quiet", False))
    config_file = values.pop("config", None)
    try:
        config = RunConfig.from_sources(values, config_file)
        return COMMANDS[command](config)
    except (ConfigError, DomainError, ConsistencyError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except DephasingError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
