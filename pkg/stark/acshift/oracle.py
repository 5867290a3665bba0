"""Cross-validation of the closed form against the quadrature, mode-sum and Fock routes."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from stark.acshift import bath as bath_oracle
from stark.acshift.config import DimensionlessParams, FrequencyLine, PhysicalParams, Transient
from stark.acshift.core import gamma_physical
from stark.acshift.errors import DephasingError, DomainError, OracleError
from stark.acshift.fock import InteractionModel, evolve_fock, fock_reference_modes

logger = logging.getLogger(__name__)

# λ·t_max·max|ω/λ| above which the Fock member is skipped
FOCK_PHASE_LIMIT = 200.0
# mode spacing keeps 2π/Δω at least this far above λ·t_max
ALIAS_MARGIN = 40.0
MIN_AUTO_MODES = 20000

REFERENCE = "closed_form"
Pair = Tuple[str, str]


@dataclass(frozen=True)
class OracleSettings:
    quad_tol: float = 1e-8
    quad_rtol: float = 1e-6        # closed form vs quadrature
    n_modes: Optional[int] = None  # None picks a grid fine enough for the largest λt
    cutoff_widths: float = 1000.0
    discrete_rtol: float = 2e-3    # closed form vs mode sum
    fock: bool = True
    fock_ode_tol: float = 1e-8
    positive_line: bool = True     # also integrate over ω > 0 only


@dataclass(frozen=True)
class Deviation:
    max_abs: float
    max_rel: float

    @classmethod
    def between(cls, values: np.ndarray, reference: np.ndarray) -> "Deviation":
        values = np.asarray(values, dtype=float)
        reference = np.asarray(reference, dtype=float)
        if values.size == 0:
            return cls(0.0, 0.0)
        diff = np.abs(values - reference)
        scale = np.abs(reference)
        rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), np.where(diff > 0, math.inf, 0.0))
        return cls(max_abs=float(np.max(diff)), max_rel=float(np.max(rel)))


@dataclass(frozen=True)
class Tolerance:
    limit: float
    relative: bool = True

    def measure(self, dev: Deviation) -> float:
        return dev.max_rel if self.relative else dev.max_abs


@dataclass
class OracleReport:
    """Curves per method on a shared grid and their pairwise deviations."""
    times: np.ndarray
    curves: Dict[str, np.ndarray]
    deviations: Dict[Pair, Deviation]
    tolerances: Dict[Pair, Tolerance]
    skipped: Dict[str, str] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def violations(self) -> List[Tuple[Pair, float, float]]:
        found = []
        for pair, tolerance in self.tolerances.items():
            value = tolerance.measure(self.deviations[pair])
            if not value <= tolerance.limit:
                found.append((pair, value, tolerance.limit))
        return found

    @property
    def passed(self) -> bool:
        return not self.violations

    def recompute(self) -> Dict[Pair, Deviation]:
        return {pair: Deviation.between(self.curves[pair[0]], self.curves[pair[1]]) for pair in self.deviations}

    def is_consistent(self) -> bool:
        return self.recompute() == self.deviations

    def as_dict(self) -> Dict[str, Any]:
        rows = []
        for (a, b), dev in self.deviations.items():
            tolerance = self.tolerances.get((a, b))
            rows.append({
                "method": a,
                "reference": b,
                "max_abs": dev.max_abs,
                "max_rel": dev.max_rel,
                "tolerance": tolerance.limit if tolerance else None,
                "tolerance_kind": ("relative" if tolerance.relative else "absolute") if tolerance else None,
            })
        return {
            "times": self.times.tolist(),
            "curves": {name: values.tolist() for name, values in self.curves.items()},
            "deviations": rows,
            "skipped": dict(self.skipped),
            "passed": self.passed,
            "meta": self.meta,
        }


def effective_cutoff(q: float, cutoff_widths: float) -> float:
    """Widen the window so it always reaches cutoff/2 linewidths below ω = 0."""
    return max(cutoff_widths, q + 0.5 * cutoff_widths)


def auto_mode_count(p: PhysicalParams, t_max: float, cutoff_widths: float) -> int:
    """Mode count with 2π/Δω ≥ λt_max + margin and no midpoint on ω = 0."""
    span = 2.0 * cutoff_widths
    needed = span * (p.lambda_lw * t_max + ALIAS_MARGIN) / (2.0 * math.pi)
    n_modes = max(MIN_AUTO_MODES, int(math.ceil(needed)))
    q = p.omega0 / p.lambda_lw
    while True:
        offset = (cutoff_widths - q) * n_modes / span - 0.5
        if abs(offset - round(offset)) > 1e-6:
            return n_modes
        n_modes += 1


def _run(method: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except DephasingError as exc:
        logger.error("oracle member %s failed: %s", method, exc)
        raise OracleError(method, exc) from exc


def _fock_member(p: PhysicalParams, times: np.ndarray, ode_tol: float, curves: Dict[str, np.ndarray],
                 tolerances: Dict[Pair, Tolerance], skipped: Dict[str, str]) -> None:
    pairs = fock_reference_modes(p.omega0 / p.lambda_lw)
    s_times = p.lambda_lw * times
    fastest = max(abs(w) for w, _ in pairs) * float(s_times[-1])
    if fastest > FOCK_PHASE_LIMIT:
        skipped["fock"] = f"max|ω|·t = {fastest:.3g} above {FOCK_PHASE_LIMIT:g} (linewidth units)"
        return
    reduced = bath_oracle.DiscreteBath(omegas=[w for w, _ in pairs], weights=[w for _, w in pairs],
                                       meta={"rule": "fock_reference"})
    result = _run("fock", evolve_fock, InteractionModel.from_bath(reduced), s_times, ode_tol)
    curves["fock"] = result.coherence
    curves["fock_reference"] = np.exp(-np.atleast_1d(bath_oracle.gamma_discrete(s_times, reduced)))
    tolerances[("fock", "fock_reference")] = Tolerance(10.0 * ode_tol, relative=False)


def cross_validate(p: PhysicalParams, grid, settings: Optional[OracleSettings] = None) -> OracleReport:
    """Evaluate every route on ``grid`` (seconds) and compare each with the closed form.

    Γ curves are compared relatively against the full-transient closed form.
    The Fock member runs on three modes around ω₀ in linewidth units and is
    compared, as coherence, with e^(−Γ) of the same three modes.
    """
    settings = settings or OracleSettings()
    times = np.atleast_1d(np.asarray(grid, dtype=float))
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("grid must be non-empty, non-negative and monotone")
    t_max = float(times[-1])
    q = p.omega0 / p.lambda_lw

    curves: Dict[str, np.ndarray] = {
        REFERENCE: np.atleast_1d(gamma_physical(times, p, Transient.FULL)),
        "closed_form_half": np.atleast_1d(gamma_physical(times, p, Transient.HALF)),
    }
    tolerances: Dict[Pair, Tolerance] = {}
    skipped: Dict[str, str] = {}

    curves["quadrature"] = np.atleast_1d(_run("quadrature", bath_oracle.gamma_quadrature, times, p,
                                              settings.quad_tol, FrequencyLine.FULL))
    tolerances[("quadrature", REFERENCE)] = Tolerance(settings.quad_rtol)
    if settings.positive_line:
        curves["quadrature_positive"] = np.atleast_1d(_run("quadrature_positive", bath_oracle.gamma_quadrature,
                                                           times, p, settings.quad_tol, FrequencyLine.POSITIVE))

    cutoff = effective_cutoff(q, settings.cutoff_widths)
    n_modes = settings.n_modes or auto_mode_count(p, t_max, cutoff)
    modes = _run("discrete", bath_oracle.sample_lorentzian_bath, p, n_modes, cutoff)
    curves["discrete"] = np.atleast_1d(_run("discrete", bath_oracle.gamma_discrete, times, modes))
    tolerances[("discrete", REFERENCE)] = Tolerance(settings.discrete_rtol)

    if settings.fock:
        _fock_member(p, times, settings.fock_ode_tol, curves, tolerances, skipped)
    else:
        skipped["fock"] = "disabled"

    compared: List[Pair] = [("quadrature", REFERENCE), ("discrete", REFERENCE), ("closed_form_half", REFERENCE)]
    if "quadrature_positive" in curves:
        compared.append(("quadrature_positive", "quadrature"))
    if "fock" in curves:
        compared.append(("fock", "fock_reference"))
    deviations = {pair: Deviation.between(curves[pair[0]], curves[pair[1]]) for pair in compared}

    d = DimensionlessParams.from_physical(p) if p.gamma_m > 0 else None
    meta = {
        "params": p.as_dict(),
        "q": q,
        "r": d.r if d else None,
        "n_modes": n_modes,
        "cutoff_widths": cutoff,
        "quad_tol": settings.quad_tol,
        "fock_ode_tol": settings.fock_ode_tol,
        "reference_transient": Transient.FULL.value,
    }
    report = OracleReport(times=times, curves=curves, deviations=deviations, tolerances=tolerances,
                          skipped=skipped, meta=meta)
    for (a, b), dev in deviations.items():
        logger.info("%s vs %s: max abs %.3e, max rel %.3e", a, b, dev.max_abs, dev.max_rel)
    if not report.passed:
        logger.warning("oracle tolerance violated: %s", report.violations)
    return report
