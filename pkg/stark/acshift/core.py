"""Closed-form rates and decoherence functions of the light-shift dephasing model.

All frequencies are angular (rad/s).  Dimensionless time is τ = Γ_M t, or
τ' = Γ_ac t = τ/Q² in the large-Q units.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np

from stark.acshift.config import (
    DimensionlessParams,
    PhysicalParams,
    Regime,
    RegimeThresholds,
    TimeUnits,
    Transient,
)
from stark.acshift.errors import DomainError, RegimeWarning

logger = logging.getLogger(__name__)

# e^(-x) is treated as exactly zero beyond this exponent
EXP_CUTOFF = 700.0

ArrayLike = Union[float, np.ndarray]


def _as_times(values, name: str = "tau"):
    arr = np.asarray(values, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"{name} contains NaN")
    if np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative")
    return arr


def _out(arr: np.ndarray, like) -> ArrayLike:
    return float(arr) if np.ndim(like) == 0 else arr


def damped_cosine_gap(x, y):
    """1 − e^(−x)·cos(y) without cancellation near x = y = 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tail = x > EXP_CUTOFF
    safe_x = np.where(tail, 0.0, x)
    decay = np.where(tail, 0.0, np.exp(-safe_x))
    gap = -np.expm1(-safe_x) + decay * 2.0 * np.sin(0.5 * y) ** 2
    return np.where(tail, 1.0, gap)


def damped_sine(x, y):
    """e^(−x)·sin(y), zero once the exponent passes the cutoff."""
    x = np.asarray(x, dtype=float)
    tail = x > EXP_CUTOFF
    return np.where(tail, 0.0, np.exp(-np.where(tail, 0.0, x)) * np.sin(y))


def damped_cosine(x, y):
    x = np.asarray(x, dtype=float)
    tail = x > EXP_CUTOFF
    return np.where(tail, 0.0, np.exp(-np.where(tail, 0.0, x)) * np.cos(y))


def gamma_markovian(p: PhysicalParams) -> float:
    """Markovian scattering rate Γ_M = Γ_s|Ω|²/Δ²."""
    if p.detuning == 0:
        raise DomainError("detuning must be nonzero")
    return p.gamma_m


def gamma_ac(gamma_m: float, q: float) -> float:
    """Suppressed rate Γ_ac = Γ_M/Q²."""
    if not q > 0:
        raise DomainError(f"Γ_ac needs Q > 0, got {q!r}")
    return gamma_m / q ** 2


def late_time_rate(d: DimensionlessParams) -> float:
    """Slope of Γ(τ) once the transient has died out."""
    return 1.0 / (d.q ** 2 + 1.0)


def gamma_dimensionless(tau: ArrayLike, d: DimensionlessParams,
                        transient: Transient = Transient.HALF) -> ArrayLike:
    """Decoherence function Γ(τ; Q, R)."""
    taus = _as_times(tau)
    q, r = d.q, d.r
    q2p1 = q * q + 1.0
    x = r * taus
    transient_term = ((q * q - 1.0) * damped_cosine_gap(x, q * x) - 2.0 * q * damped_sine(x, q * x))
    gamma = taus / q2p1 + transient_term / (transient.divisor * r * q2p1 ** 2)
    # rounding floor; Γ is non-negative analytically
    gamma = np.maximum(gamma, 0.0)
    return _out(gamma, tau)


def gamma_slope(tau: ArrayLike, d: DimensionlessParams, transient: Transient = Transient.HALF) -> ArrayLike:
    """dΓ/dτ of :func:`gamma_dimensionless`."""
    taus = _as_times(tau)
    q = d.q
    x = d.r * taus
    wiggle = q * damped_sine(x, q * x) - damped_cosine(x, q * x)
    slope = (1.0 + wiggle / transient.divisor) / (q * q + 1.0)
    return _out(slope, tau)


def gamma_physical(t: ArrayLike, p: PhysicalParams, transient: Transient = Transient.HALF) -> ArrayLike:
    """Decoherence function evaluated directly in physical units."""
    ts = _as_times(t, "t")
    gm = p.gamma_m
    lam, w0 = p.lambda_lw, p.omega0
    norm = w0 * w0 + lam * lam
    x = lam * ts
    linear = gm * lam * lam * ts / norm
    transient_term = ((w0 * w0 - lam * lam) * damped_cosine_gap(x, w0 * ts)
                      - 2.0 * w0 * lam * damped_sine(x, w0 * ts))
    gamma = linear + gm * lam * transient_term / (transient.divisor * norm ** 2)
    return _out(np.maximum(gamma, 0.0), t)


def gamma_large_q_approx(tau_prime: ArrayLike, d: DimensionlessParams,
                         transient: Transient = Transient.HALF) -> ArrayLike:
    """Large-Q form τ' + (1 − e^(−RQ²τ')cos(RQ³τ'))/(2RQ²)."""
    if d.q < 1:
        warnings.warn(f"large-Q approximation evaluated at Q={d.q:g}", RegimeWarning, stacklevel=2)
    taus = _as_times(tau_prime, "tau_prime")
    rq2 = d.rq2
    if rq2 == 0:
        return _out(taus.copy(), tau_prime)
    gamma = taus + damped_cosine_gap(rq2 * taus, d.rq3 * taus) / (transient.divisor * rq2)
    return _out(gamma, tau_prime)


def large_q_slope(tau_prime: ArrayLike, d: DimensionlessParams,
                  transient: Transient = Transient.HALF) -> ArrayLike:
    """dΓ/dτ' of the large-Q form; dips below zero when oscillations dominate."""
    taus = _as_times(tau_prime, "tau_prime")
    x = d.rq2 * taus
    y = d.rq3 * taus
    slope = 1.0 + (damped_cosine(x, y) + d.q * damped_sine(x, y)) / transient.divisor
    return _out(slope, tau_prime)


def coherence(gamma: ArrayLike) -> ArrayLike:
    """e^(−Γ), exactly zero above Γ = 700."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise DomainError("Γ must be non-negative")
    value = np.where(g > EXP_CUTOFF, 0.0, np.exp(-np.minimum(g, EXP_CUTOFF)))
    return _out(value, gamma)


def light_shift(omega_rabi: float, detuning: float) -> float:
    """Ground-state light shift |Ω|²/Δ (odd in Δ)."""
    if detuning == 0:
        raise DomainError("detuning must be nonzero")
    return abs(omega_rabi) ** 2 / detuning


def angular_from_hz(frequency_hz: ArrayLike) -> ArrayLike:
    return 2.0 * math.pi * frequency_hz


def hz_from_angular(omega: ArrayLike) -> ArrayLike:
    return omega / (2.0 * math.pi)


@dataclass(frozen=True)
class QubitState:
    """Density matrix over the ground states (a, b)."""
    rho: np.ndarray
    atol: float = 1e-12

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise DomainError(f"qubit density matrix must be 2x2, got shape {rho.shape}")
        if abs(np.trace(rho) - 1.0) > self.atol:
            raise DomainError(f"trace {np.trace(rho).real:.15g} differs from 1")
        if np.max(np.abs(rho - rho.conj().T)) > self.atol:
            raise DomainError("density matrix is not Hermitian")
        if np.min(np.linalg.eigvalsh(rho)) < -self.atol:
            raise DomainError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def superposition(cls, phase: float = 0.0) -> "QubitState":
        """(|a⟩ + e^(iφ)|b⟩)/√2."""
        off = 0.5 * np.exp(-1j * phase)
        return cls(np.array([[0.5, off], [np.conj(off), 0.5]]))

    @property
    def coherence(self) -> float:
        return float(abs(self.rho[0, 1]))


def apply_dephasing(rho0: QubitState, gamma: float) -> QubitState:
    """Keep populations, damp the a-b coherence by e^(−Γ)."""
    if gamma < 0:
        raise DomainError(f"Γ must be non-negative, got {gamma!r}")
    factor = coherence(gamma)
    rho = np.array(rho0.rho, dtype=complex)
    rho[0, 1] *= factor
    rho[1, 0] *= factor
    return QubitState(rho, atol=rho0.atol)


@dataclass(frozen=True)
class RegimeLabel:
    label: Regime
    q: float
    r: float
    rq2: float
    rq3: float

    def __str__(self) -> str:
        return self.label.value

    @property
    def diagnostics(self) -> Dict[str, float]:
        return {"Q": self.q, "R": self.r, "RQ2": self.rq2, "RQ3": self.rq3}


def classify_regime(d: DimensionlessParams, thresholds: Optional[RegimeThresholds] = None) -> RegimeLabel:
    th = thresholds or RegimeThresholds()
    q, r, rq2 = d.q, d.r, d.rq2
    if q <= th.markovian_q and r >= th.markovian_r:
        label = Regime.MARKOVIAN
    elif q >= th.suppressed_q and rq2 >= th.suppressed_rq2:
        label = Regime.SUPPRESSED_EXPONENTIAL
    elif q >= th.oscillatory_q and th.oscillatory_rq2_low <= rq2 <= th.oscillatory_rq2_high:
        label = Regime.OSCILLATORY
    else:
        label = Regime.CROSSOVER
    return RegimeLabel(label=label, q=q, r=r, rq2=rq2, rq3=d.rq3)


@dataclass
class DecoherenceCurve:
    times: np.ndarray
    gamma: np.ndarray
    coherence: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.coherence = np.asarray(self.coherence, dtype=float)
        if not (self.times.shape == self.gamma.shape == self.coherence.shape):
            raise DomainError("times, gamma and coherence must have the same shape")
        if np.any(np.diff(self.times) < 0):
            raise DomainError("time grid must be non-decreasing")
        if np.any(self.gamma < 0):
            raise DomainError("Γ must be non-negative")

    @classmethod
    def from_gamma(cls, times, gamma, **meta) -> "DecoherenceCurve":
        gamma = np.maximum(np.asarray(gamma, dtype=float), 0.0)
        return cls(times=times, gamma=gamma, coherence=np.asarray(coherence(gamma), dtype=float), meta=meta)

    def __len__(self) -> int:
        return int(self.times.size)


def markovian_times(times, units: TimeUnits, d: DimensionlessParams,
                    p: Optional[PhysicalParams] = None) -> np.ndarray:
    """Convert a grid in ``units`` to τ = Γ_M t."""
    times = _as_times(times, "times")
    if units is TimeUnits.MARKOVIAN:
        return times
    if units is TimeUnits.AC:
        # τ′ = Γ_ac t; Q = 0 has no Γ_ac
        return times / gamma_ac(1.0, d.q)
    if p is None:
        raise DomainError("seconds need physical parameters")
    return times * p.gamma_m


def decoherence_curve(times, params: Union[DimensionlessParams, PhysicalParams],
                      transient: Transient = Transient.HALF, units: Optional[TimeUnits] = None) -> DecoherenceCurve:
    """Closed-form curve on ``times``.

    With :class:`PhysicalParams` the grid defaults to seconds, with
    :class:`DimensionlessParams` to τ.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if isinstance(params, PhysicalParams):
        p = params
        units = units or TimeUnits.SECONDS
        if units is TimeUnits.SECONDS:
            gamma = np.atleast_1d(gamma_physical(times, p, transient))
            return DecoherenceCurve.from_gamma(times, gamma, evaluator="closed_form", transient=transient.value,
                                               time_units=units.value, params=p.as_dict())
        d = DimensionlessParams.from_physical(p)
    else:
        p = None
        d = params
        units = units or TimeUnits.MARKOVIAN
    tau = markovian_times(times, units, d, p)
    gamma = np.atleast_1d(gamma_dimensionless(tau, d, transient))
    logger.debug("closed-form curve: %d points, Q=%g R=%g, %s transient", tau.size, d.q, d.r, transient.value)
    return DecoherenceCurve.from_gamma(times, gamma, evaluator="closed_form", transient=transient.value,
                                       time_units=units.value, params={"q": d.q, "r": d.r})
