"""Numerical routes to Γ(t) through the Lorentzian bath: continuum quadrature and discrete mode sums."""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from stark.acshift.config import DimensionlessParams, FrequencyLine, PhysicalParams
from stark.acshift.errors import DomainError, QuadratureError

logger = logging.getLogger(__name__)

# panels across the Lorentzian peak, spanning ±PEAK_WIDTHS linewidths
PEAK_PANELS = 32
PEAK_WIDTHS = 5.0
# finite panels up to this many half-periods of cos(ωt) are integrated without the cosine weight
DIRECT_HALF_PERIODS = 8
# tails shorter than this many half-periods before their analytic cutoff are integrated directly
TAIL_HALF_PERIODS = 400
QUAD_LIMIT = 200
QUAD_DOUBLINGS = 3
# elements per block when summing modes over a time grid
SUM_BLOCK = 1 << 22


@dataclass
class DiscreteBath:
    """Bath modes (ω_k, w_k) with w_k = 4|g_k|⁴|α_k|²/Δ²."""
    omegas: np.ndarray   # mode frequencies [rad/s]
    weights: np.ndarray  # coupling weights [rad²/s²]
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.omegas.shape != self.weights.shape:
            raise DomainError("omegas and weights must have the same length")
        if np.any(self.omegas == 0):
            raise DomainError("a bath mode cannot sit at ω = 0")
        if np.any(self.weights < 0):
            raise DomainError("bath weights must be non-negative")

    def __len__(self) -> int:
        return int(self.omegas.size)

    @property
    def modes(self) -> List[Tuple[float, float]]:
        return list(zip(self.omegas.tolist(), self.weights.tolist()))

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def lorentzian_measure(p: PhysicalParams) -> float:
    """Prefactor Γ_M λ²/π of the mode density."""
    return p.gamma_m * p.lambda_lw ** 2 / math.pi


def sample_lorentzian_bath(p: PhysicalParams, n_modes: int, cutoff_widths: float = 1000.0,
                           line: FrequencyLine = FrequencyLine.FULL) -> DiscreteBath:
    """Midpoint discretization of the Lorentzian over ω₀ ± cutoff·λ.

    A midpoint landing on ω = 0 is replaced by two half-cell nodes at ±Δω/4.
    """
    if n_modes < 2:
        raise DomainError(f"n_modes must be at least 2, got {n_modes}")
    if cutoff_widths < 10:
        raise DomainError(f"cutoff_widths must be at least 10, got {cutoff_widths}")
    lam, w0 = p.lambda_lw, p.omega0
    lo, hi = w0 - cutoff_widths * lam, w0 + cutoff_widths * lam
    if line is FrequencyLine.POSITIVE:
        lo = max(lo, 0.0)
    step = (hi - lo) / n_modes
    omegas = lo + (np.arange(n_modes) + 0.5) * step
    cells = np.full(n_modes, step)

    at_zero = np.abs(omegas) <= 1e-9 * step
    if np.any(at_zero):
        logger.debug("splitting the ω = 0 node into ±Δω/4")
        omegas = np.concatenate([omegas[~at_zero], [-0.25 * step, 0.25 * step]])
        cells = np.concatenate([cells[~at_zero], [0.5 * step, 0.5 * step]])
        order = np.argsort(omegas)
        omegas, cells = omegas[order], cells[order]

    weights = lorentzian_measure(p) * cells / ((omegas - w0) ** 2 + lam ** 2)
    meta = {"rule": "midpoint", "n_modes": n_modes, "cutoff_widths": cutoff_widths, "line": line.value,
            "step": step, "lo": lo, "hi": hi, "split_zero": bool(np.any(at_zero))}
    return DiscreteBath(omegas=omegas, weights=weights, meta=meta)


def sample_flat_bath(omega_min: float, omega_max: float, n_modes: int, total_weight: float) -> DiscreteBath:
    """Flat spectrum on [omega_min, omega_max], for debugging the sums."""
    if not 0 < omega_min < omega_max:
        raise DomainError("need 0 < omega_min < omega_max")
    if n_modes < 1:
        raise DomainError("n_modes must be positive")
    step = (omega_max - omega_min) / n_modes
    omegas = omega_min + (np.arange(n_modes) + 0.5) * step
    weights = np.full(n_modes, total_weight / n_modes)
    return DiscreteBath(omegas=omegas, weights=weights,
                       meta={"rule": "flat", "n_modes": n_modes, "lo": omega_min, "hi": omega_max})


def _mode_sum(t, bath: DiscreteBath, kernel: Callable[[np.ndarray, np.ndarray], np.ndarray]):
    ts = np.asarray(t, dtype=float)
    flat = np.atleast_1d(ts).ravel()
    out = np.empty(flat.size)
    block = max(1, SUM_BLOCK // max(len(bath), 1))
    for start in range(0, flat.size, block):
        chunk = flat[start:start + block]
        out[start:start + block] = kernel(chunk[:, None], bath.omegas[None, :]) @ bath.weights
    if ts.ndim == 0:
        return float(out[0])
    return out.reshape(ts.shape)


def gamma_discrete(t, bath: DiscreteBath):
    """Σ_k w_k (1 − cos ω_k t)/ω_k²."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("t must be non-negative")
    return _mode_sum(t, bath, lambda ts, om: 2.0 * np.sin(0.5 * om * ts) ** 2 / om ** 2)


def phase_phi(t, bath: DiscreteBath):
    """Commutator phase Φ(t) = Σ_k (w_k/4) sin(ω_k t); odd in t."""
    return _mode_sum(t, bath, lambda ts, om: 0.25 * np.sin(om * ts))


def _sin_deficit(x: np.ndarray) -> np.ndarray:
    """x − sin x, by series below |x| = 1e-2."""
    small = np.abs(x) < 1e-2
    x2 = x * x
    series = x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0))
    return np.where(small, series, x - np.sin(x))


def global_phase(t, bath: DiscreteBath):
    """Σ_k (w_k/4)(t/ω_k − sin(ω_k t)/ω_k²), the c-number phase of each branch's evolution."""
    return _mode_sum(t, bath, lambda ts, om: 0.25 * _sin_deficit(om * ts) / om ** 2)


def _integrate(fun: Callable[[float], float], a: float, b: float, **kwargs) -> Tuple[float, float, bool]:
    limit = QUAD_LIMIT
    for _ in range(QUAD_DOUBLINGS + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            try:
                value, error = quad(fun, a, b, limit=limit, **kwargs)[:2]
                return value, error, True
            except IntegrationWarning:
                limit *= 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        value, error = quad(fun, a, b, limit=limit, **kwargs)[:2]
    return value, error, False


def _breakpoints(s: float, q: float, line: FrequencyLine) -> Tuple[float, List[float]]:
    h0 = math.pi / (4.0 * s)
    points = {-h0, h0}
    points.update(np.linspace(q - PEAK_WIDTHS, q + PEAK_WIDTHS, PEAK_PANELS + 1).tolist())
    if line is FrequencyLine.POSITIVE:
        points = {x for x in points if x > 0} | {0.0}
    return h0, sorted(points)


def lorentzian_kernel_integral(s: float, q: float, tol: float = 1e-8,
                               line: FrequencyLine = FrequencyLine.FULL) -> float:
    """∫ (1 − cos xs)/(x²((x−q)² + 1)) dx in linewidth units x = ω/λ, s = λt."""
    if not 1e-14 < tol < 1e-3:
        raise DomainError(f"tol must lie in (1e-14, 1e-3), got {tol!r}")
    if s < 0:
        raise DomainError("s must be non-negative")
    if s == 0:
        return 0.0

    def peak(x):
        return 1.0 / ((x - q) * (x - q) + 1.0)

    def direct(x):
        if x == 0.0:
            return 0.5 * s * s * peak(0.0)
        half = math.sin(0.5 * s * x)
        return 2.0 * half * half / (x * x) * peak(x)

    def envelope(x):
        return peak(x) / (x * x)

    def mirrored(y):
        return 1.0 / ((y + q) * (y + q) + 1.0) / (y * y)

    h0, points = _breakpoints(s, q, line)
    panels = list(zip(points[:-1], points[1:]))
    n_intervals = len(panels) + (2 if line is FrequencyLine.FULL else 1)

    origin = [(a, b) for a, b in panels if a >= -h0 and b <= h0]
    scale = sum(_integrate(direct, a, b, epsabs=0.0, epsrel=1e-3)[0] for a, b in origin)
    epsrel = 0.1 * tol
    epsabs = max(epsrel * scale / n_intervals, 1e-300)

    total, error, failed = 0.0, 0.0, 0
    max_direct = DIRECT_HALF_PERIODS * math.pi / s

    def add(piece):
        nonlocal total, error, failed
        total += piece[0]
        error += piece[1]
        failed += not piece[2]

    def split(fun, a, b):
        plain = _integrate(fun, a, b, epsabs=epsabs, epsrel=epsrel)
        waved = _integrate(fun, a, b, weight="cos", wvar=s, epsabs=epsabs, epsrel=epsrel)
        return plain[0] - waved[0], plain[1] + waved[1], plain[2] and waved[2]

    for a, b in panels:
        if (a >= -h0 and b <= h0) or b - a <= max_direct:
            add(_integrate(direct, a, b, epsabs=epsabs, epsrel=epsrel))
        else:
            add(split(envelope, a, b))

    def tail(fun, fall_off, start):
        # past 2|q| the integrand is below 8/x⁴, so the range beyond `far` adds at most 8/(3 far³)
        far = max(start, 2.0 * abs(q), (8.0 / (3.0 * epsabs)) ** (1.0 / 3.0))
        if (far - start) * s / math.pi > TAIL_HALF_PERIODS:
            # the cosine-weighted infinite range is only driven by epsabs
            return split(fall_off, start, math.inf)
        n_chunks = max(1, math.ceil((far - start) * s / (math.pi * DIRECT_HALF_PERIODS)))
        edges = np.linspace(start, far, n_chunks + 1)
        pieces = [_integrate(fun, a, b, epsabs=epsabs / n_chunks, epsrel=epsrel)
                  for a, b in zip(edges[:-1], edges[1:])]
        return (sum(p[0] for p in pieces), sum(p[1] for p in pieces) + 8.0 / (3.0 * far ** 3),
                all(p[2] for p in pieces))

    add(tail(direct, envelope, points[-1]))
    if line is FrequencyLine.FULL:
        add(tail(lambda y: direct(-y), mirrored, -points[0]))

    achieved = error / abs(total) if total else error
    logger.debug("kernel integral s=%g q=%g: %d panels, value %.17g, error %.3e, %d unconverged",
                 s, q, n_intervals, total, error, failed)
    if achieved > tol:
        raise QuadratureError(f"kernel integral did not converge at s={s:g}, q={q:g}", achieved, tol)
    return total


def gamma_quadrature_dimensionless(tau, d: DimensionlessParams, tol: float = 1e-8,
                                   line: FrequencyLine = FrequencyLine.FULL):
    """Γ(τ) = J(Rτ; Q)/(πR) from the continuum integral."""
    taus = np.asarray(tau, dtype=float)
    if np.any(taus < 0):
        raise DomainError("tau must be non-negative")
    values = np.array([lorentzian_kernel_integral(d.r * x, d.q, tol, line) for x in np.atleast_1d(taus).ravel()])
    gamma = values / (math.pi * d.r)
    if taus.ndim == 0:
        return float(gamma[0])
    return gamma.reshape(taus.shape)


def gamma_quadrature(t, p: PhysicalParams, tol: float = 1e-8, line: FrequencyLine = FrequencyLine.FULL):
    """(Γ_M λ²/π) ∫ (1 − cos ωt)/(ω²((ω−ω₀)² + λ²)) dω by panelled adaptive quadrature."""
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0):
        raise DomainError("t must be non-negative")
    gm = p.gamma_m
    if gm == 0:
        return 0.0 if ts.ndim == 0 else np.zeros(ts.shape)
    lam = p.lambda_lw
    q = p.omega0 / lam
    values = np.array([lorentzian_kernel_integral(lam * x, q, tol, line) for x in np.atleast_1d(ts).ravel()])
    gamma = gm * values / (math.pi * lam)
    if ts.ndim == 0:
        return float(gamma[0])
    return gamma.reshape(ts.shape)
