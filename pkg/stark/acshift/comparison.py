"""Literature routes: the three-level Lindblad master equation and the Lorentzian-bath excited-state decay."""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eig, expm
from scipy.signal import find_peaks

from stark.acshift.errors import ConsistencyError, DomainError, IntegratorError, RegimeWarning

logger = logging.getLogger(__name__)

# basis order of the three-level atom
A, B, E = 0, 1, 2
STATE_ATOL = 1e-10
IMAG_LIMIT = 1e-9
SERIES_LIMIT = 1e-3
EIG_COND_LIMIT = 1e8
STATIONARY_EIGENVALUE = 1e-12  # relative to the largest |eigenvalue|
WEAK_COUPLING_MAX = 0.01   # Γ_s/λ at or below
STRONG_COUPLING_MIN = 10.0  # Γ_s/λ at or above


@dataclass(frozen=True)
class ThreeLevelState:
    """Density matrix over (a, b, e)."""
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (3, 3):
            raise DomainError(f"three-level density matrix must be 3x3, got shape {rho.shape}")
        problem = state_defect(rho)
        if problem:
            raise DomainError(problem)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def ground_superposition(cls) -> "ThreeLevelState":
        """(|a⟩ + |b⟩)/√2."""
        return cls.from_ket([1.0, 1.0, 0.0])

    @classmethod
    def from_ket(cls, ket: Sequence[complex]) -> "ThreeLevelState":
        psi = np.asarray(ket, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def state_defect(rho: np.ndarray, atol: float = STATE_ATOL) -> Optional[str]:
    trace_error = abs(np.trace(rho) - 1.0)
    if trace_error > atol:
        return f"trace deviates from 1 by {trace_error:.3e}"
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        return "density matrix is not Hermitian"
    smallest = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if smallest < -atol:
        return f"negative eigenvalue {smallest:.3e}"
    return None


def hamiltonian(omega_rabi: complex, detuning: float) -> np.ndarray:
    """H = Δ|e⟩⟨e| + Ω|b⟩⟨e| + Ω*|e⟩⟨b|."""
    h = np.zeros((3, 3), dtype=complex)
    h[E, E] = detuning
    h[B, E] = omega_rabi
    h[E, B] = np.conj(omega_rabi)
    return h


def liouvillian(omega_rabi: complex, detuning: float, gamma_s: float) -> np.ndarray:
    """Generator acting on row-major vec(ρ)."""
    h = hamiltonian(omega_rabi, detuning)
    jump = np.zeros((3, 3), dtype=complex)
    jump[B, E] = 1.0
    eye = np.eye(3)
    jj = jump.conj().T @ jump
    coherent = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    decay = 0.5 * gamma_s * (2.0 * np.kron(jump, jump.conj()) - np.kron(jj, eye) - np.kron(eye, jj.T))
    return coherent + decay


@dataclass
class LindbladTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, 3, 3)
    omega_rabi: complex
    detuning: float
    gamma_s: float
    method: str = "eig"
    nfev: int = 0
    max_trace_error: float = 0.0
    min_eigenvalue: float = 0.0

    @property
    def coherence_ab(self) -> np.ndarray:
        return np.abs(self.states[:, A, B])

    @property
    def excited_population(self) -> np.ndarray:
        return self.states[:, E, E].real


def _propagate_eig(generator: np.ndarray, rho0: np.ndarray, times: np.ndarray) -> Optional[np.ndarray]:
    """Evaluate e^(Lt)ρ0 at every t from one eigendecomposition; None if L is close to defective."""
    eigenvalues, vectors = eig(generator)
    if np.linalg.cond(vectors) > EIG_COND_LIMIT:
        return None
    # stationary modes (trace, |a⟩⟨a|) are exactly stationary
    scale = max(float(np.max(np.abs(eigenvalues))), np.finfo(float).tiny)
    eigenvalues = np.where(np.abs(eigenvalues) <= STATIONARY_EIGENVALUE * scale, 0.0, eigenvalues)
    weights = np.linalg.solve(vectors, rho0.reshape(-1).astype(complex))
    return (np.exp(np.outer(times, eigenvalues)) * weights) @ vectors.T


def _propagate_expm(generator: np.ndarray, rho0: np.ndarray, times: np.ndarray) -> np.ndarray:
    vec = rho0.reshape(-1).astype(complex)
    out = np.empty((times.size, 9), dtype=complex)
    cache: Dict[float, np.ndarray] = {}
    previous = 0.0
    for i, t in enumerate(times):
        step = float(t - previous)
        if step > 0:
            key = round(step, 12)
            if key not in cache:
                cache[key] = expm(generator * step)
            vec = cache[key] @ vec
        out[i] = vec
        previous = float(t)
    return out


def _propagate_ivp(generator: np.ndarray, rho0: np.ndarray, times: np.ndarray, rtol: float):
    y0 = rho0.reshape(-1).astype(complex)
    if times[-1] == 0:
        return np.repeat(y0[None, :], times.size, axis=0), 0
    sol = solve_ivp(lambda _t, y: generator @ y, (0.0, float(times[-1])), y0, method="DOP853",
                    t_eval=times, rtol=rtol, atol=rtol * 1e-3)
    if not sol.success:
        raise IntegratorError(f"Lindblad integration failed: {sol.message}", status=sol.status,
                              nfev=sol.nfev, t_reached=float(sol.t[-1]) if sol.t.size else 0.0)
    return sol.y.T, int(sol.nfev)


def lindblad_evolve(rho0: ThreeLevelState, omega_rabi: complex, detuning: float, gamma_s: float, t_grid,
                    method: str = "eig", rtol: float = 1e-12) -> LindbladTrajectory:
    """Integrate dρ/dt = −i[H, ρ] + (Γ_s/2)(2OρO† − O†Oρ − ρO†O), O = |b⟩⟨e|.

    ``method`` is "eig" (one eigendecomposition of the generator, evaluated at
    every grid time), "expm" (matrix-exponential steps between grid times) or
    "ivp" (DOP853).  "eig" falls back to "expm" when the generator is nearly
    defective.
    """
    times = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("t_grid must be non-empty, non-negative and monotone")
    if gamma_s < 0:
        raise DomainError("gamma_s must be non-negative")
    generator = liouvillian(omega_rabi, detuning, gamma_s)

    if method not in ("eig", "expm", "ivp"):
        raise DomainError(f"unknown method {method!r}; use 'eig', 'expm' or 'ivp'")
    nfev = 0
    flat = _propagate_eig(generator, np.asarray(rho0.rho), times) if method == "eig" else None
    if method == "eig" and flat is None:
        logger.debug("generator eigenvectors ill-conditioned, stepping with expm")
        method = "expm"
    if method == "expm":
        flat = _propagate_expm(generator, np.asarray(rho0.rho), times)
    elif method == "ivp":
        flat, nfev = _propagate_ivp(generator, np.asarray(rho0.rho), times, rtol)

    states = flat.reshape(times.size, 3, 3)
    traces = np.abs(np.trace(states, axis1=1, axis2=2) - 1.0)
    hermitian = 0.5 * (states + np.conj(np.transpose(states, (0, 2, 1))))
    eigenvalues = np.linalg.eigvalsh(hermitian)
    max_trace_error = float(np.max(traces))
    min_eigenvalue = float(np.min(eigenvalues))
    logger.debug("Lindblad %s run: %d points, trace error %.3e, smallest eigenvalue %.3e",
                 method, times.size, max_trace_error, min_eigenvalue)
    if max_trace_error > STATE_ATOL or min_eigenvalue < -STATE_ATOL:
        worst = int(np.argmax(traces)) if max_trace_error > STATE_ATOL else int(np.argmin(eigenvalues.min(axis=1)))
        raise IntegratorError(f"state left the density-matrix set (trace error {max_trace_error:.3e}, "
                              f"smallest eigenvalue {min_eigenvalue:.3e})", nfev=nfev,
                              t_reached=float(times[worst]))
    return LindbladTrajectory(times=times, states=states, omega_rabi=omega_rabi, detuning=detuning,
                              gamma_s=gamma_s, method=method, nfev=nfev, max_trace_error=max_trace_error,
                              min_eigenvalue=min_eigenvalue)


@dataclass(frozen=True)
class DephasingFit:
    rate: float
    intercept: float
    residual: float   # rms of the log-linear residual
    decades: float    # decades of |ρ_ab| decay inside the fit window
    n_points: int
    flagged: bool


def extract_dephasing_rate(trajectory: LindbladTrajectory, transient_window: Optional[float] = None,
                           residual_threshold: float = 1e-2) -> DephasingFit:
    """Log-linear slope of |ρ_ab(t)| after discarding t < 10/|Δ|."""
    window = 10.0 / abs(trajectory.detuning) if transient_window is None else transient_window
    keep = trajectory.times >= window
    times = trajectory.times[keep]
    magnitude = trajectory.coherence_ab[keep]
    if times.size < 3 or np.any(magnitude <= 0):
        raise DomainError("need at least three points with nonzero |ρ_ab| after the transient window")
    log_mag = np.log(magnitude)
    slope, intercept = np.polyfit(times, log_mag, 1)
    residual = float(np.sqrt(np.mean((log_mag - (slope * times + intercept)) ** 2)))
    decades = float((log_mag[0] - log_mag[-1]) / math.log(10.0))
    flagged = residual > residual_threshold or decades < 2.0
    if flagged:
        logger.warning("dephasing fit flagged: residual %.3e, %.2f decades", residual, decades)
    return DephasingFit(rate=float(-slope), intercept=float(intercept), residual=residual, decades=decades,
                        n_points=int(times.size), flagged=flagged)


def rabi_population(t, omega_rabi: complex, detuning: float):
    """Excited population of the undamped b-e system started in |b⟩."""
    w2 = detuning ** 2 + 4.0 * abs(omega_rabi) ** 2
    if w2 == 0:
        return np.zeros_like(np.asarray(t, dtype=float))
    return 4.0 * abs(omega_rabi) ** 2 / w2 * np.sin(0.5 * math.sqrt(w2) * np.asarray(t, dtype=float)) ** 2


def scaling_exponents(values: Sequence[float], rates: Sequence[float]) -> float:
    """Slope of log(rate) against log(value)."""
    values = np.asarray(values, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if values.size < 2 or np.any(values <= 0) or np.any(rates <= 0):
        raise DomainError("need at least two positive (value, rate) pairs")
    return float(np.polyfit(np.log(values), np.log(rates), 1)[0])


@dataclass(frozen=True)
class VacchiniParams:
    lambda_lw: float   # λ [rad/s]
    gamma_s: float     # Γ_s [rad/s]
    delta_v: complex = field(init=False)

    def __post_init__(self):
        if not self.lambda_lw > 0:
            raise DomainError("lambda_lw must be positive")
        if self.gamma_s < 0:
            raise DomainError("gamma_s must be non-negative")
        delta = np.sqrt(complex(1.0 - 2.0 * self.gamma_s / self.lambda_lw))
        object.__setattr__(self, "delta_v", complex(delta))
        if abs(self.delta_v ** 2 + 2.0 * self.gamma_s / self.lambda_lw - 1.0) > 1e-12 * max(1.0, self.coupling):
            raise ConsistencyError("δ² + 2Γ_s/λ differs from 1")

    @property
    def coupling(self) -> float:
        """Γ_s/λ."""
        return self.gamma_s / self.lambda_lw


def _decay_amplitude(t: np.ndarray, v: VacchiniParams) -> np.ndarray:
    """e^(−λt/2)[cosh(λtδ/2) + sinh(λtδ/2)/δ]."""
    x = 0.5 * v.lambda_lw * t
    z = x * v.delta_v
    small = np.abs(z) < SERIES_LIMIT
    z2 = (x * x) * (v.delta_v ** 2)
    decay = np.exp(-x)
    series = decay * ((1.0 + z2 / 2.0 + z2 * z2 / 24.0) + x * (1.0 + z2 / 6.0 + z2 * z2 / 120.0))
    safe_z = np.where(small, 1.0, z)
    grow = np.exp(safe_z - x)
    shrink = np.exp(-safe_z - x)
    direct = 0.5 * (grow + shrink) + x * (grow - shrink) / (2.0 * safe_z)
    return np.where(small, series, direct)


def vacchini_rho_ee(t, v: VacchiniParams, rho_ee0: float = 1.0):
    """Excited population e^(−λt)[cosh(λtδ/2) + sinh(λtδ/2)/δ]² ρ_ee(0)."""
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0):
        raise DomainError("t must be non-negative")
    value = _decay_amplitude(ts, v) ** 2 * rho_ee0
    worst = float(np.max(np.abs(np.imag(value)))) if np.size(value) else 0.0
    if worst > IMAG_LIMIT:
        raise ConsistencyError(f"population has imaginary part {worst:.3e}")
    real = np.real(value)
    return float(real) if ts.ndim == 0 else real


def vacchini_weak_limit(t, v: VacchiniParams, rho_ee0: float = 1.0):
    """e^(−Γ_s t/2) ρ_ee(0)."""
    if v.coupling > WEAK_COUPLING_MAX:
        warnings.warn(f"weak-coupling form used at Γ_s/λ = {v.coupling:.3g}", RegimeWarning, stacklevel=2)
    ts = np.asarray(t, dtype=float)
    value = np.exp(-0.5 * v.gamma_s * ts) * rho_ee0
    return float(value) if ts.ndim == 0 else value


def nonmarkovian_frequency(v: VacchiniParams) -> float:
    """Ω_NM = sqrt(λΓ_s/2)."""
    return math.sqrt(0.5 * v.lambda_lw * v.gamma_s)


def vacchini_strong_limit(t, v: VacchiniParams, rho_ee0: float = 1.0):
    """e^(−λt)[cos Ω_NM t + sqrt(λ/2Γ_s) sin Ω_NM t]² ρ_ee(0)."""
    if v.gamma_s == 0:
        raise DomainError("strong-coupling form needs gamma_s > 0")
    if v.coupling < STRONG_COUPLING_MIN:
        warnings.warn(f"strong-coupling form used at Γ_s/λ = {v.coupling:.3g}", RegimeWarning, stacklevel=2)
    ts = np.asarray(t, dtype=float)
    freq = nonmarkovian_frequency(v)
    ratio = math.sqrt(v.lambda_lw / (2.0 * v.gamma_s))
    value = np.exp(-v.lambda_lw * ts) * (np.cos(freq * ts) + ratio * np.sin(freq * ts)) ** 2 * rho_ee0
    return float(value) if ts.ndim == 0 else value


def naive_ac_rate(lambda_lw: float, omega_rabi: complex, detuning: float) -> float:
    """λ|Ω|²/Δ², the rate from putting the bath decay straight into Γ_s|Ω|²/Δ²."""
    if detuning == 0:
        raise DomainError("detuning must be nonzero")
    return lambda_lw * abs(omega_rabi) ** 2 / detuning ** 2


@dataclass(frozen=True)
class OscillationFit:
    envelope_rate: float
    frequency: float
    n_peaks: int


def damped_oscillation_fit(t, values) -> OscillationFit:
    """Envelope rate from successive maxima and frequency π/⟨peak spacing⟩ of a squared oscillation."""
    ts = np.asarray(t, dtype=float)
    ys = np.asarray(values, dtype=float)
    peaks, _ = find_peaks(ys)
    if peaks.size < 3:
        raise DomainError(f"need at least three maxima to fit, found {peaks.size}")
    slope = np.polyfit(ts[peaks], np.log(ys[peaks]), 1)[0]
    spacing = float(np.mean(np.diff(ts[peaks])))
    return OscillationFit(envelope_rate=float(-slope), frequency=math.pi / spacing, n_peaks=int(peaks.size))


@dataclass
class ScalingStudy:
    """Fitted |ρ_ab| rates over separate sweeps of Ω, Δ and Γ_s."""
    factors: Sequence[float]
    rates: Dict[str, np.ndarray]
    exponents: Dict[str, float]
    base_rate: float
    base_gamma_m: float
    flagged: bool

    @property
    def rate_constant(self) -> float:
        """Measured rate in units of Γ_s|Ω|²/Δ²."""
        return self.base_rate / self.base_gamma_m


def lindblad_scaling_study(omega_rabi: float = 0.005, detuning: float = 1.0, gamma_s: float = 0.005,
                           factors: Sequence[float] = (1.0, 2.0, 4.0), n_points: int = 400,
                           decay_times: float = 10.0) -> ScalingStudy:
    """Fit the |ρ_ab| decay rate while scaling one of Ω, Δ, Γ_s at a time.

    Each run lasts ``decay_times``/Γ_M of its own parameters.
    """
    rho0 = ThreeLevelState.ground_superposition()
    base = {"omega_rabi": omega_rabi, "detuning": detuning, "gamma_s": gamma_s}
    rates: Dict[str, np.ndarray] = {}
    flagged = False
    for name in base:
        found = []
        for factor in factors:
            run = dict(base, **{name: base[name] * factor})
            gamma_m = run["gamma_s"] * abs(run["omega_rabi"]) ** 2 / run["detuning"] ** 2
            times = np.linspace(0.0, decay_times / gamma_m, n_points)
            fit = extract_dephasing_rate(lindblad_evolve(rho0, t_grid=times, **run))
            flagged = flagged or fit.flagged
            found.append(fit.rate)
        rates[name] = np.asarray(found)
    exponents = {name: scaling_exponents(factors, values) for name, values in rates.items()}
    base_index = list(factors).index(1.0) if 1.0 in factors else 0
    base_gamma_m = gamma_s * abs(omega_rabi * factors[base_index]) ** 2 / detuning ** 2
    logger.info("Lindblad scaling exponents: %s", exponents)
    return ScalingStudy(factors=tuple(factors), rates=rates, exponents=exponents,
                        base_rate=float(rates["omega_rabi"][base_index]), base_gamma_m=base_gamma_m,
                        flagged=flagged)
