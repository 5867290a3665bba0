"""Truncated Fock-space integration of the displaced-bath interaction Hamiltonian.

Each branch σ = ±1 of the qubit sees H_σ(t) = −σ Σ_k κ_k (a_k† e^(iω_k t) + a_k e^(−iω_k t)),
starting from the bath vacuum.  The overlap of the two bath states is the
coherence factor multiplying ρ_ab.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from stark.acshift.bath import DiscreteBath
from stark.acshift.errors import DomainError, IntegratorError, TruncationError

logger = logging.getLogger(__name__)

MAX_MODES = 4
MAX_TRUNCATION = 64
MAX_DIMENSION = 1 << 20
LEAKAGE_LIMIT = 1e-6
DEFAULT_TRUNCATION = 16


def annihilation(levels: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, levels)), offsets=1, format="csr", dtype=complex)


def mode_operator(op: sparse.spmatrix, mode: int, n_modes: int, levels: int) -> sparse.csr_matrix:
    """``op`` acting on one mode of an n_modes product space."""
    eye = sparse.identity(levels, format="csr", dtype=complex)
    factors = [op if k == mode else eye for k in range(n_modes)]
    return reduce(lambda left, right: sparse.kron(left, right, format="csr"), factors)


@dataclass(frozen=True)
class InteractionModel:
    omegas: Tuple[float, ...]    # mode frequencies [rad/s]
    kappas: Tuple[float, ...]    # drive amplitudes |g_k|²|α_k|/Δ [rad/s]
    truncation: int = DEFAULT_TRUNCATION  # highest Fock number kept per mode

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "kappas", tuple(float(k) for k in self.kappas))
        if len(self.omegas) != len(self.kappas):
            raise DomainError("omegas and kappas must have the same length")
        if not 1 <= len(self.omegas) <= MAX_MODES:
            raise DomainError(f"between 1 and {MAX_MODES} modes are supported, got {len(self.omegas)}")
        if any(w == 0 for w in self.omegas):
            raise DomainError("mode frequencies must be nonzero")
        if any(k < 0 for k in self.kappas):
            raise DomainError("kappas must be non-negative")
        if not 1 <= self.truncation <= MAX_TRUNCATION:
            raise DomainError(f"truncation must lie in [1, {MAX_TRUNCATION}], got {self.truncation}")
        if self.dimension > MAX_DIMENSION:
            raise DomainError(f"Fock space of dimension {self.dimension} exceeds {MAX_DIMENSION}")
        if self.truncation < 4 * self.max_occupation:
            raise DomainError(f"truncation {self.truncation} is below four times the peak occupation "
                              f"{self.max_occupation:.3g}")

    @classmethod
    def from_bath(cls, bath: DiscreteBath, truncation: int = DEFAULT_TRUNCATION) -> "InteractionModel":
        return cls(omegas=tuple(bath.omegas), kappas=tuple(np.sqrt(bath.weights) / 2.0), truncation=truncation)

    def to_bath(self) -> DiscreteBath:
        kappas = np.asarray(self.kappas)
        return DiscreteBath(omegas=np.asarray(self.omegas), weights=4.0 * kappas ** 2, meta={"rule": "fock"})

    @property
    def levels(self) -> int:
        return self.truncation + 1

    @property
    def dimension(self) -> int:
        return self.levels ** len(self.omegas)

    @property
    def max_occupation(self) -> float:
        """Largest coherent-state occupation reached, Σ_k (2κ_k/ω_k)²."""
        return float(sum((2.0 * k / w) ** 2 for w, k in zip(self.omegas, self.kappas)))


@dataclass
class FockResult:
    times: np.ndarray
    coherence: np.ndarray       # |⟨ψ₋|ψ₊⟩|
    relative_phase: np.ndarray  # arg ⟨ψ₋|ψ₊⟩
    global_phase: np.ndarray    # arg ⟨0|ψ₊⟩, unwrapped along the grid
    leakage: float              # largest top-level population seen
    nfev: int = 0
    # False when a grid step can advance the phase by π or more; global_phase may then alias
    phase_resolved: bool = True
    psi_plus: Optional[np.ndarray] = field(default=None, repr=False)
    psi_minus: Optional[np.ndarray] = field(default=None, repr=False)


def branch_overlap(psi_plus: np.ndarray, psi_minus: np.ndarray, phase: float = 0.0) -> complex:
    """⟨ψ₋|ψ₊⟩ after multiplying both branches by e^(iφ)."""
    rotation = np.exp(1j * phase)
    return complex(np.vdot(rotation * psi_minus, rotation * psi_plus))


def _top_level_mask(n_modes: int, levels: int) -> np.ndarray:
    digits = np.indices((levels,) * n_modes).reshape(n_modes, -1)
    return np.any(digits == levels - 1, axis=0)


def evolve_fock(model: InteractionModel, t, ode_tol: float = 1e-8, energy_offset: float = 0.0) -> FockResult:
    """Integrate both branches from the vacuum and report their overlap on ``t``."""
    if not 1e-13 <= ode_tol <= 1e-2:
        raise DomainError(f"ode_tol must lie in [1e-13, 1e-2], got {ode_tol!r}")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("times must be non-negative and non-decreasing")

    n_modes, levels, dim = len(model.omegas), model.levels, model.dimension
    lowering = [mode_operator(annihilation(levels), k, n_modes, levels) for k in range(n_modes)]
    raising = [op.conj().T.tocsr() for op in lowering]
    omegas = np.asarray(model.omegas)
    kappas = np.asarray(model.kappas)

    def coupling(tt: float, psi: np.ndarray) -> np.ndarray:
        out = np.zeros_like(psi)
        for w, k, down, up in zip(omegas, kappas, lowering, raising):
            if k:
                phase = np.exp(1j * w * tt)
                out += k * (phase * (up @ psi) + np.conj(phase) * (down @ psi))
        return out

    def rhs(tt: float, y: np.ndarray) -> np.ndarray:
        plus, minus = y[:dim], y[dim:]
        # H_± = ∓V + E, so dψ±/dt = ±iVψ± − iEψ±
        return np.concatenate([1j * coupling(tt, plus), -1j * coupling(tt, minus)]) - 1j * energy_offset * y

    y0 = np.zeros(2 * dim, dtype=complex)
    y0[0] = y0[dim] = 1.0
    t_end = float(times[-1])
    if t_end == 0.0:
        states = np.repeat(y0[:, None], times.size, axis=1)
        nfev = 0
    else:
        sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", t_eval=times,
                        rtol=ode_tol, atol=ode_tol * 1e-3)
        if not sol.success:
            raise IntegratorError(f"Fock integration failed: {sol.message}", status=sol.status, nfev=sol.nfev,
                                  t_reached=float(sol.t[-1]) if sol.t.size else 0.0)
        states, nfev = sol.y, int(sol.nfev)

    # |dφ/dt| ≤ Σ 2κ²/|ω| + |E| for the vacuum amplitude
    phase_rate = float(np.sum(2.0 * kappas ** 2 / np.abs(omegas))) + abs(energy_offset)
    max_step = float(np.max(np.diff(times))) if times.size > 1 else 0.0
    phase_resolved = max_step * phase_rate < math.pi
    if not phase_resolved:
        logger.debug("Fock grid step %.3g too coarse for phase rate %.3g; global phase may alias",
                     max_step, phase_rate)

    plus, minus = states[:dim], states[dim:]
    overlap = np.einsum("it,it->t", np.conj(minus), plus)
    top = _top_level_mask(n_modes, levels)
    leakage = float(max(np.max(np.sum(np.abs(plus[top]) ** 2, axis=0)),
                        np.max(np.sum(np.abs(minus[top]) ** 2, axis=0))))
    logger.debug("Fock run: %d modes, dimension %d, nfev %d, leakage %.3e", n_modes, dim, nfev, leakage)
    if leakage > LEAKAGE_LIMIT:
        raise TruncationError(leakage, LEAKAGE_LIMIT)
    return FockResult(
        times=times,
        coherence=np.abs(overlap),
        relative_phase=np.angle(overlap),
        global_phase=np.unwrap(np.angle(plus[0])),
        leakage=leakage,
        nfev=nfev,
        phase_resolved=phase_resolved,
        psi_plus=plus[:, -1].copy(),
        psi_minus=minus[:, -1].copy(),
    )


def fock_reference_modes(q: float, peak_displacement: float = 0.2) -> List[Tuple[float, float]]:
    """Three modes (ω, w) at ω₀ − λ, ω₀, ω₀ + λ in linewidth units, Lorentzian-weighted.

    Weights are rescaled so that the largest w/ω² = (2κ/ω)² equals peak_displacement²; modes
    landing on ω = 0 are dropped.
    """
    omegas = np.array([q - 1.0, q, q + 1.0])
    omegas = omegas[omegas != 0]
    shape = 1.0 / ((omegas - q) ** 2 + 1.0)
    scale = peak_displacement ** 2 / np.max(shape / omegas ** 2)
    return list(zip(omegas.tolist(), (scale * shape).tolist()))
