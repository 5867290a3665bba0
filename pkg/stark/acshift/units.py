"""Electric-dipole layer: couplings, spontaneous emission and lab parameters to PhysicalParams.

SI units throughout, frequencies angular.
"""

import logging
import math
from dataclasses import dataclass, fields
from typing import Dict, Optional

import numpy as np
import scipy.constants

from stark.acshift.config import PhysicalParams
from stark.acshift.errors import ConsistencyError, DomainError

logger = logging.getLogger(__name__)

RABI_CONSISTENCY = 1e-6
ROUTE_CONSISTENCY = 1e-10

# ⁸⁷Rb numbers as quoted for the worked example, read as angular frequencies
RB87_GAMMA_S = 1.9e7    # [rad/s]
RB87_OMEGA0 = 3.0e14    # [rad/s]


@dataclass(frozen=True)
class Constants:
    """CODATA 2018 values."""
    hbar: float = 1.054571817e-34      # reduced Planck constant [J s], exact
    epsilon0: float = 8.8541878128e-12  # vacuum permittivity [F/m]
    c: float = 299792458.0              # speed of light [m/s], exact

    def deviation_from_scipy(self) -> Dict[str, float]:
        """Relative difference from the values shipped with scipy."""
        reference = {"hbar": scipy.constants.hbar, "epsilon0": scipy.constants.epsilon_0,
                     "c": scipy.constants.c}
        return {f.name: abs(getattr(self, f.name) / reference[f.name] - 1.0) for f in fields(self)}


CODATA = Constants()


@dataclass(frozen=True)
class DipoleAtom:
    dipole_d: float  # transition dipole |d| [C m]
    omega0: float    # transition / laser center frequency [rad/s]

    def __post_init__(self):
        if not self.dipole_d > 0:
            raise DomainError(f"dipole_d must be positive, got {self.dipole_d!r}")
        if not self.omega0 > 0:
            raise DomainError(f"omega0 must be positive, got {self.omega0!r}")


def coupling_g(omega, g0: float, omega0: float):
    """g_k = −(g₀/2)·sqrt(ω₀/ω_k)."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("mode frequency must be positive")
    value = -0.5 * g0 * np.sqrt(omega0 / w)
    return float(value) if w.ndim == 0 else value


def gamma_s_standard(atom: DipoleAtom, constants: Constants = CODATA) -> float:
    """Γ_s = ω₀³|d|²/(3πħε₀c³)."""
    k = constants
    return atom.omega0 ** 3 * atom.dipole_d ** 2 / (3.0 * math.pi * k.hbar * k.epsilon0 * k.c ** 3)


def dipole_from_gamma_s(gamma_s: float, omega0: float, constants: Constants = CODATA) -> float:
    """|d| that gives ``gamma_s`` at ``omega0``."""
    if not (gamma_s > 0 and omega0 > 0):
        raise DomainError("gamma_s and omega0 must be positive")
    k = constants
    return math.sqrt(3.0 * math.pi * k.hbar * k.epsilon0 * k.c ** 3 * gamma_s / omega0 ** 3)


def solid_angle_avg_g0sq(atom: DipoleAtom, volume: float, constants: Constants = CODATA) -> float:
    """⟨|g₀|²⟩ = 8πω₀|d|²/(3ħε₀V)."""
    if not volume > 0:
        raise DomainError("volume must be positive")
    return 8.0 * math.pi * atom.omega0 * atom.dipole_d ** 2 / (3.0 * constants.hbar * constants.epsilon0 * volume)


def gamma_s_from_vacuum_coupling(g0sq_avg: float, volume: float, omega0: float,
                                 constants: Constants = CODATA) -> float:
    """Γ_s = V⟨|g₀|²⟩ω₀²/(8π²c³); the volume drops out against ⟨|g₀|²⟩."""
    return volume * g0sq_avg * omega0 ** 2 / (8.0 * math.pi ** 2 * constants.c ** 3)


def rabi_from_photon_density(atom: DipoleAtom, photon_density: float, constants: Constants = CODATA) -> float:
    """|Ω| with |Ω|² = 3ω₀n|d|²/(5π²ħε₀), n = |α₀|²/V."""
    if photon_density < 0:
        raise DomainError("photon_density must be non-negative")
    k = constants
    return math.sqrt(3.0 * atom.omega0 * photon_density * atom.dipole_d ** 2 / (5.0 * math.pi ** 2 * k.hbar * k.epsilon0))


def photon_density_from_rabi(atom: DipoleAtom, rabi: float, constants: Constants = CODATA) -> float:
    k = constants
    return 5.0 * math.pi ** 2 * k.hbar * k.epsilon0 * abs(rabi) ** 2 / (3.0 * atom.omega0 * atom.dipole_d ** 2)


def gamma_m_dipole(atom: DipoleAtom, alpha0_sq: float, volume: float, detuning: float,
                   constants: Constants = CODATA) -> float:
    """Γ_s|Ω|²/Δ² written through the dipole: ω₀⁴|α₀|²|d|⁴/(5π³c³ħ²ε₀²VΔ²)."""
    if detuning == 0:
        raise DomainError("detuning must be nonzero")
    if not volume > 0:
        raise DomainError("volume must be positive")
    k = constants
    return (atom.omega0 ** 4 * alpha0_sq * atom.dipole_d ** 4
            / (5.0 * math.pi ** 3 * k.c ** 3 * k.hbar ** 2 * k.epsilon0 ** 2 * volume * detuning ** 2))


def lab_to_params(atom: DipoleAtom, linewidth: float, detuning: float, rabi: Optional[float] = None,
                  photon_density: Optional[float] = None, constants: Constants = CODATA) -> PhysicalParams:
    """Build PhysicalParams from a dipole, a linewidth, a detuning and either Ω or n = |α₀|²/V.

    ``alpha0_sq`` of the result holds n, so nothing exported depends on the
    quantization volume.
    """
    if rabi is None and photon_density is None:
        raise DomainError("give rabi or photon_density")
    if not linewidth > 0:
        raise DomainError("linewidth must be positive")
    gamma_s = gamma_s_standard(atom, constants)

    if photon_density is not None:
        from_density = rabi_from_photon_density(atom, photon_density, constants)
        if rabi is not None:
            scale = max(abs(rabi) ** 2, from_density ** 2)
            mismatch = abs(abs(rabi) ** 2 - from_density ** 2) / scale if scale else 0.0
            if mismatch > RABI_CONSISTENCY:
                raise ConsistencyError(f"rabi {abs(rabi):.6g} and photon density (|Ω| = {from_density:.6g}) "
                                       f"disagree by {mismatch:.3e}")
        else:
            rabi = from_density
        density = photon_density
    else:
        density = photon_density_from_rabi(atom, rabi, constants)

    params = PhysicalParams(gamma_s=gamma_s, omega_rabi=rabi, detuning=detuning, omega0=atom.omega0,
                            lambda_lw=linewidth, alpha0_sq=density)

    # unit volume: gamma_m_dipole only depends on |α₀|²/V
    via_dipole = gamma_m_dipole(atom, density, 1.0, detuning, constants)
    direct = params.gamma_m
    scale = max(abs(direct), abs(via_dipole))
    mismatch = abs(direct - via_dipole) / scale if scale else 0.0
    if mismatch > ROUTE_CONSISTENCY:
        raise ConsistencyError(f"Γ_M routes disagree: {direct:.17g} vs {via_dipole:.17g}")
    logger.debug("lab parameters: Γ_s=%.6g rad/s, |Ω|=%.6g rad/s, Γ_M=%.6g rad/s", gamma_s, abs(rabi), direct)
    return params


def rubidium_87_atom(constants: Constants = CODATA) -> DipoleAtom:
    return DipoleAtom(dipole_d=dipole_from_gamma_s(RB87_GAMMA_S, RB87_OMEGA0, constants), omega0=RB87_OMEGA0)


def rubidium_87_example(linewidth: float = 1e3, detuning: float = 4.0e7, rabi: float = 1.0e7) -> PhysicalParams:
    """⁸⁷Rb preset; the defaults put Γ_M near 1e6 rad/s."""
    return lab_to_params(rubidium_87_atom(), linewidth=linewidth, detuning=detuning, rabi=rabi)
