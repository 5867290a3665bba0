"""ac Stark shift dephasing under a Lorentzian laser line."""

from stark.acshift.config import DimensionlessParams, PhysicalParams, Regime, RunConfig, TimeUnits, Transient
from stark.acshift.core import (
    classify_regime,
    coherence,
    decoherence_curve,
    gamma_ac,
    gamma_dimensionless,
    gamma_markovian,
    gamma_physical,
)

__all__ = [
    "DimensionlessParams",
    "PhysicalParams",
    "Regime",
    "RunConfig",
    "TimeUnits",
    "Transient",
    "classify_regime",
    "coherence",
    "decoherence_curve",
    "gamma_ac",
    "gamma_dimensionless",
    "gamma_markovian",
    "gamma_physical",
]
