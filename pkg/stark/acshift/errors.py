"""Exceptions and warnings raised by the dephasing numerics."""

from typing import Optional


class DephasingError(Exception):
    """Base class for every error raised by ``stark.acshift``."""


class DomainError(DephasingError, ValueError):
    """An input lies outside the domain of the requested quantity."""


class ConfigError(DephasingError, ValueError):
    """Bad run configuration (unknown key, unparsable value, empty grid)."""


class ConsistencyError(DephasingError):
    """Two routes to the same quantity disagree beyond tolerance."""


class QuadratureError(DephasingError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float, requested: float):
        super().__init__(f"{message} (achieved relative error {achieved:.3e}, requested {requested:.3e})")
        self.achieved = achieved
        self.requested = requested


class IntegratorError(DephasingError):
    """An ODE integration failed."""

    def __init__(self, message: str, status: Optional[int] = None, nfev: Optional[int] = None,
                 t_reached: Optional[float] = None):
        details = []
        if status is not None:
            details.append(f"status={status}")
        if nfev is not None:
            details.append(f"nfev={nfev}")
        if t_reached is not None:
            details.append(f"t={t_reached:.6g}")
        suffix = f" [{', '.join(details)}]" if details else ""
        super().__init__(f"{message}{suffix}")
        self.status = status
        self.nfev = nfev
        self.t_reached = t_reached


class TruncationError(DephasingError):
    """Fock-space truncation leaked more population than allowed."""

    def __init__(self, leakage: float, limit: float):
        super().__init__(f"top Fock level holds {leakage:.3e} of the norm (limit {limit:.1e})")
        self.leakage = leakage
        self.limit = limit


class OracleError(DephasingError):
    """One member of a cross-validation run failed."""

    def __init__(self, method: str, cause: Exception):
        super().__init__(f"{method}: {cause}")
        self.method = method
        self.cause = cause


class AdiabaticRegimeWarning(UserWarning):
    """Detuning is not large compared with the Rabi frequency."""


class RegimeWarning(UserWarning):
    """An approximation was evaluated outside the regime it was derived for."""
