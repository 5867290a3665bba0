import math
import os
import warnings
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from stark.acshift.errors import AdiabaticRegimeWarning, ConfigError, DomainError

# Below this |Δ|/|Ω| the adiabatic elimination is considered doubtful.
ADIABATIC_RATIO = 10.0

OUTPUT_DIR_ENV = "STARK_OUTPUT_DIR"


class Transient(Enum):
    """Weight of the transient term of the closed-form decoherence function.

    HALF is the closed form with the transient over 2R(Q²+1)².  FULL keeps the
    transient at full weight, which is what the full-line mode integral gives by
    residues; only FULL starts quadratically at t = 0.
    """
    HALF = "half"
    FULL = "full"

    @property
    def divisor(self) -> float:
        return 2.0 if self is Transient.HALF else 1.0


class FrequencyLine(Enum):
    FULL = "full"          # ω over the whole real line (residue contour)
    POSITIVE = "positive"  # physical modes only, ω > 0


class Regime(Enum):
    MARKOVIAN = "Markovian"
    SUPPRESSED_EXPONENTIAL = "SuppressedExponential"
    OSCILLATORY = "Oscillatory"
    CROSSOVER = "Crossover"


class TimeUnits(Enum):
    SECONDS = "seconds"    # physical time t
    MARKOVIAN = "markovian"  # τ = Γ_M t
    AC = "ac"              # τ' = Γ_ac t = τ / Q²

    @property
    def column(self) -> str:
        return {"seconds": "t", "markovian": "tau", "ac": "tau_prime"}[self.value]


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


class GridSpacing(Enum):
    LINEAR = "linear"
    LOG = "log"


@dataclass(frozen=True)
class PhysicalParams:
    """Laser and atom parameters, all frequencies angular."""
    gamma_s: float          # spontaneous decay rate Γ_s [rad/s]
    omega_rabi: float       # laser transition coupling Ω [rad/s]
    detuning: float         # Δ [rad/s]
    omega0: float           # laser center frequency ω₀ [rad/s]
    lambda_lw: float        # Lorentzian half width at half maximum λ [rad/s]
    alpha0_sq: float = 1.0  # peak intensity |α₀|² [photon-number density, dimensionless]

    def __post_init__(self):
        if not self.gamma_s > 0:
            raise DomainError(f"gamma_s must be positive, got {self.gamma_s!r}")
        if not self.lambda_lw > 0:
            raise DomainError(f"lambda_lw must be positive, got {self.lambda_lw!r}")
        if not self.omega0 >= 0:
            raise DomainError(f"omega0 must be non-negative, got {self.omega0!r}")
        if self.detuning == 0 or not math.isfinite(self.detuning):
            raise DomainError("detuning must be finite and nonzero")
        if self.alpha0_sq < 0:
            raise DomainError(f"alpha0_sq must be non-negative, got {self.alpha0_sq!r}")
        if abs(self.detuning) < ADIABATIC_RATIO * abs(self.omega_rabi):
            warnings.warn(
                f"|detuning|/|omega_rabi| = {abs(self.detuning / self.omega_rabi):.3g} is below "
                f"{ADIABATIC_RATIO:g}; adiabatic elimination of the excited state is doubtful",
                AdiabaticRegimeWarning,
                stacklevel=3,
            )

    @property
    def gamma_m(self) -> float:
        """Markovian scattering rate Γ_s|Ω|²/Δ²."""
        return self.gamma_s * abs(self.omega_rabi) ** 2 / self.detuning ** 2

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DimensionlessParams:
    """Q = ω₀/λ and R = λ/Γ_M."""
    q: float
    r: float

    def __post_init__(self):
        if not (self.q >= 0 and math.isfinite(self.q)):
            raise DomainError(f"Q must be finite and non-negative, got {self.q!r}")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError(f"R must be finite and positive, got {self.r!r}")

    @classmethod
    def from_physical(cls, p: PhysicalParams) -> "DimensionlessParams":
        gamma_m = p.gamma_m
        if gamma_m == 0:
            raise DomainError("R = λ/Γ_M is undefined for zero laser coupling")
        return cls(q=p.omega0 / p.lambda_lw, r=p.lambda_lw / gamma_m)

    def to_physical(self, p: PhysicalParams) -> PhysicalParams:
        """Return ``p`` with λ and ω₀ rebuilt from (Q, R) at p's Γ_M."""
        lambda_lw = self.r * p.gamma_m
        return replace(p, lambda_lw=lambda_lw, omega0=self.q * lambda_lw)

    def reference_physical(self) -> PhysicalParams:
        """Parameters with Γ_M = 1, so that t is already τ."""
        return PhysicalParams(gamma_s=100.0, omega_rabi=1.0, detuning=10.0,
                              omega0=self.q * self.r, lambda_lw=self.r)

    @property
    def rq2(self) -> float:
        return self.r * self.q ** 2

    @property
    def rq3(self) -> float:
        return self.r * self.q ** 3


@dataclass(frozen=True)
class RegimeThresholds:
    markovian_q: float = 0.1       # Q at or below
    markovian_r: float = 10.0      # R at or above
    suppressed_q: float = 10.0     # Q at or above
    suppressed_rq2: float = 10.0   # RQ² at or above
    oscillatory_q: float = 3.0     # Q at or above
    oscillatory_rq2_low: float = 0.1
    oscillatory_rq2_high: float = 10.0


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in text.replace(";", ",").split(",") if item.strip())


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(parse):
    def wrapped(text):
        if isinstance(text, str) and text.strip().lower() in ("", "none"):
            return None
        return parse(text)
    return wrapped


def _option(parse=None, **kwargs):
    return field(metadata={"parse": parse}, **kwargs)


@dataclass
class RunConfig:
    """Parameters of one CLI run.

    Precedence is flags > config file (``key = value``) > these defaults; the
    ``STARK_OUTPUT_DIR`` environment variable sits between flags and the file
    for ``output_dir``.
    """
    # closed-form knobs
    q: Optional[float] = _option(_optional(float), default=None)
    r: Optional[float] = _option(_optional(float), default=None)
    # physical parameters (alternative to q/r)
    gamma_s: Optional[float] = _option(_optional(float), default=None)
    omega_rabi: Optional[float] = _option(_optional(float), default=None)
    detuning: Optional[float] = _option(_optional(float), default=None)
    omega0: Optional[float] = _option(_optional(float), default=None)
    lambda_lw: Optional[float] = _option(_optional(float), default=None)
    # time grid
    tau_min: float = _option(float, default=0.0)
    tau_max: float = _option(float, default=5.0)
    n_points: int = _option(int, default=201)
    spacing: GridSpacing = _option(GridSpacing, default=GridSpacing.LINEAR)
    times: Optional[Tuple[float, ...]] = _option(_optional(_floats), default=None)
    rescale: TimeUnits = _option(TimeUnits, default=TimeUnits.MARKOVIAN)
    transient: Transient = _option(Transient, default=Transient.HALF)
    # figure / sweep families
    panel: str = _option(str, default="all")
    q_values: Optional[Tuple[float, ...]] = _option(_optional(_floats), default=None)
    r_values: Optional[Tuple[float, ...]] = _option(_optional(_floats), default=None)
    # oracle
    n_modes: Optional[int] = _option(_optional(int), default=None)
    cutoff_widths: float = _option(float, default=1000.0)
    quad_tol: float = _option(float, default=1e-8)
    quad_rtol: float = _option(float, default=1e-6)
    discrete_rtol: float = _option(float, default=2e-3)
    fock: bool = _option(_bool, default=True)
    random_sets: int = _option(int, default=0)
    # comparison
    gamma_s_over_lambda: Tuple[float, ...] = _option(_floats, default=(1e-3, 1.0, 1e3))
    lindblad: bool = _option(_bool, default=False)
    # output
    output_dir: Path = _option(Path, default=Path("results"))
    fmt: OutputFormat = _option(OutputFormat, default=OutputFormat.CSV)
    name: Optional[str] = _option(_optional(str), default=None)
    seed: int = _option(int, default=0)

    @classmethod
    def keys(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def parse_value(cls, key: str, value: Any) -> Any:
        lookup = {f.name: f for f in fields(cls)}
        if key not in lookup:
            raise ConfigError(f"unknown configuration key {key!r}")
        if not isinstance(value, str):
            return value
        parse = lookup[key].metadata["parse"]
        try:
            return parse(value.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from exc

    @staticmethod
    def read_file(path: Path) -> Dict[str, str]:
        """Read ``key = value`` lines; ``#`` starts a comment."""
        entries: Dict[str, str] = {}
        with open(path, encoding="utf-8") as handle:
            for number, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{number}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                entries[key.replace("-", "_")] = value
        return entries

    @classmethod
    def from_sources(cls, flags: Optional[Mapping[str, Any]] = None, config_file: Optional[Path] = None,
                     env: Optional[Mapping[str, str]] = None) -> "RunConfig":
        env = os.environ if env is None else env
        values: Dict[str, Any] = {}
        if config_file is not None:
            for key, value in cls.read_file(Path(config_file)).items():
                values[key] = cls.parse_value(key, value)
        if env.get(OUTPUT_DIR_ENV):
            values["output_dir"] = Path(env[OUTPUT_DIR_ENV])
        for key, value in (flags or {}).items():
            values[key] = cls.parse_value(key, value)
        return cls(**values)

    def grid(self) -> np.ndarray:
        """Time grid in the units selected by ``rescale``."""
        if self.times is not None:
            times = np.asarray(self.times, dtype=float)
            if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
                raise ConfigError("times must be a non-empty, non-negative, non-decreasing list")
            return times
        if self.n_points < 2:
            raise ConfigError(f"n_points must be at least 2, got {self.n_points}")
        if not self.tau_min < self.tau_max:
            raise ConfigError(f"empty time grid: tau_min={self.tau_min:g} >= tau_max={self.tau_max:g}")
        if self.tau_min < 0:
            raise ConfigError("tau_min must be non-negative")
        if self.spacing is GridSpacing.LOG:
            if self.tau_min <= 0:
                raise ConfigError("log spacing needs tau_min > 0")
            return np.geomspace(self.tau_min, self.tau_max, self.n_points)
        return np.linspace(self.tau_min, self.tau_max, self.n_points)

    def physical(self) -> Optional[PhysicalParams]:
        given = [self.gamma_s, self.omega_rabi, self.detuning, self.omega0, self.lambda_lw]
        if all(value is None for value in given):
            return None
        if any(value is None for value in given):
            raise ConfigError("physical parameters need gamma_s, omega_rabi, detuning, omega0 and lambda_lw")
        return PhysicalParams(gamma_s=self.gamma_s, omega_rabi=self.omega_rabi, detuning=self.detuning,
                              omega0=self.omega0, lambda_lw=self.lambda_lw)

    def dimensionless(self) -> DimensionlessParams:
        if self.q is not None or self.r is not None:
            if self.q is None or self.r is None:
                raise ConfigError("both q and r are required")
            return DimensionlessParams(q=self.q, r=self.r)
        p = self.physical()
        if p is None:
            raise ConfigError("give either q and r or the five physical parameters")
        return DimensionlessParams.from_physical(p)

    def as_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out
