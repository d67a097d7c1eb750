"""Reflectivity-based bird density and its sensitivity to RCS fluctuation.

The empirical conversion is rho = Z * 28 / sigma.  It is evaluated in linear
units (Z as a linear reflectivity factor, sigma in m^2); the dB accessors exist
for reporting only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DensityDomainError, InvalidArgumentError

DENSITY_CONSTANT = 28.0


@dataclass(frozen=True)
class DensityInput:
    reflectivity: float
    mean_rcs: float

    def __post_init__(self):
        if not (math.isfinite(self.reflectivity) and self.reflectivity >= 0):
            raise InvalidArgumentError(f"reflectivity must be finite and >= 0, got {self.reflectivity!r}")
        if not math.isfinite(self.mean_rcs) or self.mean_rcs < 0:
            raise InvalidArgumentError(f"mean_rcs must be finite and > 0, got {self.mean_rcs!r}")
        if self.mean_rcs == 0:
            raise DensityDomainError("mean_rcs = 0 makes the density undefined")

    @classmethod
    def from_db(cls, reflectivity_dbz: float, mean_rcs_dbsm: float) -> "DensityInput":
        return cls(10.0 ** (reflectivity_dbz / 10.0), 10.0 ** (mean_rcs_dbsm / 10.0))

    @property
    def reflectivity_dbz(self) -> float:
        return 10.0 * math.log10(self.reflectivity) if self.reflectivity > 0 else -math.inf

    @property
    def mean_rcs_dbsm(self) -> float:
        return 10.0 * math.log10(self.mean_rcs)


@dataclass(frozen=True)
class DensityErrorReport:
    nominal_density: float
    low_density: float
    high_density: float
    error_ratio: float
    fluctuation_db: float

    @property
    def error_percent(self) -> float:
        """Relative overestimate of the high bound against the low bound, in percent."""
        return 100.0 * (self.error_ratio - 1.0)


def bird_density(density_input: DensityInput) -> float:
    """Birds per km^3 from linear reflectivity and mean single-bird RCS."""
    if density_input.mean_rcs == 0:
        raise DensityDomainError("mean_rcs = 0 makes the density undefined")
    return density_input.reflectivity * DENSITY_CONSTANT / density_input.mean_rcs


def density_error_bounds(reflectivity: float, nominal_rcs: float, fluctuation_db: float) -> DensityErrorReport:
    """Density spread when the true RCS swings over ``fluctuation_db`` (full power swing).

    The RCS endpoints sit at +-fluctuation_db / 2 about the nominal value in
    dB, so high / low = 10 ** (fluctuation_db / 10).
    """
    if not (math.isfinite(fluctuation_db) and fluctuation_db >= 0):
        raise InvalidArgumentError(f"fluctuation_db must be finite and >= 0, got {fluctuation_db!r}")
    half = 10.0 ** (fluctuation_db / 20.0)
    nominal = bird_density(DensityInput(reflectivity, nominal_rcs))
    return DensityErrorReport(
        nominal_density=nominal,
        low_density=bird_density(DensityInput(reflectivity, nominal_rcs * half)),
        high_density=bird_density(DensityInput(reflectivity, nominal_rcs / half)),
        error_ratio=10.0 ** (fluctuation_db / 10.0),
        fluctuation_db=fluctuation_db,
    )
