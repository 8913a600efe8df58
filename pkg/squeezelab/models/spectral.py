"""
Spectral data models: nonlinear crystals, quartz plates and the PDC profile.
"""

from enum import Enum
from typing import Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SellmeierSet(str, Enum):
    """Pinned BBO dispersion tables."""
    EIMERL = "eimerl"
    KATO = "kato"


class Alignment(str, Enum):
    """Phase-matching alignment of the crystal pair."""
    DEGENERATE = "degenerate"
    NONDEGENERATE = "nondegenerate"


class CrystalParams(BaseModel):
    """A type-I BBO crystal in the cascade."""

    model_config = ConfigDict(frozen=True)

    length: float = Field(1.0, gt=0.0, description="Crystal length, mm")
    cut_angle: Optional[float] = Field(None, gt=0.0, lt=90.0, description="Optic-axis angle, degrees; None = solve for alignment")
    sellmeier_set: SellmeierSet = SellmeierSet.EIMERL
    pump_wavelength: float = Field(355.0, gt=0.0, description="nm")
    second_length: float = Field(1.0, ge=0.0, description="Length of the second crystal traversed by crystal-1 pairs, mm")
    alignment: Alignment = Alignment.DEGENERATE
    signal_wavelength: float = Field(650.0, gt=0.0, description="Phase-matched signal for the nondegenerate alignment, nm")
    # recorded only; the collinear phase integral does not use them
    aperture_deg: float = Field(0.8, gt=0.0)
    filter_bandwidth_nm: Optional[float] = Field(None, gt=0.0)

    @property
    def degenerate_wavelength(self) -> float:
        return 2.0 * self.pump_wavelength

    @property
    def target_signal_wavelength(self) -> float:
        if self.alignment == Alignment.DEGENERATE:
            return self.degenerate_wavelength
        return self.signal_wavelength


class QuartzPlatePair(BaseModel):
    """Two quartz plates in the pump beam, optic axes vertical, tilted together."""

    model_config = ConfigDict(frozen=True)

    thickness_1: float = Field(532.0, gt=0.0, description="μm")
    thickness_2: float = Field(523.0, gt=0.0, description="μm")
    phase_offset: float = Field(0.0, description="Pump phase at the reference tilt not accounted for by the plates, rad")

    @property
    def total_thickness(self) -> float:
        return self.thickness_1 + self.thickness_2


class SpectralProfile(BaseModel):
    """PDC weights and relative phase on a signal-wavelength grid."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    wavelengths: np.ndarray = Field(..., description="Signal wavelengths, nm, strictly increasing")
    intensity_weight: np.ndarray = Field(..., description="Normalised so sum(weight) * Δλ = 1")
    relative_phase: Optional[np.ndarray] = Field(None, description="rad per wavelength")

    @field_validator("wavelengths", "intensity_weight", "relative_phase")
    @classmethod
    def _freeze(cls, value: Optional[np.ndarray]) -> Optional[np.ndarray]:
        if value is None:
            return None
        value = np.array(value, dtype=float)
        value.setflags(write=False)
        return value

    @model_validator(mode="after")
    def _check_grid(self):
        if self.wavelengths.ndim != 1 or len(self.wavelengths) < 2:
            raise ValueError("wavelength grid needs at least two points")
        if np.any(np.diff(self.wavelengths) <= 0):
            raise ValueError("wavelength grid must be strictly increasing")
        if not np.allclose(np.diff(self.wavelengths), self.step, rtol=1e-6):
            raise ValueError("wavelength grid must be uniform")
        if self.intensity_weight.shape != self.wavelengths.shape:
            raise ValueError("weights must match the wavelength grid")
        if np.any(self.intensity_weight < 0):
            raise ValueError("weights must be non-negative")
        if abs(float(np.sum(self.intensity_weight)) * self.step - 1.0) > 1e-9:
            raise ValueError("weights must integrate to 1 over the grid")
        if self.relative_phase is not None and self.relative_phase.shape != self.wavelengths.shape:
            raise ValueError("relative phase must match the wavelength grid")
        return self

    @property
    def step(self) -> float:
        """Grid spacing Δλ, nm."""
        return float(self.wavelengths[1] - self.wavelengths[0])

    def with_phase(self, relative_phase: np.ndarray) -> "SpectralProfile":
        return SpectralProfile(
            wavelengths=self.wavelengths,
            intensity_weight=self.intensity_weight,
            relative_phase=relative_phase,
        )


class SpectralSummary(BaseModel):
    """Phase-matching and squeezed-fraction result for one crystal alignment."""

    model_config = ConfigDict(frozen=True)

    alignment: Alignment
    sellmeier_set: SellmeierSet
    cut_angle: float = Field(..., description="Solved or configured cut angle, degrees")
    signal_wavelength: float = Field(..., description="Phase-matched signal, nm")
    idler_wavelength: float = Field(..., description="nm")
    fwhm_nm: float = Field(..., ge=0.0)
    squeezed_fraction: float = Field(..., ge=-1.0, le=1.0, description="Gauge-invariant |sum w e^{iψ}| Δλ")
    centre_gauge_fraction: float = Field(..., ge=-1.0, le=1.0, description="sum w cos ψ Δλ with ψ = 0 at degeneracy")
    phase_correction: float = Field(..., description="Pump phase that realises the gauge-invariant fraction, rad")

    def to_report(self) -> dict:
        return self.model_dump(mode="json")
