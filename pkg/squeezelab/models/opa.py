"""
OPA and Stokes-moment data models.
"""

import math
from typing import Optional
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

# sinh overflows far beyond this; no physical regime comes close
MAX_GAIN = 12.0


def gain_from_power(gain_coefficient: float, pump_power: float, pump_split: bool = False) -> float:
    """Parametric gain for a pump power in mW; a 45 degree pump halves the per-crystal power."""
    if pump_power < 0:
        raise ValueError(f"pump power must be >= 0, got {pump_power}")
    effective_power = pump_power / 2.0 if pump_split else pump_power
    return gain_coefficient * math.sqrt(effective_power)


class OpaConfig(BaseModel):
    """Physical configuration of the two-crystal OPA."""

    model_config = ConfigDict(frozen=True)

    gain: float = Field(..., ge=0.0, le=MAX_GAIN, description="Parametric gain per crystal")
    pump_phase: float = Field(default=math.pi, description="Phase between the two squeezed vacua, rad")
    mode_count: int = Field(default=1, ge=1, description="Number of independent mode pairs")
    gain_coefficient: Optional[float] = Field(None, ge=0.0, description="Gain per sqrt(mW)")
    pump_power: Optional[float] = Field(None, ge=0.0, description="Mean pump power, mW")
    pump_split: bool = Field(default=False, description="Pump polarized at 45 degrees to both crystals")

    @model_validator(mode="before")
    @classmethod
    def _derive_gain(cls, data):
        if isinstance(data, dict) and data.get("gain") is None:
            kappa = data.get("gain_coefficient")
            power = data.get("pump_power")
            if kappa is not None and power is not None:
                # values may still be raw text from a run-config file
                split = TypeAdapter(bool).validate_python(data.get("pump_split", False))
                data = dict(data)
                data["gain"] = gain_from_power(float(kappa), float(power), split)
        return data

    @model_validator(mode="after")
    def _check_gain_law(self):
        if self.gain_coefficient is not None and self.pump_power is not None:
            expected = gain_from_power(self.gain_coefficient, self.pump_power, self.pump_split)
            if not math.isclose(self.gain, expected, rel_tol=1e-12, abs_tol=1e-15):
                raise ValueError(
                    f"gain {self.gain} inconsistent with gain_coefficient*sqrt(power) = {expected}"
                )
        return self

    @classmethod
    def from_pump(
        cls,
        gain_coefficient: float,
        pump_power: float,
        pump_split: bool = False,
        **kwargs
    ) -> "OpaConfig":
        """Build from the gain law, Γ = κ·√P (or κ·√(P/2) with a split pump)."""
        return cls(
            gain=gain_from_power(gain_coefficient, pump_power, pump_split),
            gain_coefficient=gain_coefficient,
            pump_power=pump_power,
            pump_split=pump_split,
            **kwargs
        )


class BogoliubovCoeffs(BaseModel):
    """Bogoliubov pair U = cosh Γ, V = sinh Γ."""

    model_config = ConfigDict(frozen=True)

    u: float = Field(..., ge=1.0)
    v: float = Field(..., ge=0.0)

    @model_validator(mode="after")
    def _check_identity(self):
        if not math.isclose(self.u * self.u - self.v * self.v, 1.0, rel_tol=1e-12 * max(1.0, self.u * self.u)):
            raise ValueError(f"U^2 - V^2 = {self.u ** 2 - self.v ** 2}, expected 1")
        return self


class Efficiency(BaseModel):
    """Overall detection efficiency of one arm."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., ge=0.0, le=1.0)


class StokesMoments(BaseModel):
    """Means and variances of the Stokes operators, in photons and photons^2."""

    model_config = ConfigDict(frozen=True)

    mean_s0: float = Field(..., ge=0.0)
    mean_s1: float = 0.0
    mean_s2: float = 0.0
    mean_s3: float = 0.0
    var_s1: float = Field(..., ge=0.0)
    var_s2: float = Field(..., ge=0.0)
    var_s3: float = Field(..., ge=0.0)

    def variance(self, stokes_index: int) -> float:
        """Variance of S1, S2 or S3."""
        return {1: self.var_s1, 2: self.var_s2, 3: self.var_s3}[stokes_index]
