"""
Detection-chain data models: detector parameters, pulse records and
calibration results.
"""

from typing import Optional, Iterator
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class DetectorParams(BaseModel):
    """One charge-integrating detector with its amplifier."""

    model_config = ConfigDict(frozen=True)

    amplification: float = Field(9.96e-3, gt=0.0, description="nV*s per photon")
    noise_sigma: float = Field(180.0, ge=0.0, description="Electronic noise, photons-equivalent per pulse")
    quantum_efficiency: float = Field(0.9, ge=0.0, le=1.0)
    # recorded only; pulse shape is not modelled
    pulse_duration_us: float = Field(8.0, gt=0.0)
    peaking_time_us: float = Field(2.77, gt=0.0)


class PulseRecord(BaseModel):
    """Integrated detector outputs for one laser shot."""

    pulse_id: int = Field(..., ge=0)
    s1: float = Field(..., description="Detector 1 pulse integral, nV*s")
    s2: float = Field(..., description="Detector 2 pulse integral, nV*s")
    n1_cal: Optional[float] = Field(None, description="Detector 1, calibrated photons")
    n2_cal: Optional[float] = Field(None, description="Detector 2, calibrated photons")


class PulseRecordSet(BaseModel):
    """Columnar pulse records of one run."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pulse_id: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    n1_cal: Optional[np.ndarray] = None
    n2_cal: Optional[np.ndarray] = None

    @field_validator("pulse_id")
    @classmethod
    def _integer_ids(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=np.int64)
        value.setflags(write=False)
        return value

    @field_validator("s1", "s2", "n1_cal", "n2_cal")
    @classmethod
    def _float_columns(cls, value: Optional[np.ndarray]) -> Optional[np.ndarray]:
        if value is None:
            return None
        value = np.array(value, dtype=float)
        value.setflags(write=False)
        return value

    @model_validator(mode="after")
    def _consistent(self):
        n = len(self.pulse_id)
        for name in ("s1", "s2", "n1_cal", "n2_cal"):
            column = getattr(self, name)
            if column is not None and len(column) != n:
                raise ValueError(f"column {name} has {len(column)} entries, expected {n}")
        if len(np.unique(self.pulse_id)) != n:
            raise ValueError("pulse_id values must be unique within a run")
        return self

    def __len__(self) -> int:
        return len(self.pulse_id)

    @property
    def is_calibrated(self) -> bool:
        return self.n1_cal is not None and self.n2_cal is not None

    def __iter__(self) -> Iterator[PulseRecord]:
        for i in range(len(self)):
            yield PulseRecord(
                pulse_id=int(self.pulse_id[i]),
                s1=float(self.s1[i]),
                s2=float(self.s2[i]),
                n1_cal=None if self.n1_cal is None else float(self.n1_cal[i]),
                n2_cal=None if self.n2_cal is None else float(self.n2_cal[i]),
            )

    @classmethod
    def from_records(cls, records: list[PulseRecord]) -> "PulseRecordSet":
        calibrated = all(r.n1_cal is not None and r.n2_cal is not None for r in records)
        return cls(
            pulse_id=[r.pulse_id for r in records],
            s1=[r.s1 for r in records],
            s2=[r.s2 for r in records],
            n1_cal=[r.n1_cal for r in records] if calibrated and records else None,
            n2_cal=[r.n2_cal for r in records] if calibrated and records else None,
        )

    def with_calibration(self, n1_cal: np.ndarray, n2_cal: np.ndarray) -> "PulseRecordSet":
        return PulseRecordSet(pulse_id=self.pulse_id, s1=self.s1, s2=self.s2, n1_cal=n1_cal, n2_cal=n2_cal)


class CalibrationResult(BaseModel):
    """Balance factor, shot-noise reference and electronic-noise variances."""

    model_config = ConfigDict(frozen=True)

    balance_factor: float = Field(..., gt=0.0, description="β applied to detector 2")
    balance_residual: float = Field(0.0, ge=0.0, le=1e-3, description="|mean(n1) - mean(β n2)| / mean(n1)")
    vacuum: bool = Field(False, description="No light resolved on either detector; β is nominal")
    shot_noise_level: Optional[float] = Field(None, ge=0.0, description="Var(n1 - n2) of the laser reference, photons^2")
    shot_noise_mean: Optional[float] = Field(None, gt=0.0, description="Mean photon sum of the laser reference")
    electronic_variance_1: float = Field(0.0, ge=0.0, description="photons^2")
    electronic_variance_2: float = Field(0.0, ge=0.0, description="photons^2, before β scaling")

    @property
    def electronic_variance(self) -> float:
        """Electronic contribution to Var(n1 - β n2)."""
        return self.electronic_variance_1 + self.balance_factor ** 2 * self.electronic_variance_2

    @property
    def shot_noise_ratio(self) -> Optional[float]:
        if self.shot_noise_level is None or self.shot_noise_mean is None:
            return None
        return self.shot_noise_level / self.shot_noise_mean

    def to_report(self) -> dict:
        report = {
            "balance_factor": self.balance_factor,
            "balance_residual": self.balance_residual,
            "electronic_variance_1": self.electronic_variance_1,
            "electronic_variance_2": self.electronic_variance_2,
        }
        if self.shot_noise_level is not None:
            report["shot_noise_level"] = self.shot_noise_level
            report["shot_noise_ratio"] = self.shot_noise_ratio
        return report


class NoiseCorrectedVariance(BaseModel):
    """Variance after electronic-noise subtraction."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0)
    raw: float
    clamped: bool = False


class NrfEstimate(BaseModel):
    """Noise reduction factor estimated from a run."""

    model_config = ConfigDict(frozen=True)

    nrf: float
    std_error: float = Field(..., ge=0.0)
    mean_sum: float
    var_diff: float
    var_diff_raw: float
    n_pulses: int
    clamped: bool = False
    vacuum: bool = False

    def to_report(self) -> dict:
        return {
            "nrf": self.nrf,
            "nrf_std_error": self.std_error,
            "mean_sum": self.mean_sum,
            "var_diff": self.var_diff,
            "var_diff_raw": self.var_diff_raw,
            "n_pulses": self.n_pulses,
            "noise_clamped": self.clamped,
            "vacuum": self.vacuum,
        }
