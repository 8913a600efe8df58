"""
Fock-space data models: truncated two-mode states, photon-number
distributions and the two-port detection basis.
"""

import math
from typing import NamedTuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from squeezelab.exceptions import DomainError

UNITARITY_TOLERANCE = 1e-12


class TruncatedTwoModeState(BaseModel):
    """Complex amplitudes over |n1, n2> with 0 <= n1, n2 <= cutoff."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray = Field(..., description="(cutoff+1, cutoff+1) complex grid")
    tail_bound: float = Field(default=0.0, ge=0.0, description="Probability mass excluded by truncation")

    @field_validator("amplitudes")
    @classmethod
    def _square_grid(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=complex)
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise ValueError(f"amplitude grid must be square, got shape {value.shape}")
        value.setflags(write=False)
        return value

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def padded(self, cutoff: int) -> np.ndarray:
        """Amplitudes zero-padded onto a larger grid."""
        if cutoff < self.cutoff:
            raise ValueError(f"cannot pad cutoff {self.cutoff} down to {cutoff}")
        grid = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        grid[: self.cutoff + 1, : self.cutoff + 1] = self.amplitudes
        return grid


class JointPhotonDistribution(BaseModel):
    """Joint photon-number distribution P(n1, n2) of the two detected ports."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    probabilities: np.ndarray
    tail_bound: float = Field(default=0.0, ge=0.0)

    @field_validator("probabilities")
    @classmethod
    def _valid_grid(cls, value: np.ndarray) -> np.ndarray:
        value = np.array(value, dtype=float)
        if value.ndim != 2:
            raise ValueError("probability grid must be two-dimensional")
        if np.any(value < -1e-15):
            raise ValueError("probabilities must be non-negative")
        value = np.clip(value, 0.0, None)
        value.setflags(write=False)
        return value

    @model_validator(mode="after")
    def _check_mass(self):
        total = float(self.probabilities.sum())
        slack = 1e-9
        if total > 1.0 + slack or total < 1.0 - self.tail_bound - slack:
            raise ValueError(f"total probability {total} outside [1 - tail_bound, 1]")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return self.probabilities.shape

    @property
    def total_mass(self) -> float:
        return float(self.probabilities.sum())


class DetectionBasis(BaseModel):
    """
    Two-port linear transformation from the squeezed mode pair to the
    detected ports.

    Column j of `matrix` expresses input mode j in the output ports:
        c_j^dagger -> sum_k M[k, j] d_k^dagger
    with M = [[cos θ, -e^{-iδ} sin θ], [e^{iδ} sin θ, cos θ]].
    """

    model_config = ConfigDict(frozen=True)

    mixing_angle: float = Field(default=0.0, description="θ, rad")
    relative_phase: float = Field(default=0.0, description="δ, rad")

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.mixing_angle), math.sin(self.mixing_angle)
        phase = complex(math.cos(self.relative_phase), math.sin(self.relative_phase))
        return np.array([[c, -s / phase], [phase * s, c]], dtype=complex)

    def inverse(self) -> "DetectionBasis":
        return DetectionBasis(mixing_angle=-self.mixing_angle, relative_phase=self.relative_phase)

    @staticmethod
    def is_unitary(matrix: np.ndarray, tolerance: float = UNITARITY_TOLERANCE) -> bool:
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (2, 2):
            return False
        return bool(np.max(np.abs(matrix.conj().T @ matrix - np.eye(2))) <= tolerance)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tolerance: float = 1e-10) -> "DetectionBasis":
        """
        Reduce a 2x2 unitary to (θ, δ).

        Any U(2) matrix equals diag(e^{iα1}, e^{iα2}) · M(θ, δ); the output-port
        phases α1, α2 do not change photon counting and are dropped.
        """
        matrix = np.asarray(matrix, dtype=complex)
        if not cls.is_unitary(matrix, tolerance):
            raise DomainError("detection basis matrix is not unitary")
        p, q = matrix[0, 0], matrix[0, 1]
        theta = math.acos(min(1.0, abs(p)))
        if abs(p) < 1e-12 or abs(q) < 1e-12:
            delta = 0.0
        else:
            delta = float(np.angle(p) - np.angle(-q))
        delta = math.remainder(delta, 2.0 * math.pi)
        return cls(mixing_angle=theta, relative_phase=delta)


class PhotonMoments(NamedTuple):
    """Moments of a joint photon-number distribution, photons and photons^2."""

    mean1: float
    mean2: float
    var_diff: float
    var_sum: float

    @property
    def mean_sum(self) -> float:
        return self.mean1 + self.mean2

    def scaled(self, mode_count: int) -> "PhotonMoments":
        """Moments of the sum of `mode_count` independent copies."""
        return PhotonMoments(*(mode_count * value for value in self))
