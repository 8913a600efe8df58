"""Models module for data structures."""

from .opa import OpaConfig, BogoliubovCoeffs, Efficiency, StokesMoments, gain_from_power
from .fock import TruncatedTwoModeState, JointPhotonDistribution, DetectionBasis, PhotonMoments
from .detection import (
    DetectorParams,
    PulseRecord,
    PulseRecordSet,
    CalibrationResult,
    NoiseCorrectedVariance,
    NrfEstimate,
)
from .spectral import SellmeierSet, Alignment, CrystalParams, QuartzPlatePair, SpectralProfile, SpectralSummary
from .fitting import CurveModel, FitProblem, FitResult
from .run_config import RunConfig, OpticsConfig, RunSection

__all__ = [
    "OpaConfig", "BogoliubovCoeffs", "Efficiency", "StokesMoments", "gain_from_power",
    "TruncatedTwoModeState", "JointPhotonDistribution", "DetectionBasis", "PhotonMoments",
    "DetectorParams", "PulseRecord", "PulseRecordSet", "CalibrationResult",
    "NoiseCorrectedVariance", "NrfEstimate",
    "SellmeierSet", "Alignment", "CrystalParams", "QuartzPlatePair", "SpectralProfile", "SpectralSummary",
    "CurveModel", "FitProblem", "FitResult",
    "RunConfig", "OpticsConfig", "RunSection",
]
