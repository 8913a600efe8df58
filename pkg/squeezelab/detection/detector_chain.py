"""
Detector Chain - Virtual charge-integrating detectors and the calibration
steps that turn their pulse integrals into a noise reduction factor.

Electronic noise is added in detected-photon units after loss, then scaled
by the amplification A of each detector.
"""

import math
from typing import Optional

import numpy as np
from loguru import logger

from squeezelab.exceptions import CalibrationError, DomainError
from squeezelab.models.detection import (
    CalibrationResult,
    DetectorParams,
    NoiseCorrectedVariance,
    NrfEstimate,
    PulseRecordSet,
)
from squeezelab.physics.sampling import Stream, run_blocks

MIN_BALANCE_RECORDS = 1000
MAX_BALANCE_RESIDUAL = 1e-3
# corrected variances below -k sigma of the variance estimator are inconsistent
INCONSISTENCY_SIGMAS = 3.0
# a mean within this many standard errors of zero is not light
VACUUM_SIGMAS = 5.0


def to_electrical(
    n_photons: np.ndarray | float,
    params: DetectorParams,
    noise_draw: Optional[np.ndarray | float] = None
) -> np.ndarray | float:
    """
    Pulse integral A·(n + g), nV·s.

    Args:
        n_photons: Detected photons per pulse
        params: Detector amplification and noise
        noise_draw: Standard-normal draws; g = σ·noise_draw. None means no noise.
    """
    if np.any(np.asarray(n_photons) < 0):
        raise DomainError("photon numbers must be >= 0")
    noise = 0.0 if noise_draw is None else params.noise_sigma * noise_draw
    return params.amplification * (n_photons + noise)


def simulate_detection(
    counts: np.ndarray,
    detectors: tuple[DetectorParams, DetectorParams],
    seed: int,
    threads: Optional[int] = None,
    stream: int = Stream.ELECTRONIC,
    first_pulse_id: int = 0
) -> PulseRecordSet:
    """
    Raw pulse records for (n1, n2) photon counts.

    Args:
        counts: (n_pulses, 2) detected photons per arm
        detectors: Parameters of detector 1 and detector 2
        seed: Run seed; the noise stream is independent of the photon stream
        threads: Worker threads
        stream: Random stream for the electronic noise
        first_pulse_id: Id of the first record
    """
    counts = np.asarray(counts)
    n_pulses = len(counts)

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.standard_normal((size, 2))

    noise = run_blocks(n_pulses, seed, stream, draw, threads=threads)
    s1 = to_electrical(counts[:, 0], detectors[0], noise[:, 0])
    s2 = to_electrical(counts[:, 1], detectors[1], noise[:, 1])
    return PulseRecordSet(
        pulse_id=np.arange(first_pulse_id, first_pulse_id + n_pulses),
        s1=s1,
        s2=s2,
    )


def dark_run(
    detectors: tuple[DetectorParams, DetectorParams],
    n_pulses: int,
    seed: int,
    threads: Optional[int] = None
) -> PulseRecordSet:
    """Records with the light blocked: electronic noise only."""
    return simulate_detection(np.zeros((n_pulses, 2), dtype=np.int64), detectors, seed, threads, Stream.DARK)


def _unresolved_from_zero(signal: np.ndarray) -> bool:
    """Mean within VACUUM_SIGMAS standard errors of zero."""
    spread = float(np.std(signal, ddof=1)) / math.sqrt(len(signal))
    return abs(float(np.mean(signal))) <= VACUUM_SIGMAS * spread


def balance(
    records: PulseRecordSet,
    reference_amplification: float,
    vacuum_balance: float = 1.0
) -> tuple[CalibrationResult, PulseRecordSet]:
    """
    Equalize the two arms numerically.

    β = mean(s1)/mean(s2); calibrated photons are n1 = s1/A1 and n2 = β·s2/A1.
    When neither mean is resolved from zero the input is vacuum: there is
    nothing to balance against, so β = vacuum_balance and the result is
    flagged.

    Args:
        records: Raw records, at least 1000
        reference_amplification: A1 of detector 1, nV·s per photon
        vacuum_balance: β used for vacuum input, normally A1/A2

    Raises:
        CalibrationError: too few records, or one arm dark or sign-flipped
            while the other carries light
    """
    if len(records) < MIN_BALANCE_RECORDS:
        raise CalibrationError(f"balancing needs at least {MIN_BALANCE_RECORDS} records, got {len(records)}")
    if _unresolved_from_zero(records.s1) and _unresolved_from_zero(records.s2):
        logger.warning(f"[BALANCE] No light resolved on either detector; vacuum input, beta = {vacuum_balance:.6f}")
        calibration = CalibrationResult(balance_factor=vacuum_balance, vacuum=True)
        n1 = records.s1 / reference_amplification
        n2 = vacuum_balance * records.s2 / reference_amplification
        return calibration, records.with_calibration(n1, n2)

    mean1 = float(np.mean(records.s1))
    mean2 = float(np.mean(records.s2))
    if mean1 == 0 or mean2 == 0:
        raise CalibrationError("mean signal is zero on one detector; cannot balance")
    beta = mean1 / mean2
    if beta <= 0:
        raise CalibrationError(f"detector means have opposite signs (beta = {beta})")

    n1 = records.s1 / reference_amplification
    n2 = beta * records.s2 / reference_amplification
    residual = abs(float(np.mean(n1)) - float(np.mean(n2))) / abs(float(np.mean(n1)))
    if residual > MAX_BALANCE_RESIDUAL:
        raise CalibrationError(f"balance residual {residual:.2e} exceeds {MAX_BALANCE_RESIDUAL}")

    logger.info(f"[BALANCE] beta = {beta:.6f}, residual = {residual:.2e}")
    calibration = CalibrationResult(balance_factor=beta, balance_residual=residual)
    return calibration, records.with_calibration(n1, n2)


def electronic_variances(dark: PulseRecordSet, reference_amplification: float) -> tuple[float, float]:
    """Per-detector electronic variance in calibrated photon units, before β scaling."""
    scale = reference_amplification ** 2
    return float(np.var(dark.s1, ddof=1)) / scale, float(np.var(dark.s2, ddof=1)) / scale


def shot_noise_counts(
    mean_photons: float,
    n_pulses: int,
    seed: int,
    threads: Optional[int] = None
) -> np.ndarray:
    """Coherent light: Poisson photon number split 50/50 by a beamsplitter."""
    if not mean_photons > 0:
        raise DomainError(f"mean photon number must be > 0, got {mean_photons}")

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        total = rng.poisson(mean_photons, size=size)
        first = rng.binomial(total, 0.5)
        return np.stack([first, total - first], axis=1)

    return run_blocks(n_pulses, seed, Stream.SHOT_NOISE, draw, threads=threads)


def shot_noise_calibration(
    mean_photons: float,
    n_pulses: int,
    seed: int,
    threads: Optional[int] = None
) -> float:
    """Shot-noise level Var(n1 - n2) of a Poissonian reference, photons²."""
    counts = shot_noise_counts(mean_photons, n_pulses, seed, threads)
    level = float(np.var(counts[:, 0] - counts[:, 1], ddof=1))
    logger.info(f"[CALIBRATE] Shot-noise level {level:.4g} at mean {mean_photons:.4g} photons")
    return level


def variance_std_error(variance: float, n_samples: int) -> float:
    """Normal-approximation standard error of a sample variance, sqrt(2/(n-1))·Var."""
    if n_samples < 2:
        raise DomainError("need at least 2 samples")
    return math.sqrt(2.0 / (n_samples - 1)) * variance


def subtract_electronic_noise(
    var_measured: float,
    calibration: CalibrationResult,
    n_pulses: Optional[int] = None
) -> NoiseCorrectedVariance:
    """
    Remove σ1² + β²σ2² from a measured difference variance.

    Negative results are clamped at 0 and flagged. With n_pulses given, a
    result more than three standard errors below zero raises.

    Raises:
        CalibrationError: calibration inconsistent with the measurement
    """
    if var_measured < 0:
        raise DomainError(f"measured variance must be >= 0, got {var_measured}")
    corrected = var_measured - calibration.electronic_variance
    if corrected >= 0:
        return NoiseCorrectedVariance(value=corrected, raw=var_measured)

    if n_pulses is not None and corrected < -INCONSISTENCY_SIGMAS * variance_std_error(var_measured, n_pulses):
        raise CalibrationError(
            f"electronic variance {calibration.electronic_variance:.4g} exceeds measured variance "
            f"{var_measured:.4g} by more than {INCONSISTENCY_SIGMAS:g} standard errors"
        )
    logger.warning(f"[ESTIMATE] Noise-corrected variance {corrected:.4g} < 0, clamped to 0")
    return NoiseCorrectedVariance(value=0.0, raw=var_measured, clamped=True)


def estimate_nrf(records: PulseRecordSet, calibration: CalibrationResult) -> NrfEstimate:
    """
    NRF from calibrated records after electronic-noise subtraction.

    The standard error combines, in quadrature, the variance-estimator term
    sqrt(2/(n-1))·Var(n1-n2)/<n1+n2> and the ratio term NRF·sd(n1+n2)/(√n·<n1+n2>).

    Vacuum input (see balance) carries no photons to normalize by; the NRF
    is then the no-light limit 1 with zero standard error and the estimate
    is flagged.
    """
    if not records.is_calibrated:
        raise CalibrationError("records are not calibrated; run balance first")
    n = len(records)
    if n < 2:
        raise DomainError(f"need at least 2 calibrated records, got {n}")

    diff = records.n1_cal - records.n2_cal
    total = records.n1_cal + records.n2_cal
    mean_sum = float(np.mean(total))
    if calibration.vacuum:
        var_raw = float(np.var(diff, ddof=1))
        corrected = subtract_electronic_noise(var_raw, calibration)
        logger.warning(f"[ESTIMATE] Vacuum input, NRF set to 1 ({n} pulses, mean sum {mean_sum:.4g})")
        return NrfEstimate(
            nrf=1.0,
            std_error=0.0,
            mean_sum=mean_sum,
            var_diff=corrected.value,
            var_diff_raw=var_raw,
            n_pulses=n,
            clamped=corrected.clamped,
            vacuum=True,
        )
    if mean_sum <= 0:
        raise DomainError(f"mean photon sum must be > 0, got {mean_sum}")

    var_raw = float(np.var(diff, ddof=1))
    corrected = subtract_electronic_noise(var_raw, calibration, n_pulses=n)
    value = corrected.value / mean_sum

    variance_term = variance_std_error(var_raw, n) / mean_sum
    ratio_term = value * math.sqrt(float(np.var(total, ddof=1)) / n) / mean_sum
    std_error = math.hypot(variance_term, ratio_term)

    logger.info(f"[ESTIMATE] NRF = {value:.4f} ± {std_error:.4f} from {n} pulses")
    return NrfEstimate(
        nrf=value,
        std_error=std_error,
        mean_sum=mean_sum,
        var_diff=corrected.value,
        var_diff_raw=var_raw,
        n_pulses=n,
        clamped=corrected.clamped,
    )
