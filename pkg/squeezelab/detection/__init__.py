"""Detection module: virtual detectors, calibration and record files."""

from .detector_chain import (
    to_electrical,
    simulate_detection,
    dark_run,
    balance,
    electronic_variances,
    shot_noise_counts,
    shot_noise_calibration,
    subtract_electronic_noise,
    estimate_nrf,
)
from .records import read_records, write_records, read_calibration, write_calibration

__all__ = [
    "to_electrical", "simulate_detection", "dark_run", "balance", "electronic_variances",
    "shot_noise_counts", "shot_noise_calibration", "subtract_electronic_noise", "estimate_nrf",
    "read_records", "write_records", "read_calibration", "write_calibration",
]
