"""
Estimation State - TypedDict definition for the LangGraph workflow.
"""

import time
from typing import Optional, TypedDict

from squeezelab.models.detection import CalibrationResult, NrfEstimate, PulseRecordSet
from squeezelab.models.run_config import RunConfig


class EstimationState(TypedDict, total=False):
    """
    State container for the NRF estimation workflow.
    All fields are optional to support incremental state updates.
    """

    # Input
    records_path: Optional[str]
    config: RunConfig
    seed: int
    threads: Optional[int]
    output_dir: Optional[str]

    # Records
    records: Optional[PulseRecordSet]
    calibrated: Optional[PulseRecordSet]

    # Calibration and estimate
    calibration: Optional[CalibrationResult]
    estimate: Optional[NrfEstimate]

    # Report
    report: dict
    report_path: Optional[str]

    # Workflow control
    should_continue: bool
    error_message: Optional[str]
    error: Optional[Exception]

    # Timing
    start_time: float
    end_time: float


def create_initial_state(
    config: RunConfig,
    records_path: Optional[str] = None,
    records: Optional[PulseRecordSet] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    output_dir: Optional[str] = None
) -> EstimationState:
    """
    Create initial state for the estimation workflow.

    Args:
        config: Run configuration (detectors and seed)
        records_path: Pulse-record CSV to load
        records: Records already in memory; used instead of records_path
        seed: Seed of the calibration runs; defaults to the config seed
        threads: Worker threads for the calibration runs
        output_dir: Where to save the result block; nothing is saved when None

    Returns:
        Initial EstimationState
    """
    return EstimationState(
        records_path=records_path,
        config=config,
        seed=config.run.seed if seed is None else seed,
        threads=threads,
        output_dir=output_dir,
        records=records,
        calibrated=None,
        calibration=None,
        estimate=None,
        report={},
        report_path=None,
        should_continue=True,
        error_message=None,
        error=None,
        start_time=time.time(),
        end_time=0.0
    )
