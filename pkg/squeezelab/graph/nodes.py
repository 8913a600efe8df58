"""
Estimation Nodes - LangGraph node functions for the NRF estimation workflow.
"""

import time
from loguru import logger

from squeezelab.detection.detector_chain import (
    balance,
    dark_run,
    electronic_variances,
    estimate_nrf,
    shot_noise_calibration,
)
from squeezelab.detection.records import read_records
from squeezelab.exceptions import InputDataError, SqueezeLabError
from squeezelab.graph.state import EstimationState
from squeezelab.report.reporter import ExperimentReporter


def _failure(stage: str, error: Exception) -> dict:
    logger.error(f"[{stage}] Error: {error}")
    return {
        "should_continue": False,
        "error_message": f"{stage.lower()} failed: {error}",
        "error": error,
    }


def load_node(state: EstimationState) -> dict:
    """
    Load pulse records from CSV unless they are already in the state.

    Args:
        state: Current workflow state

    Returns:
        State updates with the raw records
    """
    if state.get("records") is not None:
        logger.info(f"[LOAD] Using {len(state['records'])} records from memory")
        return {}

    logger.info(f"[LOAD] Reading records: {state.get('records_path')}")
    try:
        if not state.get("records_path"):
            raise InputDataError("no records given")
        records = read_records(state["records_path"])
        logger.info(f"[LOAD] Read {len(records)} records")
        return {"records": records}
    except SqueezeLabError as e:
        return _failure("LOAD", e)


def balance_node(state: EstimationState) -> dict:
    """Equalize the two detectors and convert to calibrated photon numbers."""
    try:
        config = state["config"]
        calibration, calibrated = balance(
            state["records"],
            config.detector1.amplification,
            vacuum_balance=config.detector1.amplification / config.detector2.amplification,
        )
        return {"calibration": calibration, "calibrated": calibrated}
    except SqueezeLabError as e:
        return _failure("BALANCE", e)


def calibrate_node(state: EstimationState) -> dict:
    """
    Measure the electronic noise on a dark run and the shot-noise level of a
    laser reference at the run's mean photon number.
    """
    try:
        config = state["config"]
        calibrated = state["calibrated"]
        n_pulses = len(calibrated)

        dark = dark_run(config.detectors, n_pulses, state["seed"], state.get("threads"))
        ev1, ev2 = electronic_variances(dark, config.detector1.amplification)
        logger.info(f"[CALIBRATE] Electronic variances {ev1:.4g}, {ev2:.4g} photons^2")

        mean_sum = float((calibrated.n1_cal + calibrated.n2_cal).mean())
        calibration = state["calibration"].model_copy(update={
            "electronic_variance_1": ev1,
            "electronic_variance_2": ev2,
        })
        if mean_sum > 0 and not calibration.vacuum:
            level = shot_noise_calibration(mean_sum, n_pulses, state["seed"], state.get("threads"))
            calibration = calibration.model_copy(update={
                "shot_noise_level": level,
                "shot_noise_mean": mean_sum,
            })
        return {"calibration": calibration}
    except SqueezeLabError as e:
        return _failure("CALIBRATE", e)


def estimate_node(state: EstimationState) -> dict:
    try:
        return {"estimate": estimate_nrf(state["calibrated"], state["calibration"])}
    except SqueezeLabError as e:
        return _failure("ESTIMATE", e)


def report_node(state: EstimationState) -> dict:
    """
    Assemble the key=value result block and optionally save it.

    Args:
        state: Current workflow state

    Returns:
        State updates with the report dict
    """
    logger.info("[REPORT] Assembling estimation report")
    report = {"records": state.get("records_path") or "memory"}
    report.update(state["estimate"].to_report())
    report.update(state["calibration"].to_report())

    end_time = time.time()
    updates = {"report": report, "end_time": end_time}
    if state.get("output_dir"):
        reporter = ExperimentReporter(state["output_dir"])
        updates["report_path"] = str(reporter.save_key_values(report, "estimate.txt"))
    return updates


def should_continue(state: EstimationState) -> str:
    """
    Conditional edge function: stop the graph after a failed stage.

    Returns:
        "continue" or "end"
    """
    if state.get("error_message") or not state.get("should_continue", True):
        return "end"
    return "continue"
