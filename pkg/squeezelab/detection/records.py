"""
Pulse-record and calibration files.

Records are CSV with header `pulse_id,s1_nvs,s2_nvs` and, once calibrated,
`n1_cal,n2_cal`. Floats are written with 17 significant digits so a file
read back reproduces the in-memory values bit for bit.
"""

import re
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from squeezelab.exceptions import InputDataError
from squeezelab.models.detection import CalibrationResult, PulseRecordSet
from squeezelab.report.keyvalue import format_key_values, parse_key_values

RAW_COLUMNS = ["pulse_id", "s1_nvs", "s2_nvs"]
CALIBRATED_COLUMNS = RAW_COLUMNS + ["n1_cal", "n2_cal"]
FLOAT_FORMAT = "%.17g"


def records_to_frame(records: PulseRecordSet) -> pd.DataFrame:
    frame = pd.DataFrame({
        "pulse_id": records.pulse_id,
        "s1_nvs": records.s1,
        "s2_nvs": records.s2,
    })
    if records.is_calibrated:
        frame["n1_cal"] = records.n1_cal
        frame["n2_cal"] = records.n2_cal
    return frame


def write_records(records: PulseRecordSet, path: str | Path) -> Path:
    """Write records as CSV; calibrated columns are included when present."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_to_frame(records).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Pulse records saved: {path} ({len(records)} pulses)")
    return path


def _numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = values.isna() | ~np.isfinite(values.fillna(0.0))
    if bad.any():
        # header is line 1
        lines = [int(i) + 2 for i in frame.index[bad]]
        raise InputDataError(f"column {column}: non-numeric values on lines {lines[:10]}", lines)
    return values.to_numpy(dtype=float)


def read_records(path: str | Path) -> PulseRecordSet:
    """
    Read a pulse-record CSV.

    Raises:
        InputDataError: missing file, wrong header, malformed rows (with
            their line numbers) or duplicate pulse ids
    """
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"records file not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise InputDataError(f"records file is empty: {path}") from e
    except pd.errors.ParserError as e:
        lines = [int(n) for n in re.findall(r"line (\d+)", str(e))]
        raise InputDataError(f"malformed records file {path}: {e}", lines) from e

    columns = [c.strip() for c in frame.columns]
    if columns not in (RAW_COLUMNS, CALIBRATED_COLUMNS):
        raise InputDataError(
            f"unexpected header {','.join(columns)}; expected {','.join(RAW_COLUMNS)}[,n1_cal,n2_cal]",
            [1],
        )
    frame.columns = columns
    if frame.empty:
        raise InputDataError(f"records file has no data rows: {path}")

    ids = _numeric_column(frame, "pulse_id")
    non_integer = ids != np.round(ids)
    if non_integer.any():
        lines = [int(i) + 2 for i in np.flatnonzero(non_integer)]
        raise InputDataError(f"pulse_id must be an integer on lines {lines[:10]}", lines)
    duplicated = pd.Series(ids).duplicated(keep="first").to_numpy()
    if duplicated.any():
        lines = [int(i) + 2 for i in np.flatnonzero(duplicated)]
        raise InputDataError(f"duplicate pulse_id on lines {lines[:10]}", lines)

    data = {
        "pulse_id": ids.astype(np.int64),
        "s1": _numeric_column(frame, "s1_nvs"),
        "s2": _numeric_column(frame, "s2_nvs"),
    }
    if columns == CALIBRATED_COLUMNS:
        data["n1_cal"] = _numeric_column(frame, "n1_cal")
        data["n2_cal"] = _numeric_column(frame, "n2_cal")

    logger.info(f"Loaded {len(ids)} pulse records from {path}")
    return PulseRecordSet(**data)


def write_calibration(calibration: CalibrationResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = calibration.model_dump()
    path.write_text(format_key_values(values), encoding="utf-8")
    logger.info(f"Calibration saved: {path}")
    return path


def read_calibration(path: str | Path) -> CalibrationResult:
    """Read a key=value calibration block written by write_calibration."""
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"calibration file not found: {path}")
    values = parse_key_values(path.read_text(encoding="utf-8").splitlines())
    unknown = set(values) - set(CalibrationResult.model_fields)
    if unknown:
        raise InputDataError(f"unknown calibration keys: {', '.join(sorted(unknown))}")
    try:
        return CalibrationResult(**values)
    except ValueError as e:
        raise InputDataError(f"invalid calibration file {path}: {e}") from e
