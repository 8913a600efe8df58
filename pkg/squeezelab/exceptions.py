"""
Exception hierarchy shared by the simulator, the estimators and the CLI.
"""

from typing import Optional


class SqueezeLabError(Exception):
    """Base class for all squeezelab errors."""

    exit_code: int = 1


class DomainError(SqueezeLabError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class CutoffError(DomainError):
    """Fock cutoff too small for the requested tail tolerance."""

    def __init__(self, message: str, required_cutoff: int):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class ConfigError(SqueezeLabError):
    """Invalid run configuration."""

    exit_code = 2

    def __init__(self, message: str, fields: Optional[list[str]] = None):
        super().__init__(message)
        self.fields = fields or []


class InputDataError(SqueezeLabError):
    """Unreadable or malformed input data files."""

    exit_code = 3

    def __init__(self, message: str, line_numbers: Optional[list[int]] = None):
        super().__init__(message)
        self.line_numbers = line_numbers or []


class ConvergenceError(SqueezeLabError):
    """A fit did not converge within its iteration budget."""

    exit_code = 4

    def __init__(self, message: str, trace: Optional[list[dict]] = None):
        super().__init__(message)
        self.trace = trace or []


class CalibrationError(SqueezeLabError):
    """Calibration data inconsistent with the measured records."""

    exit_code = 4
