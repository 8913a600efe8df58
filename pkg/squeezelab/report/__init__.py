"""Report module: key=value blocks, CSV tables and SVG plots."""

from .keyvalue import format_key_values, format_value, parse_key_values
from .reporter import ExperimentReporter, plot_phase_sweep, plot_power_sweep, plot_spectrum

__all__ = [
    "format_key_values", "format_value", "parse_key_values",
    "ExperimentReporter", "plot_phase_sweep", "plot_power_sweep", "plot_spectrum",
]
