"""
Experiment Reporter - CSV tables, SVG plots and key=value result files.
"""

from pathlib import Path
from typing import Any, Optional

import matplotlib
from matplotlib.figure import Figure
import pandas as pd
from loguru import logger

from config.settings import settings
from squeezelab.report.keyvalue import format_key_values

FLOAT_FORMAT = "%.17g"
# fixed element ids keep repeated SVG exports byte-identical
_SVG_HASH_SALT = "squeezelab"


class ExperimentReporter:
    """
    Writes experiment outputs into one directory.
    Plots are views of the CSV data, never a separate source.
    """

    def __init__(self, output_dir: str | Path = None):
        """
        Initialize reporter.

        Args:
            output_dir: Directory for saving outputs
        """
        self.output_dir = Path(output_dir) if output_dir else settings.output_dir
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def save_csv(self, frame: pd.DataFrame, filename: str) -> Path:
        output_path = self.output_dir / filename
        frame.to_csv(output_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"CSV saved: {output_path}")
        return output_path

    def save_svg(self, figure: Figure, filename: str) -> Path:
        """
        Save a figure as SVG without a creation date.

        Args:
            figure: Figure built by one of the plot_* helpers
            filename: Target file name

        Returns:
            Path to saved file
        """
        output_path = self.output_dir / filename
        with matplotlib.rc_context({"svg.hashsalt": _SVG_HASH_SALT}):
            figure.savefig(output_path, format="svg", metadata={"Date": None})
        logger.info(f"SVG saved: {output_path}")
        return output_path

    def save_key_values(self, values: dict[str, Any], filename: str) -> Path:
        output_path = self.output_dir / filename
        output_path.write_text(format_key_values(values), encoding="utf-8")
        logger.info(f"Result block saved: {output_path}")
        return output_path


def _line_figure(xlabel: str, ylabel: str) -> tuple[Figure, Any]:
    figure = Figure(figsize=(6.0, 4.0))
    axes = figure.add_subplot(1, 1, 1)
    axes.set_xlabel(xlabel)
    axes.set_ylabel(ylabel)
    return figure, axes


def plot_phase_sweep(frame: pd.DataFrame, analytic: Optional[pd.DataFrame] = None) -> Figure:
    """NRF of S2 and S3 against plate tilt, with the analytic curves when given."""
    figure, axes = _line_figure("plate tilt (deg)", "NRF")
    axes.errorbar(frame["alpha_deg"], frame["nrf_s2"], yerr=frame["nrf_s2_err"], fmt="s", label="S2")
    axes.errorbar(frame["alpha_deg"], frame["nrf_s3"], yerr=frame["nrf_s3_err"], fmt="o", label="S3")
    if analytic is not None:
        axes.plot(analytic["alpha_deg"], analytic["nrf_s2"], "-", label="S2 model")
        axes.plot(analytic["alpha_deg"], analytic["nrf_s3"], "--", label="S3 model")
    axes.axhline(1.0, color="grey", linewidth=0.5)
    axes.legend()
    return figure


def plot_power_sweep(frame: pd.DataFrame, fitted: Optional[pd.DataFrame] = None) -> Figure:
    """Photons per pulse against pump power."""
    figure, axes = _line_figure("pump power (mW)", "photons per pulse")
    axes.plot(frame["power_mw"], frame["mean_photons"], "o", label="model")
    if "sampled_photons" in frame:
        axes.plot(frame["power_mw"], frame["sampled_photons"], "x", label="sampled")
    if fitted is not None:
        axes.plot(fitted["power_mw"], fitted["mean_photons"], "-", label="fit")
    axes.legend()
    return figure


def plot_spectrum(frame: pd.DataFrame) -> Figure:
    """Spectral weight and inter-crystal phase against signal wavelength."""
    figure, axes = _line_figure("signal wavelength (nm)", "spectral weight (1/nm)")
    axes.plot(frame["wavelength_nm"], frame["weight"], "-", label="weight")
    phase_axes = axes.twinx()
    phase_axes.plot(frame["wavelength_nm"], frame["phase_rad"], ":", color="tab:red", label="phase")
    phase_axes.set_ylabel("relative phase (rad)")
    return figure
