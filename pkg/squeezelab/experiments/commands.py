"""
Experiment Commands - Virtual runs that reproduce the measurements of a
two-crystal polarization-squeezing setup.

Every command is a pure function of (run config, input files, seed): the
CSV files it writes are byte-identical on re-runs and do not depend on the
number of worker threads.
"""

import math
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from loguru import logger

from config.settings import settings
from squeezelab.detection.detector_chain import simulate_detection
from squeezelab.detection.records import write_records
from squeezelab.exceptions import ConfigError, InputDataError
from squeezelab.fitting.curves import fit_gain_curve, fit_nrf_curve, gain_curve
from squeezelab.graph.workflow import EstimationWorkflowRunner, run_estimation
from squeezelab.models.opa import gain_from_power
from squeezelab.models.run_config import RunConfig
from squeezelab.models.spectral import Alignment
from squeezelab.physics.fock_engine import stokes_distribution
from squeezelab.physics.sampling import fraction_weights, phase_groups, sample_mixture, sample_total_photons
from squeezelab.physics.stokes_core import mixture_nrf, opa_output_mean
from squeezelab.report.reporter import ExperimentReporter, plot_phase_sweep, plot_power_sweep, plot_spectrum
from squeezelab.spectral.spectral_model import (
    phase_weights,
    profile_frame,
    spectral_profile,
    spectral_summary,
    tilt_phase_map,
)

# analytic overlay points per sweep
MODEL_CURVE_POINTS = 241
TWO_PI = 2.0 * math.pi


def _reporter(config: RunConfig, out_dir: Optional[str | Path]) -> ExperimentReporter:
    return ExperimentReporter(out_dir or config.output_path() or settings.output_dir)


def _seed(config: RunConfig, seed: Optional[int]) -> int:
    return config.run.seed if seed is None else seed


def mixture_weights(config: RunConfig, use_spectrum: bool = False) -> list[tuple[float, float]]:
    """
    (phase offset, weight) groups of the broadband state.

    By default the configured squeezed fraction f is realised as two groups;
    with use_spectrum the crystal's own spectral phase is binned instead.
    """
    if use_spectrum:
        return phase_weights(spectral_profile(config.crystal))
    return fraction_weights(config.run.squeezed_fraction)


def simulate_counts(
    config: RunConfig,
    pump_phase: float,
    stokes_index: int,
    seed: int,
    threads: Optional[int] = None,
    use_spectrum: bool = False
) -> np.ndarray:
    """
    Detected photon counts (n1, n2) for n_pulses pulses of one Stokes measurement.

    Args:
        config: Run configuration
        pump_phase: Set relative phase of the two squeezed vacua, rad
        stokes_index: 1, 2 or 3
        seed: Photon-stream seed
        threads: Worker threads
        use_spectrum: Take mode-group phases from the crystal spectrum

    Returns:
        (n_pulses, 2) int64 counts
    """
    eta1, eta2 = config.efficiencies
    groups = phase_groups(pump_phase, mixture_weights(config, use_spectrum), config.opa.mode_count)
    components = [
        (stokes_distribution(config.opa.gain, phase, eta1, eta2, stokes_index), count)
        for phase, count in groups
    ]
    return sample_mixture(components, config.run.n_pulses, seed, threads)


def cmd_simulate_run(
    config: RunConfig,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
    use_spectrum: bool = False
) -> dict:
    """
    Write raw pulse records of one virtual run.

    Returns:
        Result block with the records path and the mean photon numbers
    """
    seed = _seed(config, seed)
    stokes_index = config.run.stokes_index
    logger.info(f"[SIMULATE] S{stokes_index}, {config.run.n_pulses} pulses, seed {seed}")

    counts = simulate_counts(config, config.opa.pump_phase, stokes_index, seed, threads, use_spectrum)
    records = simulate_detection(counts, config.detectors, seed, threads)
    path = write_records(records, _reporter(config, out_dir).output_dir / "records.csv")
    return {
        "records": str(path),
        "n_pulses": len(records),
        "seed": seed,
        "stokes_index": stokes_index,
        "gain": config.opa.gain,
        "mean_n1": float(counts[:, 0].mean()),
        "mean_n2": float(counts[:, 1].mean()),
    }


def cmd_estimate(
    records_path: str | Path,
    config: RunConfig,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out_dir: Optional[str | Path] = None
) -> dict:
    """Balance, calibrate and estimate the NRF of a pulse-record file."""
    records_path = Path(records_path)
    if not records_path.exists():
        raise InputDataError(f"records file not found: {records_path}")
    reporter = _reporter(config, out_dir)
    result = run_estimation(
        config,
        records_path=str(records_path),
        seed=_seed(config, seed),
        threads=threads,
        output_dir=str(reporter.output_dir),
    )
    return result["report"]


def cmd_sweep_phase(
    config: RunConfig,
    alpha_start: float = -30.0,
    alpha_stop: float = 30.0,
    steps: int = 61,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
    use_spectrum: bool = False
) -> dict:
    """
    NRF of S2 and S3 against quartz-plate tilt.

    Each tilt is simulated through the full chain and estimated by the
    estimation workflow. Point i measures S2 with seed + 2i and S3 with
    seed + 2i + 1.

    Returns:
        Result block with the extreme NRF values and the output paths
    """
    if steps < 2:
        raise ConfigError("sweep needs at least 2 steps", ["steps"])
    seed = _seed(config, seed)
    phase_map = tilt_phase_map(config.plates, config.crystal.pump_wavelength)
    alphas = np.linspace(alpha_start, alpha_stop, steps)
    runner = EstimationWorkflowRunner()

    rows = []
    vacuum_runs = 0
    for i, alpha in enumerate(alphas):
        phase = float(phase_map(alpha))
        row = {"alpha_deg": float(alpha), "phase_rad": phase % TWO_PI}
        for offset, stokes_index in enumerate((2, 3)):
            point_seed = seed + 2 * i + offset
            counts = simulate_counts(config, phase, stokes_index, point_seed, threads, use_spectrum)
            records = simulate_detection(counts, config.detectors, point_seed, threads)
            estimate = runner.run(config, records=records, seed=point_seed, threads=threads)["estimate"]
            row[f"nrf_s{stokes_index}"] = estimate.nrf
            row[f"nrf_s{stokes_index}_err"] = estimate.std_error
            vacuum_runs += int(estimate.vacuum)
        logger.info(f"[SWEEP] alpha = {alpha:.2f} deg: S2 {row['nrf_s2']:.3f}, S3 {row['nrf_s3']:.3f}")
        rows.append(row)
    frame = pd.DataFrame(rows)

    eta = float(np.mean(config.efficiencies))
    weights = mixture_weights(config, use_spectrum)
    model_alphas = np.linspace(alpha_start, alpha_stop, MODEL_CURVE_POINTS)
    model = pd.DataFrame({"alpha_deg": model_alphas})
    for stokes_index in (2, 3):
        model[f"nrf_s{stokes_index}"] = [
            mixture_nrf(config.opa.gain, [(float(phase_map(a)) + o, w) for o, w in weights], eta, stokes_index)
            for a in model_alphas
        ]

    reporter = _reporter(config, out_dir)
    csv_path = reporter.save_csv(frame, "phase_sweep.csv")
    model_path = reporter.save_csv(model, "phase_sweep_model.csv")
    svg_path = reporter.save_svg(plot_phase_sweep(frame, model), "phase_sweep.svg")
    return {
        "points": steps,
        "nrf_s2_min": float(frame["nrf_s2"].min()),
        "nrf_s2_max": float(frame["nrf_s2"].max()),
        "nrf_s3_min": float(frame["nrf_s3"].min()),
        "nrf_s3_max": float(frame["nrf_s3"].max()),
        "vacuum_runs": vacuum_runs,
        "csv": str(csv_path),
        "model_csv": str(model_path),
        "svg": str(svg_path),
    }


def cmd_sweep_power(
    config: RunConfig,
    power_stop: float = 120.0,
    steps: int = 13,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out_dir: Optional[str | Path] = None,
    sampled: bool = False
) -> dict:
    """
    Photons per pulse at one crystal output against pump power, N = m sinh²(Γ(P)),
    followed by a gain-curve fit.

    Args:
        config: Run configuration; opa.gain_coefficient is required
        power_stop: Largest pump power, mW; the sweep starts at 0
        steps: Number of powers
        sampled: Add a column of sampled means (negative binomial, n_pulses each)

    Returns:
        Result block with the fitted κ and m and the largest gain
    """
    opa = config.opa
    if opa.gain_coefficient is None:
        raise ConfigError("sweep-power needs opa.gain_coefficient", ["opa.gain_coefficient"])
    if steps < 4:
        raise ConfigError("sweep-power needs at least 4 steps", ["steps"])
    if not power_stop > 0:
        raise ConfigError(f"sweep-power needs a positive largest power, got {power_stop}", ["power_stop"])
    seed = _seed(config, seed)
    powers = np.linspace(0.0, power_stop, steps)
    gains = [gain_from_power(opa.gain_coefficient, p, opa.pump_split) for p in powers]
    frame = pd.DataFrame({
        "power_mw": powers,
        "gain": gains,
        "mean_photons": [opa_output_mean(g, opa.mode_count) for g in gains],
    })
    if sampled:
        frame["sampled_photons"] = [
            float(sample_total_photons(g, opa.mode_count, config.run.n_pulses, seed, threads, substream=i).mean())
            for i, g in enumerate(gains)
        ]

    fit = fit_gain_curve(frame[["power_mw", "mean_photons"]].to_numpy())
    curve_powers = np.linspace(0.0, power_stop, MODEL_CURVE_POINTS)
    fitted = pd.DataFrame({
        "power_mw": curve_powers,
        "mean_photons": gain_curve(curve_powers, fit.parameters),
    })

    reporter = _reporter(config, out_dir)
    csv_path = reporter.save_csv(frame, "power_sweep.csv")
    svg_path = reporter.save_svg(plot_power_sweep(frame, fitted), "power_sweep.svg")
    result = {"points": steps, "mean_photons_max": float(frame["mean_photons"].iloc[-1])}
    result.update(fit.to_report(settings.fit.degeneracy_correlation))
    result.update({"csv": str(csv_path), "svg": str(svg_path)})
    return result


def cmd_spectral_fraction(
    config: RunConfig,
    alignment: Optional[Alignment | str] = None,
    out_dir: Optional[str | Path] = None
) -> dict:
    """
    Squeezed fraction of the crystal cascade and the NRF floor 1 - ηf.

    Args:
        config: Run configuration
        alignment: Overrides the configured alignment; the cut angle is then re-solved

    Returns:
        Result block with f, the phase correction and the NRF floor
    """
    crystal = config.crystal
    if alignment is not None:
        crystal = crystal.model_copy(update={"alignment": Alignment(alignment), "cut_angle": None})
    summary = spectral_summary(crystal)
    frame = profile_frame(spectral_profile(crystal))

    reporter = _reporter(config, out_dir)
    name = f"spectrum_{summary.alignment.value}"
    csv_path = reporter.save_csv(frame, f"{name}.csv")
    svg_path = reporter.save_svg(plot_spectrum(frame), f"{name}.svg")

    eta = float(np.mean(config.efficiencies))
    result = summary.to_report()
    result["efficiency"] = eta
    result["nrf_floor"] = 1.0 - eta * summary.squeezed_fraction
    result.update({"csv": str(csv_path), "svg": str(svg_path)})
    return result


def read_points(path: str | Path) -> np.ndarray:
    """
    Fit input CSV with header `x,y` or `x,y,weight`.

    Raises:
        InputDataError: missing file, bad header or non-numeric rows
    """
    path = Path(path)
    if not path.exists():
        raise InputDataError(f"points file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise InputDataError(f"cannot parse {path}: {e}") from e
    columns = [c.strip() for c in frame.columns]
    if columns not in (["x", "y"], ["x", "y", "weight"]):
        raise InputDataError(f"expected header x,y[,weight], got {','.join(columns)}", [1])
    if frame.empty:
        raise InputDataError(f"no data rows in {path}")
    values = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors="coerce"))
    bad = values.isna().any(axis=1)
    if bad.any():
        lines = [int(i) + 2 for i in frame.index[bad]]
        raise InputDataError(f"non-numeric values on lines {lines[:10]}", lines)
    return values.to_numpy(dtype=float)


def cmd_fit(
    points_path: str | Path,
    model: str,
    config: RunConfig,
    stokes_index: Optional[int] = None,
    out_dir: Optional[str | Path] = None
) -> dict:
    """
    Fit a points CSV with the gain-curve or the NRF-curve model.

    Args:
        points_path: CSV of (x, y[, weight])
        model: "gain" for N(P) or "nrf" for NRF(α)
        config: Supplies the quartz plates for the NRF model
        stokes_index: Branch of the NRF model; defaults to run.stokes_index

    Returns:
        The fit's key=value result block
    """
    points = read_points(points_path)
    if model == "gain":
        fit = fit_gain_curve(points)
    elif model == "nrf":
        index = config.run.stokes_index if stokes_index is None else stokes_index
        phase_map = tilt_phase_map(config.plates, config.crystal.pump_wavelength)
        fit = fit_nrf_curve(points, phase_map, index)
    else:
        raise ConfigError(f"unknown fit model {model!r}; use gain or nrf", ["model"])

    result = fit.to_report(settings.fit.degeneracy_correlation)
    path = _reporter(config, out_dir).save_key_values(result, f"fit_{model}.txt")
    result["result_file"] = str(path)
    return result
