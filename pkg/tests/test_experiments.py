"""
Test Experiments - Run configuration, estimation workflow, experiment commands
and the command-line front end.
"""

import math
import numpy as np
import pandas as pd
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from scripts.run_experiment import as_squeezelab_error, main
from squeezelab.detection.detector_chain import shot_noise_counts, simulate_detection
from squeezelab.exceptions import CalibrationError, ConfigError, InputDataError
from squeezelab.experiments.commands import (
    cmd_estimate,
    cmd_simulate_run,
    cmd_spectral_fraction,
    cmd_sweep_phase,
    cmd_sweep_power,
    read_points,
    simulate_counts,
)
from squeezelab.fitting.curves import fit_nrf_curve, gain_curve
from squeezelab.graph.workflow import EstimationWorkflowRunner, run_estimation
from squeezelab.models.run_config import RunConfig
from squeezelab.physics.stokes_core import stokes_nrf
from squeezelab.spectral.spectral_model import tilt_phase_map


FIXTURES = Path(__file__).parent / "fixtures"
QUIET = {"noise_sigma": 0.0}


@pytest.fixture
def fixture_config():
    """The soft-focus run configuration from the fixtures directory."""
    return RunConfig.from_file(FIXTURES / "run_config.txt")


@pytest.fixture
def quick_config(fixture_config):
    """Short run with noiseless electronics."""
    return fixture_config.with_updates(detector1=QUIET, detector2=QUIET, run={"n_pulses": 2000})


@pytest.fixture
def quick_config_file(quick_config, tmp_path):
    """quick_config written to disk."""
    return quick_config.to_file(tmp_path / "quick.txt")


class TestRunConfig:
    """Test run-config parsing and validation."""

    def test_fixture_values(self, fixture_config):
        """Sections and derived gain come from the file."""
        assert fixture_config.opa.gain == pytest.approx(0.073 * math.sqrt(40.0))
        assert fixture_config.detector2.amplification == pytest.approx(0.01107)
        assert fixture_config.efficiencies == pytest.approx((0.45, 0.45))

    def test_text_round_trip(self, fixture_config):
        """to_text and from_text are inverse."""
        assert RunConfig.from_text(fixture_config.to_text()) == fixture_config

    def test_comments_and_blank_lines(self):
        """'#' comments and empty lines are skipped."""
        config = RunConfig.from_text("# header\n\nrun.n_pulses=5000  # short\n")
        assert config.run.n_pulses == 5000

    def test_unknown_key(self):
        """Unknown keys are reported by name."""
        with pytest.raises(ConfigError) as info:
            RunConfig.from_text("opa.colour=blue\nrun.n_pulses=10\n")
        assert info.value.fields == ["opa.colour"]

    def test_invalid_value(self):
        """Out-of-range values name their field."""
        with pytest.raises(ConfigError) as info:
            RunConfig.from_text("optics.transmission=1.5\n")
        assert "optics.transmission" in info.value.fields

    def test_missing_file(self, tmp_path):
        """A missing config file is a config error."""
        with pytest.raises(ConfigError):
            RunConfig.from_file(tmp_path / "absent.txt")

    def test_explicit_gain_drops_pump(self, fixture_config):
        """Setting the gain alone detaches it from the pump law."""
        config = fixture_config.with_updates(opa={"gain": 0.3})
        assert config.opa.gain == 0.3
        assert config.opa.gain_coefficient is None


class TestEstimationWorkflow:
    """Test the load -> balance -> calibrate -> estimate -> report graph."""

    def test_in_memory_records(self, quick_config):
        """A shot-noise source estimates to NRF 1."""
        counts = shot_noise_counts(1.0e4, 5000, 11)
        records = simulate_detection(counts, quick_config.detectors, 11)
        result = run_estimation(quick_config, records=records, seed=11)
        estimate = result["estimate"]
        assert abs(estimate.nrf - 1.0) < 4 * estimate.std_error
        assert result["report"]["records"] == "memory"
        assert result["calibration"].shot_noise_level > 0

    def test_typed_error_reraised(self, quick_config):
        """A failed stage surfaces its own exception type."""
        records = simulate_detection(np.full((10, 2), 100), quick_config.detectors, 1)
        with pytest.raises(CalibrationError):
            EstimationWorkflowRunner().run(quick_config, records=records, seed=1)

    def test_report_saved(self, quick_config, tmp_path):
        """With an output directory the report is written as estimate.txt."""
        counts = shot_noise_counts(1.0e4, 2000, 5)
        records = simulate_detection(counts, quick_config.detectors, 5)
        result = run_estimation(quick_config, records=records, seed=5, output_dir=str(tmp_path))
        assert Path(result["report_path"]) == tmp_path / "estimate.txt"
        assert "nrf=" in (tmp_path / "estimate.txt").read_text()


class TestSimulateRun:
    """Test virtual pulse runs."""

    def test_deterministic(self, quick_config, tmp_path):
        """Same seed, same bytes, whatever the thread count."""
        one = cmd_simulate_run(quick_config, seed=3, threads=1, out_dir=tmp_path / "a")
        four = cmd_simulate_run(quick_config, seed=3, threads=4, out_dir=tmp_path / "b")
        assert Path(one["records"]).read_bytes() == Path(four["records"]).read_bytes()

    def test_lossless_squeezed_counts_match(self, quick_config):
        """With η = 1 and φ = π every pulse has n1 = n2 in the S2 basis."""
        lossless = quick_config.with_updates(
            optics={"transmission": 1.0},
            detector1={"quantum_efficiency": 1.0},
            detector2={"quantum_efficiency": 1.0},
            run={"n_pulses": 1000},
        )
        counts = simulate_counts(lossless, math.pi, 2, seed=9)
        assert counts.sum() > 0
        assert np.array_equal(counts[:, 0], counts[:, 1])

    def test_simulate_then_estimate(self, quick_config, tmp_path):
        """Records written by a run estimate to the closed-form NRF."""
        run = cmd_simulate_run(quick_config, out_dir=tmp_path)
        report = cmd_estimate(run["records"], quick_config, out_dir=tmp_path)
        expected = stokes_nrf(quick_config.opa.gain, math.pi, 0.45, 2)
        assert report["nrf"] == pytest.approx(expected, abs=0.1)
        assert report["n_pulses"] == 2000


class TestSweeps:
    """Test the phase, power and spectral experiments."""

    def test_phase_sweep_anti_phased(self, quick_config, tmp_path):
        """S2 and S3 swing in opposite directions around the shot-noise level."""
        config = quick_config.with_updates(opa={"gain": 0.1, "mode_count": 2000}, run={"n_pulses": 1000})
        result = cmd_sweep_phase(config, -30.0, 30.0, 7, seed=4, out_dir=tmp_path)
        frame = pd.read_csv(result["csv"])
        assert list(frame.columns) == [
            "alpha_deg", "phase_rad", "nrf_s2", "nrf_s2_err", "nrf_s3", "nrf_s3_err"
        ]
        assert len(frame) == 7
        assert np.all(np.abs(frame["nrf_s2"] + frame["nrf_s3"] - 2.0) < 0.25)
        assert np.corrcoef(frame["nrf_s2"], frame["nrf_s3"])[0, 1] < 0
        assert Path(result["svg"]).exists()
        assert len(pd.read_csv(result["model_csv"])) == 241

    @pytest.mark.parametrize("noise_sigma", [0.0, 180.0])
    def test_phase_sweep_without_light(self, fixture_config, tmp_path, noise_sigma):
        """Zero transmission gives flat S2 and S3 curves at the shot-noise level."""
        quiet = {"noise_sigma": noise_sigma}
        config = fixture_config.with_updates(
            optics={"transmission": 0.0}, detector1=quiet, detector2=quiet, run={"n_pulses": 1000}
        )
        result = cmd_sweep_phase(config, -30.0, 30.0, 3, seed=1, out_dir=tmp_path)
        frame = pd.read_csv(result["csv"])
        assert np.all(frame["nrf_s2"] == 1.0)
        assert np.all(frame["nrf_s3"] == 1.0)
        assert result["vacuum_runs"] == 6
        model = pd.read_csv(result["model_csv"])
        assert np.allclose(model[["nrf_s2", "nrf_s3"]], 1.0)

    def test_phase_sweep_fit_recovers_efficiency(self, quick_config, tmp_path):
        """Fitting the simulated S2 sweep returns the configured η = 0.45."""
        config = quick_config.with_updates(opa={"gain": 0.1, "mode_count": 500})
        result = cmd_sweep_phase(config, -30.0, 30.0, 31, seed=6, out_dir=tmp_path)
        frame = pd.read_csv(result["csv"])
        phase_map = tilt_phase_map(config.plates, config.crystal.pump_wavelength)
        fit = fit_nrf_curve(frame[["alpha_deg", "nrf_s2"]].to_numpy(), phase_map, 2)
        assert fit.parameter("eta") == pytest.approx(0.45, abs=0.03)
        assert abs(math.remainder(fit.parameter("phi0"), 2.0 * math.pi)) < 0.2

    def test_power_sweep(self, fixture_config, tmp_path):
        """N starts at zero and the fit returns the effective κ of a split pump."""
        result = cmd_sweep_power(fixture_config, out_dir=tmp_path)
        frame = pd.read_csv(result["csv"])
        assert frame["mean_photons"].iloc[0] == 0.0
        assert frame["power_mw"].iloc[-1] == pytest.approx(120.0)
        assert result["kappa"] == pytest.approx(0.073 / math.sqrt(2.0), rel=1e-5)
        assert result["m"] == pytest.approx(1925.0, rel=1e-4)

    def test_power_sweep_needs_coefficient(self, fixture_config, tmp_path):
        """A fixed-gain config cannot be swept in power."""
        config = fixture_config.with_updates(opa={"gain": 0.3})
        with pytest.raises(ConfigError):
            cmd_sweep_power(config, out_dir=tmp_path)

    def test_spectral_fraction_single_crystal(self, fixture_config, tmp_path):
        """Without a second crystal f = 1 and the floor is 1 - η."""
        config = fixture_config.with_updates(crystal={"second_length": 0.0})
        result = cmd_spectral_fraction(config, out_dir=tmp_path)
        assert result["squeezed_fraction"] == pytest.approx(1.0)
        assert result["nrf_floor"] == pytest.approx(0.55)
        assert Path(result["csv"]).name == "spectrum_degenerate.csv"

    def test_read_points_line_numbers(self, tmp_path):
        """Bad fit rows are reported with their line numbers."""
        path = tmp_path / "points.csv"
        path.write_text("x,y\n1,2\n2,oops\n")
        with pytest.raises(InputDataError) as info:
            read_points(path)
        assert info.value.line_numbers == [3]


class TestCommandLine:
    """Test exit codes and stdout of the command-line front end."""

    def test_spectral_fraction(self, quick_config_file, tmp_path, capsys):
        """Success prints key=value lines and exits 0."""
        code = main(["spectral-fraction", "--config", str(quick_config_file), "--out-dir", str(tmp_path)])
        assert code == 0
        assert "squeezed_fraction=" in capsys.readouterr().out

    def test_simulate_and_estimate(self, quick_config_file, tmp_path, capsys):
        """simulate-run output feeds estimate."""
        assert main(["simulate-run", "--config", str(quick_config_file), "--out-dir", str(tmp_path)]) == 0
        records = tmp_path / "records.csv"
        assert records.exists()
        assert main(["estimate", str(records), "--config", str(quick_config_file), "--out-dir", str(tmp_path)]) == 0
        assert "nrf=" in capsys.readouterr().out
        assert (tmp_path / "estimate.txt").exists()

    def test_fit_gain(self, quick_config_file, tmp_path, capsys):
        """fit --model gain reads a points file."""
        powers = np.linspace(10.0, 120.0, 12)
        frame = pd.DataFrame({"x": powers, "y": gain_curve(powers, np.array([0.31, 120.0]))})
        points = tmp_path / "gain.csv"
        frame.to_csv(points, index=False)
        code = main(["fit", str(points), "--model", "gain", "--config", str(quick_config_file), "--out-dir", str(tmp_path)])
        assert code == 0
        assert "kappa=" in capsys.readouterr().out
        assert (tmp_path / "fit_gain.txt").exists()

    def test_config_error_exit(self, tmp_path):
        """Unknown config keys exit with 2."""
        path = tmp_path / "bad.txt"
        path.write_text("opa.colour=blue\n")
        assert main(["spectral-fraction", "--config", str(path), "--out-dir", str(tmp_path)]) == 2

    def test_input_error_exit(self, quick_config_file, tmp_path):
        """A records file without rows exits with 3."""
        path = tmp_path / "empty.csv"
        path.write_text("pulse_id,s1_nvs,s2_nvs\n")
        assert main(["estimate", str(path), "--config", str(quick_config_file), "--out-dir", str(tmp_path)]) == 3

    def test_calibration_error_exit(self, quick_config_file, tmp_path):
        """Too few pulses to balance exits with 4."""
        path = tmp_path / "short.csv"
        path.write_text("pulse_id,s1_nvs,s2_nvs\n" + "".join(f"{i},1.0,1.1\n" for i in range(10)))
        assert main(["estimate", str(path), "--config", str(quick_config_file), "--out-dir", str(tmp_path)]) == 4

    def test_negative_power_exit(self, quick_config_file, tmp_path):
        """A negative largest pump power is a configuration error."""
        args = ["sweep-power", "--power-stop", "-10", "--config", str(quick_config_file), "--out-dir", str(tmp_path)]
        assert main(args) == 2

    def test_invalid_points_exit(self, quick_config_file, tmp_path):
        """A points file the fit model rejects exits with 3, not a traceback."""
        tilts = np.linspace(-30.0, 30.0, 11)
        weights = np.ones_like(tilts)
        weights[4] = -1.0
        points = tmp_path / "nrf.csv"
        pd.DataFrame({"x": tilts, "y": np.ones_like(tilts), "weight": weights}).to_csv(points, index=False)
        args = ["fit", str(points), "--model", "nrf", "--config", str(quick_config_file), "--out-dir", str(tmp_path)]
        assert main(args) == 3

    def test_escaped_value_errors_are_mapped(self):
        """Validation errors map to the input-data code for file commands, else to the config code."""
        assert isinstance(as_squeezelab_error("fit", ValueError("bad")), InputDataError)
        assert isinstance(as_squeezelab_error("sweep-power", ValueError("bad")), ConfigError)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
