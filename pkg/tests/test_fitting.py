"""
Test Fitting - Damped least squares, the gain curve and the NRF interference curve.
"""

import math
import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import FitSettings, settings
from squeezelab.exceptions import ConvergenceError, DomainError
from squeezelab.fitting import (
    GAIN_CURVE,
    fit_gain_curve,
    fit_nrf_curve,
    gain_curve,
    numerical_jacobian,
    solve_least_squares,
)
from squeezelab.fitting.curves import LINEAR, ROSENBROCK, gain_curve_jacobian, nrf_curve_model
from squeezelab.models.fitting import CurveModel, FitProblem
from squeezelab.models.spectral import QuartzPlatePair
from squeezelab.spectral.spectral_model import tilt_phase_map


POWERS = np.linspace(10.0, 120.0, 12)
TILTS = np.linspace(-30.0, 30.0, 61)


def gain_points(kappa, m, noise, seed=1):
    """(P, N, weight) rows with relative Gaussian noise and 1/σ² weights."""
    rng = np.random.default_rng(seed)
    photons = gain_curve(POWERS, np.array([kappa, m]))
    noisy = photons * (1.0 + noise * rng.standard_normal(len(POWERS)))
    sigma = max(noise, 1e-3) * noisy
    return np.column_stack([POWERS, noisy, 1.0 / sigma ** 2])


def wrapped(angle):
    return math.remainder(angle, 2.0 * math.pi)


@pytest.fixture(scope="module")
def phase_map():
    """Pump phase versus tilt of the default quartz plates."""
    return tilt_phase_map(QuartzPlatePair())


@pytest.fixture(scope="module")
def tight_points():
    """Tight-focus gain data: κ = 0.31, m = 120, 5% noise."""
    return gain_points(0.31, 120.0, 0.05)


class TestLeastSquares:
    """Test the damped Gauss-Newton solver on known problems."""

    def test_linear_exact(self):
        """A noiseless line is recovered to machine precision."""
        x = np.arange(1.0, 7.0)
        problem = FitProblem.from_points(
            [(xi, 2.5 * xi, 1.0) for xi in x], LINEAR, bounds=[(-np.inf, np.inf)], initial_guess=[0.0]
        )
        result = solve_least_squares(problem)
        assert result.converged
        assert result.parameter("a") == pytest.approx(2.5, abs=1e-12)

    def test_rosenbrock(self):
        """The banana valley is crossed from (-1.2, 1) to (1, 1)."""
        problem = FitProblem.from_points(
            [(0.0, 0.0, 1.0), (0.0, 0.0, 1.0), (1.0, 1.0, 1.0), (1.0, 1.0, 1.0)],
            ROSENBROCK,
            bounds=[(-np.inf, np.inf), (-np.inf, np.inf)],
            initial_guess=[-1.2, 1.0],
        )
        result = solve_least_squares(problem)
        assert result.converged
        assert result.parameters == pytest.approx([1.0, 1.0], abs=1e-6)

    def test_cost_is_monotone(self, tight_points):
        """Accepted iterations never raise the weighted cost."""
        result = fit_gain_curve(tight_points)
        costs = [entry["cost"] for entry in result.trace]
        assert all(later <= earlier for earlier, later in zip(costs, costs[1:]))

    def test_iteration_budget(self):
        """Running out of iterations is reported, not hidden."""
        problem = FitProblem.from_points(
            [(0.0, 0.0, 1.0), (0.0, 0.0, 1.0), (1.0, 1.0, 1.0), (1.0, 1.0, 1.0)],
            ROSENBROCK,
            bounds=[(-np.inf, np.inf), (-np.inf, np.inf)],
            initial_guess=[-1.2, 1.0],
        )
        result = solve_least_squares(problem, FitSettings(max_iterations=1))
        assert not result.converged
        assert result.iterations == 1
        assert result.termination == "max_iterations"

    def test_uphill_jacobian_stalls(self):
        """A stall away from a stationary point is not reported as convergence."""
        uphill = CurveModel(
            name="uphill",
            parameter_names=("a",),
            function=lambda x, p: p[0] * x,
            jacobian=lambda x, p: -x[:, None],
        )
        problem = FitProblem.from_points(
            [(float(x), 2.5 * x, 1.0) for x in range(1, 7)], uphill, bounds=[(-np.inf, np.inf)], initial_guess=[0.0]
        )
        result = solve_least_squares(problem)
        assert not result.converged
        assert result.termination == "stalled"
        assert result.parameter("a") == 0.0

    def test_bound_optimum_converges(self):
        """A minimum on a bound converges with the blocked gradient component removed."""
        problem = FitProblem.from_points(
            [(float(x), 2.5 * x, 1.0) for x in range(1, 7)], LINEAR, bounds=[(0.0, 1.0)], initial_guess=[0.5]
        )
        result = solve_least_squares(problem)
        assert result.converged
        assert result.termination in ("gradient", "stationary")
        assert result.parameter("a") == 1.0
        assert result.to_report()["termination"] == result.termination

    def test_noisy_fit_termination(self, tight_points):
        """A noisy fit ends on a small step or at a stationary point."""
        result = fit_gain_curve(tight_points)
        assert result.termination in ("gradient", "step", "stationary")

    def test_numerical_jacobian(self):
        """Forward differences match the analytic gain-curve Jacobian."""
        params = np.array([0.31, 120.0])
        numeric = numerical_jacobian(GAIN_CURVE, POWERS, params)
        assert numeric == pytest.approx(gain_curve_jacobian(POWERS, params), rel=1e-5)

    def test_guess_outside_bounds(self):
        """Problems start inside their bounds."""
        with pytest.raises(ValueError):
            FitProblem.from_points(
                [(float(i), float(i), 1.0) for i in range(4)], LINEAR, bounds=[(0.0, 1.0)], initial_guess=[2.0]
            )

    def test_too_few_points(self):
        """Two parameters need at least four points."""
        with pytest.raises(ValueError):
            FitProblem.from_points(
                [(0.0, 0.0, 1.0)] * 3, ROSENBROCK, bounds=[(-1.0, 1.0)] * 2, initial_guess=[0.0, 0.0]
            )


class TestGainCurve:
    """Test N(P) = m sinh²(κ√P) fits."""

    def test_tight_focus_recovery(self, tight_points):
        """κ and Γ_max within 10%, m within 30%."""
        result = fit_gain_curve(tight_points)
        assert result.parameter("kappa") == pytest.approx(0.31, rel=0.1)
        assert result.parameter("m") == pytest.approx(120.0, rel=0.3)
        assert result.derived["gamma_max"] == pytest.approx(0.31 * math.sqrt(120.0), rel=0.1)
        assert not result.is_degenerate()

    def test_noiseless_recovery(self):
        """Exact data gives the exact parameters."""
        result = fit_gain_curve(gain_points(0.31, 120.0, 0.0))
        assert result.parameter("kappa") == pytest.approx(0.31, rel=1e-6)
        assert result.parameter("m") == pytest.approx(120.0, rel=1e-6)

    def test_soft_focus_is_degenerate(self):
        """At low gain κ and m trade off almost perfectly."""
        result = fit_gain_curve(gain_points(0.073, 1925.0, 0.01))
        assert result.max_correlation > 0.99
        assert result.is_degenerate(settings.fit.degeneracy_correlation)
        assert result.to_report()["degenerate"] is True

    def test_power_units(self, tight_points):
        """Powers in W instead of mW scale κ by √1000 and leave m alone."""
        in_watts = tight_points.copy()
        in_watts[:, 0] /= 1000.0
        milliwatt = fit_gain_curve(tight_points)
        watt = fit_gain_curve(in_watts)
        assert watt.parameter("kappa") == pytest.approx(milliwatt.parameter("kappa") * math.sqrt(1000.0), rel=1e-4)
        assert watt.parameter("m") == pytest.approx(milliwatt.parameter("m"), rel=1e-4)

    def test_negative_power_rejected(self, tight_points):
        """Pump powers are non-negative."""
        bad = tight_points.copy()
        bad[0, 0] = -1.0
        with pytest.raises(DomainError):
            fit_gain_curve(bad)

    def test_needs_four_points(self, tight_points):
        """Fewer than four points cannot fit two parameters."""
        with pytest.raises(DomainError):
            fit_gain_curve(tight_points[:3])

    def test_iteration_budget_raises(self, tight_points, monkeypatch):
        """An exhausted budget surfaces as ConvergenceError with the trace."""
        monkeypatch.setattr(settings.fit, "max_iterations", 1)
        with pytest.raises(ConvergenceError) as info:
            fit_gain_curve(tight_points)
        assert len(info.value.trace) == 2


class TestNrfCurve:
    """Test the NRF-versus-tilt interference fit."""

    def nrf_points(self, phase_map, stokes_index, eta=0.45, phi0=0.3, noise=0.0, seed=2):
        sign = 1.0 if stokes_index == 2 else -1.0
        values = 1.0 + sign * eta * np.cos(phase_map(TILTS) + phi0)
        if noise:
            values = values + noise * np.random.default_rng(seed).standard_normal(len(TILTS))
        return np.column_stack([TILTS, values])

    def test_noisy_recovery(self, phase_map):
        """η = 0.45 is recovered within 0.03 from 2% noise."""
        result = fit_nrf_curve(self.nrf_points(phase_map, 2, noise=0.02), phase_map, 2)
        assert result.parameter("eta") == pytest.approx(0.45, abs=0.03)
        assert abs(wrapped(result.parameter("phi0") - 0.3)) < 0.1
        assert result.derived["nrf_min"] == pytest.approx(1.0 - result.parameter("eta"))

    def test_s2_and_s3_agree(self, phase_map):
        """Anti-phased S2 and S3 curves give the same η and φ₀."""
        s2 = fit_nrf_curve(self.nrf_points(phase_map, 2), phase_map, 2)
        s3 = fit_nrf_curve(self.nrf_points(phase_map, 3), phase_map, 3)
        assert s2.parameter("eta") == pytest.approx(s3.parameter("eta"), abs=1e-6)
        assert abs(wrapped(s2.parameter("phi0") - s3.parameter("phi0"))) < 1e-6

    def test_wrong_branch_shifts_phase(self, phase_map):
        """S3 data fitted with the S2 sign moves φ₀ by π."""
        result = fit_nrf_curve(self.nrf_points(phase_map, 3), phase_map, 2)
        assert result.parameter("eta") == pytest.approx(0.45, abs=1e-6)
        assert abs(wrapped(result.parameter("phi0") - 0.3 - math.pi)) < 1e-6

    def test_phase_wrapped(self, phase_map):
        """φ₀ is reported in (-π, π]."""
        result = fit_nrf_curve(self.nrf_points(phase_map, 2, phi0=3.0), phase_map, 2)
        assert -math.pi < result.parameter("phi0") <= math.pi

    def test_flat_data_has_no_phase(self, phase_map):
        """Shot-noise-flat data gives η = 0 and leaves φ₀ undetermined."""
        points = np.column_stack([TILTS, np.ones_like(TILTS)])
        result = fit_nrf_curve(points, phase_map, 2)
        assert result.parameter("eta") == pytest.approx(0.0, abs=1e-12)
        assert result.unidentifiable == ["phi0"]
        assert result.is_degenerate()

    def test_s1_has_no_curve(self, phase_map):
        """S1 does not depend on the pump phase."""
        with pytest.raises(DomainError):
            nrf_curve_model(phase_map, 1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
