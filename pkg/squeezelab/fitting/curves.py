"""
Curve models and the two experiment fits: the gain curve N(P) = m sinh²(κ√P)
and the NRF-versus-tilt interference curve 1 ± η cos(φ(α) + φ₀).
"""

import math
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger

from squeezelab.exceptions import ConvergenceError, DomainError
from squeezelab.fitting.least_squares import solve_least_squares
from squeezelab.models.fitting import CurveModel, FitProblem, FitResult

# alternating anchor sweeps used to refine the gain-curve starting point
_GAIN_GUESS_SWEEPS = 50


def _linear(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return p[0] * x


def _linear_jacobian(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return x[:, None].astype(float)


LINEAR = CurveModel(name="linear", parameter_names=("a",), function=_linear, jacobian=_linear_jacobian)


def _rosenbrock(t: np.ndarray, p: np.ndarray) -> np.ndarray:
    # residual pair 10(p1 - p0²) and 1 - p0, written as a two-branch curve
    return np.where(t < 0.5, 10.0 * (p[1] - p[0] ** 2), p[0])


ROSENBROCK = CurveModel(name="rosenbrock", parameter_names=("p0", "p1"), function=_rosenbrock)


def gain_curve(power: np.ndarray, p: np.ndarray) -> np.ndarray:
    """N = m sinh²(κ√P)."""
    kappa, m = p
    return m * np.sinh(kappa * np.sqrt(power)) ** 2


def gain_curve_jacobian(power: np.ndarray, p: np.ndarray) -> np.ndarray:
    kappa, m = p
    root = np.sqrt(power)
    return np.column_stack([m * np.sinh(2.0 * kappa * root) * root, np.sinh(kappa * root) ** 2])


GAIN_CURVE = CurveModel(
    name="gain_curve",
    parameter_names=("kappa", "m"),
    function=gain_curve,
    jacobian=gain_curve_jacobian,
)


def nrf_curve_model(phase_map: Callable, stokes_index: int) -> CurveModel:
    """
    NRF(α) = 1 + s·η cos(φ(α) + φ₀) with s = +1 for S2 and -1 for S3.

    Args:
        phase_map: Pump phase as a function of plate tilt in degrees
        stokes_index: 2 or 3; S1 does not depend on the pump phase
    """
    if stokes_index not in (2, 3):
        raise DomainError(f"NRF curves exist for S2 and S3 only, got S{stokes_index}")
    sign = 1.0 if stokes_index == 2 else -1.0

    def function(alpha: np.ndarray, p: np.ndarray) -> np.ndarray:
        eta, phi0 = p
        return 1.0 + sign * eta * np.cos(phase_map(alpha) + phi0)

    def jacobian(alpha: np.ndarray, p: np.ndarray) -> np.ndarray:
        eta, phi0 = p
        argument = phase_map(alpha) + phi0
        return np.column_stack([sign * np.cos(argument), -sign * eta * np.sin(argument)])

    return CurveModel(
        name=f"nrf_curve_s{stokes_index}",
        parameter_names=("eta", "phi0"),
        function=function,
        jacobian=jacobian,
    )


def _as_points(points: Sequence, min_points: int, weights: Optional[Sequence[float]]) -> np.ndarray:
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[1] not in (2, 3):
        raise DomainError("points must be (x, y) or (x, y, weight) rows")
    if len(data) < min_points:
        raise DomainError(f"need at least {min_points} points, got {len(data)}")
    if data.shape[1] == 2:
        w = np.ones(len(data)) if weights is None else np.asarray(weights, dtype=float)
        data = np.column_stack([data, w])
    return data


def _require_convergence(result: FitResult) -> FitResult:
    if not result.converged:
        raise ConvergenceError(
            f"{result.model_name} fit did not converge after {result.iterations} iterations",
            trace=result.trace,
        )
    return result


def gain_curve_guess(power: np.ndarray, photons: np.ndarray) -> tuple[float, float]:
    """
    Starting (κ, m): m from the largest point assuming Γ = 1 there, κ from
    the small-gain slope N ≈ mκ²P at the smallest power, then alternating
    refinements that pin κ to the largest point and m to the smallest.
    """
    positive = (power > 0) & (photons > 0)
    if np.count_nonzero(positive) < 2:
        raise DomainError("gain curve needs at least two points with P > 0 and N > 0")
    p, n = power[positive], photons[positive]
    low, high = np.argmin(p), np.argmax(p)

    m = float(n[high] / math.sinh(1.0) ** 2)
    kappa = math.sqrt(n[low] / (m * p[low]))
    for _ in range(_GAIN_GUESS_SWEEPS):
        kappa = math.asinh(math.sqrt(n[high] / m)) / math.sqrt(p[high])
        m = float(n[low] / math.sinh(kappa * math.sqrt(p[low])) ** 2)
    return kappa, m


def fit_gain_curve(points: Sequence, weights: Optional[Sequence[float]] = None) -> FitResult:
    """
    Fit N(P) = m sinh²(κ√P) to (P, N[, weight]) points.

    Args:
        points: Pump power in mW and photons per pulse, optionally with weights
        weights: Weights for (P, N) rows; unit weights when omitted

    Returns:
        FitResult over (kappa, m) with derived gamma_max = κ√P_max

    Raises:
        ConvergenceError: the optimizer exhausted its iteration budget
    """
    data = _as_points(points, 4, weights)
    if np.any(data[:, 0] < 0):
        raise DomainError("pump power must be >= 0")
    kappa0, m0 = gain_curve_guess(data[:, 0], data[:, 1])

    problem = FitProblem.from_points(
        [tuple(row) for row in data],
        GAIN_CURVE,
        bounds=[(0.0, np.inf), (0.0, np.inf)],
        initial_guess=[kappa0, m0],
    )
    result = _require_convergence(solve_least_squares(problem))
    kappa = result.parameter("kappa")
    p_max = float(data[:, 0].max())
    gamma_max = kappa * math.sqrt(p_max)
    result = result.model_copy(update={"derived": {"gamma_max": gamma_max, "power_max": p_max}})
    logger.info(
        f"[FIT] gain curve: kappa = {kappa:.4g}, m = {result.parameter('m'):.4g}, "
        f"gamma_max = {gamma_max:.3f}, max correlation {result.max_correlation:.4f}"
    )
    return result


def nrf_curve_guess(alpha: np.ndarray, nrf: np.ndarray, phase_map: Callable, stokes_index: int) -> tuple[float, float]:
    """η from half the peak-to-peak swing; φ₀ from the phase at the minimum."""
    eta = float(np.clip((nrf.max() - nrf.min()) / 2.0, 0.0, 1.0))
    phase_at_min = float(phase_map(alpha[np.argmin(nrf)]))
    # the minimum sits where the signed cosine is -1
    phi0 = (math.pi if stokes_index == 2 else 0.0) - phase_at_min
    return eta, math.remainder(phi0, 2.0 * math.pi)


def fit_nrf_curve(
    points: Sequence,
    phase_map: Callable,
    stokes_index: int,
    weights: Optional[Sequence[float]] = None
) -> FitResult:
    """
    Fit the interference curve NRF(α) = 1 ± η cos(φ(α) + φ₀).

    Args:
        points: Tilt in degrees and measured NRF, optionally with weights
        phase_map: Pump phase as a function of tilt (see tilt_phase_map)
        stokes_index: 2 ('+' branch) or 3 ('-' branch)
        weights: Weights for (α, NRF) rows

    Returns:
        FitResult over (eta, phi0); phi0 is reported wrapped to (-π, π]

    Raises:
        ConvergenceError: the optimizer exhausted its iteration budget
    """
    data = _as_points(points, 5, weights)
    model = nrf_curve_model(phase_map, stokes_index)
    eta0, phi0 = nrf_curve_guess(data[:, 0], data[:, 1], phase_map, stokes_index)

    problem = FitProblem.from_points(
        [tuple(row) for row in data],
        model,
        bounds=[(0.0, 1.0), (-np.inf, np.inf)],
        initial_guess=[eta0, phi0],
    )
    result = _require_convergence(solve_least_squares(problem))
    parameters = result.parameters.copy()
    parameters[1] = math.remainder(parameters[1], 2.0 * math.pi)
    result = result.model_copy(update={"parameters": parameters, "derived": {"nrf_min": 1.0 - parameters[0]}})
    logger.info(
        f"[FIT] NRF curve S{stokes_index}: eta = {parameters[0]:.4f}, phi0 = {parameters[1]:.4f}"
    )
    return result


MODELS: dict[str, CurveModel] = {model.name: model for model in (LINEAR, ROSENBROCK, GAIN_CURVE)}
