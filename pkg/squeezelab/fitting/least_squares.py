"""
Damped Gauss-Newton (Levenberg-Marquardt) weighted least squares.

Only steps that lower the weighted residual are accepted, so the cost is
monotone over accepted iterations. Bounds are enforced by clipping.
"""

from typing import Optional

import numpy as np
from loguru import logger

from config.settings import FitSettings, settings
from squeezelab.models.fitting import CurveModel, FitProblem, FitResult

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))
# singular values below this fraction of the largest span the unidentified directions
_NULL_SPACE_RTOL = 1e-12
_EPS = float(np.finfo(float).eps)
# a stalled fit is stationary when the Gauss-Newton decrease left is below
# this many ulps of the cost, or of the fitted values for an exact fit
_STATIONARY_ULPS = 1e4


def numerical_jacobian(
    model: CurveModel,
    x: np.ndarray,
    params: np.ndarray,
    upper_bounds: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Forward-difference Jacobian d f / d p, shape (len(x), n_params).

    Step h_j = sqrt(eps)·max(|p_j|, 1); a backward step is used where the
    forward one would cross the upper bound.
    """
    base = np.asarray(model.function(x, params), dtype=float)
    jac = np.empty((len(base), len(params)))
    for j, value in enumerate(params):
        step = _SQRT_EPS * max(abs(value), 1.0)
        if upper_bounds is not None and value + step > upper_bounds[j]:
            step = -step
        shifted = params.copy()
        shifted[j] = value + step
        # the representable step, not the nominal one
        actual = shifted[j] - value
        jac[:, j] = (np.asarray(model.function(x, shifted), dtype=float) - base) / actual
    return jac


def _jacobian(problem: FitProblem, params: np.ndarray) -> np.ndarray:
    if problem.model.jacobian is not None:
        return np.asarray(problem.model.jacobian(problem.x, params), dtype=float)
    return numerical_jacobian(problem.model, problem.x, params, problem.upper_bounds)


def _blocked(gradient: np.ndarray, params: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Parameters at a bound whose descent direction JᵀWr points through it."""
    return ((params <= lower) & (gradient < 0)) | ((params >= upper) & (gradient > 0))


def _stationary(jac: np.ndarray, r: np.ndarray, fitted_values: np.ndarray, blocked: np.ndarray) -> bool:
    """
    Whether the cost cannot be lowered within float precision.

    The Gauss-Newton decrease over the free parameters is |P r|², P the
    projection onto their Jacobian columns. It must not exceed the rounding
    level of the cost, or the residual must itself be rounding noise.
    """
    free = ~blocked
    if not free.any():
        return True
    columns = jac[:, free]
    predicted = float(np.linalg.norm(columns @ np.linalg.lstsq(columns, r, rcond=None)[0]))
    cost_floor = np.sqrt(_STATIONARY_ULPS * _EPS) * float(np.linalg.norm(r))
    exact_floor = _STATIONARY_ULPS * _EPS * float(np.linalg.norm(fitted_values))
    return predicted <= max(cost_floor, exact_floor)


def _covariance(normal: np.ndarray, scale: float) -> np.ndarray:
    """Pseudo-inverse of JᵀWJ times the residual variance; unconstrained parameters get inf."""
    _, s, vt = np.linalg.svd(normal)
    keep = s > _NULL_SPACE_RTOL * (s[0] if s.size and s[0] > 0 else 1.0)
    inverse = (vt[keep].T / s[keep]) @ vt[keep]
    cov = inverse * scale
    if not np.all(keep):
        free = np.any(np.abs(vt[~keep]) > 1e-6, axis=0)
        for j in np.flatnonzero(free):
            cov[j, :] = 0.0
            cov[:, j] = 0.0
            cov[j, j] = np.inf
    return cov


def solve_least_squares(problem: FitProblem, fit_settings: Optional[FitSettings] = None) -> FitResult:
    """
    Minimise Σ w (y - f(x; p))² from the problem's initial guess.

    Convergence: projected gradient norm below tolerance, or relative accepted
    step below tolerance. When damping is driven past its maximum without a
    cost decrease the fit has stalled; it counts as converged only if the
    Gauss-Newton decrease left is at the rounding level of the cost. Other
    stalls and an exhausted iteration budget return converged=False.
    FitResult.termination records which case ended the run.

    Args:
        problem: Data, model, bounds and initial guess
        fit_settings: Tolerances and damping schedule; defaults to settings.fit

    Returns:
        FitResult with covariance scaled by the reduced chi-square
    """
    cfg = fit_settings or settings.fit
    sqrt_w = np.sqrt(problem.weights)
    lower, upper = problem.lower_bounds, problem.upper_bounds

    def residuals(params: np.ndarray) -> np.ndarray:
        return sqrt_w * (problem.y - np.asarray(problem.model.function(problem.x, params), dtype=float))

    params = np.clip(np.array(problem.initial_guess, dtype=float), lower, upper)
    r = residuals(params)
    cost = float(r @ r)
    damping = cfg.initial_damping
    trace: list[dict] = [{"iteration": 0, "cost": cost, "damping": damping, "parameters": params.tolist()}]
    converged = False
    termination = "max_iterations"
    iteration = 0
    gradient_norm = float("inf")

    while iteration < cfg.max_iterations:
        jac = sqrt_w[:, None] * _jacobian(problem, params)
        gradient = jac.T @ r
        blocked = _blocked(gradient, params, lower, upper)
        gradient_norm = float(np.linalg.norm(np.where(blocked, 0.0, gradient)))
        if gradient_norm < cfg.gradient_tolerance:
            converged, termination = True, "gradient"
            break

        iteration += 1
        normal = jac.T @ jac
        diagonal = np.diag(normal).copy()
        floor = diagonal.max() * 1e-12 if diagonal.max() > 0 else 1.0
        diagonal = np.maximum(diagonal, floor)

        accepted = False
        while damping <= cfg.max_damping:
            try:
                delta = np.linalg.solve(normal + damping * np.diag(diagonal), gradient)
            except np.linalg.LinAlgError:
                damping *= cfg.damping_up
                continue
            candidate = np.clip(params + delta, lower, upper)
            r_candidate = residuals(candidate)
            cost_candidate = float(r_candidate @ r_candidate)
            if np.isfinite(cost_candidate) and cost_candidate < cost:
                step = candidate - params
                params, r, cost = candidate, r_candidate, cost_candidate
                damping /= cfg.damping_down
                accepted = True
                break
            damping *= cfg.damping_up

        trace.append({"iteration": iteration, "cost": cost, "damping": damping, "parameters": params.tolist()})
        if not accepted:
            fitted_values = sqrt_w * np.asarray(problem.model.function(problem.x, params), dtype=float)
            converged = _stationary(jac, r, fitted_values, blocked)
            termination = "stationary" if converged else "stalled"
            break
        if np.linalg.norm(step) <= cfg.step_tolerance * (np.linalg.norm(params) + cfg.step_tolerance):
            converged, termination = True, "step"
            break

    jac = sqrt_w[:, None] * _jacobian(problem, params)
    n_points, n_params = len(problem.x), len(params)
    reduced_chi2 = cost / (n_points - n_params)
    covariance = _covariance(jac.T @ jac, reduced_chi2)

    if converged:
        logger.debug(f"[FIT] {problem.model.name}: converged in {iteration} iterations, cost {cost:.6g}")
    else:
        logger.warning(f"[FIT] {problem.model.name}: no convergence after {iteration} iterations ({termination})")

    return FitResult(
        model_name=problem.model.name,
        parameter_names=problem.model.parameter_names,
        parameters=params,
        covariance=covariance,
        residual_norm=float(np.sqrt(cost)),
        gradient_norm=gradient_norm if np.isfinite(gradient_norm) else 0.0,
        converged=converged,
        termination=termination,
        iterations=iteration,
        n_points=n_points,
        trace=trace,
    )
