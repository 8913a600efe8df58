"""Fitting module: damped least squares and the experiment curve fits."""

from .least_squares import numerical_jacobian, solve_least_squares
from .curves import (
    GAIN_CURVE,
    MODELS,
    fit_gain_curve,
    fit_nrf_curve,
    gain_curve,
    nrf_curve_model,
)

__all__ = [
    "numerical_jacobian", "solve_least_squares",
    "GAIN_CURVE", "MODELS", "fit_gain_curve", "fit_nrf_curve", "gain_curve", "nrf_curve_model",
]
