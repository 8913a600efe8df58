"""
Curve-fitting data models.
"""

from typing import Callable, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# f(x, params) -> y; jacobian(x, params) -> (len(x), len(params))
ModelFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


class CurveModel(BaseModel):
    """A named parametric model y = f(x; p)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    parameter_names: tuple[str, ...]
    function: ModelFunction
    jacobian: Optional[ModelFunction] = None

    @property
    def n_parameters(self) -> int:
        return len(self.parameter_names)


class FitProblem(BaseModel):
    """Weighted least-squares problem over (x, y, weight) points."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    model: CurveModel
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    initial_guess: np.ndarray

    @field_validator("x", "y", "weights", "lower_bounds", "upper_bounds", "initial_guess", mode="before")
    @classmethod
    def _as_array(cls, value) -> np.ndarray:
        value = np.array(value, dtype=float)
        value.setflags(write=False)
        return value

    @model_validator(mode="after")
    def _check(self):
        n_params = self.model.n_parameters
        if not (len(self.x) == len(self.y) == len(self.weights)):
            raise ValueError("x, y and weights must have equal length")
        if len(self.x) < n_params + 2:
            raise ValueError(f"need at least {n_params + 2} points for {n_params} parameters, got {len(self.x)}")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite and non-negative")
        for name in ("lower_bounds", "upper_bounds", "initial_guess"):
            if len(getattr(self, name)) != n_params:
                raise ValueError(f"{name} must have {n_params} entries")
        if np.any(self.initial_guess < self.lower_bounds) or np.any(self.initial_guess > self.upper_bounds):
            raise ValueError("initial guess must lie inside the bounds")
        return self

    @classmethod
    def from_points(
        cls,
        points: list[tuple[float, float, float]],
        model: CurveModel,
        bounds: list[tuple[float, float]],
        initial_guess: list[float]
    ) -> "FitProblem":
        data = np.asarray(points, dtype=float).reshape(-1, 3)
        bounds_array = np.asarray(bounds, dtype=float).reshape(-1, 2)
        return cls(
            x=data[:, 0],
            y=data[:, 1],
            weights=data[:, 2],
            model=model,
            lower_bounds=bounds_array[:, 0],
            upper_bounds=bounds_array[:, 1],
            initial_guess=initial_guess,
        )


class FitResult(BaseModel):
    """Result of a damped Gauss-Newton fit."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model_name: str
    parameter_names: tuple[str, ...]
    parameters: np.ndarray
    covariance: np.ndarray
    residual_norm: float = Field(..., ge=0.0)
    gradient_norm: float = Field(..., ge=0.0)
    converged: bool
    # gradient, step, stationary, stalled or max_iterations
    termination: str = "max_iterations"
    iterations: int = Field(..., ge=0)
    n_points: int = Field(..., ge=0)
    trace: list[dict] = Field(default_factory=list)
    derived: dict[str, float] = Field(default_factory=dict)

    @property
    def uncertainties(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def correlation(self) -> np.ndarray:
        sigma = self.uncertainties
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = self.covariance / np.outer(sigma, sigma)
        corr = np.where(np.isfinite(corr), corr, 0.0)
        np.fill_diagonal(corr, 1.0)
        return corr

    @property
    def max_correlation(self) -> float:
        corr = self.correlation
        if corr.shape[0] < 2:
            return 0.0
        off_diagonal = corr[~np.eye(corr.shape[0], dtype=bool)]
        return float(np.max(np.abs(off_diagonal)))

    @property
    def unidentifiable(self) -> list[str]:
        """Parameters the data does not constrain (infinite variance)."""
        return [name for name, var in zip(self.parameter_names, np.diag(self.covariance)) if not np.isfinite(var)]

    def is_degenerate(self, threshold: float = 0.99) -> bool:
        return bool(self.unidentifiable) or self.max_correlation > threshold

    def parameter(self, name: str) -> float:
        return float(self.parameters[self.parameter_names.index(name)])

    def uncertainty(self, name: str) -> float:
        return float(self.uncertainties[self.parameter_names.index(name)])

    def to_report(self, threshold: float = 0.99) -> dict:
        report: dict = {"model": self.model_name}
        for name, value, sigma in zip(self.parameter_names, self.parameters, self.uncertainties):
            report[name] = float(value)
            report[f"{name}_uncertainty"] = float(sigma)
        report.update(self.derived)
        report["max_correlation"] = self.max_correlation
        report["degenerate"] = self.is_degenerate(threshold)
        report["residual_norm"] = self.residual_norm
        report["converged"] = self.converged
        report["termination"] = self.termination
        report["iterations"] = self.iterations
        return report
