"""
Stokes Core - Closed-form moments of the two-crystal OPA output.

A pair of orthogonally oriented crystals pumped in phase produce two
squeezed vacua; in the (h, v) basis they form a two-mode squeezed vacuum
with a relative phase φ set by the pump. All expressions are per mode pair
and scale linearly with the number of independent mode pairs m.
"""

import math
from typing import Sequence

from squeezelab.exceptions import DomainError
from squeezelab.models.opa import MAX_GAIN, BogoliubovCoeffs, StokesMoments


def _check_gain(gain: float) -> None:
    if not math.isfinite(gain) or gain < 0:
        raise DomainError(f"gain must be >= 0, got {gain}")
    if gain > MAX_GAIN:
        raise DomainError(f"gain {gain} above the supported maximum {MAX_GAIN}")


def _check_efficiency(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"efficiency must lie in [0, 1], got {eta}")


def _check_modes(mode_count: int) -> None:
    if mode_count < 1:
        raise DomainError(f"mode count must be >= 1, got {mode_count}")


def bogoliubov(gain: float) -> BogoliubovCoeffs:
    """
    Bogoliubov coefficients U = cosh Γ, V = sinh Γ.

    Args:
        gain: Parametric gain Γ, 0 <= Γ <= 12

    Returns:
        BogoliubovCoeffs with U^2 - V^2 = 1
    """
    _check_gain(gain)
    return BogoliubovCoeffs(u=math.cosh(gain), v=math.sinh(gain))


def opa_output_mean(gain: float, mode_count: int) -> float:
    """Mean photon number per pulse at one crystal output, N = m sinh²Γ."""
    _check_modes(mode_count)
    return mode_count * bogoliubov(gain).v ** 2


def mean_registered_photons(gain: float, mode_count: int, eta: float) -> float:
    """Mean total of registered photons <S0> = 2ηV² per mode pair, times m."""
    _check_modes(mode_count)
    _check_efficiency(eta)
    return 2.0 * eta * bogoliubov(gain).v ** 2 * mode_count


def stokes_variances(gain: float, pump_phase: float, eta: float, mode_count: int = 1) -> StokesMoments:
    """
    Means and variances of the Stokes operators with symmetric loss η.

    Args:
        gain: Parametric gain Γ
        pump_phase: Relative phase φ of the two squeezed vacua, rad
        eta: Detection efficiency of each arm
        mode_count: Number of independent mode pairs m

    Returns:
        StokesMoments; the state is unpolarized so mean S1..S3 are zero
    """
    _check_modes(mode_count)
    _check_efficiency(eta)
    coeffs = bogoliubov(gain)
    u2, v2 = coeffs.u ** 2, coeffs.v ** 2
    prefactor = 2.0 * eta * v2 * mode_count
    sin2 = math.sin(pump_phase / 2.0) ** 2
    cos2 = math.cos(pump_phase / 2.0) ** 2
    excess = 2.0 * eta * u2 + 1.0 - eta

    return StokesMoments(
        mean_s0=prefactor,
        var_s1=prefactor * excess,
        var_s2=prefactor * ((1.0 - eta) * sin2 + excess * cos2),
        var_s3=prefactor * ((1.0 - eta) * cos2 + excess * sin2),
    )


def nrf(var_diff: float, mean_sum: float) -> float:
    """Noise reduction factor Var(N1 - N2) / <N1 + N2>."""
    if not mean_sum > 0:
        raise DomainError(f"mean photon sum must be > 0, got {mean_sum}")
    return var_diff / mean_sum


def nrf_low_gain(pump_phase: float, eta: float) -> tuple[float, float]:
    """Low-gain NRF of (S2, S3): 1 ± η cos φ."""
    _check_efficiency(eta)
    c = math.cos(pump_phase)
    return 1.0 + eta * c, 1.0 - eta * c


def stokes_nrf(gain: float, pump_phase: float, eta: float, stokes_index: int) -> float:
    """
    Exact NRF of one Stokes observable.

    Closed forms: S1 gives 1 - η + 2ηU², S2 gives 1 - η + 2ηU² cos²(φ/2),
    S3 gives the same with sin². At Γ = 0 the ratio is 0/0; its limit is used.
    """
    if stokes_index not in (1, 2, 3):
        raise DomainError(f"stokes index must be 1, 2 or 3, got {stokes_index}")
    _check_efficiency(eta)
    u2 = bogoliubov(gain).u ** 2
    if stokes_index == 1:
        weight = 1.0
    elif stokes_index == 2:
        weight = math.cos(pump_phase / 2.0) ** 2
    else:
        weight = math.sin(pump_phase / 2.0) ** 2
    return 1.0 - eta + 2.0 * eta * u2 * weight


def mixture_nrf(
    gain: float,
    phase_groups: Sequence[tuple[float, float]],
    eta: float,
    stokes_index: int
) -> float:
    """
    NRF of a set of mode groups that share Γ and η but differ in pump phase.

    Every group contributes the same mean per mode pair, so the NRF is the
    weight-averaged group NRF.

    Args:
        gain: Parametric gain Γ
        phase_groups: (pump_phase, weight) pairs; weights need not be normalized
        eta: Detection efficiency
        stokes_index: 1, 2 or 3
    """
    total = sum(weight for _, weight in phase_groups)
    if not total > 0:
        raise DomainError("phase group weights must sum to a positive value")
    return sum(
        weight * stokes_nrf(gain, phase, eta, stokes_index) for phase, weight in phase_groups
    ) / total
