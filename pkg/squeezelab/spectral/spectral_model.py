"""
Spectral Model - Phase matching and inter-crystal phase of the BBO cascade.

Pairs born in the first crystal cross the second one as extraordinary rays
and pick up a wavelength-dependent phase that pairs born in the second
crystal do not. Only the part of the spectrum whose phase agrees with the
pump setting contributes squeezing; its weight is the squeezed fraction.
"""

import math
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from loguru import logger

from squeezelab.exceptions import DomainError
from squeezelab.models.spectral import (
    CrystalParams,
    QuartzPlatePair,
    SpectralProfile,
    SpectralSummary,
)
from squeezelab.spectral.sellmeier import bbo_indices, extraordinary_index, quartz_indices

DEFAULT_GRID_POINTS = 2001
# short edge of the signal grid relative to degeneracy; the long edge is its idler
GRID_EDGE_RATIO = 590.0 / 710.0
CUT_ANGLE_BRACKET = (0.2, 1.2)  # rad
MAX_TILT_DEG = 30.0


def wavevector(index, wavelength_nm):
    """k = 2πn/λ in rad/mm."""
    return 2.0 * math.pi * np.asarray(index) / (np.asarray(wavelength_nm) * 1e-6)


def idler_wavelength(signal_nm, pump_nm: float):
    """Energy conservation 1/λ_i = 1/λ_p - 1/λ_s."""
    signal_nm = np.asarray(signal_nm, dtype=float)
    if np.any(signal_nm <= pump_nm):
        raise DomainError("signal wavelength must exceed the pump wavelength")
    return 1.0 / (1.0 / pump_nm - 1.0 / signal_nm)


def phase_mismatch(signal_nm, crystal: CrystalParams, angle_rad: float):
    """Collinear type-I (e -> oo) mismatch Δk = k_p - k_s - k_i, rad/mm."""
    pump = crystal.pump_wavelength
    idler = idler_wavelength(signal_nm, pump)
    k_pump = wavevector(extraordinary_index(pump, angle_rad, crystal.sellmeier_set), pump)
    k_signal = wavevector(bbo_indices(signal_nm, crystal.sellmeier_set)[0], signal_nm)
    k_idler = wavevector(bbo_indices(idler, crystal.sellmeier_set)[0], idler)
    return k_pump - k_signal - k_idler


def phase_matching_angle(crystal: CrystalParams, signal_nm: Optional[float] = None) -> float:
    """
    Cut angle, in degrees, that phase-matches the given signal wavelength.

    Raises:
        DomainError: no root inside the search bracket
    """
    signal_nm = crystal.target_signal_wavelength if signal_nm is None else signal_nm

    def mismatch(angle: float) -> float:
        return float(phase_mismatch(signal_nm, crystal, angle))

    low, high = CUT_ANGLE_BRACKET
    if mismatch(low) * mismatch(high) > 0:
        raise DomainError(f"no phase-matching angle for signal {signal_nm} nm in [{low}, {high}] rad")
    return math.degrees(brentq(mismatch, low, high, xtol=1e-14))


def resolve_cut_angle(crystal: CrystalParams) -> CrystalParams:
    """Crystal with its cut angle filled in from the configured alignment."""
    if crystal.cut_angle is not None:
        return crystal
    angle = phase_matching_angle(crystal)
    logger.debug(f"[SPECTRAL] {crystal.alignment.value} alignment: cut angle {angle:.4f} deg")
    return crystal.model_copy(update={"cut_angle": angle})


def signal_grid(crystal: CrystalParams, n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Uniform signal grid from GRID_EDGE_RATIO·λ_deg to the matching idler."""
    short_edge = GRID_EDGE_RATIO * crystal.degenerate_wavelength
    long_edge = float(idler_wavelength(short_edge, crystal.pump_wavelength))
    return np.linspace(short_edge, long_edge, n_points)


def pdc_spectrum(crystal: CrystalParams, wavelengths: Optional[np.ndarray] = None) -> SpectralProfile:
    """
    Normalized collinear PDC spectrum, weight ∝ sinc²(ΔkL/2).

    Raises:
        DomainError: no grid point inside the central phase-matching lobe
    """
    crystal = resolve_cut_angle(crystal)
    wavelengths = signal_grid(crystal) if wavelengths is None else np.asarray(wavelengths, dtype=float)
    half_phase = phase_mismatch(wavelengths, crystal, math.radians(crystal.cut_angle)) * crystal.length / 2.0
    if np.min(np.abs(half_phase)) >= math.pi:
        raise DomainError(
            "no phase-matched region on the signal grid; adjust the cut angle or the alignment"
        )
    weights = np.sinc(half_phase / math.pi) ** 2
    step = float(wavelengths[1] - wavelengths[0])
    weights = weights / (np.sum(weights) * step)
    return SpectralProfile(wavelengths=wavelengths, intensity_weight=weights)


def relative_phase(wavelengths: np.ndarray, crystal: CrystalParams) -> np.ndarray:
    """
    Extra phase of first-crystal pairs after crossing the second crystal.

    ψ(λs) = L2·[k_e(λs) + k_e(λi)] at the cut angle, gauged to 0 at degeneracy.
    """
    crystal = resolve_cut_angle(crystal)
    wavelengths = np.asarray(wavelengths, dtype=float)
    if crystal.second_length == 0:
        return np.zeros_like(wavelengths)
    angle = math.radians(crystal.cut_angle)

    def pair_phase(signal):
        idler = idler_wavelength(signal, crystal.pump_wavelength)
        k_signal = wavevector(extraordinary_index(signal, angle, crystal.sellmeier_set), signal)
        k_idler = wavevector(extraordinary_index(idler, angle, crystal.sellmeier_set), idler)
        return crystal.second_length * (k_signal + k_idler)

    return pair_phase(wavelengths) - pair_phase(crystal.degenerate_wavelength)


def _fraction_phasor(profile: SpectralProfile) -> complex:
    phase = profile.relative_phase if profile.relative_phase is not None else np.zeros_like(profile.wavelengths)
    return complex(np.sum(profile.intensity_weight * np.exp(1j * phase)) * profile.step)


def squeezed_fraction(profile: SpectralProfile) -> float:
    """
    Fraction of the spectrum in the squeezed state, |Σ w e^{iψ}| Δλ.

    This is the largest Σ w cos(ψ + c) Δλ over a constant pump-phase
    correction c, so it does not depend on the phase gauge.
    """
    return min(1.0, abs(_fraction_phasor(profile)))


def centre_gauge_fraction(profile: SpectralProfile) -> float:
    """Σ w cos ψ Δλ with the phase gauged to zero at degeneracy."""
    return float(np.clip(_fraction_phasor(profile).real, -1.0, 1.0))


def optimal_phase_correction(profile: SpectralProfile) -> float:
    """Constant pump-phase shift c that maximises Σ w cos(ψ + c) Δλ."""
    return -float(np.angle(_fraction_phasor(profile)))


def fwhm(profile: SpectralProfile) -> float:
    """Full width at half maximum of the weights, linearly interpolated, nm."""
    w = profile.intensity_weight
    x = profile.wavelengths
    half = w.max() / 2.0
    above = np.flatnonzero(w >= half)
    first, last = above[0], above[-1]

    def crossing(i_out: int, i_in: int) -> float:
        if i_out < 0 or i_out >= len(w):
            return float(x[i_in])
        return float(x[i_out] + (half - w[i_out]) * (x[i_in] - x[i_out]) / (w[i_in] - w[i_out]))

    return crossing(last + 1, last) - crossing(first - 1, first)


def spectral_profile(crystal: CrystalParams, n_points: int = DEFAULT_GRID_POINTS) -> SpectralProfile:
    """PDC spectrum on the default grid with the inter-crystal phase attached."""
    crystal = resolve_cut_angle(crystal)
    profile = pdc_spectrum(crystal, signal_grid(crystal, n_points))
    return profile.with_phase(relative_phase(profile.wavelengths, crystal))


def spectral_summary(crystal: CrystalParams, n_points: int = DEFAULT_GRID_POINTS) -> SpectralSummary:
    """Spectrum, inter-crystal phase and squeezed fraction for one alignment."""
    crystal = resolve_cut_angle(crystal)
    profile = spectral_profile(crystal, n_points)

    summary = SpectralSummary(
        alignment=crystal.alignment,
        sellmeier_set=crystal.sellmeier_set,
        cut_angle=crystal.cut_angle,
        signal_wavelength=crystal.target_signal_wavelength,
        idler_wavelength=float(idler_wavelength(crystal.target_signal_wavelength, crystal.pump_wavelength)),
        fwhm_nm=fwhm(profile),
        squeezed_fraction=squeezed_fraction(profile),
        centre_gauge_fraction=centre_gauge_fraction(profile),
        phase_correction=optimal_phase_correction(profile),
    )
    logger.info(
        f"[SPECTRAL] {crystal.alignment.value}: cut {summary.cut_angle:.3f} deg, "
        f"FWHM {summary.fwhm_nm:.1f} nm, squeezed fraction {summary.squeezed_fraction:.3f}"
    )
    return summary


def phase_weights(profile: SpectralProfile, n_bins: int = 32) -> list[tuple[float, float]]:
    """
    Spectrum collapsed into (phase offset, weight) bins for mode-group sampling.

    Phases are measured from the optimal pump correction, so offset 0 is the
    best-squeezed setting. Each bin is represented by its weighted circular mean.
    """
    if profile.relative_phase is None:
        return [(0.0, 1.0)]
    phase = profile.relative_phase + optimal_phase_correction(profile)
    phase = np.mod(phase + math.pi, 2.0 * math.pi) - math.pi
    weights = profile.intensity_weight * profile.step
    edges = np.linspace(-math.pi, math.pi, n_bins + 1)
    bins = np.clip(np.digitize(phase, edges) - 1, 0, n_bins - 1)

    groups = []
    for b in range(n_bins):
        mask = bins == b
        weight = float(weights[mask].sum())
        if weight <= 0:
            continue
        offset = float(np.angle(np.sum(weights[mask] * np.exp(1j * phase[mask]))))
        groups.append((offset, weight))
    return groups


def profile_frame(profile: SpectralProfile) -> pd.DataFrame:
    """Profile as columns wavelength_nm, weight, phase_rad."""
    phase = profile.relative_phase if profile.relative_phase is not None else np.zeros_like(profile.wavelengths)
    return pd.DataFrame({
        "wavelength_nm": profile.wavelengths,
        "weight": profile.intensity_weight,
        "phase_rad": phase,
    })


def quartz_phase_from_tilt(plates: QuartzPlatePair, alpha_deg, pump_wavelength_nm: float = 355.0):
    """
    Pump retardance between vertical and horizontal components, rad.

    Both plates have their optic axes vertical and tilt together about the
    vertical axis, so the axis stays perpendicular to the plane of incidence:
    φ = (2π d/λ)[√(n_e² - sin²α) - √(n_o² - sin²α)], d the total thickness.
    """
    alpha = np.asarray(alpha_deg, dtype=float)
    if np.any(np.abs(alpha) > MAX_TILT_DEG):
        raise DomainError(f"tilt must satisfy |alpha| <= {MAX_TILT_DEG} degrees")
    n_o, n_e = quartz_indices(pump_wavelength_nm)
    sin2 = np.sin(np.radians(alpha)) ** 2
    thickness_nm = plates.total_thickness * 1000.0
    retardance = 2.0 * math.pi * thickness_nm / pump_wavelength_nm * (np.sqrt(n_e ** 2 - sin2) - np.sqrt(n_o ** 2 - sin2))
    return float(retardance) if retardance.ndim == 0 else retardance


def tilt_phase_map(plates: QuartzPlatePair, pump_wavelength_nm: float = 355.0) -> Callable:
    """Pump phase as a function of plate tilt, including the configured offset."""

    def phase(alpha_deg):
        return quartz_phase_from_tilt(plates, alpha_deg, pump_wavelength_nm) + plates.phase_offset

    return phase
