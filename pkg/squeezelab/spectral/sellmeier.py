"""
Sellmeier dispersion of β-barium borate (BBO) and crystalline quartz.

BBO uses the four-parameter form n² = A + B/(λ² - C) - Dλ² with λ in μm.
Two published coefficient sets are pinned:

    eimerl  D. Eimerl et al. (1987); reference values n_o = 1.6749,
            n_e = 1.5555 at 532.1 nm and n_o = 1.7055, n_e = 1.5775 at 355 nm.
    kato    K. Kato (1986); agrees with eimerl to a few 1e-3 over 300-900 nm.

Quartz uses the two-pole form of G. Ghosh (1999),
n² = A + Bλ²/(λ² - C) + Dλ²/(λ² - E); n_o = 1.5426, n_e = 1.5517 at 632.8 nm.
"""

import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from squeezelab.exceptions import DomainError
from squeezelab.models.spectral import CrystalParams, SellmeierSet


class BboCoefficients(BaseModel):
    """n² = a + b/(λ² - c) - dλ², λ in μm."""

    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    c: float
    d: float

    def index(self, wavelength_um):
        l2 = np.square(wavelength_um)
        return np.sqrt(self.a + self.b / (l2 - self.c) - self.d * l2)


class QuartzCoefficients(BaseModel):
    """n² = a + bλ²/(λ² - c) + dλ²/(λ² - e), λ in μm."""

    model_config = ConfigDict(frozen=True)

    a: float
    b: float
    c: float
    d: float
    e: float

    def index(self, wavelength_um):
        l2 = np.square(wavelength_um)
        return np.sqrt(self.a + self.b * l2 / (l2 - self.c) + self.d * l2 / (l2 - self.e))


BBO_TABLES: dict[SellmeierSet, tuple[BboCoefficients, BboCoefficients]] = {
    SellmeierSet.EIMERL: (
        BboCoefficients(a=2.7405, b=0.0184, c=0.0179, d=0.0155),
        BboCoefficients(a=2.3730, b=0.0128, c=0.0156, d=0.0044),
    ),
    SellmeierSet.KATO: (
        BboCoefficients(a=2.7359, b=0.01878, c=0.01822, d=0.01354),
        BboCoefficients(a=2.3753, b=0.01224, c=0.01667, d=0.01516),
    ),
}
BBO_VALIDITY_NM = (300.0, 900.0)

QUARTZ_ORDINARY = QuartzCoefficients(a=1.28604141, b=1.07044083, c=1.00585997e-2, d=1.10202242, e=100.0)
QUARTZ_EXTRAORDINARY = QuartzCoefficients(a=1.28851804, b=1.09509924, c=1.02101864e-2, d=1.15662475, e=100.0)
QUARTZ_VALIDITY_NM = (198.0, 2050.0)


def _check_range(wavelength_nm, validity: tuple[float, float], material: str) -> np.ndarray:
    wavelength_nm = np.asarray(wavelength_nm, dtype=float)
    low, high = validity
    if np.any(wavelength_nm < low) or np.any(wavelength_nm > high):
        raise DomainError(
            f"wavelength outside the {material} Sellmeier validity range [{low:g}, {high:g}] nm"
        )
    return wavelength_nm


def bbo_indices(wavelength_nm, sellmeier_set: SellmeierSet = SellmeierSet.EIMERL):
    """Principal indices (n_o, n_e) of BBO."""
    wavelength_um = _check_range(wavelength_nm, BBO_VALIDITY_NM, "BBO") / 1000.0
    ordinary, extraordinary = BBO_TABLES[SellmeierSet(sellmeier_set)]
    return ordinary.index(wavelength_um), extraordinary.index(wavelength_um)


def extraordinary_index(wavelength_nm, angle_rad, sellmeier_set: SellmeierSet = SellmeierSet.EIMERL):
    """Index of an e-ray travelling at angle θ to the optic axis."""
    n_o, n_e = bbo_indices(wavelength_nm, sellmeier_set)
    cos2 = np.cos(angle_rad) ** 2
    sin2 = np.sin(angle_rad) ** 2
    return 1.0 / np.sqrt(cos2 / n_o ** 2 + sin2 / n_e ** 2)


def refractive_index(wavelength_nm, ray: str, crystal: CrystalParams, angle_deg=None):
    """
    BBO index for an ordinary or extraordinary ray.

    Args:
        wavelength_nm: Wavelength(s), nm
        ray: "o"/"ordinary" or "e"/"extraordinary"
        crystal: Crystal parameters; supplies the Sellmeier set and cut angle
        angle_deg: Propagation angle to the optic axis; defaults to the cut angle

    Raises:
        DomainError: wavelength outside validity, unknown ray, or no angle
            available for an extraordinary ray
    """
    ray = ray.lower()
    if ray in ("o", "ordinary"):
        return bbo_indices(wavelength_nm, crystal.sellmeier_set)[0]
    if ray not in ("e", "extraordinary"):
        raise DomainError(f"ray must be ordinary or extraordinary, got {ray!r}")
    angle_deg = crystal.cut_angle if angle_deg is None else angle_deg
    if angle_deg is None:
        raise DomainError("extraordinary index needs a cut angle; resolve it with phase_matching_angle")
    return extraordinary_index(wavelength_nm, math.radians(angle_deg), crystal.sellmeier_set)


def quartz_indices(wavelength_nm):
    """Principal indices (n_o, n_e) of crystalline quartz."""
    wavelength_um = _check_range(wavelength_nm, QUARTZ_VALIDITY_NM, "quartz") / 1000.0
    return QUARTZ_ORDINARY.index(wavelength_um), QUARTZ_EXTRAORDINARY.index(wavelength_um)
