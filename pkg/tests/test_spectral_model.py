"""
Test Spectral Model - Sellmeier dispersion, phase matching, squeezed fraction
and the quartz-plate phase.
"""

import math
import numpy as np
import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from squeezelab.exceptions import DomainError
from squeezelab.models.spectral import Alignment, CrystalParams, QuartzPlatePair, SellmeierSet, SpectralProfile
from squeezelab.spectral.sellmeier import bbo_indices, quartz_indices, refractive_index
from squeezelab.spectral.spectral_model import (
    fwhm,
    idler_wavelength,
    optimal_phase_correction,
    pdc_spectrum,
    phase_matching_angle,
    phase_weights,
    quartz_phase_from_tilt,
    relative_phase,
    spectral_profile,
    spectral_summary,
    squeezed_fraction,
    tilt_phase_map,
)


@pytest.fixture(scope="module")
def degenerate_summary():
    """Summary of the degenerate alignment with the default crystals."""
    return spectral_summary(CrystalParams())


@pytest.fixture(scope="module")
def nondegenerate_summary():
    """Summary of the 650/780 nm alignment."""
    return spectral_summary(CrystalParams(alignment=Alignment.NONDEGENERATE))


class TestSellmeier:
    """Test refractive indices against published values."""

    def test_bbo_green(self):
        """n_o = 1.6749, n_e = 1.5555 at 532.1 nm."""
        n_o, n_e = bbo_indices(532.1)
        assert n_o == pytest.approx(1.6749, abs=2e-4)
        assert n_e == pytest.approx(1.5555, abs=2e-4)

    def test_bbo_pump(self):
        """n_o = 1.7055, n_e = 1.5775 at 355 nm."""
        n_o, n_e = bbo_indices(355.0)
        assert n_o == pytest.approx(1.7055, abs=2e-4)
        assert n_e == pytest.approx(1.5775, abs=2e-4)

    def test_coefficient_sets_agree(self):
        """The two pinned sets differ by a few 1e-3 at most."""
        for wavelength in (355.0, 532.1, 710.0):
            eimerl = np.array(bbo_indices(wavelength, SellmeierSet.EIMERL))
            kato = np.array(bbo_indices(wavelength, SellmeierSet.KATO))
            assert np.all(np.abs(eimerl - kato) < 5e-3)

    def test_quartz(self):
        """Quartz indices at 632.8 nm."""
        n_o, n_e = quartz_indices(632.8)
        assert n_o == pytest.approx(1.54261, abs=1e-4)
        assert n_e == pytest.approx(1.55165, abs=1e-4)

    def test_validity_range(self):
        """Wavelengths outside the fitted range are rejected."""
        with pytest.raises(DomainError):
            bbo_indices(1064.0)
        with pytest.raises(DomainError):
            quartz_indices(150.0)

    def test_extraordinary_needs_angle(self):
        """An e-ray index needs a propagation angle."""
        crystal = CrystalParams()
        with pytest.raises(DomainError):
            refractive_index(710.0, "e", crystal)
        assert refractive_index(710.0, "o", crystal) == pytest.approx(bbo_indices(710.0)[0])

    def test_extraordinary_between_principal(self):
        """At an oblique angle n_e(θ) lies between n_e and n_o."""
        n_o, n_e = bbo_indices(355.0)
        value = refractive_index(355.0, "extraordinary", CrystalParams(cut_angle=33.0))
        assert n_e < value < n_o


class TestPhaseMatching:
    """Test the type-I phase-matching angle and the PDC spectrum."""

    def test_degenerate_angle(self):
        """355 -> 710 + 710 nm phase-matches near 33 degrees."""
        angle = phase_matching_angle(CrystalParams())
        assert 32.5 < angle < 33.5

    def test_sets_give_close_angles(self):
        """The cut angle moves by less than half a degree between sets."""
        eimerl = phase_matching_angle(CrystalParams(sellmeier_set=SellmeierSet.EIMERL))
        kato = phase_matching_angle(CrystalParams(sellmeier_set=SellmeierSet.KATO))
        assert abs(eimerl - kato) < 0.5

    def test_energy_conservation(self):
        """650 nm signal pairs with a 782 nm idler."""
        assert idler_wavelength(650.0, 355.0) == pytest.approx(782.2, abs=0.1)
        with pytest.raises(DomainError):
            idler_wavelength(300.0, 355.0)

    def test_spectrum_normalized(self):
        """Weights integrate to one over the grid."""
        profile = pdc_spectrum(CrystalParams())
        assert np.sum(profile.intensity_weight) * profile.step == pytest.approx(1.0)

    def test_spectrum_peaks_at_phase_matching(self):
        """The nondegenerate spectrum peaks at the chosen signal or its idler."""
        profile = pdc_spectrum(CrystalParams(alignment=Alignment.NONDEGENERATE))
        peak = profile.wavelengths[np.argmax(profile.intensity_weight)]
        assert min(abs(peak - 650.0), abs(peak - 782.2)) < 5.0

    def test_no_phase_matched_region(self):
        """A cut angle far from phase matching leaves no usable spectrum."""
        with pytest.raises(DomainError):
            pdc_spectrum(CrystalParams(cut_angle=45.0, length=5.0))


class TestSqueezedFraction:
    """Test the spectral phase and the squeezed fraction."""

    def test_phase_zero_at_degeneracy(self):
        """The phase gauge is zero at 2λ_pump."""
        crystal = CrystalParams()
        assert relative_phase(np.array([710.0]), crystal)[0] == pytest.approx(0.0, abs=1e-9)

    def test_phase_symmetric_in_signal_and_idler(self):
        """Signal and idler of one pair carry the same phase."""
        crystal = CrystalParams()
        signal = np.array([650.0, 680.0])
        idler = idler_wavelength(signal, crystal.pump_wavelength)
        assert np.allclose(relative_phase(signal, crystal), relative_phase(idler, crystal), atol=1e-6)

    def test_degenerate_fraction(self, degenerate_summary):
        """Most of the degenerate spectrum stays squeezed."""
        assert 0.5 < degenerate_summary.squeezed_fraction < 0.8
        assert degenerate_summary.centre_gauge_fraction <= degenerate_summary.squeezed_fraction + 1e-12

    def test_alignment_ordering(self, degenerate_summary, nondegenerate_summary):
        """The degenerate alignment keeps more of the spectrum squeezed."""
        assert nondegenerate_summary.squeezed_fraction < degenerate_summary.squeezed_fraction

    def test_alignment_ordering_kato(self):
        """The ordering holds with the second BBO coefficient set."""
        degenerate = spectral_summary(CrystalParams(sellmeier_set=SellmeierSet.KATO))
        nondegenerate = spectral_summary(
            CrystalParams(sellmeier_set=SellmeierSet.KATO, alignment=Alignment.NONDEGENERATE)
        )
        assert nondegenerate.squeezed_fraction < degenerate.squeezed_fraction

    @pytest.mark.parametrize("alignment", [Alignment.DEGENERATE, Alignment.NONDEGENERATE])
    def test_grid_convergence(self, alignment):
        """Doubling the grid moves f by less than 1e-4."""
        coarse = spectral_summary(CrystalParams(alignment=alignment), n_points=2001)
        fine = spectral_summary(CrystalParams(alignment=alignment), n_points=4001)
        assert abs(fine.squeezed_fraction - coarse.squeezed_fraction) < 1e-4

    def test_phase_monotone_near_degeneracy(self):
        """Moving away from degeneracy the phase grows steadily on each side."""
        crystal = CrystalParams()
        longer = relative_phase(np.linspace(710.0, 760.0, 51), crystal)
        shorter = relative_phase(np.linspace(710.0, 660.0, 51), crystal)
        for phase in (longer, shorter):
            steps = np.diff(phase)
            assert np.all(steps > 0) or np.all(steps < 0)

    def test_fraction_gauge_invariant(self):
        """A constant phase offset leaves f unchanged and shifts the correction."""
        profile = spectral_profile(CrystalParams())
        shifted = profile.with_phase(profile.relative_phase + 1.3)
        assert squeezed_fraction(shifted) == pytest.approx(squeezed_fraction(profile), abs=1e-12)
        moved = optimal_phase_correction(shifted) - optimal_phase_correction(profile)
        assert math.remainder(moved + 1.3, 2.0 * math.pi) == pytest.approx(0.0, abs=1e-9)

    def test_spectral_width(self, degenerate_summary):
        """The degenerate spectrum is about a hundred nanometres wide."""
        assert 80.0 < degenerate_summary.fwhm_nm < 160.0

    def test_no_second_crystal(self):
        """Without a second crystal the whole spectrum is squeezed."""
        summary = spectral_summary(CrystalParams(second_length=0.0))
        assert summary.squeezed_fraction == pytest.approx(1.0)
        assert summary.phase_correction == pytest.approx(0.0, abs=1e-12)

    def test_longer_second_crystal_degrades(self):
        """More dispersion leaves less of the spectrum squeezed."""
        short = spectral_summary(CrystalParams(second_length=0.5)).squeezed_fraction
        long = spectral_summary(CrystalParams(second_length=2.0)).squeezed_fraction
        assert long < short

    def test_phase_weights_cover_spectrum(self):
        """Binned phase groups carry the full spectral weight."""
        groups = phase_weights(spectral_profile(CrystalParams()))
        assert sum(weight for _, weight in groups) == pytest.approx(1.0)
        assert all(-math.pi <= offset <= math.pi for offset, _ in groups)

    def test_fwhm_of_triangle(self):
        """Linear interpolation finds the half-maximum crossings."""
        wavelengths = np.arange(700.0, 711.0)
        weights = 5.0 - np.abs(wavelengths - 705.0)
        profile = SpectralProfile(wavelengths=wavelengths, intensity_weight=weights / weights.sum())
        assert fwhm(profile) == pytest.approx(5.0)


class TestQuartzPlates:
    """Test the tilt to pump-phase mapping."""

    def test_normal_incidence(self):
        """Both plates at normal incidence give about 183 rad of retardance."""
        assert quartz_phase_from_tilt(QuartzPlatePair(), 0.0) == pytest.approx(182.99, abs=0.02)

    @pytest.mark.parametrize("alpha, change", [(10.0, 1.13), (20.0, 4.51), (30.0, 10.06)])
    def test_tilt_adds_phase(self, alpha, change):
        """Tilting increases the retardance quadratically at first."""
        plates = QuartzPlatePair()
        delta = quartz_phase_from_tilt(plates, alpha) - quartz_phase_from_tilt(plates, 0.0)
        assert delta == pytest.approx(change, abs=0.01)

    def test_symmetric_in_tilt(self):
        """±α give the same phase."""
        plates = QuartzPlatePair()
        assert quartz_phase_from_tilt(plates, -12.0) == pytest.approx(quartz_phase_from_tilt(plates, 12.0))

    def test_vectorized(self):
        """Arrays of tilts map element-wise."""
        values = quartz_phase_from_tilt(QuartzPlatePair(), np.array([0.0, 10.0]))
        assert values.shape == (2,)

    def test_tilt_limit(self):
        """Tilts beyond 30 degrees are rejected."""
        with pytest.raises(DomainError):
            quartz_phase_from_tilt(QuartzPlatePair(), 31.0)

    def test_phase_offset(self):
        """The phase map adds the configured offset."""
        plates = QuartzPlatePair(phase_offset=0.3)
        assert tilt_phase_map(plates)(5.0) == pytest.approx(quartz_phase_from_tilt(plates, 5.0) + 0.3)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
