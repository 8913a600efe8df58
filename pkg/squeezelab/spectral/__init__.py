"""Spectral module: BBO and quartz dispersion, phase matching and the squeezed fraction."""

from .sellmeier import bbo_indices, extraordinary_index, refractive_index, quartz_indices
from .spectral_model import (
    phase_matching_angle,
    pdc_spectrum,
    relative_phase,
    squeezed_fraction,
    spectral_profile,
    spectral_summary,
    phase_weights,
    quartz_phase_from_tilt,
    tilt_phase_map,
)

__all__ = [
    "bbo_indices", "extraordinary_index", "refractive_index", "quartz_indices",
    "phase_matching_angle", "pdc_spectrum", "relative_phase", "squeezed_fraction",
    "spectral_profile", "spectral_summary", "phase_weights", "quartz_phase_from_tilt", "tilt_phase_map",
]
