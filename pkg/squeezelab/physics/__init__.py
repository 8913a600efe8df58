"""Physics module: closed-form moments, the Fock oracle and pulse sampling."""

from .stokes_core import (
    bogoliubov,
    opa_output_mean,
    mean_registered_photons,
    stokes_variances,
    nrf,
    nrf_low_gain,
    stokes_nrf,
    mixture_nrf,
)
from .fock_engine import (
    tmsv_state,
    rotate_basis,
    joint_distribution,
    apply_loss,
    moments,
    multimode_aggregate,
    stokes_distribution,
    oracle_nrf,
)
from .sampling import sample_pulses, sample_mixture, sample_total_photons

__all__ = [
    "bogoliubov", "opa_output_mean", "mean_registered_photons", "stokes_variances",
    "nrf", "nrf_low_gain", "stokes_nrf", "mixture_nrf",
    "tmsv_state", "rotate_basis", "joint_distribution", "apply_loss", "moments",
    "multimode_aggregate", "stokes_distribution", "oracle_nrf",
    "sample_pulses", "sample_mixture", "sample_total_photons",
]
