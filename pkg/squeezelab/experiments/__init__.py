"""Experiments module: the virtual runs behind the command-line verbs."""

from .commands import (
    cmd_estimate,
    cmd_fit,
    cmd_simulate_run,
    cmd_spectral_fraction,
    cmd_sweep_phase,
    cmd_sweep_power,
    simulate_counts,
)

__all__ = [
    "cmd_estimate", "cmd_fit", "cmd_simulate_run", "cmd_spectral_fraction",
    "cmd_sweep_phase", "cmd_sweep_power", "simulate_counts",
]
