"""
Pulse Sampling - Seeded, thread-count independent Monte Carlo draws.

Pulses are processed in fixed blocks. Each block draws from its own Philox
counter stream keyed by the run seed, so a pulse's value depends only on
(seed, pulse index, stream) and never on how blocks are scheduled.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from enum import IntEnum
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger

from config.settings import settings
from squeezelab.exceptions import DomainError
from squeezelab.models.fock import JointPhotonDistribution

# multinomial draws are chunked so one chunk holds at most this many cells
_MAX_CHUNK_CELLS = 1 << 22


class Stream(IntEnum):
    """Independent random streams of one run."""
    PHOTONS = 0
    ELECTRONIC = 1
    DARK = 2
    SHOT_NOISE = 3
    GAIN_CURVE = 4


def counter_rng(seed: int, block: int, stream: int, substream: int = 0) -> np.random.Generator:
    """Generator for one block of one stream; the counter words hold (substream, block, stream)."""
    if seed < 0:
        raise DomainError(f"seed must be >= 0, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, substream, block, stream]))


def run_blocks(
    n_pulses: int,
    seed: int,
    stream: int,
    draw: Callable[[np.random.Generator, int], np.ndarray],
    threads: Optional[int] = None,
    substream: int = 0
) -> np.ndarray:
    """
    Evaluate `draw(rng, size)` over consecutive pulse blocks and concatenate.

    Args:
        n_pulses: Total number of pulses
        seed: Run seed
        stream: Stream id, see Stream
        draw: Callable returning `size` rows for one block
        threads: Worker threads; results do not depend on it
        substream: Extra stream word, e.g. a mode-group index
    """
    if n_pulses < 1:
        raise DomainError(f"n_pulses must be >= 1, got {n_pulses}")
    block_size = settings.sampling.block_size
    threads = threads or settings.sampling.threads
    n_blocks = math.ceil(n_pulses / block_size)

    def one_block(block: int) -> np.ndarray:
        size = min(block_size, n_pulses - block * block_size)
        return draw(counter_rng(seed, block, stream, substream), size)

    if threads <= 1 or n_blocks == 1:
        parts = [one_block(block) for block in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(one_block, range(n_blocks)))
    return np.concatenate(parts)


def _occupation_sampler(dist: JointPhotonDistribution, mode_count: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Per-pulse (n1, n2) totals of `mode_count` independent draws from dist."""
    probabilities = dist.probabilities / dist.total_mass
    keep = probabilities.ravel() >= settings.engine.prune_probability
    cells = np.flatnonzero(keep)
    p = probabilities.ravel()[cells]
    p = p / p.sum()
    n1_values, n2_values = np.unravel_index(cells, dist.shape)
    counts_per_cell = np.stack([n1_values, n2_values], axis=1).astype(np.int64)
    chunk = max(1, _MAX_CHUNK_CELLS // len(p))

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty((size, 2), dtype=np.int64)
        for start in range(0, size, chunk):
            stop = min(size, start + chunk)
            occupation = rng.multinomial(mode_count, p, size=stop - start)
            out[start:stop] = occupation @ counts_per_cell
        return out

    return draw


def sample_mixture(
    components: Sequence[tuple[JointPhotonDistribution, int]],
    n_pulses: int,
    seed: int,
    threads: Optional[int] = None
) -> np.ndarray:
    """
    Photon counts for pulses made of several groups of identical mode pairs.

    Each pulse is the sum over groups of the totals of m_g independent draws
    from the group's distribution, sampled exactly through multinomial
    occupation counts of the joint grid.

    Args:
        components: (distribution, mode count) per group
        n_pulses: Number of pulses
        seed: Run seed
        threads: Worker threads

    Returns:
        (n_pulses, 2) int64 array of (n1, n2)
    """
    if not components:
        raise DomainError("at least one mode group is required")
    total = np.zeros((n_pulses, 2), dtype=np.int64)
    for group, (dist, mode_count) in enumerate(components):
        if mode_count < 1:
            raise DomainError(f"mode count must be >= 1, got {mode_count}")
        total += run_blocks(
            n_pulses, seed, Stream.PHOTONS, _occupation_sampler(dist, mode_count),
            threads=threads, substream=group,
        )
    logger.info(
        f"[SAMPLE] Sampled {n_pulses} pulses over {len(components)} group(s), "
        f"{sum(m for _, m in components)} mode pairs"
    )
    return total


def sample_pulses(
    dist: JointPhotonDistribution,
    mode_count: int,
    n_pulses: int,
    seed: int,
    threads: Optional[int] = None
) -> np.ndarray:
    """(n1, n2) photon counts per pulse, each the sum of m draws from dist."""
    return sample_mixture([(dist, mode_count)], n_pulses, seed, threads)


def fraction_weights(squeezed_fraction: float) -> list[tuple[float, float]]:
    """
    (phase offset, weight) pairs realising a squeezed fraction f.

    Weight (1+f)/2 sits at the set pump phase and (1-f)/2 at the opposite
    phase, so the low-gain NRF becomes 1 + η f cos φ.
    """
    if not -1.0 <= squeezed_fraction <= 1.0:
        raise DomainError(f"squeezed fraction must lie in [-1, 1], got {squeezed_fraction}")
    weights = [(0.0, (1.0 + squeezed_fraction) / 2.0), (math.pi, (1.0 - squeezed_fraction) / 2.0)]
    return [(offset, weight) for offset, weight in weights if weight > 0]


def phase_groups(
    pump_phase: float,
    weights: Sequence[tuple[float, float]],
    mode_count: int
) -> list[tuple[float, int]]:
    """
    Split m mode pairs over pump-phase offsets in proportion to their weights.

    Returns:
        (pump phase, mode count) per group; empty groups are dropped and the
        last group absorbs rounding so counts sum to m
    """
    total_weight = sum(weight for _, weight in weights)
    if not total_weight > 0:
        raise DomainError("phase weights must sum to a positive value")
    groups: list[tuple[float, int]] = []
    assigned = 0
    for i, (offset, weight) in enumerate(weights):
        if i == len(weights) - 1:
            count = mode_count - assigned
        else:
            count = int(round(mode_count * weight / total_weight))
            count = min(count, mode_count - assigned)
        assigned += count
        if count > 0:
            groups.append((pump_phase + offset, count))
    return groups


def sample_total_photons(
    gain: float,
    mode_count: int,
    n_pulses: int,
    seed: int,
    threads: Optional[int] = None,
    substream: int = 0
) -> np.ndarray:
    """
    Photon number per pulse at one crystal output.

    Each mode is thermal with mean sinh²Γ, so the total over m modes is
    negative binomial with m successes and p = 1/(1 + sinh²Γ).
    """
    if gain < 0:
        raise DomainError(f"gain must be >= 0, got {gain}")
    p = 1.0 / math.cosh(gain) ** 2

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.negative_binomial(mode_count, p, size=size)

    return run_blocks(n_pulses, seed, Stream.GAIN_CURVE, draw, threads=threads, substream=substream)
