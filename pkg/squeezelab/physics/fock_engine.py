"""
Fock Engine - Exact truncated Fock-space model of the two-mode squeezed vacuum.

Serves as the brute-force oracle for the closed-form Stokes moments and as
the source distribution for pulse sampling. Basis changes act block by
block on fixed total photon number N, where a passive two-mode transform
is an (N+1)-dimensional unitary.
"""

import math
from typing import Optional, Union

import numpy as np
from scipy.linalg import expm, schur
from scipy.stats import binom
from loguru import logger

from config.settings import settings
from squeezelab.exceptions import CutoffError, DomainError
from squeezelab.models.fock import (
    DetectionBasis,
    JointPhotonDistribution,
    PhotonMoments,
    TruncatedTwoModeState,
)

# Laboratory detection bases: S1 = n_h - n_v, S2 = n_d - n_a, S3 = n_r - n_l
STOKES_BASES = {
    1: DetectionBasis(mixing_angle=0.0, relative_phase=0.0),
    2: DetectionBasis(mixing_angle=math.pi / 4, relative_phase=0.0),
    3: DetectionBasis(mixing_angle=math.pi / 4, relative_phase=math.pi / 2),
}


def required_cutoff(gain: float, tolerance: Optional[float] = None) -> tuple[int, float]:
    """
    Smallest cutoff K whose excluded TMSV mass tanh^{2(K+1)}Γ is below tolerance.

    Returns:
        (cutoff, tail_bound)
    """
    tolerance = tolerance or settings.engine.tail_tolerance
    if gain < 0:
        raise DomainError(f"gain must be >= 0, got {gain}")
    if gain > settings.engine.max_gain:
        raise DomainError(
            f"gain {gain} above the Fock engine limit {settings.engine.max_gain}; use the closed-form model"
        )
    if gain == 0:
        return 0, 0.0
    t = math.tanh(gain)
    cutoff = max(0, math.ceil(math.log(tolerance) / (2.0 * math.log(t))))
    return cutoff, t ** (2 * (cutoff + 1))


def tmsv_state(
    gain: float,
    cutoff: Optional[int] = None,
    tolerance: Optional[float] = None
) -> TruncatedTwoModeState:
    """
    Two-mode squeezed vacuum sum_n tanh^n Γ / cosh Γ |n, n>.

    Args:
        gain: Parametric gain Γ, at most settings.engine.max_gain
        cutoff: Largest photon number per mode; chosen automatically when None
        tolerance: Tail-mass tolerance, default settings.engine.tail_tolerance

    Raises:
        CutoffError: an explicit cutoff leaves more tail mass than tolerated
    """
    needed, _ = required_cutoff(gain, tolerance)
    if cutoff is None:
        cutoff = needed
    elif cutoff < needed:
        raise CutoffError(
            f"cutoff {cutoff} too small for gain {gain}; at least {needed} required",
            required_cutoff=needed,
        )

    t = math.tanh(gain)
    n = np.arange(cutoff + 1)
    amplitudes = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amplitudes[n, n] = t ** n / math.cosh(gain)
    tail_bound = t ** (2 * (cutoff + 1)) if gain > 0 else 0.0
    return TruncatedTwoModeState(amplitudes=amplitudes, tail_bound=tail_bound)


def _generator_log(matrix: np.ndarray) -> np.ndarray:
    """Anti-Hermitian X with expm(X) = matrix, from the complex Schur form."""
    triangular, vectors = schur(matrix, output="complex")
    phases = np.angle(np.diag(triangular))
    return vectors @ np.diag(1j * phases) @ vectors.conj().T


def _block_generator(x: np.ndarray, total: int) -> np.ndarray:
    """Generator sum_kj X[k,j] a_k^dagger a_j on the block n1 + n2 = total."""
    n = np.arange(total + 1)
    g = np.diag(x[0, 0] * n + x[1, 1] * (total - n)).astype(complex)
    raising = np.sqrt((n[:-1] + 1) * (total - n[:-1]))
    lowering = np.sqrt(n[1:] * (total - n[1:] + 1))
    g[n[1:], n[:-1]] = x[0, 1] * raising
    g[n[:-1], n[1:]] = x[1, 0] * lowering
    return g


def rotate_basis(
    state: TruncatedTwoModeState,
    basis: Union[DetectionBasis, np.ndarray]
) -> TruncatedTwoModeState:
    """
    Apply a passive two-mode transform c_j^dagger -> sum_k M[k, j] d_k^dagger.

    The output grid holds every reachable Fock state, so its cutoff is the
    largest total photon number present in the input.

    Raises:
        DomainError: the matrix is not unitary
    """
    if isinstance(basis, DetectionBasis):
        matrix = basis.matrix
    else:
        matrix = np.asarray(basis, dtype=complex)
        if not DetectionBasis.is_unitary(matrix):
            raise DomainError("detection basis matrix is not unitary")

    amplitudes = state.amplitudes
    rows, cols = np.nonzero(amplitudes)
    max_total = int((rows + cols).max()) if len(rows) else 0
    out = np.zeros((max_total + 1, max_total + 1), dtype=complex)
    x = _generator_log(matrix)

    size = amplitudes.shape[0]
    for total in range(max_total + 1):
        n1 = np.arange(total + 1)
        n2 = total - n1
        inside = (n1 < size) & (n2 < size)
        block = np.zeros(total + 1, dtype=complex)
        block[inside] = amplitudes[n1[inside], n2[inside]]
        if not np.any(block):
            continue
        out[n1, n2] = expm(_block_generator(x, total)) @ block

    return TruncatedTwoModeState(amplitudes=out, tail_bound=state.tail_bound)


def joint_distribution(state: TruncatedTwoModeState) -> JointPhotonDistribution:
    """P(n1, n2) = |amplitude(n1, n2)|²."""
    return JointPhotonDistribution(
        probabilities=np.abs(state.amplitudes) ** 2,
        tail_bound=state.tail_bound,
    )


def _thinning_kernel(size: int, eta: float) -> np.ndarray:
    n = np.arange(size)
    return binom.pmf(n[:, None], n[None, :], eta)


def apply_loss(dist: JointPhotonDistribution, eta1: float, eta2: float) -> JointPhotonDistribution:
    """Independent binomial thinning of both arms with efficiencies η1, η2."""
    for eta in (eta1, eta2):
        if not 0.0 <= eta <= 1.0:
            raise DomainError(f"efficiency must lie in [0, 1], got {eta}")
    rows, cols = dist.shape
    thinned = _thinning_kernel(rows, eta1) @ dist.probabilities @ _thinning_kernel(cols, eta2).T
    return JointPhotonDistribution(probabilities=thinned, tail_bound=dist.tail_bound)


def moments(dist: JointPhotonDistribution) -> PhotonMoments:
    """Exact means and the variances of N1 - N2 and N1 + N2, renormalized over the grid."""
    p = dist.probabilities / dist.total_mass
    n1 = np.arange(p.shape[0])[:, None]
    n2 = np.arange(p.shape[1])[None, :]

    mean1 = float(np.sum(p * n1))
    mean2 = float(np.sum(p * n2))
    diff = n1 - n2
    total = n1 + n2
    var_diff = float(np.sum(p * diff ** 2) - (mean1 - mean2) ** 2)
    var_sum = float(np.sum(p * total ** 2) - (mean1 + mean2) ** 2)
    return PhotonMoments(mean1, mean2, max(var_diff, 0.0), max(var_sum, 0.0))


def multimode_aggregate(dist: JointPhotonDistribution, mode_count: int) -> PhotonMoments:
    """Moments of the sum of m independent, identical mode pairs."""
    if mode_count < 1:
        raise DomainError(f"mode count must be >= 1, got {mode_count}")
    return moments(dist).scaled(mode_count)


def squeezing_transform(pump_phase: float) -> np.ndarray:
    """
    Squeezed mode pair expressed in (h, v).

    a_φ^dagger = (h^dagger + i e^{iφ/2} v^dagger)/√2 and
    b_φ^dagger = (h^dagger - i e^{iφ/2} v^dagger)/√2.
    """
    phase = 1j * np.exp(0.5j * pump_phase)
    return np.array([[1.0, 1.0], [phase, -phase]], dtype=complex) / math.sqrt(2.0)


def stokes_basis(pump_phase: float, stokes_index: int) -> DetectionBasis:
    """Composite basis taking the squeezed pair to the ports that measure S1, S2 or S3."""
    if stokes_index not in STOKES_BASES:
        raise DomainError(f"stokes index must be 1, 2 or 3, got {stokes_index}")
    return DetectionBasis.from_matrix(STOKES_BASES[stokes_index].matrix @ squeezing_transform(pump_phase))


def stokes_distribution(
    gain: float,
    pump_phase: float,
    eta1: float,
    eta2: float,
    stokes_index: int,
    tolerance: Optional[float] = None
) -> JointPhotonDistribution:
    """Per-mode-pair joint count distribution of the two ports measuring one Stokes observable."""
    state = rotate_basis(tmsv_state(gain, tolerance=tolerance), stokes_basis(pump_phase, stokes_index))
    dist = apply_loss(joint_distribution(state), eta1, eta2)
    logger.debug(
        f"[SAMPLE] Fock distribution S{stokes_index}: gain={gain:.4g}, phase={pump_phase:.4g}, "
        f"grid={dist.shape[0]}, tail={dist.tail_bound:.2e}"
    )
    return dist


def oracle_nrf(
    gain: float,
    pump_phase: float,
    eta: float,
    stokes_index: int,
    tolerance: Optional[float] = None
) -> float:
    """NRF of one Stokes observable from the exact distribution."""
    stats = moments(stokes_distribution(gain, pump_phase, eta, eta, stokes_index, tolerance))
    if stats.mean_sum <= 0:
        raise DomainError("no registered photons; NRF undefined")
    return stats.var_diff / stats.mean_sum
