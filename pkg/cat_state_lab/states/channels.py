"""
Photon loss, detector imperfections and conditional photon counting.

Loss is amplitude damping with Kraus operators
A_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k. A detector with efficiency eta and
Poisson dark counts of mean d registers m photons from n true photons with
probability sum_x p_d(m - x) C(n, x) eta^x (1 - eta)^{n - x}.
"""
from typing import Dict, List, Optional, Tuple, Union
import logging

import numpy as np
from scipy.special import comb
from scipy.stats import binom, poisson

from ..config.settings import SimulationConfig
from ..errors import InvalidDistributionError, ZeroProbabilityError
from ..models import DetectorModel
from .fock import (
    FockDensity,
    FockVector,
    apply_single_mode,
    cat_state,
    to_density,
    truncation_dim,
)

logger = logging.getLogger(__name__)

State = Union[FockVector, FockDensity]


def dark_count_pmf(dark_mean: float) -> np.ndarray:
    """Poisson dark-count distribution truncated where the tail drops below DARK_TAIL_TOL."""
    if dark_mean == 0:
        return np.ones(1)
    q_max = int(poisson.isf(SimulationConfig.DARK_TAIL_TOL, dark_mean)) + 1
    return poisson.pmf(np.arange(q_max + 1), dark_mean)


def response_matrix(det: DetectorModel, n_max: int, m_max: Optional[int] = None) -> np.ndarray:
    """R[m, n]: probability of registering m counts when n photons arrive."""
    dark = dark_count_pmf(det.dark_mean)
    m_max = n_max + len(dark) - 1 if m_max is None else m_max
    n = np.arange(n_max + 1)
    x = np.arange(n_max + 1)
    registered = binom.pmf(x[:, None], n[None, :], det.eta)
    registered = np.nan_to_num(registered)
    out = np.zeros((m_max + 1, n_max + 1))
    for q, pq in enumerate(dark):
        rows = min(n_max + 1, m_max + 1 - q)
        if rows <= 0:
            break
        out[q:q + rows] += pq * registered[:rows]
    return out


def no_click_weight(det: DetectorModel, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    """Probability of registering zero counts given n true photons."""
    return np.exp(-det.dark_mean) * (1.0 - det.eta) ** np.asarray(n, dtype=float)


def click_weight(det: DetectorModel, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
    return 1.0 - no_click_weight(det, n)


def detector_pmf(pn: np.ndarray, det: DetectorModel) -> np.ndarray:
    """Registered-count distribution for a true photon-number distribution ``pn``."""
    pn = np.asarray(pn, dtype=float)
    if np.any(pn < -1e-12) or abs(pn.sum() - 1.0) > 1e-9:
        raise InvalidDistributionError(f"Photon-number distribution sums to {pn.sum():.12f}")
    return response_matrix(det, len(pn) - 1) @ pn


def loss_kraus(eta: float, dim: int) -> List[np.ndarray]:
    """Kraus operators of the loss channel with transmissivity ``eta``, k = 0..dim-1."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"Transmissivity must lie in [0, 1], got {eta}")
    n = np.arange(dim)
    ops = []
    for k in range(dim):
        op = np.zeros((dim, dim))
        src = n[k:]
        op[src - k, src] = np.sqrt(comb(src, k) * eta ** (src - k) * (1.0 - eta) ** k)
        ops.append(op)
        if eta == 1.0:
            break
    return ops


def loss_components(state: FockVector, eta: float, mode: int = 0) -> List[FockVector]:
    """Unnormalized Kraus branches A_k|psi>; their outer products sum to the lossy state."""
    branches = []
    for op in loss_kraus(eta, state.dims[mode]):
        amps = apply_single_mode(state, op, mode)
        if np.any(amps):
            branches.append(FockVector(state.dims, amps))
    return branches


def loss_channel(state: State, eta: float, mode: int = 0) -> FockDensity:
    """Apply photon loss with transmissivity ``eta`` to one mode."""
    if isinstance(state, FockVector):
        vectors = np.array([b.vector for b in loss_components(state, eta, mode)])
        return FockDensity(state.dims, vectors.T @ vectors.conj())
    dims = state.dims
    n_modes = len(dims)
    rho = state.tensor()
    out = np.zeros_like(rho)
    for op in loss_kraus(eta, dims[mode]):
        tmp = np.moveaxis(np.tensordot(op, rho, axes=(1, mode)), 0, mode)
        tmp = np.moveaxis(np.tensordot(op.conj(), tmp, axes=(1, n_modes + mode)), 0, n_modes + mode)
        out += tmp
    return FockDensity(dims, out)


def _cat_norm(alpha: float, sign: float) -> float:
    return 2.0 + 2.0 * sign * np.exp(-2.0 * alpha * alpha)


def cat_loss_probability(alpha: float, eta: float, parity: str) -> float:
    """Weight P of the opposite-parity cat after loss."""
    sign = 1.0 if parity == "+" else -1.0
    shrunk = alpha * np.sqrt(eta)
    return float(
        0.5 * _cat_norm(shrunk, -sign) / _cat_norm(alpha, sign)
        * (1.0 - np.exp(-2.0 * alpha * alpha * (1.0 - eta)))
    )


def cat_loss_fidelity(alpha: float, eta: float, parity: str = "+") -> float:
    """Closed-form fidelity of a lossy cat with the original cat."""
    if alpha <= 0 or not 0.0 <= eta <= 1.0:
        raise ValueError(f"Invalid cat/loss parameters alpha={alpha}, eta={eta}")
    sign = 1.0 if parity == "+" else -1.0
    if eta == 0.0 and sign < 0:
        return 0.0
    flip = cat_loss_probability(alpha, eta, parity)
    root = np.sqrt(eta)
    a2 = alpha * alpha
    # log form keeps large alpha finite
    log_overlap = (
        np.log(4.0)
        - a2 * (1.0 + eta)
        + 2.0 * a2 * root
        + 2.0 * np.log1p(sign * np.exp(-2.0 * a2 * root))
        - np.log(_cat_norm(alpha, sign))
        - np.log(_cat_norm(alpha * root, sign))
    )
    return float((1.0 - flip) * np.exp(log_overlap))


def cat_loss_state(alpha: float, eta: float, parity: str = "+", dim: Optional[int] = None) -> FockDensity:
    """Closed-form lossy cat: (1-P)|Psi_par(alpha sqrt eta)><.| + P|Psi_opp(alpha sqrt eta)><.|."""
    dim = dim or truncation_dim(alpha)
    shrunk = alpha * np.sqrt(eta)
    flip = cat_loss_probability(alpha, eta, parity)
    same_phase, other_phase = (0.0, np.pi) if parity == "+" else (np.pi, 0.0)
    same = cat_state(shrunk, same_phase, dim).vector
    other = cat_state(shrunk, other_phase, dim).vector
    mat = (1.0 - flip) * np.outer(same, same.conj()) + flip * np.outer(other, other.conj())
    return FockDensity((dim,), mat)


def condition_on_count(
    state: State, mode: int, m: int, det: DetectorModel
) -> Tuple[FockDensity, float]:
    """
    Condition ``mode`` on the detector registering ``m`` counts.

    Returns the normalized state of the remaining modes and the probability
    of the registered count.
    """
    if m < 0:
        raise ValueError(f"Registered count must be non-negative, got {m}")
    rho = to_density(state)
    dims = rho.dims
    weights = response_matrix(det, dims[mode] - 1, m)[m]
    n_modes = len(dims)
    tensor = rho.tensor()
    diag = np.diagonal(tensor, axis1=mode, axis2=n_modes + mode)
    conditioned = np.tensordot(diag, weights, axes=(-1, 0))
    rest = tuple(d for k, d in enumerate(dims) if k != mode)
    size = int(np.prod(rest)) if rest else 1
    mat = conditioned.reshape(size, size)
    probability = float(np.trace(mat).real)
    if probability < SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Registering {m} counts has probability {probability:.3e}")
    return FockDensity(rest or (1,), mat / probability), probability


def tomography_cost(max_photon: int, p_m: float) -> Dict[str, float]:
    """Homodyne tomography resource estimate: phases, bin width bound and counts."""
    if max_photon < 0 or not 0.0 < p_m <= 1.0:
        raise ValueError(f"Invalid tomography inputs M={max_photon}, p={p_m}")
    phases = max_photon + 1
    counts = 4.0 * p_m ** -2
    return {
        "phases": phases,
        "bin_width_bound": float(np.pi / (2.0 * np.sqrt(2.0 * max_photon + 1.0))),
        "counts_per_histogram": counts,
        "total": counts * phases,
    }
