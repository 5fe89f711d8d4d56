"""
Truncated Fock-space states and the elementary unitaries acting on them.

Multimode amplitudes are stored as arrays of shape ``dims`` (mode 1 is the
slowest-varying index of the flattened vector). Unitaries conserve a photon
number combination and are applied block by block, so they are exactly
unitary on the truncated space.
"""
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import List, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from scipy.linalg import expm, sqrtm
from scipy.special import gammaln
from scipy.stats import poisson

from ..config.settings import SimulationConfig
from ..errors import DimensionMismatchError, TruncationError, ZeroProbabilityError
from .quad import hermite_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FockVector:
    """Pure state: amplitude array whose shape is the tuple of per-mode dimensions."""
    dims: Tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(tuple(self.dims))
        amps.setflags(write=False)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "amps", amps)

    @property
    def num_modes(self) -> int:
        return len(self.dims)

    @property
    def vector(self) -> np.ndarray:
        return self.amps.ravel()

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def normalized(self) -> "FockVector":
        norm = self.norm
        if norm == 0.0:
            raise ZeroProbabilityError("Cannot normalize the zero vector")
        return FockVector(self.dims, self.amps / norm)


@dataclass(frozen=True)
class FockDensity:
    """Mixed state on the flattened multimode space."""
    dims: Tuple[int, ...]
    mat: np.ndarray

    def __post_init__(self):
        size = int(np.prod(self.dims))
        mat = np.array(self.mat, dtype=complex).reshape(size, size)
        mat.setflags(write=False)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "mat", mat)

    @property
    def num_modes(self) -> int:
        return len(self.dims)

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def normalized(self) -> "FockDensity":
        tr = self.trace
        if tr <= SimulationConfig.ZERO_PROBABILITY:
            raise ZeroProbabilityError(f"Density matrix has trace {tr:.3e}")
        return FockDensity(self.dims, self.mat / tr)

    def tensor(self) -> np.ndarray:
        return self.mat.reshape(self.dims + self.dims)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))))

    def is_valid(self, tol: float = 1e-8) -> bool:
        return (
            self.hermiticity_error() < tol
            and abs(self.trace - 1.0) < tol
            and self.min_eigenvalue() > -tol
        )


State = Union[FockVector, FockDensity]


def _require_tail(tail: float, what: str, dim: int) -> None:
    if tail > SimulationConfig.tail_tol():
        raise TruncationError(f"{what}: probability {tail:.3e} lies beyond dimension {dim}")


def _canonical_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate so the first non-negligible amplitude is real and positive."""
    flat = amps.ravel()
    scale = np.max(np.abs(flat)) if flat.size else 0.0
    if scale == 0.0:
        return amps
    first = flat[np.argmax(np.abs(flat) > 1e-14 * scale)]
    return amps * (abs(first) / first)


def truncation_dim(amplitude: complex) -> int:
    return SimulationConfig.truncation_dim(amplitude)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n < dim, without any tail check."""
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def fock_state(n: int, dim: int) -> FockVector:
    if not 0 <= n < dim:
        raise TruncationError(f"Fock state |{n}> does not fit in dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return FockVector((dim,), amps)


def vacuum(dim: int) -> FockVector:
    return fock_state(0, dim)


def coherent_state(alpha: complex, dim: Optional[int] = None) -> FockVector:
    """Coherent state |alpha> truncated at ``dim`` levels."""
    dim = dim or truncation_dim(alpha)
    tail = float(poisson.sf(dim - 1, abs(alpha) ** 2)) if alpha != 0 else 0.0
    _require_tail(tail, f"coherent state alpha={alpha}", dim)
    amps = coherent_amplitudes(alpha, dim)
    return FockVector((dim,), amps / np.linalg.norm(amps))


def cat_state(alpha: float, phase: float = 0.0, dim: Optional[int] = None) -> FockVector:
    """
    Cat state (|-alpha> + e^{i phase}|alpha>)/sqrt(N_phase).

    phase=0 is the even cat and phase=pi the odd cat; their amplitudes on the
    opposite parity are exactly zero.
    """
    if alpha <= 0:
        raise ValueError(f"Cat amplitude must be positive, got {alpha}")
    dim = dim or truncation_dim(alpha)
    n = np.arange(dim)
    factor = (-1.0) ** n + np.exp(1j * phase)
    factor[np.abs(factor) < 1e-14] = 0.0
    norm_sq = 2.0 + 2.0 * np.cos(phase) * np.exp(-2.0 * alpha * alpha)
    amps = coherent_amplitudes(alpha, dim) * factor / np.sqrt(norm_sq)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    _require_tail(tail, f"cat state alpha={alpha}", dim)
    amps = amps / np.linalg.norm(amps)
    return FockVector((dim,), _canonical_phase(amps))


def _squeezed_log_probabilities(lam: float, pairs: int) -> np.ndarray:
    k = np.arange(pairs)
    power = np.zeros(pairs)
    if lam != 0:
        power = 2 * k * np.log(abs(lam))
    else:
        power[1:] = -np.inf
    return (
        0.5 * np.log1p(-lam * lam)
        + gammaln(2 * k + 1)
        - 2 * gammaln(k + 1)
        - 2 * k * np.log(2.0)
        + power
    )


def squeezed_dim(lam: float) -> int:
    """Smallest dimension keeping the squeezed-vacuum tail below the configured bound."""
    if lam == 0:
        return 2
    pairs = 64
    while True:
        probs = np.exp(_squeezed_log_probabilities(lam, pairs))
        remaining = 1.0 - np.cumsum(probs)
        below = np.nonzero(remaining < SimulationConfig.tail_tol() / 10.0)[0]
        if below.size:
            return int(2 * below[0] + 2)
        pairs *= 2
        if pairs > 1 << 16:
            raise TruncationError(f"Squeezing lambda={lam} needs an impractical dimension")


def squeezed_vacuum(lam: float, dim: Optional[int] = None) -> FockVector:
    """Squeezed vacuum with lambda = -tanh r: amps[2n] = (1-lam^2)^{1/4} sqrt((2n)!)/n! (lam/2)^n."""
    if not -1.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (-1, 1), got {lam}")
    dim = dim or squeezed_dim(lam)
    pairs = (dim + 1) // 2
    log_amp = 0.5 * _squeezed_log_probabilities(lam, pairs)
    signs = np.sign(lam) ** np.arange(pairs) if lam != 0 else np.ones(pairs)
    amps = np.zeros(dim, dtype=complex)
    amps[0::2] = signs * np.exp(log_amp)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    _require_tail(tail, f"squeezed vacuum lambda={lam}", dim)
    return FockVector((dim,), amps / np.linalg.norm(amps))


def tensor(*states: FockVector) -> FockVector:
    """Product state; the first argument becomes mode 1."""
    amps = reduce(np.multiply.outer, [s.amps for s in states])
    dims = tuple(d for s in states for d in s.dims)
    return FockVector(dims, amps)


def apply_single_mode(state: FockVector, op: np.ndarray, mode: int) -> np.ndarray:
    """Apply a matrix to one mode of a pure state and return the raw amplitude array."""
    if op.shape[1] != state.dims[mode]:
        raise DimensionMismatchError(f"Operator of shape {op.shape} on mode of dimension {state.dims[mode]}")
    return np.moveaxis(np.tensordot(op, state.amps, axes=(1, mode)), 0, mode)


def photon_distribution(state: State, mode: int = 0) -> np.ndarray:
    if isinstance(state, FockVector):
        probs = np.abs(state.amps) ** 2
        axes = tuple(k for k in range(state.num_modes) if k != mode)
        return np.sum(probs, axis=axes)
    reduced = partial_trace(state, [mode])
    return np.real(np.diag(reduced.mat)).copy()


def _check_mode_tail(state: FockVector, modes: Sequence[int]) -> None:
    for mode in modes:
        dim = state.dims[mode]
        if dim < 8:
            continue
        probs = photon_distribution(state, mode)
        top = float(np.sum(probs[int(0.75 * dim):])) / max(state.norm ** 2, 1e-300)
        _require_tail(top, f"mode {mode} after unitary", dim)


@lru_cache(maxsize=128)
def _squeeze_unitary(dim: int, s: float) -> np.ndarray:
    a = annihilation(dim)
    return expm(0.5 * s * (a @ a - a.T @ a.T))


def apply_squeeze(state: FockVector, s: float, mode: int = 0, check_tail: bool = True) -> FockVector:
    """Apply S(s) = exp[(s/2)(a^2 - a^dag^2)]; positive s squeezes the x quadrature."""
    if s == 0:
        return state
    out = FockVector(state.dims, apply_single_mode(state, _squeeze_unitary(state.dims[mode], float(s)), mode))
    if check_tail:
        _check_mode_tail(out, [mode])
    return out


@lru_cache(maxsize=64)
def _splitter_blocks(d1: int, d2: int, T: float) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    theta = np.arccos(np.sqrt(T))
    blocks = []
    for total in range(d1 + d2 - 1):
        n1 = np.arange(max(0, total - d2 + 1), min(total, d1 - 1) + 1)
        n2 = total - n1
        gen = np.zeros((len(n1), len(n1)))
        for k in range(len(n1)):
            # a1 a2^dag lowers n1; -a1^dag a2 raises it
            if k > 0:
                gen[k - 1, k] += np.sqrt(n1[k] * (n2[k] + 1.0))
            if k < len(n1) - 1:
                gen[k + 1, k] -= np.sqrt((n1[k] + 1.0) * n2[k])
        blocks.append((n1, n2, expm(theta * gen)))
    return blocks


@lru_cache(maxsize=64)
def _two_mode_squeeze_blocks(d1: int, d2: int, r: float) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    blocks = []
    for diff in range(-(d2 - 1), d1):
        n2 = np.arange(max(0, -diff), min(d2 - 1, d1 - 1 - diff) + 1)
        n1 = n2 + diff
        gen = np.zeros((len(n2), len(n2)))
        for k in range(len(n2)):
            if k > 0:
                gen[k - 1, k] += np.sqrt(n1[k] * float(n2[k]))
            if k < len(n2) - 1:
                gen[k + 1, k] -= np.sqrt((n1[k] + 1.0) * (n2[k] + 1.0))
        blocks.append((n1, n2, expm(r * gen)))
    return blocks


def _apply_pair_blocks(amps: np.ndarray, i: int, j: int, blocks) -> np.ndarray:
    arr = np.moveaxis(amps, (i, j), (0, 1))
    out = np.zeros(arr.shape, dtype=complex)
    for n1, n2, unitary in blocks:
        out[n1, n2, ...] = np.tensordot(unitary, arr[n1, n2, ...], axes=(1, 0))
    return np.moveaxis(out, (0, 1), (i, j))


def beam_splitter(state: FockVector, T: float, i: int = 0, j: int = 1, check_tail: bool = True) -> FockVector:
    """
    Apply B(T) = exp[arccos(sqrt T)(a_i a_j^dag - a_i^dag a_j)].

    Coherent inputs map as (a, b) -> (a sqrt(T) - b sqrt(1-T), b sqrt(T) + a sqrt(1-T)).
    """
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"Transmissivity must lie in [0, 1], got {T}")
    if i == j:
        raise ValueError("Beam splitter needs two distinct modes")
    if T == 1.0:
        return state
    blocks = _splitter_blocks(state.dims[i], state.dims[j], float(T))
    out = FockVector(state.dims, _apply_pair_blocks(state.amps, i, j, blocks))
    if check_tail:
        _check_mode_tail(out, [i, j])
    return out


def apply_two_mode_squeeze(state: FockVector, r: float, i: int = 0, j: int = 1, check_tail: bool = True) -> FockVector:
    """Apply S_ij(r) = exp[r(a_i a_j - a_i^dag a_j^dag)]."""
    if r == 0:
        return state
    blocks = _two_mode_squeeze_blocks(state.dims[i], state.dims[j], float(r))
    out = FockVector(state.dims, _apply_pair_blocks(state.amps, i, j, blocks))
    if check_tail:
        _check_mode_tail(out, [i, j])
    return out


def to_density(state: State) -> FockDensity:
    if isinstance(state, FockDensity):
        return state
    vec = state.vector
    return FockDensity(state.dims, np.outer(vec, vec.conj()))


def partial_trace(state: State, keep: Sequence[int]) -> FockDensity:
    """Reduced density matrix on the modes listed in ``keep`` (in that order)."""
    keep = list(keep)
    dims = state.dims
    traced = [k for k in range(len(dims)) if k not in keep]
    if isinstance(state, FockVector):
        amps = np.moveaxis(state.amps, keep + traced, list(range(len(dims))))
        kept_size = int(np.prod([dims[k] for k in keep]))
        flat = amps.reshape(kept_size, -1)
        return FockDensity(tuple(dims[k] for k in keep), flat @ flat.conj().T)
    n = len(dims)
    rho = state.tensor()
    order = keep + traced
    rho = np.transpose(rho, order + [n + k for k in order])
    kept_size = int(np.prod([dims[k] for k in keep]))
    rest = int(np.prod([dims[k] for k in traced])) if traced else 1
    rho = rho.reshape(kept_size, rest, kept_size, rest)
    return FockDensity(tuple(dims[k] for k in keep), np.einsum("arbr->ab", rho))


def _check_dims(a: State, b: State) -> None:
    if tuple(a.dims) != tuple(b.dims):
        raise DimensionMismatchError(f"Dimension mismatch: {a.dims} vs {b.dims}")


def fidelity(a: State, b: State) -> float:
    """|<a|b>|^2 for pure states, <a|rho|a> when one is mixed, Uhlmann fidelity otherwise."""
    _check_dims(a, b)
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        value = abs(np.vdot(a.vector, b.vector)) ** 2
    elif isinstance(a, FockVector):
        value = np.real(np.vdot(a.vector, b.mat @ a.vector))
    elif isinstance(b, FockVector):
        value = np.real(np.vdot(b.vector, a.mat @ b.vector))
    else:
        root = sqrtm(a.mat)
        value = np.real(np.trace(sqrtm(root @ b.mat @ root))) ** 2
    return float(min(max(value, 0.0), 1.0))


def mean_photon(state: State, mode: Optional[int] = None) -> float:
    """Mean photon number of one mode, or of all modes together when ``mode`` is None."""
    modes = range(len(state.dims)) if mode is None else [mode]
    total = 0.0
    for k in modes:
        probs = photon_distribution(state, k)
        total += float(np.dot(np.arange(len(probs)), probs))
    norm = state.norm ** 2 if isinstance(state, FockVector) else state.trace
    return total / norm


def project_number(state: FockVector, mode: int, n: int) -> Tuple[np.ndarray, float]:
    """Unnormalized amplitudes of the other modes after projecting ``mode`` onto |n>, and the probability."""
    if n >= state.dims[mode]:
        return np.zeros(tuple(d for k, d in enumerate(state.dims) if k != mode), dtype=complex), 0.0
    rest = np.take(state.amps, n, axis=mode)
    return rest, float(np.sum(np.abs(rest) ** 2))


def project_quadrature(state: FockVector, mode: int, x: float) -> np.ndarray:
    """<x|_mode psi on the remaining modes, unnormalized."""
    h = hermite_table(state.dims[mode] - 1, float(x))
    return np.tensordot(h, state.amps, axes=(0, mode))


def husimi_q(state: State, a: complex) -> float:
    """Q(a) = <a|rho|a>/pi for a single-mode state."""
    if state.num_modes != 1:
        raise DimensionMismatchError("Husimi Q is defined here for single-mode states")
    c = coherent_amplitudes(a, state.dims[0])
    if isinstance(state, FockVector):
        return float(abs(np.vdot(c, state.vector)) ** 2 / np.pi)
    return float(np.real(np.vdot(c, state.mat @ c)) / np.pi)


def squeeze_db(s: float) -> float:
    """Squeezed-quadrature variance relative to vacuum in dB: 10 log10 e^{-2s} (about -8.69 s)."""
    return float(10.0 * np.log10(np.exp(-2.0 * s)))
