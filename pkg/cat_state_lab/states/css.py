"""
Exact algebra of finite superpositions of multimode coherent states.

A state is sum_k c_k |a_k1> (x) ... (x) |a_kM>. Linear optics only moves the
coherent labels, so beam splitters and displacements are exact, and inner
products follow from <a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b).
"""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln
from scipy.stats import poisson

from ..config.settings import SimulationConfig
from ..errors import ModeMismatchError, TermCountOverflowError, TruncationError, ZeroProbabilityError
from .fock import FockVector, coherent_amplitudes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoherentSuperposition:
    coeffs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        amps = np.array(self.amps, dtype=complex).reshape(len(coeffs), -1) if len(coeffs) else np.zeros((0, 0), complex)
        if len(coeffs) > SimulationConfig.CSS_MAX_TERMS:
            raise TermCountOverflowError(f"{len(coeffs)} terms exceed the cap of {SimulationConfig.CSS_MAX_TERMS}")
        coeffs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[complex, Sequence[complex]]]) -> "CoherentSuperposition":
        terms = list(terms)
        return cls(
            coeffs=np.array([c for c, _ in terms], dtype=complex),
            amps=np.array([list(a) for _, a in terms], dtype=complex),
        )

    @property
    def modes(self) -> int:
        return self.amps.shape[1]

    def __len__(self) -> int:
        return len(self.coeffs)


CSS = CoherentSuperposition


def gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """G[j, k] = prod_m <a_jm | b_km> for label arrays of shape (terms, modes)."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    exponent = (
        -0.5 * np.sum(np.abs(a) ** 2, axis=1)[:, None]
        - 0.5 * np.sum(np.abs(b) ** 2, axis=1)[None, :]
        + a.conj() @ b.T
    )
    return np.exp(exponent)


def _check_modes(a: CSS, b: CSS) -> None:
    if a.modes != b.modes:
        raise ModeMismatchError(f"Mode mismatch: {a.modes} vs {b.modes}")


def css_inner(a: CSS, b: CSS) -> complex:
    """<a|b>."""
    _check_modes(a, b)
    return complex(a.coeffs.conj() @ gram(a.amps, b.amps) @ b.coeffs)


def css_norm(state: CSS) -> float:
    return float(np.sqrt(max(css_inner(state, state).real, 0.0)))


def css_normalize(state: CSS) -> CSS:
    norm = css_norm(state)
    if norm == 0.0:
        raise ZeroProbabilityError("Cannot normalize a zero superposition")
    return CSS(state.coeffs / norm, state.amps)


def css_merge(state: CSS, tol: Optional[float] = None) -> CSS:
    """Merge terms whose labels agree componentwise within ``tol``."""
    tol = SimulationConfig.CSS_MERGE_TOL if tol is None else tol
    coeffs: List[complex] = []
    labels: List[np.ndarray] = []
    for c, a in zip(state.coeffs, state.amps):
        for idx, known in enumerate(labels):
            if np.all(np.abs(known - a) <= tol):
                coeffs[idx] += c
                break
        else:
            coeffs.append(complex(c))
            labels.append(a)
    if not labels:
        return state
    return CSS(np.array(coeffs), np.array(labels))


def css_tensor(*states: CSS) -> CSS:
    coeffs = np.ones(1, dtype=complex)
    amps = np.zeros((1, 0), dtype=complex)
    for s in states:
        coeffs = np.multiply.outer(coeffs, s.coeffs).ravel()
        left = np.repeat(amps, len(s), axis=0)
        right = np.tile(s.amps, (len(amps), 1))
        amps = np.hstack([left, right])
    return CSS(coeffs, amps)


def css_cat(a: complex, phase: float = 0.0) -> CSS:
    """Normalized (|-a> + e^{i phase}|a>) as a single-mode superposition."""
    return css_normalize(CSS(np.array([1.0, np.exp(1j * phase)]), np.array([[-a], [a]])))


def css_beam_splitter(state: CSS, i: int, j: int, T: float) -> CSS:
    """(a_i, a_j) -> (a_i sqrt(T) - a_j sqrt(1-T), a_j sqrt(T) + a_i sqrt(1-T)) on every term."""
    if i == j:
        raise ValueError("Beam splitter needs two distinct modes")
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"Transmissivity must lie in [0, 1], got {T}")
    t, r = np.sqrt(T), np.sqrt(1.0 - T)
    amps = np.array(state.amps)
    ai, aj = amps[:, i].copy(), amps[:, j].copy()
    amps[:, i] = ai * t - aj * r
    amps[:, j] = aj * t + ai * r
    return CSS(state.coeffs, amps)


def css_displace(state: CSS, mode: int, delta: complex) -> CSS:
    """D(delta)|a> = exp((delta conj(a) - conj(delta) a)/2) |a + delta>."""
    amps = np.array(state.amps)
    a = amps[:, mode]
    phase = np.exp(0.5 * (delta * a.conj() - np.conj(delta) * a))
    amps[:, mode] = a + delta
    return CSS(state.coeffs * phase, amps)


def number_overlap(alpha: np.ndarray, n: int) -> np.ndarray:
    """<n|alpha> elementwise."""
    alpha = np.asarray(alpha, dtype=complex)
    out = np.zeros(alpha.shape, dtype=complex)
    nonzero = alpha != 0
    if n == 0:
        out = np.exp(-0.5 * np.abs(alpha) ** 2).astype(complex)
        return out
    a = alpha[nonzero]
    out[nonzero] = np.exp(-0.5 * np.abs(a) ** 2 + n * np.log(a) - 0.5 * gammaln(n + 1))
    return out


def css_project_fock(state: CSS, mode: int, n: int) -> Tuple[CSS, float]:
    """Project ``mode`` onto |n>; returns the unnormalized superposition and its probability."""
    if n < 0:
        raise ValueError(f"Photon number must be non-negative, got {n}")
    weights = number_overlap(state.amps[:, mode], n)
    rest = np.delete(state.amps, mode, axis=1)
    projected = css_merge(CSS(state.coeffs * weights, rest))
    probability = max(css_inner(projected, projected).real, 0.0)
    return projected, float(probability)


def css_to_fock(state: CSS, dim: int) -> FockVector:
    """Normalized Fock-basis copy of the superposition, every mode truncated at ``dim``."""
    largest = float(np.max(np.abs(state.amps))) if state.amps.size else 0.0
    tail = float(poisson.sf(dim - 1, largest ** 2)) if largest > 0 else 0.0
    if tail > SimulationConfig.tail_tol():
        raise TruncationError(f"Dimension {dim} leaves tail {tail:.3e} for amplitude {largest:.3f}")
    dims = (dim,) * state.modes
    total = np.zeros(dims, dtype=complex)
    for c, labels in zip(state.coeffs, state.amps):
        term = np.array(c, dtype=complex)
        for a in labels:
            term = np.multiply.outer(term, coherent_amplitudes(a, dim))
        total = total + term
    vec = FockVector(dims, total)
    return vec.normalized()


def css_best_cat_fidelity(state: CSS, a: complex) -> Tuple[float, float]:
    """
    Maximize |<Psi_phi(a)|state>|^2 over the cat phase.

    Uses a 360-point scan followed by golden-section refinement; returns
    (fidelity, phase in [0, 2 pi)).
    """
    if state.modes != 1:
        raise ModeMismatchError("Cat fidelity needs a single-mode superposition")
    norm_sq = css_inner(state, state).real
    if norm_sq <= 0.0:
        raise ZeroProbabilityError("Zero superposition has no fidelity")
    u = css_inner(CSS(np.ones(1), np.array([[-a]])), state)
    v = css_inner(CSS(np.ones(1), np.array([[a]])), state)
    overlap = np.exp(-2.0 * abs(a) ** 2)

    def fid(phi: float) -> float:
        return float(abs(u + np.exp(-1j * phi) * v) ** 2 / ((2.0 + 2.0 * np.cos(phi) * overlap) * norm_sq))

    grid = np.linspace(0.0, 2.0 * np.pi, 360, endpoint=False)
    values = np.array([fid(p) for p in grid])
    k = int(np.argmax(values))
    step = grid[1] - grid[0]
    try:
        result = minimize_scalar(
            lambda p: -fid(p),
            bracket=(grid[k] - step, grid[k], grid[k] + step),
            method="golden",
            tol=1e-9,
        )
        best_phi, best = float(result.x), -float(result.fun)
    except ValueError:
        best_phi, best = float(grid[k]), float(values[k])
    if best < values[k]:
        best_phi, best = float(grid[k]), float(values[k])
    return min(best, 1.0), float(np.mod(best_phi, 2.0 * np.pi))


@dataclass(frozen=True)
class CssOperator:
    """Single-mode operator sum_jk matrix[j, k] |labels_j><labels_k|."""
    labels: np.ndarray
    matrix: np.ndarray

    def gram(self) -> np.ndarray:
        return gram(self.labels[:, None], self.labels[:, None])

    def trace(self) -> float:
        return float(np.real(np.sum(self.matrix * self.gram().T)))

    def expectation(self, target: CSS) -> float:
        """<target|rho|target> for a single-mode superposition."""
        w = target.coeffs.conj() @ gram(target.amps, self.labels[:, None])
        return float(np.real(w @ self.matrix @ w.conj()))

    def normalized(self) -> "CssOperator":
        tr = self.trace()
        if tr <= SimulationConfig.ZERO_PROBABILITY:
            raise ZeroProbabilityError(f"Operator has trace {tr:.3e}")
        return CssOperator(self.labels, self.matrix / tr)

    def components(self, rel_tol: float = 1e-12) -> List[Tuple[float, CSS]]:
        """Eigen-decomposition into (weight, normalized pure superposition) pairs, largest first."""
        g_vals, g_vecs = np.linalg.eigh(self.gram())
        keep = g_vals > rel_tol * np.max(g_vals)
        root = g_vecs[:, keep] * np.sqrt(g_vals[keep])
        inv_root = g_vecs[:, keep] / np.sqrt(g_vals[keep])
        kernel = root.conj().T @ self.matrix.T @ root
        kernel = 0.5 * (kernel + kernel.conj().T)
        weights, vecs = np.linalg.eigh(kernel)
        order = np.argsort(weights)[::-1]
        out = []
        for idx in order:
            if weights[idx] <= rel_tol * max(weights[order[0]], 1e-300):
                continue
            coeffs = inv_root.conj() @ vecs[:, idx]
            out.append((float(weights[idx]), css_normalize(CSS(coeffs, self.labels[:, None]))))
        return out


def css_reduced_matrix(
    state: CSS,
    keep: int,
    kernels: Optional[Dict[int, Tuple[float, float, float]]] = None,
) -> CssOperator:
    """
    Reduced operator on mode ``keep`` after tracing the other modes.

    ``kernels`` maps a traced mode to (c0, c1, x): the trace is weighted by
    w(n) = c0 - c1 x^n, which covers plain traces (1, 0, 0), vacuum removal
    (1, 1, 0) and detector click probabilities (1, e^{-d}, 1 - eta).
    """
    kernels = kernels or {}
    matrix = np.outer(state.coeffs, state.coeffs.conj())
    for mode in range(state.modes):
        if mode == keep:
            continue
        b = state.amps[:, mode]
        c0, c1, x = kernels.get(mode, (1.0, 0.0, 0.0))
        # K[j, k] = sum_n w(n) <n|b_j><b_k|n>
        base = -0.5 * np.abs(b)[:, None] ** 2 - 0.5 * np.abs(b)[None, :] ** 2
        kernel = c0 * np.exp(base + b[:, None] * b.conj()[None, :])
        if c1:
            kernel = kernel - c1 * np.exp(base + x * b[:, None] * b.conj()[None, :])
        matrix = matrix * kernel
    return css_fold(state.amps[:, keep], matrix)


def css_fold(labels: np.ndarray, matrix: np.ndarray) -> CssOperator:
    """Operator sum_jk matrix[j, k] |labels_j><labels_k| with coinciding labels merged."""
    n_terms = len(labels)
    uniq: List[complex] = []
    index = np.zeros(n_terms, dtype=int)
    for t, a in enumerate(labels):
        for u, known in enumerate(uniq):
            if abs(known - a) <= SimulationConfig.CSS_MERGE_TOL:
                index[t] = u
                break
        else:
            index[t] = len(uniq)
            uniq.append(a)
    fold = np.zeros((len(uniq), n_terms))
    fold[index, np.arange(n_terms)] = 1.0
    return CssOperator(np.array(uniq, dtype=complex), fold @ matrix @ fold.T)


def css_mixture_components(form: CssOperator) -> List[Tuple[float, CSS]]:
    return form.components()
