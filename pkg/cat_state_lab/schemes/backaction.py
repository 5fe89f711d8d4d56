"""
Squeezing + beam splitter + photon counting networks that condition one mode
into an approximate cat.

Every network maps the two-mode vacuum to a Gaussian wavefunction
psi(x) = |det L|^{1/2} pi^{-1/2} exp(-|L x|^2 / 2), where L composes the
inverse quadrature maps of the elements in the order they act. Counting m
photons in mode 2 leaves exp(-kappa x^2/2) times a degree-m polynomial in
mode 1, so all integrals below are exact Gauss-Hermite sums.
"""
from typing import Callable, Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from ..config.settings import SimulationConfig
from ..errors import ZeroProbabilityError
from ..models import BackactionParams, SchemeReport
from ..states.fock import (
    FockVector,
    apply_single_mode,
    apply_squeeze,
    apply_two_mode_squeeze,
    beam_splitter,
    project_number,
    squeeze_db,
    tensor,
    vacuum,
)
from ..states.quad import QuadGrid, gauss_hermite_grid, gauss_hermite_weighted, hermite_poly

logger = logging.getLogger(__name__)

VARIANTS = ("song", "improved", "simplified")


def squeeze_matrix(s: float) -> np.ndarray:
    return np.diag([math.exp(s), 1.0])


def two_mode_squeeze_matrix(r: float) -> np.ndarray:
    return np.array([[math.cosh(r), math.sinh(r)], [math.sinh(r), math.cosh(r)]])


def splitter_matrix(T: float) -> np.ndarray:
    """x1 -> sqrt(T) x1 + sqrt(1-T) x2, x2 -> sqrt(1-T) x1 - sqrt(T) x2 (a reflection, its own inverse)."""
    t, u = math.sqrt(T), math.sqrt(1.0 - T)
    return np.array([[t, u], [u, -t]])


def network_matrix(p: BackactionParams) -> np.ndarray:
    """Quadrature matrix L of the variant; the first element to act comes first in the product."""
    if p.variant == "song":
        return two_mode_squeeze_matrix(p.r) @ splitter_matrix(p.T) @ squeeze_matrix(p.s)
    if p.variant == "improved":
        return squeeze_matrix(p.s) @ two_mode_squeeze_matrix(p.r) @ splitter_matrix(p.T)
    return np.diag([math.exp(p.r), math.exp(p.s)]) @ splitter_matrix(p.T)


def back_action_condition(r: float) -> float:
    """Transmissivity T = cos^2(arcsin(tanh r)/2) of a true back-action-evasion measurement."""
    return math.cos(0.5 * math.asin(math.tanh(r))) ** 2


class _Conditioned:
    """psi(x) = exp(-kappa x^2/2) poly(x): the unnormalized mode-1 state after counting m photons."""

    def __init__(self, p: BackactionParams):
        L = network_matrix(p)
        q = L.T @ L
        self.m = p.m
        self.det = abs(float(np.linalg.det(L)))
        self.c = 1.0 + q[1, 1]
        self.shift = q[0, 1] / self.c
        self.kappa = q[0, 0] - q[0, 1] ** 2 / self.c
        self.nodes, self.weights = gauss_hermite_weighted(p.m // 2 + 2)

    def poly(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        width = math.sqrt(2.0 / self.c)
        arg = self.nodes * width - self.shift * x[..., None]
        inner = hermite_poly(self.m, arg) @ self.weights
        return math.sqrt(self.det / math.pi) * width * inner

    def values(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * self.kappa * x * x) * self.poly(x)

    def probability(self) -> float:
        z, w = gauss_hermite_weighted(self.m + 2)
        scale = 1.0 / math.sqrt(self.kappa)
        return float(scale * np.sum(w * self.poly(z * scale) ** 2))

    def hump_overlap(self, center_shift: float) -> float:
        """Integral of exp(-(x + center_shift)^2/2) psi(x) over the line."""
        spread = 1.0 + self.kappa
        z, w = gauss_hermite_weighted(self.m // 2 + 2)
        width = math.sqrt(2.0 / spread)
        x = -center_shift / spread + width * z
        gauss = math.exp(-0.5 * center_shift ** 2 * self.kappa / spread)
        return float(width * gauss * np.sum(w * self.poly(x)))


def ba_probability(p: BackactionParams) -> float:
    """P(m) for the network."""
    return _Conditioned(p).probability()


def ba_probability_distribution(p: BackactionParams, m_max: int) -> np.ndarray:
    """P(0), ..., P(m_max) for the network parameters in ``p`` (its own m is ignored)."""
    return np.array([ba_probability(p.copy(update={"m": m})) for m in range(m_max + 1)])


def _default_grid(state: _Conditioned) -> QuadGrid:
    scale = 1.0 / math.sqrt(state.kappa)
    grid = gauss_hermite_grid(SimulationConfig.QUAD_NODES, scale)
    while True:
        edge = np.max(state.values(grid.nodes[[0, -1]]) ** 2)
        if edge < 1e-14 or scale > 1e3:
            return grid
        scale *= 2.0
        grid = gauss_hermite_grid(SimulationConfig.QUAD_NODES, scale)


def ba_conditioned_state(p: BackactionParams, grid: Optional[QuadGrid] = None) -> Tuple[np.ndarray, float, QuadGrid]:
    """
    Normalized mode-1 wavefunction after counting m photons in mode 2.

    Returns the wavefunction sampled on the grid nodes, P(m), and the grid used.
    """
    state = _Conditioned(p)
    probability = state.probability()
    if probability < SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Counting {p.m} photons has probability {probability:.3e}")
    grid = grid or _default_grid(state)
    return state.values(grid.nodes) / math.sqrt(probability), probability, grid


def ba_fidelity(p: BackactionParams, alpha: float, parity: str = "+") -> float:
    """|integral of Psi_parity(alpha, x) psi_m(x) dx|^2, exactly; zero when the parities differ."""
    if parity not in ("+", "-"):
        raise ValueError(f"Unknown parity: {parity}")
    if (p.m % 2 == 0) != (parity == "+"):
        return 0.0
    state = _Conditioned(p)
    probability = state.probability()
    if probability < SimulationConfig.ZERO_PROBABILITY:
        return 0.0
    sign = 1.0 if parity == "+" else -1.0
    shift = math.sqrt(2.0) * alpha
    norm = math.sqrt(2.0 + 2.0 * sign * math.exp(-2.0 * alpha * alpha))
    overlap = (state.hump_overlap(shift) + sign * state.hump_overlap(-shift)) * math.pi ** -0.25 / norm
    return float(min(overlap * overlap / probability, 1.0))


def _evaluate(p: BackactionParams, alpha: float, parity: str) -> Tuple[float, float]:
    return ba_fidelity(p, alpha, parity), ba_probability(p)


def ba_tradeoff_point(p: BackactionParams, alpha: float, parity: str = "+") -> SchemeReport:
    """Fidelity and probability at a caller-supplied parameter point."""
    fid, prob = _evaluate(p, alpha, parity)
    return SchemeReport(
        fidelity=fid,
        probability=prob,
        params={
            "variant": p.variant, "m": p.m, "r": p.r, "s": p.s, "T": p.T,
            "r_db": squeeze_db(p.r), "s_db": squeeze_db(p.s),
        },
        target={"alpha": alpha, "parity": parity},
    )


def _reflecting_splitter(state: FockVector, T: float, check_tail: bool) -> FockVector:
    """The splitter of ``splitter_matrix``: parity on mode 2, then B(T)."""
    parity = np.diag((-1.0) ** np.arange(state.dims[1]))
    flipped = FockVector(state.dims, apply_single_mode(state, parity, 1))
    return beam_splitter(flipped, T, 0, 1, check_tail)


def ba_state_fock(p: BackactionParams, dim: int = 40, check_tail: bool = True) -> Tuple[FockVector, float]:
    """Truncated-Fock simulation of the same network; returns the normalized mode-1 state and P(m)."""
    state = tensor(vacuum(dim), vacuum(dim))
    if p.variant == "song":
        state = apply_two_mode_squeeze(state, p.r, 0, 1, check_tail)
        state = _reflecting_splitter(state, p.T, check_tail)
        state = apply_squeeze(state, p.s, 0, check_tail)
    elif p.variant == "improved":
        state = apply_squeeze(state, p.s, 0, check_tail)
        state = apply_two_mode_squeeze(state, p.r, 0, 1, check_tail)
        state = _reflecting_splitter(state, p.T, check_tail)
    else:
        state = apply_squeeze(state, p.r, 0, check_tail)
        state = apply_squeeze(state, p.s, 1, check_tail)
        state = _reflecting_splitter(state, p.T, check_tail)
    amps, probability = project_number(state, 1, p.m)
    if probability < SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Counting {p.m} photons has probability {probability:.3e}")
    return FockVector((dim,), amps / math.sqrt(probability)), probability


BOX: Dict[str, Tuple[float, float]] = {"r": (-2.0, 2.0), "s": (-2.5, 2.5), "T": (0.0, 1.0)}


def ba_objective(variant: str, m: int, alpha: float, parity: str = "+") -> Callable[[np.ndarray], Tuple[float, float]]:
    def objective(x: np.ndarray) -> Tuple[float, float]:
        r, s, T = (float(v) for v in x)
        p = BackactionParams(variant=variant, r=r, s=s, T=min(max(T, 0.0), 1.0), m=m)
        return _evaluate(p, alpha, parity)
    return objective


def ba_optimize(
    variant: str,
    m: int,
    alpha: float = 2.0,
    parity: str = "+",
    runner=None,
    seeds: Optional[List[Tuple[float, float, float]]] = None,
) -> SchemeReport:
    """Highest fidelity over (r, s, T), then highest probability among the fidelity maximizers."""
    from ..analysis.optimize import OptProblem, maximize_lex

    if variant not in VARIANTS:
        raise ValueError(f"Unknown back-action variant: {variant}")
    problem = OptProblem(
        objective=ba_objective(variant, m, alpha, parity),
        box=[BOX["r"], BOX["s"], BOX["T"]],
        names=["r", "s", "T"],
        seeds=list(seeds or []),
    )
    best = maximize_lex(problem, runner=runner)
    r, s, T = (best.params[k] for k in ("r", "s", "T"))
    report = ba_tradeoff_point(BackactionParams(variant=variant, r=r, s=s, T=T, m=m), alpha, parity)
    report.notes.extend(best.notes)
    return report
