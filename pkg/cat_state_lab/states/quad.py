"""
Quadrature-basis wavefunctions and the integration grids used by the
back-action and small-Kerr schemes.

Hermite functions follow phi_m(x) = exp(-x^2/2) H_m(x) / sqrt(2^m m! sqrt(pi)),
evaluated by the normalized upward recurrence with running rescaling so that
large arguments neither overflow nor underflow.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union
import logging

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.legendre import leggauss

from ..config.settings import SimulationConfig
from ..errors import HermiteOverflowError

logger = logging.getLogger(__name__)

HERMITE_LIMIT = 500
_LOG_RESCALE = 100.0 * np.log(10.0)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class QuadGrid:
    """Quadrature rule: integral of f over the line is sum(weights * f(nodes))."""
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.sum(self.weights * values, axis=-1)

    def __len__(self) -> int:
        return len(self.nodes)


def _hermite_rows(mmax: int, x: ArrayLike, gaussian: bool = True) -> np.ndarray:
    """Rows phi_0..phi_mmax at x; with gaussian=False the exp(-x^2/2) factor is left out."""
    x = np.asarray(x, dtype=float)
    out = np.empty((mmax + 1,) + x.shape)
    half = -0.5 * x * x if gaussian else np.zeros_like(x)
    prev = np.zeros_like(x)
    cur = np.full_like(x, np.pi ** -0.25)
    log_scale = np.zeros_like(x)
    out[0] = cur * np.exp(half)
    for n in range(mmax):
        nxt = np.sqrt(2.0 / (n + 1)) * x * cur - np.sqrt(n / (n + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            prev = np.where(big, prev * 1e-100, prev)
            cur = np.where(big, cur * 1e-100, cur)
            log_scale = np.where(big, log_scale + _LOG_RESCALE, log_scale)
        out[n + 1] = cur * np.exp(log_scale + half)
    return out


def hermite_table(mmax: int, x: ArrayLike) -> np.ndarray:
    """All normalized Hermite functions phi_0..phi_mmax evaluated at x."""
    if mmax > HERMITE_LIMIT:
        raise HermiteOverflowError(f"Hermite index {mmax} exceeds {HERMITE_LIMIT}")
    return _hermite_rows(mmax, x)


def hermite_fn(m: int, x: ArrayLike) -> ArrayLike:
    """Normalized Hermite function phi_m(x)."""
    if m < 0:
        raise ValueError(f"Hermite index must be non-negative, got {m}")
    values = hermite_table(m, x)[m]
    return float(values) if np.ndim(values) == 0 else values


def hermite_poly(m: int, x: ArrayLike) -> np.ndarray:
    """phi_m(x) * exp(x^2/2): the polynomial part of the Hermite function."""
    return _hermite_rows(m, x, gaussian=False)[m]


@lru_cache(maxsize=32)
def _gauss_hermite_rule(n: int):
    nodes, _ = hermgauss(n)
    # w_i * exp(y_i^2) = 1 / sum_k phi_k(y_i)^2, stable where w_i underflows
    scaled = 1.0 / np.sum(_hermite_rows(n - 1, nodes) ** 2, axis=0)
    nodes.setflags(write=False)
    scaled.setflags(write=False)
    return nodes, scaled


@lru_cache(maxsize=32)
def _gauss_hermite_weight_rule(n: int):
    nodes, weights = hermgauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite_grid(n: Optional[int] = None, scale: float = 1.0, center: float = 0.0) -> QuadGrid:
    """Gauss-Hermite nodes stretched by ``scale`` for plain integrals over the line."""
    n = n or SimulationConfig.QUAD_NODES
    y, scaled = _gauss_hermite_rule(n)
    return QuadGrid(nodes=center + scale * y, weights=scale * scaled, kind="gauss-hermite")


def gauss_hermite_weighted(n: int):
    """Nodes and weights for integrals against exp(-y^2)."""
    return _gauss_hermite_weight_rule(n)


def legendre_panels(a: float, b: float, width: float = 1.0, order: int = 20) -> QuadGrid:
    """Composite Gauss-Legendre rule on [a, b] with panels no wider than ``width``."""
    if b <= a:
        return QuadGrid(nodes=np.zeros(0), weights=np.zeros(0), kind="legendre")
    panels = max(1, int(np.ceil((b - a) / width)))
    t, w = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return QuadGrid(nodes=nodes, weights=weights, kind="legendre")


def integrate(func: Callable[[np.ndarray], np.ndarray], grid: QuadGrid) -> np.ndarray:
    return grid.integrate(func(grid.nodes))


def integrate_adaptive(
    func: Callable[[np.ndarray], np.ndarray],
    scale: float = 1.0,
    center: float = 0.0,
    n0: Optional[int] = None,
    tol: Optional[float] = None,
) -> np.ndarray:
    """
    Integrate ``func`` over the real line with scaled Gauss-Hermite grids,
    doubling the node count until successive estimates agree.

    Args:
        func: Vectorized integrand; the node axis must be the last axis of its output
        scale: Grid stretch, roughly the width of the integrand
        center: Grid center
        n0: Starting node count
        tol: Relative agreement required between successive estimates

    Returns:
        The integral estimate (array if the integrand is array valued)
    """
    n = n0 or SimulationConfig.QUAD_NODES
    tol = tol or SimulationConfig.QUAD_TOL
    previous = integrate(func, gauss_hermite_grid(n, scale, center))
    while 2 * n <= SimulationConfig.QUAD_MAX_NODES:
        n *= 2
        current = integrate(func, gauss_hermite_grid(n, scale, center))
        change = np.max(np.abs(current - previous))
        if change <= tol * max(1.0, float(np.max(np.abs(current)))):
            logger.debug(f"Quadrature converged at {n} nodes (change {change:.2e})")
            return current
        previous = current
    logger.warning(f"Quadrature did not converge within {SimulationConfig.QUAD_MAX_NODES} nodes")
    return previous


def cat_wavefunction(alpha: float, parity: str, basis: str, v: ArrayLike) -> ArrayLike:
    """Even (+) or odd (-) cat wavefunction in the x or p quadrature basis."""
    if alpha <= 0:
        raise ValueError(f"Cat amplitude must be positive, got {alpha}")
    if parity not in ("+", "-"):
        raise ValueError(f"Unknown parity: {parity}")
    v = np.asarray(v, dtype=float)
    sign = 1.0 if parity == "+" else -1.0
    norm = np.sqrt(2.0 + 2.0 * sign * np.exp(-2.0 * alpha * alpha))
    shift = np.sqrt(2.0) * alpha
    if basis == "x":
        value = (np.exp(-0.5 * (v + shift) ** 2) + sign * np.exp(-0.5 * (v - shift) ** 2)) + 0j
    elif basis == "p":
        if parity == "+":
            value = 2.0 * np.exp(-0.5 * v * v) * np.cos(shift * v) + 0j
        else:
            value = 2j * np.exp(-0.5 * v * v) * np.sin(shift * v)
    else:
        raise ValueError(f"Unknown quadrature basis: {basis}")
    value = np.pi ** -0.25 * value / norm
    return complex(value) if np.ndim(value) == 0 else value


def coherent_wavefunction_x(alpha: complex, x: ArrayLike) -> ArrayLike:
    """<x|alpha> with x = (a + a^dag)/sqrt(2)."""
    x = np.asarray(x, dtype=float)
    alpha = complex(alpha)
    value = np.pi ** -0.25 * np.exp(
        -0.5 * x * x + np.sqrt(2.0) * alpha * x - 0.5 * alpha * alpha - 0.5 * abs(alpha) ** 2
    )
    return complex(value) if value.ndim == 0 else value
