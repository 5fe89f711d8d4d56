"""
Photon subtraction from squeezed vacuum, with inefficient counters, impure
squeezing and dark counts, and the squeezed single-photon kitten.
"""
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import comb, gammaln

from ..config.settings import SimulationConfig
from ..errors import TruncationError, ZeroProbabilityError
from ..models import DetectorModel, SchemeReport, SubtractionConfig
from ..states.channels import loss_components, response_matrix
from ..states.fock import (
    FockDensity,
    FockVector,
    beam_splitter,
    cat_state,
    fidelity,
    squeezed_dim,
    squeezed_vacuum,
    tensor,
    to_density,
    vacuum,
)

logger = logging.getLogger(__name__)

MAX_DIM = 4096


def _parity_phase(parity: str) -> float:
    if parity not in ("+", "-"):
        raise ValueError(f"Unknown parity: {parity}")
    return 0.0 if parity == "+" else math.pi


def _subtracted_log_amps(lam_t: float, m: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Log-magnitudes and signs of c_{n,m} (lam_t/2)^{(n+m)/2}; -inf where the parity forbids n."""
    n = np.arange(dim)
    allowed = (n + m) % 2 == 0
    k = (n + m) // 2
    log_amp = np.full(dim, -np.inf)
    if lam_t == 0:
        log_amp[0] = 0.0 if m % 2 == 0 else -np.inf
        if m % 2:
            log_amp[1] = 0.0
        return log_amp, np.ones(dim)
    log_amp[allowed] = (
        gammaln(n[allowed] + m + 1)
        - 0.5 * gammaln(n[allowed] + 1)
        - gammaln(k[allowed] + 1)
        + k[allowed] * math.log(abs(lam_t) / 2.0)
    )
    signs = np.sign(lam_t) ** k
    return log_amp, signs


def subtracted_dim(lam_t: float, m: int) -> int:
    """Smallest dimension holding the subtracted state to within the tail tolerance."""
    dim = 64
    while dim <= MAX_DIM:
        log_amp, _ = _subtracted_log_amps(lam_t, m, dim)
        probs = np.exp(2.0 * (log_amp - np.max(log_amp)))
        cumulative = np.cumsum(probs) / np.sum(probs)
        below = np.nonzero(1.0 - cumulative < SimulationConfig.tail_tol() / 10.0)[0]
        if below.size and below[0] < dim - 8:
            return max(int(below[0]) + 2, m + 2)
        dim *= 2
    raise TruncationError(f"Subtracted state lam_t={lam_t}, m={m} needs more than {MAX_DIM} levels")


def subtracted_state(lam_t: float, m: int, dim: Optional[int] = None) -> FockVector:
    """Mode-1 state after ``m`` photons are counted in the tapped-off mode (perfect counter)."""
    if not -1.0 < lam_t < 1.0:
        raise ValueError(f"lambda*T must lie in (-1, 1), got {lam_t}")
    dim = dim or subtracted_dim(lam_t, m)
    log_amp, signs = _subtracted_log_amps(lam_t, m, 2 * dim)
    peak = np.max(log_amp)
    full = signs * np.exp(log_amp - peak)
    tail = float(np.sum(full[dim:] ** 2) / np.sum(full ** 2))
    if tail > SimulationConfig.tail_tol():
        raise TruncationError(f"Subtracted state leaves tail {tail:.3e} beyond dimension {dim}")
    amps = full[:dim]
    return FockVector((dim,), amps / np.linalg.norm(amps))


def subtraction_probability(lam: float, T: float, m: int) -> float:
    """Probability of counting ``m`` photons in the reflected mode."""
    if not -1.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (-1, 1), got {lam}")
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"Transmissivity must lie in [0, 1], got {T}")
    lt2 = (lam * T) ** 2
    prefactor = math.sqrt((1.0 - lam * lam) / (1.0 - lt2))
    if m == 0:
        return prefactor
    total = 0.0
    for l in range(m // 2 + 1):
        log_count = gammaln(m + 1) - gammaln(m - 2 * l + 1) - 2.0 * gammaln(l + 1) - l * math.log(4.0)
        total += math.exp(log_count) * lam ** (2 * (m - l)) * T ** (m - 2 * l)
    return float(prefactor * total * ((1.0 - T) / (1.0 - lt2)) ** m)


def _probability_support(lam: float, T: float, start: int) -> int:
    """Largest count needed so the neglected probability stays below the tail tolerance."""
    covered = sum(subtraction_probability(lam, T, n) for n in range(start))
    n = start
    while 1.0 - covered > SimulationConfig.tail_tol() and n < 400:
        covered += subtraction_probability(lam, T, n)
        n += 1
    return n


def subtracted_state_inefficient(cfg: SubtractionConfig) -> Tuple[FockDensity, float]:
    """Binomial mixture of the pure conditioned states for an inefficient counter (no dark counts)."""
    if cfg.det.dark_mean:
        raise ValueError("Dark counts need subtraction_full_model")
    if cfg.nu != 1.0:
        raise ValueError("Impure squeezing needs subtraction_full_model")
    eta = cfg.det.eta
    lam_t = cfg.lam * cfg.T
    n_max = cfg.m if eta == 1.0 else max(_probability_support(cfg.lam, cfg.T, cfg.m + 1), cfg.m)
    dim = cfg.dim or max(subtracted_dim(lam_t, n) for n in range(cfg.m, n_max + 1))
    rho = np.zeros((dim, dim), dtype=complex)
    total = 0.0
    for n in range(cfg.m, n_max + 1):
        weight = subtraction_probability(cfg.lam, cfg.T, n) * comb(n, cfg.m) * eta ** cfg.m * (1.0 - eta) ** (n - cfg.m)
        if weight == 0.0:
            continue
        vec = subtracted_state(lam_t, n, dim).vector
        rho += weight * np.outer(vec, vec.conj())
        total += weight
    if total < SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Registering {cfg.m} photons has probability {total:.3e}")
    return FockDensity((dim,), rho / total), float(total)


def subtraction_full_model(cfg: SubtractionConfig) -> Tuple[FockDensity, float]:
    """
    Squeeze, lose 1 - nu of the light, tap off 1 - T, count with efficiency eta and
    Poisson dark counts. Returns the conditioned mode-1 state and the registration probability.
    """
    dim = cfg.dim or squeezed_dim(cfg.lam)
    source = squeezed_vacuum(cfg.lam, dim)
    branches = [b for b in loss_components(source, cfg.nu, 0) if b.norm ** 2 > 1e-16]
    response = response_matrix(cfg.det, dim - 1, cfg.m)[cfg.m]
    rho = np.zeros((dim, dim), dtype=complex)
    for branch in branches:
        split = beam_splitter(tensor(branch, vacuum(dim)), cfg.T, 0, 1, check_tail=False).amps
        weighted = split * np.sqrt(response)[None, :]
        rho += weighted @ weighted.conj().T
    probability = float(np.trace(rho).real)
    if probability < SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Registering {cfg.m} counts has probability {probability:.3e}")
    logger.debug(f"Full subtraction model: {len(branches)} loss branches at dim {dim}, P={probability:.4e}")
    return FockDensity((dim,), rho / probability), probability


def subtraction_report(cfg: SubtractionConfig, alpha: float, parity: str) -> SchemeReport:
    """Fidelity with the target cat and registration probability for the full model."""
    rho, probability = subtraction_full_model(cfg)
    target = cat_state(alpha, _parity_phase(parity), rho.dims[0])
    vx, vp = quadrature_variances_db(lam_to_r(cfg.lam), cfg.nu)
    return SchemeReport(
        fidelity=fidelity(target, rho),
        probability=probability,
        params={
            "lam": cfg.lam, "T": cfg.T, "m": cfg.m, "nu": cfg.nu,
            "eta": cfg.det.eta, "dark_mean": cfg.det.dark_mean,
            "vx_db": vx, "vp_db": vp,
        },
        target={"alpha": alpha, "parity": parity},
    )


def lam_to_r(lam: float) -> float:
    return -math.atanh(lam)


def r_to_lam(r: float) -> float:
    return -math.tanh(r)


def quadrature_variances_db(r: float, nu: float) -> Tuple[float, float]:
    """(v_x, v_p) of the impure squeezed state in dB relative to the vacuum variance 1/2."""
    vx = 0.5 * (1.0 - nu) + 0.5 * nu * math.exp(-2.0 * r)
    vp = 0.5 * (1.0 - nu) + 0.5 * nu * math.exp(2.0 * r)
    return 10.0 * math.log10(2.0 * vx), 10.0 * math.log10(2.0 * vp)


def _fidelity_vs_lam_t(lam_t: float, m: int, alpha: float, parity: str) -> float:
    state = subtracted_state(lam_t, m)
    dim = max(state.dims[0], SimulationConfig.truncation_dim(alpha))
    if dim > state.dims[0]:
        state = subtracted_state(lam_t, m, dim)
    return fidelity(cat_state(alpha, _parity_phase(parity), dim), state)


def optimal_squeezed_vacuum(alpha: float) -> Tuple[float, float]:
    """(lambda*, F*) of the squeezed vacuum closest to the even cat."""
    result = minimize_scalar(
        lambda lam: -_fidelity_vs_lam_t(lam, 0, alpha, "+"),
        bounds=(0.0, 0.99),
        method="bounded",
        options={"xatol": 1e-8},
    )
    return float(result.x), float(-result.fun)


def subtraction_optimize(m: int, alpha: float, parity: Optional[str] = None, lam: Optional[float] = None) -> SchemeReport:
    """
    Best lambda*T for counting ``m`` photons; the probability is reported for
    the given ``lam`` or, by default, for lambda = T.
    """
    parity = parity or ("+" if m % 2 == 0 else "-")
    if (m % 2 == 0) != (parity == "+"):
        return SchemeReport(fidelity=0.0, probability=0.0, params={"m": m}, target={"alpha": alpha, "parity": parity})
    grid = np.linspace(0.02, 0.98, 49)
    values = [_fidelity_vs_lam_t(x, m, alpha, parity) for x in grid]
    k = int(np.argmax(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    result = minimize_scalar(
        lambda x: -_fidelity_vs_lam_t(x, m, alpha, parity),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-8},
    )
    lam_t = float(result.x)
    if lam is None:
        lam = T = math.sqrt(lam_t)
    else:
        T = lam_t / lam
        if not 0.0 <= T <= 1.0:
            raise ValueError(f"lambda={lam} cannot reach lambda*T={lam_t:.4f}")
    return SchemeReport(
        fidelity=-float(result.fun),
        probability=subtraction_probability(lam, T, m),
        params={"m": m, "lam_t": lam_t, "lam": lam, "T": T},
        target={"alpha": alpha, "parity": parity},
    )


def subtraction_curves(
    base: SubtractionConfig,
    alpha: float,
    parity: str,
    etas: Optional[Sequence[float]] = None,
    darks: Optional[Sequence[float]] = None,
) -> List[SchemeReport]:
    """Full-model fidelity and probability as the counter efficiency or dark-count mean is swept."""
    reports = []
    for eta in etas or []:
        det = DetectorModel(eta=eta, dark_mean=base.det.dark_mean)
        reports.append(subtraction_report(base.copy(update={"det": det}), alpha, parity))
    for dark in darks or []:
        det = DetectorModel(eta=base.det.eta, dark_mean=dark)
        reports.append(subtraction_report(base.copy(update={"det": det}), alpha, parity))
    return reports


def _kitten_log_probs(r: float, pairs: int) -> np.ndarray:
    k = np.arange(pairs)
    t = abs(math.tanh(r))
    power = 2 * k * math.log(t) if t > 0 else np.where(k == 0, 0.0, -np.inf)
    return power + gammaln(2 * k + 2) - 3.0 * math.log(math.cosh(r)) - 2 * k * math.log(2.0) - 2 * gammaln(k + 1)


def kitten_dim(r: float) -> int:
    pairs = 32
    while pairs <= MAX_DIM:
        probs = np.exp(_kitten_log_probs(r, pairs))
        below = np.nonzero(1.0 - np.cumsum(probs) < SimulationConfig.tail_tol() / 10.0)[0]
        if below.size:
            return int(2 * below[0] + 3)
        pairs *= 2
    raise TruncationError(f"Squeezed photon r={r} needs more than {MAX_DIM} levels")


def kitten_state(r: float, dim: Optional[int] = None) -> FockVector:
    """S(-r)|1> = sum_n tanh(r)^n sqrt((2n+1)!) / (cosh(r)^{3/2} 2^n n!) |2n+1>."""
    dim = dim or kitten_dim(r)
    pairs = dim // 2
    amps = np.zeros(dim, dtype=complex)
    signs = np.sign(math.tanh(r)) ** np.arange(pairs) if r != 0 else np.ones(pairs)
    amps[1::2] = signs * np.exp(0.5 * _kitten_log_probs(r, pairs))
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if tail > SimulationConfig.tail_tol():
        raise TruncationError(f"Squeezed photon r={r} leaves tail {tail:.3e} beyond dimension {dim}")
    return FockVector((dim,), amps / np.linalg.norm(amps))


def kitten_fidelity(r: float, alpha: float) -> float:
    """|<Psi_-(alpha)|S(-r)|1>|^2 in closed form."""
    a2 = alpha * alpha
    return float(
        2.0 * a2 * math.exp(a2 * (math.tanh(r) - 1.0))
        / (math.cosh(r) ** 3 * -math.expm1(-2.0 * a2))
    )


def kitten_optimal_r(alpha: float) -> float:
    """Stationary point of the kitten fidelity: sinh(2r) = 2 alpha^2 / 3."""
    return 0.5 * math.asinh(2.0 * alpha * alpha / 3.0)


def kitten_mixed(p: float, r: float, dim: Optional[int] = None) -> FockDensity:
    """p S|0><0|S^dag + (1 - p) S|1><1|S^dag with S = S(-r)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Vacuum fraction must lie in [0, 1], got {p}")
    dim = dim or kitten_dim(r)
    photon = to_density(kitten_state(r, dim)).mat
    squeezed = to_density(squeezed_vacuum(math.tanh(r), dim)).mat
    return FockDensity((dim,), p * squeezed + (1.0 - p) * photon)


def kitten_mixed_fidelity(p: float, r: float, alpha: float) -> float:
    """Squeezed vacuum is orthogonal to every odd cat, so the fidelity is (1 - p) F(r, alpha)."""
    return (1.0 - p) * kitten_fidelity(r, alpha)
