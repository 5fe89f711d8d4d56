"""
Growing two kittens into a larger cat with linear optics and two photon counters.

Modes 0 and 1 carry the kittens, mode 2 a coherent state |gamma>. Splitter 1
mixes modes (0, 1) with T = beta^2 / (alpha^2 + beta^2), splitter 2 mixes
modes (2, 0) with T = 1/2, and the cat of amplitude sqrt(alpha^2 + beta^2)
is kept in mode 1 when both counters (modes 0 and 2) register photons.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.stats import poisson

from ..config.settings import SimulationConfig
from ..errors import CutoffError, TermCountOverflowError, ZeroProbabilityError
from ..models import DetectorModel, GrowthConfig, SchemeReport
from ..states.channels import click_weight
from ..states.css import (
    CSS,
    CssOperator,
    css_beam_splitter,
    css_cat,
    css_fold,
    css_reduced_matrix,
    css_tensor,
    number_overlap,
)
from ..states.fock import (
    FockDensity,
    FockVector,
    beam_splitter,
    cat_state,
    coherent_state,
    fidelity,
    squeezed_vacuum,
    tensor,
)
from .subtraction import kitten_dim, kitten_optimal_r, kitten_state

logger = logging.getLogger(__name__)


def growth_transmissivity(alpha: float, beta: float) -> float:
    return beta * beta / (alpha * alpha + beta * beta)


def growth_probability(alpha: float, beta: float, phi: float, varphi: float) -> float:
    """Closed-form success probability with ideal counters."""
    a2, b2 = alpha * alpha, beta * beta
    click = -math.expm1(-2.0 * a2 * b2 / (a2 + b2))
    numerator = click ** 2 * (1.0 + math.cos(phi + varphi) * math.exp(-2.0 * (a2 + b2)))
    denominator = 2.0 * (1.0 + math.cos(phi) * math.exp(-2.0 * a2)) * (1.0 + math.cos(varphi) * math.exp(-2.0 * b2))
    return numerator / denominator


def growth_network(cfg: GrowthConfig) -> CSS:
    """Three-mode superposition leaving both splitters, before detection."""
    state = css_tensor(
        css_cat(cfg.alpha, cfg.phi),
        css_cat(cfg.beta, cfg.varphi),
        CSS(np.ones(1), np.array([[cfg.gamma]])),
    )
    state = css_beam_splitter(state, 0, 1, growth_transmissivity(cfg.alpha, cfg.beta))
    return css_beam_splitter(state, 2, 0, 0.5)


def _accepted(form: CssOperator) -> Tuple[CssOperator, float]:
    probability = form.trace()
    if probability < SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Acceptance probability {probability:.3e}")
    return form.normalized(), probability


def grow_ideal(cfg: GrowthConfig) -> Tuple[CSS, float, float]:
    """
    Condition on both ideal counters firing.

    Returns the normalized mode-1 superposition, its amplitude and the success probability.
    """
    form = css_reduced_matrix(growth_network(cfg), keep=1, kernels={0: (1.0, 1.0, 0.0), 2: (1.0, 1.0, 0.0)})
    form, probability = _accepted(form)
    components = form.components()
    weight, output = components[0]
    if len(components) > 1 or abs(weight - 1.0) > 1e-8:
        logger.warning(f"Ideal growth output is not pure: leading weight {weight:.3e}")
    return output, cfg.amplitude, probability


def default_cutoff(cfg: GrowthConfig) -> int:
    """Largest true photon number summed per counter; the counters see at most sqrt(2) gamma."""
    return SimulationConfig.truncation_dim(math.sqrt(2.0) * cfg.gamma) - 1


def _check_cutoff(cfg: GrowthConfig, cutoff: int) -> None:
    captured = float(poisson.cdf(cutoff, 2.0 * cfg.gamma ** 2))
    if 1.0 - captured > SimulationConfig.tail_tol():
        raise CutoffError(f"Counter cutoff {cutoff} captures only {captured:.12f} of the photon number")


def _counter_kernel(labels: np.ndarray, det: DetectorModel, cutoff: int) -> np.ndarray:
    """K[j, k] = sum_{n <= cutoff} w(n) <n|b_j><b_k|n> with w the click probability."""
    kernel = np.zeros((len(labels), len(labels)), dtype=complex)
    for n in range(cutoff + 1):
        w = float(click_weight(det, n))
        if w == 0.0:
            continue
        amp = number_overlap(labels, n)
        kernel += w * np.outer(amp, amp.conj())
    return kernel


def grow_accepted_state(cfg: GrowthConfig) -> Tuple[CssOperator, float]:
    """Normalized accepted mode-1 operator and the acceptance probability, summed over true counts."""
    cutoff = cfg.fock_cutoff or default_cutoff(cfg)
    _check_cutoff(cfg, cutoff)
    state = growth_network(cfg)
    matrix = np.outer(state.coeffs, state.coeffs.conj())
    for mode in (0, 2):
        matrix = matrix * _counter_kernel(state.amps[:, mode], cfg.det, cutoff)
    return _accepted(css_fold(state.amps[:, 1], matrix))


def grow_with_detectors(cfg: GrowthConfig, target_alpha: Optional[float] = None, target_phase: Optional[float] = None) -> SchemeReport:
    """Fidelity of the accepted state with the target cat and the acceptance probability."""
    target_alpha = target_alpha or cfg.amplitude
    target_phase = cfg.phi + cfg.varphi if target_phase is None else target_phase
    form, probability = grow_accepted_state(cfg)
    return SchemeReport(
        fidelity=form.expectation(css_cat(target_alpha, target_phase)),
        probability=probability,
        params={
            "alpha": cfg.alpha, "beta": cfg.beta, "phi": cfg.phi, "varphi": cfg.varphi,
            "eta": cfg.det.eta, "dark_mean": cfg.det.dark_mean,
        },
        target={"alpha": target_alpha, "phase": float(np.mod(target_phase, 2.0 * math.pi))},
    )


def grow_fidelity_curve(
    base: GrowthConfig,
    etas: Optional[Sequence[float]] = None,
    darks: Optional[Sequence[float]] = None,
) -> List[SchemeReport]:
    """Sweep the counter efficiency or the dark-count mean around ``base``."""
    reports = []
    for eta in etas or []:
        det = DetectorModel(eta=eta, dark_mean=base.det.dark_mean)
        reports.append(grow_with_detectors(base.copy(update={"det": det})))
    for dark in darks or []:
        det = DetectorModel(eta=base.det.eta, dark_mean=dark)
        reports.append(grow_with_detectors(base.copy(update={"det": det})))
    return reports


@dataclass
class GrowthStage:
    amplitude: float
    phase: float
    fidelity: float
    probability: float
    cumulative: float
    components: int

    def to_report(self, stage: int) -> SchemeReport:
        return SchemeReport(
            fidelity=self.fidelity,
            probability=self.cumulative,
            params={
                "stage": stage,
                "amplitude": self.amplitude,
                "stage_probability": self.probability,
                "components": self.components,
            },
            target={"alpha": self.amplitude, "phase": self.phase},
        )


Ensemble = List[Tuple[float, np.ndarray]]


def _ensemble_from_density(rho: np.ndarray) -> Ensemble:
    """Eigen-ensemble of ``rho`` keeping at most GROWTH_MAX_COMPONENTS significant components."""
    weights, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    order = np.argsort(weights)[::-1]
    total = float(np.sum(weights[weights > 0]))
    kept: Ensemble = []
    for idx in order:
        if weights[idx] <= SimulationConfig.GROWTH_EIG_TOL * total:
            break
        kept.append((float(weights[idx]), vecs[:, idx]))
    retained = sum(w for w, _ in kept[:SimulationConfig.GROWTH_MAX_COMPONENTS])
    if retained < (1.0 - 1e-6) * total:
        raise TermCountOverflowError(
            f"{len(kept)} mixture components exceed the cap of {SimulationConfig.GROWTH_MAX_COMPONENTS}"
        )
    kept = kept[:SimulationConfig.GROWTH_MAX_COMPONENTS]
    return [(w / retained, v) for w, v in kept]


def _resize(vec: np.ndarray, dim: int) -> np.ndarray:
    if len(vec) >= dim:
        return vec[:dim]
    return np.concatenate([vec, np.zeros(dim - len(vec), dtype=vec.dtype)])


def _fock_stage(ensemble: Ensemble, alpha: float, det: DetectorModel, dim: int) -> Tuple[np.ndarray, float]:
    """Accepted mode-1 density (unnormalized) and acceptance probability for identical mixed inputs."""
    gamma = math.sqrt(2.0) * alpha
    coherent = coherent_state(gamma, dim)
    weight = np.sqrt(click_weight(det, np.arange(dim)))
    rho = np.zeros((dim, dim), dtype=complex)
    for wi, vi in ensemble:
        left = FockVector((dim,), _resize(vi, dim))
        for wj, vj in ensemble:
            state = tensor(left, FockVector((dim,), _resize(vj, dim)), coherent)
            state = beam_splitter(state, 0.5, 0, 1, check_tail=False)
            state = beam_splitter(state, 0.5, 2, 0, check_tail=False)
            kept = state.amps * weight[:, None, None] * weight[None, None, :]
            rho += wi * wj * np.einsum("anb,amb->nm", kept, kept.conj())
    return rho, float(np.trace(rho).real)


def grow_iterate(
    p: float,
    alpha0: float,
    iterations: int,
    det: Optional[DetectorModel] = None,
    dim: Optional[int] = None,
) -> List[SchemeReport]:
    """
    Feed identical copies of each stage's output back into the scheme.

    The first inputs are squeezed single photons S(-r)|1> mixed with squeezed
    vacuum of weight ``p``. Stage 0 reports the input kitten; later stages report
    the output fidelity, the stage probability and the cumulative probability
    P_stage * P_previous^2.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"Vacuum fraction must lie in [0, 1), got {p}")
    if iterations < 1:
        raise ValueError(f"Need at least one iteration, got {iterations}")
    det = det or DetectorModel()
    r = kitten_optimal_r(alpha0)

    def stage_dim(a: float) -> int:
        # truncated for the photon number the counters of this stage can see
        return dim or max(SimulationConfig.truncation_dim(2.0 * a), kitten_dim(r))

    d0 = stage_dim(alpha0)
    ensemble: Ensemble = [(1.0 - p, kitten_state(r, d0).vector)]
    if p > 0:
        ensemble.append((p, squeezed_vacuum(math.tanh(r), d0).vector))
    rho0 = sum(w * np.outer(v, v.conj()) for w, v in ensemble)
    alpha, phase = alpha0, math.pi
    stages = [GrowthStage(alpha, phase, fidelity(cat_state(alpha, phase, d0), FockDensity((d0,), rho0)), 1.0, 1.0, len(ensemble))]
    logger.info(f"Growing from alpha={alpha0} (p={p}) over {iterations} iterations")
    for k in range(1, iterations + 1):
        d = stage_dim(alpha)
        rho, probability = _fock_stage(ensemble, alpha, det, d)
        if probability < SimulationConfig.ZERO_PROBABILITY:
            raise ZeroProbabilityError(f"Stage {k} acceptance probability {probability:.3e}")
        rho = rho / probability
        alpha, phase = alpha * math.sqrt(2.0), np.mod(2.0 * phase, 2.0 * math.pi)
        ensemble = _ensemble_from_density(rho)
        fid = fidelity(cat_state(alpha, phase, d), FockDensity((d,), rho))
        stages.append(GrowthStage(alpha, phase, fid, probability, probability * stages[-1].cumulative ** 2, len(ensemble)))
        logger.debug(f"Stage {k}: alpha={alpha:.4f} F={fid:.6f} P={probability:.4e} components={len(ensemble)}")
    return [stage.to_report(k) for k, stage in enumerate(stages)]
