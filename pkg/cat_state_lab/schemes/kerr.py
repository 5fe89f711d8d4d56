"""
Kerr-effect cat production.

Direct production evolves |alpha> under chi n^2 with photon loss at rate gamma;
the small-Kerr scheme applies chi t = pi/N, splits the light on a 50/50 beam
splitter and conditions on a homodyne outcome; the Gerry interferometer uses a
cross-Kerr phase conditioned on which detector sees a single photon.

Times are expressed as chi_t = chi t and loss as the ratio gamma/chi.
"""
from typing import Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy import constants
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from ..config.settings import SimulationConfig
from ..errors import MissingFieldError, StepSizeError, TruncationError, ZeroProbabilityError
from ..models import KerrMaterial, SchemeReport
from ..states.css import (
    CoherentSuperposition,
    css_best_cat_fidelity,
    css_displace,
    css_inner,
    gram,
    css_normalize,
)
from ..states.fock import FockDensity, FockVector, annihilation, cat_state, fidelity, truncation_dim
from ..states.quad import coherent_wavefunction_x, legendre_panels

logger = logging.getLogger(__name__)

KERR_CAT_TIME = math.pi / 2.0
KERR_CAT_PHASE = -math.pi / 2.0


def kerr_evolve_ideal(alpha: complex, chi_t: float, dim: Optional[int] = None) -> FockVector:
    """Lossless Kerr evolution: amps[n] = e^{-|alpha|^2/2} alpha^n e^{-i chi_t n^2} / sqrt(n!)."""
    dim = dim or truncation_dim(alpha)
    n = np.arange(dim)
    alpha = complex(alpha)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return FockVector((dim,), amps)
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.exp(log_mag + 1j * (n * np.angle(alpha) - chi_t * n * n))
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if tail > SimulationConfig.tail_tol():
        raise TruncationError(f"Dimension {dim} leaves tail {tail:.3e} for alpha={alpha}")
    return FockVector((dim,), amps / np.linalg.norm(amps))


def kerr_target_cat(beta: float, dim: Optional[int] = None) -> FockVector:
    """The lossless output at chi_t = pi/2: (|-beta> - i|beta>)/sqrt(2)."""
    return cat_state(beta, KERR_CAT_PHASE, dim)


def kerr_master_evolve(
    alpha: complex,
    gamma_over_chi: float,
    chi_t: float,
    dim: Optional[int] = None,
    kerr: bool = True,
) -> FockDensity:
    """
    Integrate drho/dt = -i chi [n^2, rho] + gamma a rho a^dag - (gamma/2){n, rho}.

    The Kerr phase is removed by working in the frame sigma = U^dag rho U with
    U = exp(-i chi_t n^2), where only the loss term remains and picks up the
    phase exp(-2i (n - m) chi_t). ``kerr=False`` drops the Kerr term, leaving
    pure loss over the same time.
    """
    if gamma_over_chi < 0:
        raise ValueError(f"gamma/chi must be non-negative, got {gamma_over_chi}")
    dim = dim or truncation_dim(alpha)
    initial = kerr_evolve_ideal(alpha, 0.0, dim).vector
    n = np.arange(dim, dtype=float)
    a = annihilation(dim)
    k = np.subtract.outer(n, n) if kerr else np.zeros((dim, dim))
    g = float(gamma_over_chi)
    half_sum = 0.5 * np.add.outer(n, n)

    def rhs(tau, y):
        sigma = y.reshape(dim, dim)
        jump = (a @ sigma @ a.T) * np.exp(-2j * k * tau)
        return (g * (jump - half_sum * sigma)).ravel()

    sigma0 = np.outer(initial, initial.conj())
    if g == 0.0 or chi_t == 0.0:
        sigma = sigma0
    else:
        logger.debug(f"Integrating lossy Kerr evolution at dim {dim}, gamma/chi={g}, chi_t={chi_t}")
        sol = solve_ivp(
            rhs,
            (0.0, float(chi_t)),
            sigma0.ravel(),
            method="RK45",
            rtol=SimulationConfig.KERR_RTOL,
            atol=SimulationConfig.KERR_ATOL,
        )
        if sol.status != 0:
            logger.error(f"Master-equation integration failed: {sol.message}")
            raise StepSizeError(sol.message)
        sigma = sol.y[:, -1].reshape(dim, dim)
    phase = np.exp(-1j * chi_t * n * n) if kerr else np.ones(dim)
    rho = phase[:, None] * sigma * phase.conj()[None, :]
    rho = 0.5 * (rho + rho.conj().T)
    return FockDensity((dim,), rho)


def _series_exponent(alpha: complex, g: float, chi_t: float, n: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Log of rho_nm / (alpha^n conj(alpha)^m / sqrt(n! m!)) for the lossy Kerr solution."""
    k = n - m
    z = g + 2j * k
    # gamma (1 - e^{-z t}) / z, with the z -> 0 limit equal to zero
    safe = np.where(z == 0, 1.0, z)
    growth = np.where(z == 0, 0.0, -g * np.expm1(-z * chi_t) / safe)
    return -abs(alpha) ** 2 - (1j * k + 0.5 * g) * (n + m) * chi_t + abs(alpha) ** 2 * growth


def kerr_series_density(
    alpha: complex, gamma_over_chi: float, chi_t: float, dim: Optional[int] = None
) -> FockDensity:
    """Closed-form number-basis solution of the lossy Kerr master equation for a coherent input."""
    dim = dim or truncation_dim(alpha)
    n = np.arange(dim)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    alpha = complex(alpha)
    if alpha == 0:
        mat = np.zeros((dim, dim), dtype=complex)
        mat[0, 0] = 1.0
        return FockDensity((dim,), mat)
    log_c = n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    ph = np.angle(alpha)
    log_rho = (
        log_c[:, None] + log_c[None, :]
        + 1j * ph * (nn - mm)
        + _series_exponent(alpha, float(gamma_over_chi), float(chi_t), nn, mm)
    )
    mat = np.exp(log_rho)
    mat = 0.5 * (mat + mat.conj().T)
    return FockDensity((dim,), mat)


def kerr_loss_q_function(
    a: complex,
    alpha: complex,
    gamma_over_chi: float,
    chi_t: float = KERR_CAT_TIME,
    cutoff: Optional[int] = None,
) -> float:
    """
    Husimi Q(a) of the lossy Kerr output, summed term by term:

    Q(a) = (1/pi) e^{-|a|^2} sum_{p,q} (conj(a) alpha)^p (a conj(alpha))^q / (p! q!) * E_pq
    with E_pq the loss and phase factor of the number-basis solution.
    """
    cutoff = cutoff or truncation_dim(max(abs(alpha), abs(a)))
    p = np.arange(cutoff)
    pp, qq = np.meshgrid(p, p, indexing="ij")
    alpha = complex(alpha)
    a = complex(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_left = np.where(p == 0, 0.0, p * np.log(np.conj(a) * alpha + 0j)) - gammaln(p + 1)
        log_right = np.where(p == 0, 0.0, p * np.log(a * np.conj(alpha) + 0j)) - gammaln(p + 1)
    log_terms = (
        log_left[:, None] + log_right[None, :]
        + _series_exponent(alpha, float(gamma_over_chi), float(chi_t), pp, qq)
    )
    terms = np.exp(log_terms - abs(a) ** 2)
    terms = np.nan_to_num(terms)
    total = np.sum(terms)
    edge = np.max(np.abs(np.concatenate([terms[-1], terms[:, -1]])))
    if edge > 1e-12 * max(abs(total), 1e-300):
        logger.warning(f"Q-function series not converged at cutoff {cutoff} (edge term {edge:.2e})")
    return float(np.real(total) / np.pi)


def _lossy_fidelity_series(alpha_in: float, beta: float, g: float) -> float:
    dim = max(truncation_dim(alpha_in), truncation_dim(beta))
    rho = kerr_series_density(alpha_in, g, KERR_CAT_TIME, dim)
    return fidelity(kerr_target_cat(beta, dim), rho)


def kerr_loss_fidelity(
    beta: float,
    gamma_over_chi: float,
    optimize_input: bool = False,
    method: str = "master",
) -> SchemeReport:
    """
    Fidelity of the lossy Kerr output at chi_t = pi/2 with the Kerr cat of amplitude ``beta``.

    The input amplitude is optimized over [beta/2, 2 beta] when ``optimize_input``.
    ``method="master"`` integrates the master equation and checks it against the
    closed-form solution; ``method="series"`` uses the closed form alone.
    """
    if beta <= 0:
        raise ValueError(f"Target amplitude must be positive, got {beta}")
    if method not in ("master", "series"):
        raise ValueError(f"Unknown Kerr method: {method}")
    g = float(gamma_over_chi)
    alpha_in = beta
    if optimize_input and g > 0:
        result = minimize_scalar(
            lambda x: -_lossy_fidelity_series(x, beta, g),
            bounds=(0.5 * beta, 2.0 * beta),
            method="bounded",
            options={"xatol": 1e-6},
        )
        alpha_in = float(result.x)
    notes: List[str] = []
    series_fid = _lossy_fidelity_series(alpha_in, beta, g)
    fid = series_fid
    if method == "master":
        dim = max(truncation_dim(alpha_in), truncation_dim(beta))
        rho = kerr_master_evolve(alpha_in, g, KERR_CAT_TIME, dim)
        fid = fidelity(kerr_target_cat(beta, dim), rho)
        mismatch = abs(fid - series_fid)
        if mismatch > SimulationConfig.SERIES_MISMATCH_TOL:
            logger.warning(f"Kerr series and integrator disagree by {mismatch:.2e} at gamma/chi={g}")
            notes.append(f"series mismatch {mismatch:.2e}")
    return SchemeReport(
        fidelity=fid,
        probability=1.0,
        params={"beta": beta, "gamma_over_chi": g, "alpha_in": alpha_in, "method": method},
        target={"alpha": beta, "phase": KERR_CAT_PHASE},
        notes=notes,
    )


def kerr_fidelity_curve(
    beta: float,
    ratios: Sequence[float],
    optimize_input: bool = True,
    method: str = "series",
) -> List[SchemeReport]:
    return [kerr_loss_fidelity(beta, g, optimize_input, method) for g in ratios]


def attenuation_rate(loss_db_per_km: float, group_index: float = 1.45, convention: str = "physical") -> float:
    """Photon loss rate gamma (1/s) from a fibre attenuation in dB/km."""
    per_metre = loss_db_per_km / 1000.0
    if convention == "physical":
        factor = math.log(10.0) / 10.0
    elif convention == "quoted":
        factor = 10.0 / math.log(10.0)
    else:
        raise ValueError(f"Unknown loss convention: {convention}")
    return per_metre * factor * constants.c / group_index


def nonlinear_strength(mat: KerrMaterial) -> float:
    """chi = hbar omega^2 n2 / (A_eff T)."""
    omega = mat.omega
    if omega is None and mat.wavelength is not None:
        omega = 2.0 * math.pi * constants.c / mat.wavelength
    missing = [
        name for name, value in (("n2", mat.n2), ("a_eff", mat.a_eff), ("t_pulse", mat.t_pulse), ("omega", omega))
        if value is None
    ]
    if missing:
        raise MissingFieldError(f"Material {mat.name} lacks {', '.join(missing)}")
    return constants.hbar * omega ** 2 * mat.n2 / (mat.a_eff * mat.t_pulse)


def material_summary(mat: KerrMaterial) -> Dict[str, float]:
    """Loss rate, nonlinear strength and their ratio; quoted gamma/chi take precedence over derived ones."""
    chi = mat.chi if mat.chi is not None else nonlinear_strength(mat)
    if mat.gamma is not None:
        gamma = mat.gamma
    elif mat.loss_db_per_km is not None:
        gamma = attenuation_rate(mat.loss_db_per_km, mat.group_index, mat.loss_convention)
    else:
        raise MissingFieldError(f"Material {mat.name} has neither gamma nor an attenuation")
    summary = {"gamma": gamma, "chi": chi, "gamma_over_chi": gamma / chi}
    if mat.quoted_ratio is not None:
        summary["quoted_ratio"] = mat.quoted_ratio
    return summary


def material_ratio(mat: KerrMaterial) -> float:
    return material_summary(mat)["gamma_over_chi"]


def small_kerr_coefficients(N: int) -> np.ndarray:
    """C_{n,N} for n = 1..N, so that e^{-i pi n^2/N}|alpha> = sum_n C_n |-alpha e^{2 i pi n/N}>."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    n = np.arange(1, N + 1)[:, None]
    k = np.arange(N)[None, :]
    return np.sum((-1.0) ** k * np.exp(-1j * np.pi * k * (2 * n + k) / N), axis=1) / N


def small_kerr_output(alpha_i: float, N: int) -> CoherentSuperposition:
    """The Kerr output for chi_t = pi/N as an N-term superposition."""
    n = np.arange(1, N + 1)
    labels = -alpha_i * np.exp(2j * np.pi * n / N)
    return CoherentSuperposition(small_kerr_coefficients(N), labels[:, None])


def _split_labels(alpha_i: float, N: int) -> np.ndarray:
    n = np.arange(1, N + 1)
    return -alpha_i * np.exp(2j * np.pi * n / N) / np.sqrt(2.0)


def _check_small_kerr(alpha_i: float, N: int) -> None:
    if alpha_i <= 0:
        raise ValueError(f"Input amplitude must be positive, got {alpha_i}")
    if N < 2 or N % 2:
        raise ValueError(f"N must be even and at least 2, got {N}")


def small_kerr_target(alpha_i: float) -> complex:
    return 1j * alpha_i / np.sqrt(2.0)


def small_kerr_condition(alpha_i: float, N: int, x: float) -> Tuple[CoherentSuperposition, float, float, complex]:
    """
    Condition mode 1 on the homodyne outcome ``x`` of mode 2.

    Returns the normalized superposition, the best cat phase, the fidelity
    and the cat amplitude i alpha_i / sqrt(2).
    """
    _check_small_kerr(alpha_i, N)
    labels = _split_labels(alpha_i, N)
    weights = small_kerr_coefficients(N) * np.array([coherent_wavefunction_x(b, x) for b in labels])
    raw = CoherentSuperposition(weights, labels[:, None])
    if css_inner(raw, raw).real <= SimulationConfig.ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"Homodyne outcome x={x} has zero density")
    state = css_normalize(raw)
    target = small_kerr_target(alpha_i)
    fid, phase = css_best_cat_fidelity(state, target)
    return state, phase, fid, target


def small_kerr_fidelity_scan(alpha_i: float, N: int, xs: Sequence[float]) -> List[Dict[str, float]]:
    """Best fidelity and cat phase for each homodyne outcome."""
    rows = []
    for x in xs:
        _, phase, fid, _ = small_kerr_condition(alpha_i, N, float(x))
        rows.append({"x": float(x), "fidelity": fid, "phase": phase})
    return rows


def small_kerr_probability(alpha_i: float, N: int, delta: float) -> float:
    """Probability that the homodyne outcome falls in [-delta, delta]."""
    _check_small_kerr(alpha_i, N)
    if delta <= 0:
        raise ValueError(f"Acceptance half-width must be positive, got {delta}")
    labels = _split_labels(alpha_i, N)
    coeffs = small_kerr_coefficients(N)
    single = CoherentSuperposition(np.ones(N), labels[:, None])
    overlap = gram(single.amps, single.amps)
    two_mode_norm = float(np.real(coeffs.conj() @ (overlap ** 2) @ coeffs))
    # oscillation in the integrand is bounded by 2 sqrt(2) max|Im b|
    width = min(1.0, 2.0 * np.pi / (1.0 + 2.0 * np.sqrt(2.0) * np.max(np.abs(labels))))
    grid = legendre_panels(-delta, delta, width=width)
    wave = np.array([coherent_wavefunction_x(b, grid.nodes) for b in labels])
    amps = coeffs[:, None] * wave
    density = np.real(np.einsum("nx,nm,mx->x", amps.conj(), overlap, amps))
    return float(grid.integrate(density) / two_mode_norm)


def kerr_output_fidelity(alpha_i: float, N: int) -> float:
    """Best fidelity of the Kerr output (before the beam splitter) with a cat of amplitude alpha_i."""
    _check_small_kerr(alpha_i, N)
    state = css_normalize(small_kerr_output(alpha_i, N))
    best = 0.0
    for n in range(1, N // 2 + 1):
        fid, _ = css_best_cat_fidelity(state, -alpha_i * np.exp(2j * np.pi * n / N))
        best = max(best, fid)
    return best


def _gerry_branch(alpha: float, phi: float, outcome: str) -> CoherentSuperposition:
    if outcome not in ("A", "B"):
        raise ValueError(f"Outcome must be 'A' or 'B', got {outcome}")
    sign = 1.0 if outcome == "B" else -1.0
    return CoherentSuperposition(
        np.array([0.5, 0.5 * sign]),
        np.array([[alpha * np.exp(-1j * phi)], [alpha]]),
    )


def gerry_scheme(alpha: float, phi: float, outcome: str) -> CoherentSuperposition:
    """
    Output of the cross-Kerr interferometer when only detector ``outcome`` fires:
    (|alpha e^{-i phi}> + |alpha>) for B, (|alpha e^{-i phi}> - |alpha>) for A.
    """
    return css_normalize(_gerry_branch(alpha, phi, outcome))


def gerry_probability(alpha: float, phi: float, outcome: str) -> float:
    """(1 +/- Re<alpha e^{-i phi}|alpha>)/2."""
    branch = _gerry_branch(alpha, phi, outcome)
    return float(css_inner(branch, branch).real)


def jeong_kerr_phase(alpha: float, beta: float) -> float:
    """Cross-Kerr phase theta with |beta e^{i theta} - beta| = 2 alpha."""
    if not 0 < alpha <= beta:
        raise ValueError(f"Need 0 < alpha <= beta, got alpha={alpha}, beta={beta}")
    return 2.0 * math.asin(alpha / beta)


def jeong_displaced_cat(beta: float, theta: float, outcome: str = "B") -> CoherentSuperposition:
    """Gerry output for a large input beta, displaced by -beta(1 + e^{-i theta})/2 to centre it on the origin."""
    state = gerry_scheme(beta, theta, outcome)
    return css_displace(state, 0, -0.5 * beta * (1.0 + np.exp(-1j * theta)))


def jeong_cat_amplitude(beta: float, theta: float) -> complex:
    """Label a of the displaced pair |-a>, |a>."""
    return 0.5 * beta * (1.0 - np.exp(-1j * theta))
