import math

import numpy as np
import pytest

from cat_state_lab.config.presets import PresetRegistry
from cat_state_lab.errors import MissingFieldError
from cat_state_lab.models import KerrMaterial
from cat_state_lab.schemes.kerr import (
    attenuation_rate,
    gerry_probability,
    gerry_scheme,
    jeong_cat_amplitude,
    jeong_displaced_cat,
    jeong_kerr_phase,
    kerr_evolve_ideal,
    kerr_fidelity_curve,
    kerr_loss_fidelity,
    kerr_loss_q_function,
    kerr_master_evolve,
    kerr_series_density,
    kerr_target_cat,
    kerr_output_fidelity,
    material_ratio,
    material_summary,
    nonlinear_strength,
    small_kerr_coefficients,
    small_kerr_condition,
    small_kerr_fidelity_scan,
    small_kerr_probability,
)
from cat_state_lab.states.css import css_best_cat_fidelity, css_cat, css_inner
from cat_state_lab.states.fock import coherent_state, fidelity, husimi_q


def test_lossless_kerr_output_is_the_target_cat():
    beta = 2.0
    dim = 40
    assert fidelity(kerr_evolve_ideal(beta, math.pi / 2, dim), kerr_target_cat(beta, dim)) == pytest.approx(1.0, abs=1e-12)


def test_lossless_master_equation_is_exact():
    report = kerr_loss_fidelity(2.0, 0.0)
    assert report.fidelity == pytest.approx(1.0, abs=1e-10)
    assert report.notes == []


def test_master_equation_agrees_with_closed_form():
    dim = 30
    master = kerr_master_evolve(1.0, 0.5, 0.8, dim)
    series = kerr_series_density(1.0, 0.5, 0.8, dim)
    np.testing.assert_allclose(master.mat, series.mat, atol=1e-6)
    assert kerr_loss_fidelity(1.0, 0.5).notes == []


def test_loss_without_kerr_shrinks_the_coherent_state():
    g, t = 0.3, 1.0
    rho = kerr_master_evolve(2.0, g, t, kerr=False)
    expected = coherent_state(2.0 * math.exp(-0.5 * g * t), rho.dims[0])
    assert fidelity(expected, rho) == pytest.approx(1.0, abs=1e-7)


def test_fidelity_falls_with_loss():
    values = [kerr_loss_fidelity(1.0, g, method="series").fidelity for g in (0.0, 0.2, 0.5, 1.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.slow
def test_half_fidelity_crossing_for_unit_cat():
    above = kerr_loss_fidelity(1.0, 1.35, optimize_input=True, method="series").fidelity
    below = kerr_loss_fidelity(1.0, 1.65, optimize_input=True, method="series").fidelity
    assert above > 0.5 > below


def test_optimized_input_never_hurts():
    plain = kerr_loss_fidelity(1.5, 0.3, method="series").fidelity
    tuned = kerr_loss_fidelity(1.5, 0.3, optimize_input=True, method="series")
    assert tuned.fidelity >= plain - 1e-9
    assert 0.75 <= tuned.params["alpha_in"] <= 3.0


def test_q_function_matches_density():
    alpha, g, t = 1.0, 0.4, 0.6
    rho = kerr_series_density(alpha, g, t, 30)
    for a in (0.0, 0.5 + 0.5j, -1.0j):
        assert kerr_loss_q_function(a, alpha, g, t) == pytest.approx(husimi_q(rho, a), abs=1e-9)


def test_kerr_method_is_validated():
    with pytest.raises(ValueError):
        kerr_loss_fidelity(1.0, 0.1, method="magic")
    with pytest.raises(ValueError):
        kerr_loss_fidelity(0.0, 0.1)


def test_attenuation_conventions():
    assert attenuation_rate(0.2, 1.45, "quoted") == pytest.approx(1.79e5, rel=1e-2)
    assert attenuation_rate(0.2, 1.45, "physical") == pytest.approx(9.52e3, rel=1e-2)
    with pytest.raises(ValueError):
        attenuation_rate(0.2, convention="other")


def test_fused_silica():
    silica = PresetRegistry.material("fused_silica")
    summary = material_summary(silica)
    assert summary["gamma"] == pytest.approx(1.79e5, rel=1e-2)
    assert summary["chi"] == pytest.approx(578.5, rel=1e-2)
    assert material_ratio(silica) == pytest.approx(310.4, abs=2)
    assert summary["quoted_ratio"] == 260.0


def test_fused_silica_ratio_follows_the_mode_area():
    silica = PresetRegistry.material("fused_silica")
    wider = silica.copy(update={"a_eff": 2 * silica.a_eff})
    assert material_ratio(wider) == pytest.approx(2 * material_ratio(silica), rel=1e-12)
    assert nonlinear_strength(wider) == pytest.approx(nonlinear_strength(silica) / 2, rel=1e-12)


def test_chalcogenide():
    glass = PresetRegistry.material("chalcogenide")
    silica = PresetRegistry.material("fused_silica")
    summary = material_summary(glass)
    assert summary["gamma"] == pytest.approx(5.425e7, rel=1e-2)
    assert summary["chi"] == pytest.approx(4.45e4, rel=1e-2)
    assert summary["gamma_over_chi"] == pytest.approx(1219, rel=1e-2)
    assert summary["quoted_ratio"] == 1.3e4
    # loss x500, n2 x76.9, group index 1.45 -> 2.4
    scale = (100.0 / 0.2) / (2e-18 / 2.6e-20) * (1.45 / 2.4)
    assert material_ratio(glass) == pytest.approx(scale * material_ratio(silica), rel=1e-9)


def test_missing_material_fields():
    with pytest.raises(MissingFieldError):
        nonlinear_strength(KerrMaterial(name="bare"))
    with pytest.raises(MissingFieldError):
        material_summary(KerrMaterial(name="bare", chi=1.0))


@pytest.mark.parametrize("N", [2, 4, 6, 20])
def test_small_kerr_coefficients_reproduce_the_kerr_phase(N):
    coeffs = small_kerr_coefficients(N)
    np.testing.assert_allclose(np.abs(coeffs), 1.0 / math.sqrt(N), atol=1e-12)
    n = np.arange(1, N + 1)
    for k in range(3 * N):
        value = np.sum(coeffs * (-np.exp(2j * math.pi * n / N)) ** k)
        assert value == pytest.approx(np.exp(-1j * math.pi * k * k / N), abs=1e-10)


def test_small_kerr_output_at_zero_homodyne_outcome():
    _, _, fid, target = small_kerr_condition(20.0 * math.sqrt(2.0), 20, 0.0)
    assert fid >= 0.99997
    assert target == pytest.approx(20.0j)


def test_small_kerr_acceptance_probability():
    assert small_kerr_probability(20.0 * math.sqrt(2.0), 20, 3.75) == pytest.approx(0.1 * math.erf(3.75), rel=0.05)
    assert small_kerr_probability(10.0 * math.sqrt(2.0), 20, 1.06) == pytest.approx(0.1 * math.erf(1.06), rel=0.05)


def test_small_kerr_rejects_odd_n():
    with pytest.raises(ValueError):
        small_kerr_condition(10.0, 5, 0.0)


def test_kerr_output_before_the_splitter_is_a_poor_cat():
    assert kerr_output_fidelity(20.0, 20) == pytest.approx(0.1, abs=0.01)


def test_gerry_interferometer():
    assert gerry_probability(2.0, math.pi, "A") == pytest.approx(0.5, abs=2e-4)
    assert gerry_probability(2.0, math.pi, "A") + gerry_probability(2.0, math.pi, "B") == pytest.approx(1.0)
    even = gerry_scheme(2.0, math.pi, "B")
    assert abs(css_inner(css_cat(2.0, 0.0), even)) ** 2 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        gerry_scheme(2.0, math.pi, "C")


def test_displaced_large_input_gives_a_cat():
    beta, alpha = 10.0, 2.0
    theta = jeong_kerr_phase(alpha, beta)
    a = jeong_cat_amplitude(beta, theta)
    assert abs(a) == pytest.approx(alpha)
    fid, _ = css_best_cat_fidelity(jeong_displaced_cat(beta, theta), a)
    assert fid == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        jeong_kerr_phase(3.0, 2.0)


def test_fidelity_curve_follows_the_ratios():
    reports = kerr_fidelity_curve(1.0, [0.0, 0.5], optimize_input=False)
    assert [r.params["gamma_over_chi"] for r in reports] == [0.0, 0.5]
    assert reports[0].fidelity > reports[1].fidelity


def test_small_kerr_scan_rows():
    rows = small_kerr_fidelity_scan(20.0, 20, [0.0, 1.0])
    assert [row["x"] for row in rows] == [0.0, 1.0]
    assert rows[0]["fidelity"] >= 0.99997
    assert all(0.0 <= row["fidelity"] <= 1.0 for row in rows)
