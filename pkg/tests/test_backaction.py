import math

import numpy as np
import pytest

from cat_state_lab.config.presets import PresetRegistry
from cat_state_lab.models import BackactionParams
from cat_state_lab.schemes.backaction import (
    back_action_condition,
    ba_conditioned_state,
    ba_fidelity,
    ba_probability,
    ba_probability_distribution,
    ba_state_fock,
    ba_tradeoff_point,
    network_matrix,
    splitter_matrix,
)
from cat_state_lab.states.fock import (
    apply_squeeze,
    apply_two_mode_squeeze,
    beam_splitter,
    cat_state,
    coherent_state,
    fidelity,
    fock_state,
    tensor,
    vacuum,
)

SMALL_POINTS = [
    BackactionParams(variant="song", r=0.3, s=-0.4, T=0.8, m=2),
    BackactionParams(variant="improved", r=-0.3, s=-0.4, T=0.9, m=2),
    BackactionParams(variant="simplified", r=0.3, s=-0.4, T=0.7, m=2),
    BackactionParams(variant="simplified", r=0.2, s=-0.3, T=0.6, m=1),
]


@pytest.mark.parametrize("p", SMALL_POINTS, ids=lambda p: f"{p.variant}-m{p.m}")
def test_quadrature_results_match_the_fock_network(p):
    dim = 50
    state, probability = ba_state_fock(p, dim, check_tail=False)
    assert ba_probability(p) == pytest.approx(probability, abs=1e-8)
    parity, phase = ("+", 0.0) if p.m % 2 == 0 else ("-", math.pi)
    expected = fidelity(cat_state(1.0, phase, dim), state)
    assert ba_fidelity(p, 1.0, parity) == pytest.approx(expected, abs=1e-7)


def test_parity_mismatch_gives_zero_fidelity():
    assert ba_fidelity(SMALL_POINTS[0], 2.0, "-") == 0.0
    with pytest.raises(ValueError):
        ba_fidelity(SMALL_POINTS[0], 2.0, "?")


@pytest.mark.parametrize("p", SMALL_POINTS[:3], ids=lambda p: p.variant)
def test_count_distribution_is_normalized(p):
    assert ba_probability_distribution(p, 40).sum() == pytest.approx(1.0, abs=1e-6)


def test_conditioned_wavefunction_has_the_parity_of_m():
    p = SMALL_POINTS[2]
    psi, probability, grid = ba_conditioned_state(p)
    # Gauss-Hermite nodes are symmetric about the centre
    np.testing.assert_allclose(psi, psi[::-1], atol=1e-10)
    assert grid.integrate(np.abs(psi) ** 2) == pytest.approx(1.0, abs=1e-9)
    assert probability == pytest.approx(ba_probability(p))


def test_network_matrix_determinant():
    for p in SMALL_POINTS:
        L = network_matrix(p)
        expected = math.exp(p.s) if p.variant != "simplified" else math.exp(p.r + p.s)
        assert abs(np.linalg.det(L)) == pytest.approx(expected)


def test_two_mode_squeezer_splits_into_single_mode_squeezers():
    dim = 20
    r = 0.2
    state = tensor(coherent_state(0.3, dim), fock_state(1, dim))
    direct = apply_two_mode_squeeze(state, r, 0, 1, check_tail=False)
    rotated = beam_splitter(state, 0.5, 1, 0, check_tail=False)
    rotated = apply_squeeze(rotated, r, 0, check_tail=False)
    rotated = apply_squeeze(rotated, -r, 1, check_tail=False)
    rotated = beam_splitter(rotated, 0.5, 0, 1, check_tail=False)
    assert fidelity(direct, rotated) == pytest.approx(1.0, abs=1e-8)


def test_two_mode_squeezed_vacuum_from_single_mode_squeezers():
    dim = 20
    r = 0.25
    vac = tensor(vacuum(dim), vacuum(dim))
    direct = apply_two_mode_squeeze(vac, r, 0, 1, check_tail=False)
    split = apply_squeeze(apply_squeeze(vac, r, 0, check_tail=False), -r, 1, check_tail=False)
    split = beam_splitter(split, 0.5, 0, 1, check_tail=False)
    assert fidelity(direct, split) == pytest.approx(1.0, abs=1e-8)


def test_back_action_condition_limits():
    assert back_action_condition(0.0) == pytest.approx(1.0)
    assert back_action_condition(20.0) == pytest.approx(0.5)


def _quoted_rows():
    for table in (1, 2, 3):
        entry = PresetRegistry.get("table", table)
        for row in entry["rows"]:
            yield pytest.param(entry["variant"], row, id=f"table{table}-m{row['m']}")


@pytest.mark.parametrize("variant, row", list(_quoted_rows()))
def test_quoted_table_rows(variant, row):
    p = BackactionParams(variant=variant, r=row["r"], s=row["s"], T=row["T"], m=row["m"])
    assert ba_fidelity(p, 2.0, "+") == pytest.approx(row["fidelity"], abs=2e-3)
    assert ba_probability(p) == pytest.approx(row["probability"], rel=0.2)


def test_splitter_is_a_reflection():
    for T in (0.0, 0.3, 0.808, 1.0):
        B = splitter_matrix(T)
        np.testing.assert_allclose(B @ B, np.eye(2), atol=1e-12)
        assert np.linalg.det(B) == pytest.approx(-1.0)


@pytest.mark.parametrize("name, probability", [("song_low_squeezing", 4e-11), ("simplified_low_squeezing", 1.3e-6)])
def test_low_squeezing_tradeoff_points(name, probability):
    report = ba_tradeoff_point(PresetRegistry.tradeoff(name), 2.0, "+")
    assert report.fidelity == pytest.approx(0.9709, abs=1e-3)
    assert probability / 2 <= report.probability <= probability * 2
    assert report.params["variant"] == PresetRegistry.get("tradeoff", name)["variant"]
