import math

import numpy as np
import pytest

from cat_state_lab.errors import InvalidDistributionError, ZeroProbabilityError
from cat_state_lab.models import DetectorModel
from cat_state_lab.states.channels import (
    cat_loss_fidelity,
    cat_loss_state,
    click_weight,
    condition_on_count,
    dark_count_pmf,
    detector_pmf,
    loss_channel,
    loss_kraus,
    no_click_weight,
    response_matrix,
    tomography_cost,
)
from cat_state_lab.states.fock import (
    cat_state,
    coherent_state,
    fidelity,
    fock_state,
    tensor,
)


def test_dark_count_pmf_is_normalized():
    assert dark_count_pmf(0.0).tolist() == [1.0]
    assert dark_count_pmf(0.05).sum() == pytest.approx(1.0, abs=1e-12)


def test_response_matrix_columns_are_distributions(apd):
    matrix = response_matrix(apd, 15)
    np.testing.assert_allclose(matrix.sum(axis=0), 1.0, atol=1e-12)
    assert np.all(matrix >= 0)


def test_ideal_detector_is_the_identity(ideal_detector):
    np.testing.assert_allclose(response_matrix(ideal_detector, 6), np.eye(7))


def test_response_matrix_binomial_entries():
    det = DetectorModel(eta=0.5)
    matrix = response_matrix(det, 4)
    assert matrix[2, 4] == pytest.approx(6 / 16)
    assert matrix[0, 3] == pytest.approx(1 / 8)


def test_detector_pmf_validates_its_input(tes):
    with pytest.raises(InvalidDistributionError):
        detector_pmf(np.array([0.5, 0.4]), tes)
    pmf = detector_pmf(np.array([0.2, 0.3, 0.5]), tes)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


def test_click_weights(apd):
    assert no_click_weight(apd, 0) == pytest.approx(math.exp(-apd.dark_mean))
    np.testing.assert_allclose(click_weight(apd, np.arange(4)) + no_click_weight(apd, np.arange(4)), 1.0)
    assert click_weight(DetectorModel(), 0) == 0.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("eta", [0.5, 0.9, 0.99])
@pytest.mark.parametrize("parity, phase", [("+", 0.0), ("-", math.pi)])
def test_closed_form_cat_loss_matches_kraus(alpha, eta, parity, phase):
    dim = 35
    cat = cat_state(alpha, phase, dim)
    lossy = loss_channel(cat, eta)
    assert lossy.is_valid()
    assert cat_loss_fidelity(alpha, eta, parity) == pytest.approx(fidelity(cat, lossy), abs=1e-8)
    closed = cat_loss_state(alpha, eta, parity, dim)
    np.testing.assert_allclose(closed.mat, lossy.mat, atol=1e-8)


def test_large_cat_decoheres_quickly():
    value = cat_loss_fidelity(10.0, 0.999, "+")
    assert 0.45 <= value <= 0.55


def test_lossless_cat_keeps_full_fidelity():
    assert cat_loss_fidelity(2.0, 1.0, "+") == pytest.approx(1.0, abs=1e-12)


def test_loss_on_a_coherent_state_shrinks_it():
    dim = 30
    lossy = loss_channel(coherent_state(2.0, dim), 0.64)
    assert fidelity(coherent_state(1.6, dim), lossy) == pytest.approx(1.0, abs=1e-10)


def test_loss_on_a_density_matches_loss_on_a_vector():
    dim = 20
    state = cat_state(1.0, 0.0, dim)
    from_vector = loss_channel(state, 0.7)
    from_density = loss_channel(from_vector, 1.0)
    np.testing.assert_allclose(from_density.mat, from_vector.mat, atol=1e-14)


def test_condition_on_count_with_inefficient_detector():
    dim = 20
    state = tensor(coherent_state(1.0, dim), fock_state(2, dim))
    rest, probability = condition_on_count(state, 1, 2, DetectorModel(eta=0.5))
    assert probability == pytest.approx(0.25)
    assert fidelity(coherent_state(1.0, dim), rest) == pytest.approx(1.0, abs=1e-12)


def test_condition_on_impossible_count(ideal_detector):
    state = tensor(coherent_state(1.0, 20), fock_state(0, 20))
    with pytest.raises(ZeroProbabilityError):
        condition_on_count(state, 1, 3, ideal_detector)


def test_tomography_cost():
    cost = tomography_cost(10, 0.01)
    assert cost["counts_per_histogram"] == pytest.approx(40000)
    assert cost["phases"] == 11
    assert cost["total"] == pytest.approx(440000)
    with pytest.raises(ValueError):
        tomography_cost(10, 0.0)


def test_loss_kraus_operators_are_complete():
    dim = 12
    ops = loss_kraus(0.7, dim)
    assert len(ops) == dim
    np.testing.assert_allclose(sum(k.T @ k for k in ops), np.eye(dim), atol=1e-12)
    assert len(loss_kraus(1.0, dim)) == 1
    with pytest.raises(ValueError):
        loss_kraus(1.2, dim)
