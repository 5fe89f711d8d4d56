import math

import numpy as np
import pytest

from cat_state_lab.config.settings import SimulationConfig
from cat_state_lab.errors import ModeMismatchError, TermCountOverflowError
from cat_state_lab.states.css import (
    CSS,
    css_beam_splitter,
    css_best_cat_fidelity,
    css_cat,
    css_displace,
    css_inner,
    css_merge,
    css_norm,
    css_project_fock,
    css_reduced_matrix,
    css_tensor,
    css_to_fock,
    gram,
)
from cat_state_lab.states.fock import (
    beam_splitter,
    cat_state,
    coherent_state,
    fidelity,
    project_number,
    tensor,
)


def coherent(a):
    return CSS(np.ones(1), np.array([[a]]))


def test_gram_of_coherent_labels():
    labels = np.array([[0.5], [-1.0j]])
    g = gram(labels, labels)
    np.testing.assert_allclose(np.diag(g), 1.0)
    assert g[0, 1] == pytest.approx(np.conj(g[1, 0]))
    assert abs(g[0, 1]) ** 2 == pytest.approx(math.exp(-abs(0.5 + 1.0j) ** 2))


@pytest.mark.parametrize("phase", [0.0, math.pi, 1.3])
def test_css_cat_matches_fock_cat(phase):
    dim = 30
    cat = css_cat(1.5, phase)
    assert css_norm(cat) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(css_to_fock(cat, dim), cat_state(1.5, phase, dim)) == pytest.approx(1.0, abs=1e-10)


def test_merge_collapses_repeated_labels():
    merged = css_merge(CSS(np.array([1.0, 2.0, 0.5]), np.array([[0.5], [0.5], [1.0]])))
    assert len(merged) == 2
    assert merged.coeffs[0] == pytest.approx(3.0)


def test_term_cap():
    n = SimulationConfig.CSS_MAX_TERMS + 1
    with pytest.raises(TermCountOverflowError):
        CSS(np.ones(n), np.zeros((n, 1)))


def test_beam_splitter_agrees_with_fock_splitter():
    dim = 25
    T = 0.3
    css_out = css_beam_splitter(css_tensor(css_cat(1.0, 0.0), coherent(0.5)), 0, 1, T)
    fock_out = beam_splitter(tensor(cat_state(1.0, 0.0, dim), coherent_state(0.5, dim)), T, 0, 1)
    assert fidelity(css_to_fock(css_out, dim), fock_out) == pytest.approx(1.0, abs=1e-9)


def test_beam_splitter_preserves_inner_products():
    state = css_tensor(css_cat(1.2, math.pi), css_cat(0.7, 0.0))
    out = css_beam_splitter(state, 1, 0, 0.4)
    assert css_inner(out, out).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        css_beam_splitter(state, 0, 0, 0.5)


def test_projection_matches_fock_projection():
    dim = 25
    state = css_beam_splitter(css_tensor(css_cat(1.0, math.pi), coherent(0.8)), 0, 1, 0.5)
    fock = css_to_fock(state, dim)
    for n in range(4):
        _, p_css = css_project_fock(state, 1, n)
        _, p_fock = project_number(fock, 1, n)
        assert p_css == pytest.approx(p_fock, abs=1e-10)


def test_displacing_vacuum_gives_a_coherent_state():
    shifted = css_displace(coherent(0.0), 0, 0.6 + 0.2j)
    dim = 20
    assert fidelity(css_to_fock(shifted, dim), coherent_state(0.6 + 0.2j, dim)) == pytest.approx(1.0, abs=1e-12)
    assert abs(css_inner(shifted, coherent(0.6 + 0.2j))) == pytest.approx(1.0, abs=1e-12)


def test_best_cat_fidelity_recovers_the_phase():
    fid, phase = css_best_cat_fidelity(css_cat(2.0, 1.0), 2.0)
    assert fid == pytest.approx(1.0, abs=1e-9)
    assert phase == pytest.approx(1.0, abs=1e-5)


def test_best_cat_fidelity_needs_one_mode():
    with pytest.raises(ModeMismatchError):
        css_best_cat_fidelity(css_tensor(coherent(1.0), coherent(1.0)), 1.0)


def test_reduced_matrix_of_a_product_state():
    cat = css_cat(1.3, math.pi)
    form = css_reduced_matrix(css_tensor(coherent(0.4), cat), keep=1)
    assert form.trace() == pytest.approx(1.0, abs=1e-12)
    components = form.components()
    assert len(components) == 1
    weight, pure = components[0]
    assert weight == pytest.approx(1.0, abs=1e-10)
    assert abs(css_inner(pure, cat)) ** 2 == pytest.approx(1.0, abs=1e-10)
    assert form.expectation(cat) == pytest.approx(1.0, abs=1e-12)


def test_vacuum_removal_kernel_matches_fock_projection():
    dim = 25
    state = css_beam_splitter(css_tensor(css_cat(1.0, 0.0), coherent(0.9)), 0, 1, 0.5)
    form = css_reduced_matrix(state, keep=1, kernels={0: (1.0, 1.0, 0.0)})
    vacuum_probability = project_number(css_to_fock(state, dim), 0, 0)[1]
    assert form.trace() == pytest.approx(1.0 - vacuum_probability, abs=1e-10)
