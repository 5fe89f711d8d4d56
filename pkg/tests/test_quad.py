import numpy as np
import pytest

from cat_state_lab.errors import HermiteOverflowError
from cat_state_lab.states.fock import cat_state
from cat_state_lab.states.quad import (
    cat_wavefunction,
    coherent_wavefunction_x,
    gauss_hermite_grid,
    hermite_fn,
    hermite_table,
    integrate,
    integrate_adaptive,
    legendre_panels,
)


def test_hermite_functions_are_orthonormal():
    grid = gauss_hermite_grid(120)
    table = hermite_table(30, grid.nodes)
    gram = np.array([[grid.integrate(table[m] * table[n]) for n in range(31)] for m in range(31)])
    np.testing.assert_allclose(gram, np.eye(31), atol=1e-10)


def test_low_hermite_functions_match_closed_form():
    x = np.linspace(-3.0, 3.0, 7)
    np.testing.assert_allclose(hermite_fn(0, x), np.pi ** -0.25 * np.exp(-x * x / 2))
    np.testing.assert_allclose(hermite_fn(1, x), np.pi ** -0.25 * np.sqrt(2.0) * x * np.exp(-x * x / 2))


def test_hermite_recurrence_stays_finite_far_out():
    values = hermite_table(400, np.array([0.0, 25.0, 60.0]))
    assert np.all(np.isfinite(values))


def test_hermite_index_limits():
    with pytest.raises(ValueError):
        hermite_fn(-1, 0.0)
    with pytest.raises(HermiteOverflowError):
        hermite_table(10 ** 6, 0.0)


def test_legendre_panels_integrate_polynomials_exactly():
    grid = legendre_panels(0.0, 3.0, width=0.5, order=8)
    assert integrate(lambda x: x ** 2, grid) == pytest.approx(9.0, rel=1e-13)
    assert len(legendre_panels(1.0, 1.0)) == 0


def test_adaptive_gaussian_integral():
    value = integrate_adaptive(lambda x: np.exp(-(x - 1.0) ** 2 / 8.0), scale=2.0, center=1.0)
    assert value == pytest.approx(np.sqrt(8.0 * np.pi), rel=1e-10)


@pytest.mark.parametrize("basis", ["x", "p"])
@pytest.mark.parametrize("parity", ["+", "-"])
def test_cat_wavefunctions_are_normalized(basis, parity):
    grid = gauss_hermite_grid(200, scale=1.0)
    density = np.abs(cat_wavefunction(1.3, parity, basis, grid.nodes)) ** 2
    assert grid.integrate(density) == pytest.approx(1.0, abs=1e-10)


def test_odd_cat_vanishes_at_the_origin():
    assert abs(cat_wavefunction(2.0, "-", "x", 0.0)) < 1e-15
    assert abs(cat_wavefunction(2.0, "-", "p", 0.0)) < 1e-15


def test_cat_wavefunction_is_a_sum_of_coherent_states():
    x = np.linspace(-5.0, 5.0, 41)
    alpha = 1.1
    norm = np.sqrt(2.0 + 2.0 * np.exp(-2.0 * alpha ** 2))
    expected = (coherent_wavefunction_x(-alpha, x) + coherent_wavefunction_x(alpha, x)) / norm
    np.testing.assert_allclose(cat_wavefunction(alpha, "+", "x", x), expected, atol=1e-14)


def test_cat_wavefunction_rejects_bad_arguments():
    with pytest.raises(ValueError):
        cat_wavefunction(0.0, "+", "x", 0.0)
    with pytest.raises(ValueError):
        cat_wavefunction(1.0, "0", "x", 0.0)
    with pytest.raises(ValueError):
        cat_wavefunction(1.0, "+", "q", 0.0)


@pytest.mark.parametrize("parity, phase", [("+", 0.0), ("-", np.pi)])
def test_cat_wavefunction_matches_the_fock_cat_with_its_sign(parity, phase):
    alpha, dim = 1.5, 40
    amps = cat_state(alpha, phase, dim).vector
    v = np.linspace(-4.0, 4.0, 17)
    table = hermite_table(dim - 1, v)
    in_x = amps @ table
    in_p = (amps * (-1j) ** np.arange(dim)) @ table
    np.testing.assert_allclose(cat_wavefunction(alpha, parity, "x", v), in_x, atol=1e-10)
    np.testing.assert_allclose(cat_wavefunction(alpha, parity, "p", v), in_p, atol=1e-10)
