import math

import numpy as np
import pytest

from cat_state_lab.errors import CutoffError
from cat_state_lab.models import DetectorModel, GrowthConfig
from cat_state_lab.schemes.growth import (
    default_cutoff,
    grow_accepted_state,
    grow_fidelity_curve,
    grow_ideal,
    grow_iterate,
    grow_with_detectors,
    growth_probability,
    growth_transmissivity,
)
from cat_state_lab.states.css import css_cat, css_inner


def test_two_odd_kittens_succeed_often():
    for alpha in np.arange(0.3, 3.0001, 0.1):
        assert growth_probability(alpha, alpha, math.pi, math.pi) >= 0.214


@pytest.mark.parametrize("alpha, beta, phi, varphi", [(1.0, 1.4, math.pi, math.pi), (0.8, 0.8, math.pi, 0.0), (1.2, 0.6, 0.5, 1.1)])
def test_ideal_growth_output(alpha, beta, phi, varphi):
    cfg = GrowthConfig(alpha=alpha, beta=beta, phi=phi, varphi=varphi)
    output, amplitude, probability = grow_ideal(cfg)
    assert amplitude == pytest.approx(math.hypot(alpha, beta))
    assert abs(css_inner(css_cat(amplitude, phi + varphi), output)) ** 2 == pytest.approx(1.0, abs=1e-10)
    assert probability == pytest.approx(growth_probability(alpha, beta, phi, varphi), abs=1e-8)


def test_transmissivity():
    assert growth_transmissivity(1.0, 1.0) == pytest.approx(0.5)
    assert growth_transmissivity(1.0, 2.0) == pytest.approx(0.8)


def test_dark_free_counters_keep_the_ideal_cat():
    cfg = GrowthConfig(alpha=math.sqrt(2.0), beta=math.sqrt(2.0), det=DetectorModel(eta=0.6))
    report = grow_with_detectors(cfg)
    assert report.fidelity == pytest.approx(1.0, abs=1e-9)
    assert report.target["alpha"] == pytest.approx(2.0)


def test_avalanche_photodiodes(apd):
    cfg = GrowthConfig(alpha=math.sqrt(2.0), beta=math.sqrt(2.0), det=apd)
    assert grow_with_detectors(cfg).fidelity == pytest.approx(0.9994, abs=2e-4)


def test_transition_edge_sensors(tes):
    cfg = GrowthConfig(alpha=math.sqrt(2.0), beta=math.sqrt(2.0), det=tes)
    assert grow_with_detectors(cfg).fidelity == pytest.approx(0.999999986, abs=5e-8)


def test_ideal_counters_reproduce_the_closed_form_probability(ideal_detector):
    cfg = GrowthConfig(alpha=1.0, beta=1.4, det=ideal_detector)
    _, probability = grow_accepted_state(cfg)
    assert probability == pytest.approx(growth_probability(1.0, 1.4, math.pi, math.pi), abs=1e-8)


def test_accepted_state_is_a_density(apd):
    form, _ = grow_accepted_state(GrowthConfig(alpha=1.0, beta=1.2, det=apd))
    assert form.trace() == pytest.approx(1.0, abs=1e-8)
    assert all(weight > -1e-8 for weight, _ in form.components())


def test_acceptance_is_monotone_in_the_counter_quality():
    probabilities = {}
    for eta in (0.5, 0.7, 0.9):
        for dark in (0.0, 1e-3, 1e-2):
            cfg = GrowthConfig(alpha=1.0, beta=1.0, det=DetectorModel(eta=eta, dark_mean=dark))
            probabilities[eta, dark] = grow_with_detectors(cfg).probability
    for dark in (0.0, 1e-3, 1e-2):
        assert probabilities[0.5, dark] <= probabilities[0.7, dark] <= probabilities[0.9, dark]
    for eta in (0.5, 0.7, 0.9):
        assert probabilities[eta, 0.0] <= probabilities[eta, 1e-3] <= probabilities[eta, 1e-2]


def test_cutoff_must_cover_the_counter_light():
    cfg = GrowthConfig(alpha=2.0, beta=2.0, fock_cutoff=3)
    with pytest.raises(CutoffError):
        grow_accepted_state(cfg)
    assert default_cutoff(cfg) > 3


def test_fidelity_curve_sweeps(apd):
    base = GrowthConfig(alpha=math.sqrt(2.0), beta=math.sqrt(2.0), det=apd)
    reports = grow_fidelity_curve(base, etas=[0.5, 0.9], darks=[0.0, 1e-3])
    assert len(reports) == 4
    assert reports[2].fidelity == pytest.approx(1.0, abs=1e-9)
    assert reports[3].fidelity < reports[2].fidelity


def test_iteration_stage_zero_is_the_input_kitten():
    reports = grow_iterate(0.4, 0.5, 1)
    assert [r.params["stage"] for r in reports] == [0, 1]
    assert reports[0].fidelity == pytest.approx(0.60, abs=0.01)
    assert reports[1].params["amplitude"] == pytest.approx(0.5 * math.sqrt(2.0))
    assert reports[1].probability == pytest.approx(reports[1].params["stage_probability"])


def test_iteration_arguments_are_validated():
    with pytest.raises(ValueError):
        grow_iterate(1.0, 0.5, 1)
    with pytest.raises(ValueError):
        grow_iterate(0.2, 0.5, 0)


@pytest.mark.slow
@pytest.mark.parametrize("p, before, after, tol", [(0.4, 0.60, 0.89, 0.01), (0.25, 0.750, 0.941, 0.005)])
def test_one_iteration_purifies_mixed_kittens(p, before, after, tol):
    reports = grow_iterate(p, 0.5, 1)
    assert reports[0].fidelity == pytest.approx(before, abs=0.01)
    assert reports[1].fidelity == pytest.approx(after, abs=tol)


@pytest.mark.slow
def test_four_iterations_from_perfect_kittens():
    reports = grow_iterate(0.0, 0.5, 4)
    assert reports[-1].params["amplitude"] == pytest.approx(2.0)
    assert reports[-1].fidelity == pytest.approx(0.995, abs=0.002)
    cumulative = [r.probability for r in reports]
    assert all(b <= a for a, b in zip(cumulative, cumulative[1:]))
