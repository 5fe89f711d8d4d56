import math
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

from cat_state_lab.analysis.sweeps import SweepRunner
from cat_state_lab.commands import CommandRegistry
from cat_state_lab.config.settings import SimulationConfig
from cat_state_lab.models import RunSpec


def _probability_columns(record):
    return [k for k in record if "probability" in k and not k.startswith("log10_")]


@pytest.mark.parametrize("command, params", [
    ("decoherence", {"alpha": [1.0], "eta": [0.9]}),
    ("gerry", {}),
    ("tradeoff", {"point": ["song_compromise"]}),
    ("small-kerr", {"x": [0.0]}),
])
def test_every_probability_column_has_a_log10_companion(command, params):
    records = CommandRegistry.run(RunSpec(command=command, params=params))
    assert records
    for record in records:
        columns = _probability_columns(record)
        assert columns
        for key in columns:
            expected = math.log10(record[key]) if record[key] > 0 else float("-inf")
            assert record[f"log10_{key}"] == pytest.approx(expected)


def test_zero_flip_probability_logs_to_minus_infinity():
    (record,) = CommandRegistry.run(RunSpec(command="decoherence", params={"alpha": [1.0], "eta": [1.0]}))
    assert record["flip_probability"] == 0.0
    assert record["log10_flip_probability"] == float("-inf")


def test_small_kerr_defaults_target_a_twenty_photon_amplitude(caplog):
    records = CommandRegistry.run(RunSpec(command="small-kerr", params={"x": [0.0]}))
    (record,) = records
    assert record["alpha_i"] == pytest.approx(20.0 * math.sqrt(2.0))
    assert record["target_alpha"] == pytest.approx(20.0)
    assert record["fidelity"] >= 0.99997
    assert record["probability"] == pytest.approx(0.1 * math.erf(3.75), rel=0.05)
    assert record["notes"] == "quoted P=0.052"
    assert "differs from the quoted 0.052" in caplog.text


def test_small_kerr_without_a_published_value_has_no_note():
    (record,) = CommandRegistry.run(RunSpec(command="small-kerr", params={"alpha_i": 20.0, "x": [0.0]}))
    assert record["notes"] == ""


def test_tolerance_override_is_scoped_to_the_run(monkeypatch):
    entry = {**CommandRegistry.COMMANDS["tomo-cost"], "handler": lambda p, runner: [{"tol": SimulationConfig.tail_tol()}]}
    monkeypatch.setitem(CommandRegistry.COMMANDS, "tomo-cost", entry)
    configured = SimulationConfig.TAIL_TOL
    (record,) = CommandRegistry.run(RunSpec(command="tomo-cost", tol_override=1e-4))
    assert record["tol"] == 1e-4
    assert SimulationConfig.TAIL_TOL == configured
    assert SimulationConfig.tail_tol() == configured


def test_tolerance_override_reaches_sweep_workers():
    runner = SweepRunner(max_workers=3, progress=False)
    with SimulationConfig.override_tail_tol(1e-3):
        seen = runner.map(lambda _: SimulationConfig.tail_tol(), range(6))
    assert seen == [1e-3] * 6
    assert SimulationConfig.tail_tol() == SimulationConfig.TAIL_TOL


def test_tolerance_override_does_not_leak_across_threads():
    entered, release = threading.Event(), threading.Event()

    def hold():
        with SimulationConfig.override_tail_tol(1e-2):
            entered.set()
            release.wait(5)
            return SimulationConfig.tail_tol()

    with ThreadPoolExecutor(max_workers=1) as executor:
        future = executor.submit(hold)
        assert entered.wait(5)
        assert SimulationConfig.tail_tol() == SimulationConfig.TAIL_TOL
        release.set()
        assert future.result() == 1e-2
