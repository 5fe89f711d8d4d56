import io
import json

import pandas as pd
import pytest

from cat_state_lab.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_tomography_cost_as_csv(capsys):
    code, out, _ = run(capsys, "tomo-cost", "--max-photon", "10", "--p", "0.01", "--quiet")
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert frame.loc[0, "counts_per_histogram"] == 40000
    assert frame.loc[0, "tool_version"].startswith("cat_state_lab")
    assert json.loads(frame.loc[0, "params_json"]) == {"max_photon": 10, "p": 0.01}


def test_lossless_decoherence_row(capsys):
    code, out, _ = run(capsys, "decoherence", "--alpha", "2", "--eta", "1", "--quiet")
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert len(frame) == 1
    assert frame.loc[0, "fidelity"] == pytest.approx(1.0, abs=1e-12)


def test_list_options_take_several_values(capsys):
    code, out, _ = run(capsys, "decoherence", "--alpha", "1", "2", "--eta", "0.9", "--format", "json", "--quiet")
    assert code == EXIT_OK
    records = json.loads(out)
    assert [r["alpha"] for r in records] == [1.0, 2.0]
    assert records[1]["fidelity"] < records[0]["fidelity"]


def test_output_file(capsys, tmp_path):
    path = tmp_path / "gerry.csv"
    code, out, _ = run(capsys, "gerry", "--output", str(path), "--quiet")
    assert code == EXIT_OK
    assert out == ""
    frame = pd.read_csv(path)
    assert list(frame["outcome"]) == ["A", "B"]
    assert frame["probability"].sum() == pytest.approx(1.0)


def test_params_json_overrides(capsys):
    code, out, _ = run(capsys, "kitten", "--params-json", '{"alpha": 1.0, "p": [0.0]}', "--format", "json", "--quiet")
    assert code == EXIT_OK
    (record,) = json.loads(out)
    assert record["r"] == pytest.approx(0.31, abs=0.005)


def test_unknown_parameter_is_a_usage_error(capsys):
    code, out, err = run(capsys, "tomo-cost", "--params-json", '{"bogus": 1}', "--quiet")
    assert code == EXIT_USAGE
    assert out == ""
    assert "error: invalid-arguments" in err


def test_params_json_must_be_an_object(capsys):
    code, _, err = run(capsys, "tomo-cost", "--params-json", "[1, 2]", "--quiet")
    assert code == EXIT_USAGE
    assert "invalid-arguments" in err


def test_numerical_failure_reports_its_code(capsys):
    code, _, err = run(
        capsys, "grow", "--alpha", "2", "--beta", "2", "--detector", "ideal", "--fock-cutoff", "3", "--quiet"
    )
    assert code == EXIT_NUMERICAL
    assert "error: cutoff-insufficient" in err


def test_unknown_command_exits_with_usage_status():
    with pytest.raises(SystemExit) as excinfo:
        main(["teleport"])
    assert excinfo.value.code == EXIT_USAGE


def test_every_command_has_a_subparser():
    parser = build_parser()
    args = parser.parse_args(["grow", "--fock-cutoff", "12", "--detector", "apd", "tes"])
    assert args.fock_cutoff == 12
    assert args.detector == ["apd", "tes"]
    args = parser.parse_args(["kerr-direct", "--optimize-input", "false"])
    assert args.optimize_input is False
