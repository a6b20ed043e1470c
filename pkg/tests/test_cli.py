"""
Command-line surface: exit codes, JSON output and determinism
"""
import json

import pytest

from orthant_mc.cli import main
from orthant_mc.data.data_loader import write_csv
from tests.conftest import reference_dataset


@pytest.fixture
def d1_csv(tmp_path):
    d, _ = reference_dataset()
    return str(write_csv(d, tmp_path / "d1.csv", ["const", "x1"]))


@pytest.fixture
def separated_csv(tmp_path):
    path = tmp_path / "separated.csv"
    path.write_text("y,x1\n1,0.5\n1,1.5\n0,-1.0\n")
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def _numbers(report):
    report.pop("timings_ms", None)
    return report


def test_simulate_then_check(tmp_path, capsys):
    out = str(tmp_path / "sim.csv")
    code, report = _run(capsys, "simulate", "--n", "40", "--p", "2", "--beta", "0.3,-0.5", "--seed", "1", "--out", out)
    assert code == 0
    assert report["n"] == 40 and report["p"] == 2

    code, report = _run(capsys, "check", "--data", out)
    assert code == 0
    assert report["verdict"] in {"proper", "improper_complete_separation", "improper_quasi_complete"}


def test_check_improper_reports_certificate(separated_csv, capsys):
    code, report = _run(capsys, "check", "--data", separated_csv)
    assert code == 0
    assert report["verdict"] == "improper_complete_separation"
    assert len(report["certificate"]) == 1


def test_fit_improper_exits_3(separated_csv, capsys):
    code, report = _run(capsys, "fit", "--data", separated_csv, "--proposal", "2000", "--draws", "200")
    assert code == 3
    assert report["verdict"] == "improper_complete_separation"
    assert report["certificate"]
    assert report["exit_code"] == 3


def test_fit_improper_runs_under_gaussian_prior(separated_csv, capsys):
    code, report = _run(
        capsys, "fit", "--data", separated_csv, "--prior", "gaussian", "--q-scale", "1",
        "--proposal", "5000", "--draws", "500",
    )
    assert code == 0
    assert report["prior"] == "gaussian"


def test_fit_report_and_draws(d1_csv, tmp_path, capsys):
    draws = tmp_path / "draws.csv"
    code, report = _run(
        capsys, "fit", "--data", d1_csv, "--proposal", "20000", "--draws", "2000", "--seed", "7",
        "--draws-out", str(draws),
    )
    assert code == 0
    assert report["command"] == "fit"
    assert report["verdict"] == "proper"
    assert len(report["mean"]) == 2
    assert len(report["cov"]) == 2 and len(report["cov"][0]) == 2
    assert report["ess"] > 0
    assert report["config"]["seed"] == 7
    assert len(draws.read_text().splitlines()) == 2001


@pytest.mark.parametrize("command", ["fit", "moments"])
def test_reports_identical_across_runs_and_threads(d1_csv, capsys, command):
    args = [command, "--data", d1_csv, "--proposal", "20000", "--seed", "3"]
    if command == "fit":
        args += ["--draws", "1000"]
    _, first = _run(capsys, *args, "--threads", "1")
    _, second = _run(capsys, *args, "--threads", "1")
    _, threaded = _run(capsys, *args, "--threads", "4")
    first, second, threaded = _numbers(first), _numbers(second), _numbers(threaded)
    assert first == second
    first["config"].pop("threads"), threaded["config"].pop("threads")
    assert first == threaded


def test_gibbs_is_reproducible(d1_csv, capsys):
    args = ["gibbs", "--data", d1_csv, "--iters", "400", "--burnin", "100", "--seed", "2"]
    code, first = _run(capsys, *args)
    _, second = _run(capsys, *args)
    assert code == 0
    assert _numbers(first) == _numbers(second)


def test_jointprob(tmp_path, capsys):
    path = tmp_path / "pair.csv"
    path.write_text("1,1.0\n0,1.0\n")
    code, report = _run(capsys, "jointprob", "--data", str(path), "--beta", "0", "--proposal", "1000")
    assert code == 0
    assert report["estimate"] == pytest.approx(0.25, rel=1e-8)


def test_oracle_subcommand(d1_csv, capsys):
    code, report = _run(capsys, "oracle", "--data", d1_csv)
    assert code == 0
    assert report["normalizer"] > 0


def test_non_binary_response_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1,0.1\n0,0.2\n2,0.3\n")
    code, report = _run(capsys, "check", "--data", str(path))
    assert code == 2
    assert "row 3" in report["detail"]


def test_gaussian_prior_needs_scale(d1_csv, capsys):
    code, report = _run(capsys, "moments", "--data", d1_csv, "--prior", "gaussian")
    assert code == 2
    assert report["error"] == "DataValidationError"


def test_proposals_must_cover_draws(d1_csv, capsys):
    code, _ = _run(capsys, "fit", "--data", d1_csv, "--proposal", "100", "--draws", "1000")
    assert code == 2


def test_unknown_flag_exits_2(d1_csv):
    with pytest.raises(SystemExit) as excinfo:
        main(["fit", "--data", d1_csv, "--bogus"])
    assert excinfo.value.code == 2
