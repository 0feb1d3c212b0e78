import csv
import json
import logging

import pytest

from sparsewf import __version__
from sparsewf.main import main


def run(*argv: str) -> int:
    with pytest.raises(SystemExit) as e:
        main(list(argv))
    return e.value.code


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def rows(path) -> list[list[str]]:
    with open(path) as f:
        return list(csv.reader(f))


def test_version(capsys):
    assert run("--version") == 0
    assert capsys.readouterr().out.strip() == f"sparsewf {__version__}"


def test_no_command_prints_help(capsys):
    assert run() == 1
    assert "recover" in capsys.readouterr().out


def test_recover_noiseless(workdir, capsys):
    code = run("recover", "--p", "100", "--m", "2000", "--k", "5", "--nsr", "0", "--seed", "7", "--out", "out")
    assert code == 0
    document = json.loads((workdir / "out" / "estimate.json").read_text())
    assert document["version"] == __version__
    assert document["config"]["seed"] == 7
    estimate = document["estimate"]
    assert estimate["relative_error"] <= 1e-3
    assert len(estimate["x_hat"]) == 100
    assert all(1 <= i <= 100 for i in estimate["support"])
    assert capsys.readouterr().out.startswith("relative error ")


def test_recover_writes_trace_and_reuses_instances(workdir):
    small = ("--p", "50", "--m", "400", "--k", "3", "--nsr", "0.5", "--iters", "20")
    assert run("recover", *small, "--trace", "--save-instance", "inst", "--out", "a") == 0
    trace = rows(workdir / "a" / "trace.csv")
    assert trace[0] == ["iter", "risk", "tau", "step_norm", "support_size", "relative_error"]
    assert len(trace) == 22

    assert run("recover", "--iters", "20", "--nsr", "0.5", "--instance", "inst.json", "--out", "b") == 0
    first = json.loads((workdir / "a" / "estimate.json").read_text())["estimate"]
    second = json.loads((workdir / "b" / "estimate.json").read_text())["estimate"]
    assert second["x_hat"] == first["x_hat"]


def test_missing_config_file_exits_with_status_2(caplog):
    with caplog.at_level(logging.ERROR):
        assert run("recover", "--config", "missing.cfg") == 2
    assert "missing.cfg" in caplog.text


def test_invalid_step_size_exits_with_status_2(caplog):
    with caplog.at_level(logging.ERROR):
        assert run("recover", "--mu", "-1") == 2
    assert "mu must be positive" in caplog.text


def test_config_file_is_read(workdir):
    (workdir / "run.cfg").write_text("p = 40\nm = 300\nk = 2\niters = 10\nout = from-file\n")
    assert run("recover", "--config", "run.cfg", "--nsr", "0.2") == 0
    config = json.loads((workdir / "from-file" / "estimate.json").read_text())["config"]
    assert (config["p"], config["m"], config["nsr"]) == (40, 300, 0.2)


def test_sweep_requires_axis_and_grid():
    assert run("sweep", "--axis", "beta") == 2


SWEEP = ("sweep", "--axis", "nsr", "--grid", "0", "0.5", "--trials", "2", "--p", "40", "--m", "300", "--k", "3", "--iters", "20")


def test_sweep_writes_results(workdir, capsys):
    assert run(*SWEEP, "--out", "s") == 0
    names = sorted(path.name for path in (workdir / "s").iterdir())
    assert names == ["nsr.svg", "nsr_summary.csv", "nsr_sweep.json", "nsr_trials.csv"]
    assert len(rows(workdir / "s" / "nsr_summary.csv")) == 3
    assert capsys.readouterr().out.splitlines()[0].startswith("nsr=0\t")


def test_sweep_output_does_not_depend_on_workers(tmp_path, monkeypatch):
    outputs = []
    for workers in ("1", "4"):
        (tmp_path / workers).mkdir()
        monkeypatch.chdir(tmp_path / workers)
        assert run(*SWEEP, "--workers", workers, "--out", "s") == 0
        outputs.append({p.name: p.read_bytes() for p in (tmp_path / workers / "s").iterdir()})
    assert len(outputs[0]) == 4
    assert outputs[0] == outputs[1]


TINY = ("--p", "50", "--m", "300", "--k", "2", "--iters", "5", "--trials", "1")


def test_sample_size_figure_at_paper_grid(workdir):
    assert run("figures", "--which", "m", "--preset", "paper", "--seed", "1", "--p", "20", "--k", "2", "--iters", "5", "--trials", "1") == 0
    summary = rows(workdir / "results" / "m_summary.csv")
    assert len(summary) == 11
    assert summary[1][0] == "2000" and summary[-1][0] == "11000"


def test_beta_figure_with_alpha_overlay(workdir):
    assert run("figures", "--which", "beta", *TINY, "--compare-alpha", "1") == 0
    assert len(rows(workdir / "results" / "beta_summary.csv")) == 13
    assert (workdir / "results" / "beta_alpha1_summary.csv").exists()
    svg = (workdir / "results" / "beta.svg").read_text()
    assert "alpha = 0.1" in svg and "alpha = 1" in svg


def test_figures_are_reproducible(tmp_path, monkeypatch):
    outputs = []
    for run_dir in ("first", "second"):
        (tmp_path / run_dir).mkdir()
        monkeypatch.chdir(tmp_path / run_dir)
        assert run("figures", *TINY, "--seed", "3", "--out", "figs") == 0
        outputs.append({p.name: p.read_bytes() for p in (tmp_path / run_dir / "figs").iterdir()})
    assert len(outputs[0]) == 16
    assert outputs[0] == outputs[1]


def test_selftest_single_suite(capsys):
    assert run("selftest", "--suite", "gradient") == 0
    assert capsys.readouterr().out.startswith("PASS\tgradient\t")


def test_selftest_reports_injected_fault(capsys, caplog):
    with caplog.at_level(logging.ERROR):
        assert run("selftest", "--suite", "threshold-contract", "--inject-fault", "threshold") == 1
    assert capsys.readouterr().out.startswith("FAIL\tthreshold-contract\t")
    assert "threshold-contract" in caplog.text


@pytest.mark.slow
def test_full_selftest_passes():
    assert run("selftest") == 0


def test_rate_in_the_noiseless_regime_is_skipped(workdir, capsys):
    code = run("rate", "--p", "40", "--k", "2", "--nsr", "0", "--iters", "50", "--trials", "1", "--m-grid", "300", "600")
    assert code == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("verdict: skipped")
    assert len(rows(workdir / "results" / "rate_study.csv")) == 3


def test_oracles_rejects_empty_replicates():
    assert run("oracles", "--replicates", "0") == 2


def test_missing_instance_file_exits_with_status_2(caplog):
    with caplog.at_level(logging.ERROR):
        assert run("recover", "--instance", "missing.json") == 2
    assert "missing.json" in caplog.text


def test_loaded_instance_uses_its_own_noise_level(workdir):
    small = ("--p", "50", "--m", "400", "--k", "3", "--iters", "5")
    assert run("recover", *small, "--nsr", "0", "--save-instance", "quiet", "--out", "a") == 0
    assert run("recover", "--iters", "5", "--nsr", "5", "--instance", "quiet.json", "--out", "b") == 0
    first = json.loads((workdir / "a" / "estimate.json").read_text())["estimate"]
    second = json.loads((workdir / "b" / "estimate.json").read_text())["estimate"]
    assert second["advisory_m"] == first["advisory_m"]


@pytest.mark.parametrize("value", ["nan", "inf"])
def test_non_finite_noise_level_exits_with_status_2(value):
    assert run("recover", "--nsr", value) == 2
