import json
import shutil
from pathlib import Path

import pytest
from click.testing import CliRunner

import subprocess
import sys

from nnverify.cli import _parse_value, cli as main

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path):
    for f in SAMPLES.iterdir():
        shutil.copy(f, tmp_path)
    return tmp_path


def test_verify_violated_json(runner, workdir):
    out = runner.invoke(main, ["verify", "--problem", str(workdir / "abs_violated.json"), "--oracle"])
    assert out.exit_code == 2
    rec = json.loads(out.output)
    assert rec["status"] == "violated" and rec["oracle_status"] == "violated" and rec["agree"] is True
    assert abs(rec["payload"]["counter_example"][0]) >= 0.5


def test_verify_holds_table(runner, workdir):
    out = runner.invoke(main, ["verify", "--problem", str(workdir / "abs_holds.json"), "--format", "table"])
    assert out.exit_code == 0
    assert "status   holds" in out.output


def test_solver_and_param_override(runner, workdir):
    args = ["verify", "--problem", str(workdir / "abs_violated.json"), "--solver", "fastlin", "--param", "max_iter=30"]
    out = runner.invoke(main, args)
    assert out.exit_code == 2
    assert json.loads(out.output)["payload"]["max_disturbance"] == pytest.approx(0.5, abs=1e-3)


def test_separate_network_flag(runner, workdir):
    (workdir / "abs.net").rename(workdir / "other.net")
    args = ["verify", "--network", str(workdir / "other.net"), "--problem", str(workdir / "abs_holds.json")]
    assert runner.invoke(main, args).exit_code == 0


def test_bad_network_exit_code(runner, workdir):
    (workdir / "abs.net").write_text("1,2,1\nrelu\n1\n-1,oops\n0,0\nid\n1,1\n0\n")
    out = runner.invoke(main, ["verify", "--problem", str(workdir / "abs_violated.json")])
    assert out.exit_code == 3
    assert "abs.net:4:" in out.output


def _run(*args):
    return subprocess.run([sys.executable, "-m", "nnverify.cli", *args], capture_output=True, text=True)


def test_usage_errors_exit_one(workdir):
    p = str(workdir / "abs_violated.json")
    out = _run("verify", "--problem", p, "--solver", "marabou")
    assert out.returncode == 1 and "marabou" in out.stderr
    out = _run("verify", "--problem", p, "--param", "nonsense")
    assert out.returncode == 1 and "k=v" in out.stderr
    out = _run("verify", "--problem", p, "--param", "depth=3")
    assert out.returncode == 1 and "depth" in out.stderr
    assert _run("bench", "--group", "7").returncode == 1


def test_process_exit_codes(workdir):
    assert _run("verify", "--problem", str(workdir / "abs_violated.json")).returncode == 2
    assert _run("verify", "--problem", str(workdir / "abs_holds.json")).returncode == 0
    assert _run("--help").returncode == 0


def test_parse_value():
    assert _parse_value("3") == 3 and _parse_value("0.5") == 0.5
    assert _parse_value("true") is True and _parse_value("null") is None
    assert _parse_value("bfs") == "bfs"


def test_bench_json_and_table(runner, tmp_path):
    out = runner.invoke(main, ["bench", "--group", "3", "--count", "2", "--seed", "1"])
    assert out.exit_code == 0
    rep = json.loads(out.output)
    assert rep["group"] == 3 and rep["solvers"] == ["duality", "convdual"]
    out = runner.invoke(main, ["bench", "--group", "3", "--count", "2", "--seed", "1", "--format", "table", "--timings"])
    assert out.exit_code == 0 and "convdual" in out.output
    dest = tmp_path / "r.json"
    runner.invoke(main, ["bench", "--group", "3", "--count", "2", "--seed", "1", "--output", str(dest)])
    assert json.loads(dest.read_text()) == rep

