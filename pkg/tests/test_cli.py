import json
import subprocess
import sys

import pytest

from glatais.cli import main

SMALL = {"reps": 2, "K": 3, "K0": 1, "R_grid": [20, 30], "P_grid": [10, 20], "fixed_P": 20,
         "fixed_R": 20, "timing": False}


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL))
    return path


@pytest.mark.parametrize("mode,grid", [("obs-sweep", "R"), ("particle-sweep", "P")])
def test_run_writes_outputs(config, tmp_path, mode, grid):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--mode", mode, "--out", str(out)]) == 0
    results = (out / "results.csv").read_text().splitlines()
    assert results[0] == "method,R,P,rep,seed,f_score,wall_time_ms,log_posterior,error"
    assert len(results) == 1 + 4 * 2 * 2
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "method,grid_value,mean,stderr" and len(summary) == 1 + 4 * 2
    assert (out / "figure.svg").read_text().startswith("<svg")


def test_validate(config, capsys):
    assert main(["validate-config", str(config)]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown["reps"] == 2 and shown["lambda"] == 0.1


@pytest.mark.parametrize("content", ["{", '{"reps": 0}', '{"bogus": 1}'])
def test_config_errors_exit_1(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert main(["validate-config", str(path)]) == 1
    assert main(["run", "--config", str(path), "--mode", "obs-sweep", "--out", str(tmp_path)]) == 1


def test_usage_errors_exit_1(tmp_path):
    assert main(["validate-config", str(tmp_path / "missing.json")]) == 1
    assert main(["run", "--mode", "obs-sweep"]) == 1
    assert main(["bogus"]) == 1


def test_runtime_error_exit_2(config, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    # output directory cannot be created under a regular file
    assert main(["run", "--config", str(config), "--mode", "obs-sweep", "--out", str(blocker / "x")]) == 2


def test_demo(config, capsys):
    assert main(["demo", "--config", str(config), "--R", "20", "--P", "20"]) == 0
    out = capsys.readouterr().out
    assert out.count("\niter ") == 3
    assert "gl-atais F-score" in out and "oracle-gl" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "glatais", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "validate-config" in res.stdout
