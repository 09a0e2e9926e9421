import json
import os
import subprocess
import sys

import numpy as np
import pytest

from stamlab import density1d as dens
from stamlab import explorer, gauss, io
from stamlab.cli import main
from stamlab.setfn import SetFunction


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


@pytest.fixture
def files(tmp_path):
    ens = gauss.GaussianEnsemble((np.eye(2), 2 * np.eye(2), np.diag([1.0, 3.0])))
    io.dump(gauss.nu_G(ens), tmp_path / "nu.json")
    io.dump(ens, tmp_path / "ens.json")
    io.dump(gauss.proportional_ensemble([1.0, 2.0]), tmp_path / "prop.json")
    io.dump(SetFunction(2, [1.0, 1.0, 1.5]), tmp_path / "sub.json")
    io.dump(explorer.point_from_ensemble(ens), tmp_path / "p.json")
    return tmp_path


def test_check_fsa_on_gaussian_nu(capsys, files):
    code, rep, err = run(capsys, "check-fsa", str(files / "nu.json"))
    assert code == 0
    assert rep["reports"][0]["holds"] and rep["reports"][0]["margin"] == 0.0
    assert "holds" in err


def test_check_fsa_violation_exit_two(capsys, files):
    code, rep, _ = run(capsys, "check-fsa", str(files / "sub.json"))
    assert code == 2
    assert rep["reports"][0]["certificate"]["weights"] == {"1": "1", "2": "1"}


def test_supermodular_checks(capsys, files):
    code, rep, _ = run(capsys, "check-supermodular", str(files / "nu.json"))
    assert code == 2 and rep["reports"][0]["certificate"] is not None
    code_local, _, _ = run(capsys, "check-supermodular", "--local", str(files / "nu.json"))
    assert code_local == 2
    code, rep, _ = run(capsys, "check-submodular-log", str(files / "nu.json"))
    assert code == 0


def test_extreme_partitions(capsys):
    code, rep, _ = run(capsys, "extreme-partitions", "-n", "3", "--exact")
    assert code == 0 and rep["result"]["count"] == 6
    assert rep["result"]["partitions"][-1]["weights"] == {"1,2": "1/2", "1,3": "1/2", "2,3": "1/2"}
    _, rep, _ = run(capsys, "extreme-partitions", "-n", "3", "--float")
    assert rep["result"]["partitions"][-1]["weights"]["1,2"] == 0.5


def test_gauss_commands(capsys, files):
    code, rep, err = run(capsys, "gauss", "counterexample", "--eps", "0.1")
    assert code == 2 and abs(rep["result"]["gap"] - 0.0224972160321828) < 1e-12
    assert "+0.0224972" in err
    code, rep, _ = run(capsys, "gauss", "nu", str(files / "ens.json"))
    assert code == 0 and rep["result"]["nu"]["n"] == 3
    assert run(capsys, "gauss", "equality", str(files / "prop.json"))[0] == 0
    assert run(capsys, "gauss", "equality", str(files / "ens.json"))[0] == 2
    code, rep, _ = run(capsys, "gauss", "search", "--d", "2", "--n", "3", "--iters", "200", "--starts", "2")
    assert code == 2 and rep["result"]["gap"] > 0


def test_density_commands(capsys, tmp_path):
    code, rep, _ = run(capsys, "density", "entropy", "uniform:2")
    assert code == 0 and abs(rep["result"]["entropy"] - np.log(2)) < 1e-9
    code, rep, _ = run(capsys, "density", "fisher", "gaussian:4")
    assert abs(rep["result"]["fisher"] - 0.25) < 1e-5
    code, rep, _ = run(capsys, "density", "nu", "gaussian:1", "gaussian:2", "--dx", "0.01")
    assert rep["result"]["nu"]["n"] == 2
    code, rep, _ = run(capsys, "bc", "--weights", "0.5", "0.5", "--verify")
    assert code == 0 and abs(rep["result"]["entropy"] - 0.5 - 0.5 * np.log(2)) < 1e-12
    code, rep, _ = run(capsys, "debruijn", "gaussian")
    assert code == 0
    code, rep, _ = run(capsys, "qsup", "gaussian:0.5", "gaussian:1", "gaussian:0.1", "--dx", "0.005")
    assert code == 0 and abs(rep["result"]["gap"]) < 1e-5
    code, rep, _ = run(capsys, "ni-probe", "--family", "smoothed-laplace", "--steps", "2", "--dx", "0.004")
    ni = [s["ni"] for s in rep["result"]["steps"]]
    assert code == 0 and ni[0] > ni[1] > ni[2]


def test_explorer_commands(capsys, files):
    code, rep, _ = run(capsys, "stack", str(files / "p.json"), str(files / "p.json"), "-m", "1", "-l", "1")
    assert code == 0 and rep["result"]["point"]["dim"] == 4
    out = files / "ray"
    code, rep, _ = run(capsys, "dim2-ray", "--u1", "1", "--u2", "1", "--C", "10", "--dx", "0.002", "--out", str(out))
    assert code == 0 and rep["result"]["point"]["values"]["1,2"] >= 10
    x = io.density_from_json(io.load_json(out / "x.json"))
    assert abs(dens.entropy_power(x) - 1.0) < 1e-3
    code, rep, _ = run(capsys, "dim3-gap", "--a", "1", "--b", "2", "--c", "3")
    assert code == 0 and rep["result"]["gap_report"]["stam_singleton"] == 6.0


def test_errors_are_reported(capsys, tmp_path):
    code, rep, err = run(capsys, "check-fsa", str(tmp_path / "missing.json"))
    assert code == 1 and rep["error"]["kind"] == "FileNotFoundError"
    (tmp_path / "bad.json").write_text(json.dumps({"n": 2, "values": {"1": 1.0}}))
    code, rep, _ = run(capsys, "check-fsa", str(tmp_path / "bad.json"))
    assert code == 1 and rep["error"]["kind"] == "schema"
    code, rep, _ = run(capsys, "density", "entropy", "cauchy")
    assert code == 1


def test_repro_exit_codes(capsys, tmp_path):
    code, rep, err = run(capsys, "repro", "thm2", "--eps", "0.1", "--json", str(tmp_path))
    assert code == 2
    assert rep["result"]["criteria"][0]["passed"]
    assert (tmp_path / "criterion_01.json").exists()
    assert "[PASS] criterion  1" in err
    assert run(capsys, "repro", "thm5")[0] == 0
    assert run(capsys, "repro", "cesaro", "--quick")[0] == 0


def test_reports_are_deterministic(capsys, monkeypatch):
    argv = ["gauss", "search", "--d", "2", "--n", "3", "--iters", "150", "--starts", "2"]
    monkeypatch.setenv("STAM_SEED", "11")
    main(argv)
    first = capsys.readouterr().out
    monkeypatch.setenv("STAM_THREADS", "2")
    main(argv)
    second = capsys.readouterr().out
    assert first == second
    assert json.loads(first)["meta"]["seed"] == 11


def test_bad_env_value(capsys, monkeypatch):
    monkeypatch.setenv("STAM_THREADS", "many")
    code, rep, _ = run(capsys, "repro", "thm5")
    assert code == 1


def test_pure_python_backend_selected_by_env():
    env = dict(os.environ, STAM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from stamlab import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
