import json

import numpy as np
import pytest

from miqe import build_state, io, optimal_lambda
from miqe.cli import main

LAM_OPT, G_OPT = optimal_lambda()


@pytest.fixture
def gamma_file(tmp_path):
    def write(gamma, name="gamma.json"):
        path = tmp_path / name
        io.dump(io.gamma_to_json(gamma), path)
        return str(path)

    return write


def test_build(gamma_file, tmp_path, capsys):
    out = tmp_path / "state.json"
    assert main(["build", gamma_file([[1, 0], [1, LAM_OPT]]), "--output", str(out)]) == 0
    text = capsys.readouterr().out
    assert "|2,0>   0.541196100" in text
    assert "|1,1>   0.840896415" in text
    state = io.load(out, expect="fock_state")
    assert state.amplitude((1, 1)) == pytest.approx(0.840896415, abs=1e-9)


def test_build_rejects_zero_row(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([[1, 0], [0, 0]]))
    assert main(["build", str(path)]) == 2
    assert "zero rows" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["classify", "/nonexistent/gamma.json"]) == 2


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--lambda", str(LAM_OPT), "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# lambda=2.19736823, g_mi_closed=0.853553391")
    assert lines[1] == "theta_deg,Lambda_20,Lambda_02,Lambda_11,g_U"
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    assert rows.shape == (721, 5)
    assert rows[:, 4].max() == pytest.approx(G_OPT, abs=1e-6)


def test_sweep_json_gamma(gamma_file, capsys):
    assert main(["sweep", "--gamma", gamma_file([[1, 1], [1, 1]]), "--steps", "5", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["columns"][-1] == "g_U"
    assert len(payload["rows"]) == 5
    assert payload["g_mi_closed"] == 1.0


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["sweep", "--lambda", "1.5", "--output", str(a)])
    main(["sweep", "--lambda", "1.5", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep"],
        ["sweep", "--lambda", "1", "--steps", "1"],
        ["sweep", "--lambda", "1", "--theta-min", "90", "--theta-max", "10"],
        ["sweep", "--lambda", "0"],
    ],
)
def test_sweep_input_errors(argv):
    assert main(argv) == 2


def test_optimize_lambda(capsys):
    assert main(["optimize", "--lambda", str(LAM_OPT)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["lower_bound"] is True
    assert out["report"]["method"] == "grid+refine"
    assert out["discrepancy"] < 1e-6


def test_optimize_partition(gamma_file, tmp_path):
    out = tmp_path / "opt.json"
    argv = ["optimize", "--gamma", gamma_file([[1, 0, 0], [1, 1, 1]]), "--partition", "0,1|2", "--samples", "256",
            "--restarts", "2", "--output", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    report = json.loads(first)["report"]
    assert report["g"] == pytest.approx(1.0, abs=1e-9)
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_optimize_bad_partition(gamma_file):
    assert main(["optimize", "--gamma", gamma_file([[1, 0, 0], [1, 1, 1]]), "--partition", "0|5"]) == 2


def test_optimize_threads(gamma_file, tmp_path, monkeypatch):
    monkeypatch.setenv("MIQE_THREADS", "nope")
    assert main(["optimize", "--lambda", "1"]) == 2


def test_certify_white_noise(capsys):
    assert main(["certify", "--lambda", str(LAM_OPT), "--white-noise", "0.2"]) == 0
    assert "certified" in capsys.readouterr().out
    assert main(["certify", "--lambda", str(LAM_OPT), "--white-noise", "0.25", "--format", "json"]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "inconclusive"


def test_certify_rho_file(tmp_path, capsys):
    from miqe import DensityMatrix

    psi = build_state([[1, 0, 0], [1, 1, 1]])
    psi_path, rho_path = tmp_path / "psi.json", tmp_path / "rho.json"
    io.dump(io.to_json(psi), psi_path)
    io.dump(io.to_json(DensityMatrix.white_noise(psi, 0.1)), rho_path)
    argv = ["certify", "--psi", str(psi_path), "--rho", str(rho_path)]
    assert main(argv) == 2
    assert "--g-mi" in capsys.readouterr().err
    assert main(argv + ["--g-mi", "0.8"]) == 0


def test_classify(gamma_file, tmp_path):
    out = tmp_path / "verdict.json"
    assert main(["classify", gamma_file([[1, 0, 0], [1, 1, 0], [1, 1, -1]]), "--output", str(out)]) == 0
    assert json.loads(out.read_text())["classification"] == "mi-fully-inseparable"
