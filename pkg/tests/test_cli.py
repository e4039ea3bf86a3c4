import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from coherence_forge.cli import SCATTER_COLUMNS, main, scatter_rows
from coherence_forge.coherence import f_lower_bound
from coherence_forge.io import matrix_to_json, save_matrix
from coherence_forge.randgen import SeededSource, random_density_matrix
from coherence_forge.robustness import roa_value
from coherence_forge.symmetry import CyclicRep

X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])


@pytest.fixture
def files(tmp_path):
    save_matrix(tmp_path / "psi3.json", np.ones((3, 3)) / 3)
    save_matrix(tmp_path / "psi4.json", np.ones((4, 4)) / 4)
    save_matrix(tmp_path / "plus.json", np.ones((2, 2)) / 2)
    save_matrix(tmp_path / "diag.json", np.diag([0.3, 0.7]))
    save_matrix(tmp_path / "bad.json", np.diag([0.3, 0.3]))
    (tmp_path / "paulis.json").write_text(json.dumps([matrix_to_json(m) for m in (X, Y, Z)]))
    return tmp_path


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr().out
    return code, out


def test_roa(files, capsys):
    code, out = run(capsys, "roa", "--rep", "cyclic:3", "--state", files / "psi3.json")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(2, abs=1e-6)
    assert rec["status"] == "optimal" and "residuals" in rec
    code, out = run(capsys, "roa", "--rep", "cyclic:2", "--state", files / "diag.json")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0, abs=1e-7)


def test_roa_regression_value(files, capsys):
    rho = random_density_matrix(3, None, SeededSource(2718))
    save_matrix(files / "r.json", rho)
    _, out = run(capsys, "roa", "--rep", "cyclic:3", "--state", files / "r.json", "--dual-form", "witness")
    rec = json.loads(out)
    assert rec["dual_form"] == "witness"
    assert rec["value"] == pytest.approx(roa_value(CyclicRep(3), rho), abs=1e-7)


def test_roc_and_bounds(files, capsys):
    code, out = run(capsys, "roc", "--state", files / "plus.json", "--verify-sdp")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(1) and rec["sdp_agreement"] < 1e-6
    code, out = run(capsys, "bounds", "--state", files / "psi4.json")
    rec = json.loads(out)
    assert rec["l1_value"] == pytest.approx(3) and rec["l1_lower"] == pytest.approx(1)
    assert rec["f_bound"] == pytest.approx(3) and rec["exact_value"] == pytest.approx(3)


def test_discriminate(files, capsys):
    code, out = run(capsys, "discriminate", "--rep", "cyclic:2", "--probe", files / "plus.json", "--priors", "uniform")
    rec = json.loads(out)
    assert code == 0 and rec["ratio"] == pytest.approx(2, abs=1e-6)
    assert set(rec) >= {"p_succ", "baseline", "ratio", "roa", "gap"}
    code, out = run(capsys, "discriminate", "--rep", "cyclic:2", "--probe", files / "plus.json", "--priors", "[0.8, 0.2]")
    assert code == 0 and json.loads(out)["baseline"] == pytest.approx(0.8)


def test_data_commands(files, capsys):
    rho = random_density_matrix(2, None, SeededSource(3))
    vals = json.dumps([np.trace(o @ rho).real for o in (X, Y, Z)])
    roc = roa_value(CyclicRep(2), rho)
    for cmd in ("witness-from-data", "estimate-from-data"):
        code, out = run(capsys, cmd, "--rep", "cyclic:2", "--observables", files / "paulis.json", "--values", vals)
        assert code == 0 and json.loads(out)["value"] == pytest.approx(roc, abs=1e-6)
    code, out = run(capsys, "estimate-from-data", "--rep", "cyclic:2", "--observables", files / "paulis.json", "--values", "[0.9, 0.9, 0.9]")
    rec = json.loads(out)
    assert code == 3 and rec["status"] == "infeasible" and rec["value"] is None


def test_exit_codes(files, capsys):
    assert main(["roa", "--state", str(files / "missing.json")]) == 1
    assert main(["roa", "--state", str(files / "bad.json")]) == 1
    assert main(["roa", "--rep", "cyclic:3", "--state", str(files / "plus.json")]) == 1
    assert main(["roa", "--rep", "cyclic:4", "--state", str(files / "psi4.json"), "--max-iters", "2"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["roa"])
    assert exc.value.code == 1
    assert main(["witness-from-data", "--rep", "cyclic:2", "--observables", str(files / "paulis.json"), "--values", "[1, 2]"]) == 1


def test_job_file(files, capsys):
    job = {"command": "roa", "state": "psi3.json", "rep": "cyclic:3", "options": {"gap_tol": 1e-9}, "out": str(files / "o.json")}
    (files / "job.json").write_text(json.dumps(job))
    assert main(["job", str(files / "job.json")]) == 0
    assert json.loads((files / "o.json").read_text())["value"] == pytest.approx(2, abs=1e-6)
    (files / "bad_job.json").write_text(json.dumps({"command": "roa", "colour": "red"}))
    assert main(["job", str(files / "bad_job.json")]) == 1


def read_scatter(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_scatter_rows_validate(files, capsys):
    out = files / "s.csv"
    assert main(["scatter", "--d", "3", "--n", "40", "--seed", "7", "--out", str(out)]) == 0
    text = out.read_text()
    assert "# seed=7" in text and "measure=" in text
    rows = read_scatter(text)
    assert len(rows) == 40 and tuple(rows[0]) == SCATTER_COLUMNS
    assert [int(r["seed_index"]) for r in rows] == list(range(40))
    for r in rows:
        c, d = float(r["c_l1"]), int(r["d"])
        assert float(r["lower_l1"]) == c / (d - 1)
        assert float(r["upper_l1"]) == c
        assert float(r["f_bound"]) == f_lower_bound(c, d)
        cr = float(r["c_r"])
        assert float(r["lower_l1"]) - 1e-7 <= cr <= float(r["upper_l1"]) + 1e-7
        assert float(r["purity_chain_1"]) <= cr + 1e-6


def test_scatter_is_worker_independent():
    serial = scatter_rows(3, 12, seed=11, workers=1)
    pooled = scatter_rows(3, 12, seed=11, workers=2)
    assert serial == pooled


def test_scatter_to_stdout(capsys):
    assert main(["scatter", "--d", "2", "--n", "3", "--seed", "1"]) == 0
    rows = read_scatter(capsys.readouterr().out)
    assert len(rows) == 3
    for r in rows:
        assert float(r["c_r"]) == pytest.approx(float(r["c_l1"]), abs=1e-12)


def test_console_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "coherence_forge", "bounds", "--state", str(files / "plus.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["l1_value"] == pytest.approx(1)
