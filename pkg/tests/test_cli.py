import csv
import json

import numpy as np
import pytest

from omegabw.cli import fmt, main, matrix_from_entries, parse_dims, qubit_crossings, record_ratio


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fmt_round_trip():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x and fmt(-0.0) == "0" and fmt(True) == "true" and fmt(3) == "3"


def test_parse_dims():
    assert parse_dims("2-4,7") == [2, 3, 4, 7]


def test_verify_proven_kinds(tmp_path):
    code, out = run(["verify", "--n", "3", "--kinds", "iii,v,vi", "--trials", "3", "--restarts", "8"], tmp_path)
    assert code == 0
    rows = read_rows(out)
    assert list(rows[0]) == ["trial", "kind", "n", "estimate", "constant", "gap", "converged"]
    assert len(rows) == 9
    assert all(float(r["gap"]) <= 1e-6 * float(r["constant"]) for r in rows)
    assert b"\r\n" not in out.read_bytes()


def test_verify_n2_kind_i(tmp_path):
    code, out = run(["verify", "--n", "2", "--kinds", "i", "--trials", "10", "--restarts", "8"], tmp_path)
    assert code == 0
    assert all(float(r["gap"]) <= 1e-6 for r in read_rows(out))


def test_injected_constant_gives_counterexample(tmp_path):
    cex = tmp_path / "cex"
    args = ["verify", "--n", "3", "--kinds", "ii", "--trials", "1", "--restarts", "4", "--constant-scale", "0.9"]
    code, _ = run([*args, "--cex-dir", str(cex)], tmp_path)
    assert code == 2
    files = sorted(cex.glob("*.json"))
    assert [f.name for f in files] == ["cex_II_seed0_trial0_n3.json"]
    rec = json.loads(files[0].read_text())
    assert rec["excess"] > 1e-8 * rec["constant"]
    assert abs(record_ratio(rec) - rec["achieved"]) <= 1e-10 * rec["achieved"]
    assert set(rec["provenance"]) == {"master_seed", "restart_index", "trial_index"}
    # reruns never overwrite earlier evidence
    assert run([*args, "--cex-dir", str(cex)], tmp_path)[0] == 2
    assert len(list(cex.glob("*.json"))) == 2


def test_determinism_across_worker_counts(tmp_path, monkeypatch):
    args = ["verify", "--n", "2,3", "--kinds", "i,iv", "--trials", "2", "--restarts", "3"]
    bodies = []
    for k, threads in enumerate(["1", "2"]):
        monkeypatch.setenv("OMEGA_BW_THREADS", threads)
        code, out = run(args, tmp_path, f"v{k}.csv")
        assert code == 0
        bodies.append(out.read_bytes())
    assert bodies[0] == bodies[1]


def test_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("OMEGA_BW_THREADS", "zero")
    assert run(["verify", "--n", "2", "--trials", "1"], tmp_path)[0] == 1


def test_sweep_small_grid(tmp_path):
    code, out = run(["sweep", "--grid", "5", "--restarts", "8"], tmp_path)
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 25
    for r in rows:
        est, c, loose = float(r["numerical_estimate"]), float(r["tight_or_conjectured_constant"]), float(r["loose_constant"])
        assert loose >= c
        assert abs(est - c) <= 1e-6 * c
    top = [r for r in rows if r["kind"] == "I" and float(r["p"]) == 1.0][0]
    assert float(top["tight_or_conjectured_constant"]) == pytest.approx(np.sqrt(2 / np.sin(2.0)), rel=1e-14)


def test_uncertainty(tmp_path):
    code, out = run(["uncertainty", "--grid", "20"], tmp_path)
    assert code == 0
    rows = read_rows(out)
    last = rows[-1]
    assert float(last["p"]) == 1.0 and float(last["robertson"]) == 0 and float(last["new"]) == pytest.approx(1.0)
    side = out.with_suffix(".crossings.csv").read_text()
    assert side.startswith("crossing,p\n")
    c = qubit_crossings()
    assert abs(c["robertson_new"] - (2 - np.sqrt(2)) / 2) <= 1e-6
    assert abs(c["robertson_loose"] - 0.547) <= 1e-3


def test_uncertainty_json(tmp_path):
    code, out = run(["uncertainty", "--grid", "4", "--format", "json"], tmp_path, "u.json")
    data = json.loads(out.read_text())
    assert code == 0 and data["schema_version"] == "1" and len(data["rows"]) == 4
    assert set(data["crossings"]) == {"robertson_new", "robertson_loose"}


def test_gkls_fixtures(tmp_path):
    code, out = run(["gkls", "--fixture", "dephasing"], tmp_path)
    (row,) = read_rows(out)
    assert code == 0 and row["satisfied"] == "true"
    assert abs(float(row["max_rate"]) - float(row["bound"])) <= 1e-12
    code, out = run(["gkls", "--fixture", "unitary"], tmp_path, "u.csv")
    (row,) = read_rows(out)
    assert code == 0 and float(row["max_rate"]) == 0 and float(row["bound"]) == 0


def test_gkls_random(tmp_path):
    code, out = run(["gkls", "--trials", "20"], tmp_path)
    rows = read_rows(out)
    assert code == 0 and len(rows) == 20
    assert list(rows[0]) == ["trial", "max_rate", "bound", "rate_formula_residual", "sum_rule_gap", "satisfied"]
    assert all(float(r["rate_formula_residual"]) <= 1e-8 for r in rows)


def test_optimize_identity(tmp_path):
    wf = tmp_path / "w.json"
    wf.write_text(json.dumps({"diag": [1, 1, 1, 1]}))
    code, out = run(["optimize", "--weight", str(wf), "--restarts", "6"], tmp_path, "o.json")
    rep = json.loads(out.read_text())
    assert code == 0 and rep["schema_version"] == "1"
    assert [r["kind"] for r in rep["results"]] == ["I", "II", "III", "IV", "V", "VI"]
    assert all(abs(r["estimate"] - np.sqrt(2)) <= 1e-6 for r in rep["results"])


def test_optimize_full_weight_file(tmp_path):
    W = np.diag([1.0, 2.0, 4.0]) / 7
    entries = [[float(z.real), float(z.imag)] for z in W.astype(complex).ravel()]
    wf = tmp_path / "w.json"
    wf.write_text(json.dumps({"dim": 3, "entries": entries}))
    code, out = run(["optimize", "--weight", str(wf), "--kinds", "ii", "--restarts", "6"], tmp_path, "o.json")
    (r,) = json.loads(out.read_text())["results"]
    assert code == 0 and r["status"] == "conjectured"
    assert abs(r["estimate"] - np.sqrt(5)) <= 1e-6
    # the witnesses in the report reproduce the reported value
    from omegabw.bounds import BoundKind, ratio
    from omegabw.linalg import Weight

    A, B = matrix_from_entries(r["A"], 3), matrix_from_entries(r["B"], 3)
    assert ratio(BoundKind.II, Weight(W), A, B) == pytest.approx(r["estimate"], rel=1e-9)
    assert all(b >= a * (1 - 1e-12) for a, b in zip(r["trace"], r["trace"][1:]))


def test_optimize_random(tmp_path):
    code, out = run(["optimize", "--random", "--n", "3", "--kinds", "v", "--restarts", "2"], tmp_path, "o.json")
    assert code == 0 and json.loads(out.read_text())["dim"] == 3


@pytest.mark.parametrize(
    "content",
    ['{"diag": [1, -1]}', "not json", '{"dim": 2, "entries": [[1, 0]]}', '{"foo": 1}', "[1, 2]"],
)
def test_optimize_bad_weight(tmp_path, content, capsys):
    wf = tmp_path / "w.json"
    wf.write_text(content)
    assert main(["optimize", "--weight", str(wf)]) == 1
    assert "error" in capsys.readouterr().err


def test_optimize_needs_one_source(tmp_path):
    assert main(["optimize"]) == 1


def test_config_errors(tmp_path):
    assert main(["verify", "--trials", "0"]) == 1
    assert main(["verify", "--kinds", "vii"]) == 1
    assert main(["verify", "--n", "x"]) == 1
    assert main(["sweep", "--kinds", "vi"]) == 1


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = main(["uncertainty", "--grid", "3", "--out", str(blocker / "sub" / "x.csv")])
    assert code == 1


def test_verify_alternative_ensemble(tmp_path):
    args = ["verify", "--n", "4", "--kinds", "i,ii,iv", "--trials", "3", "--restarts", "16", "--ensemble", "uniform-spectrum"]
    code, out = run(args, tmp_path)
    assert code == 0
    assert all(float(r["gap"]) <= 1e-4 * float(r["constant"]) for r in read_rows(out))
    assert main(["verify", "--ensemble", "cauchy"]) == 1
