import csv
import io
import json
import subprocess
import sys

import pytest

from hyperpoisson.cli import main, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_grid_parsing():
    assert len(parse_grid("0:0.1:5")) == 51
    assert parse_grid("0:0.1:0.3") == [0.0, 0.1, 0.2, 0.3]
    # endpoint inclusion within half a step
    assert parse_grid("0:0.3:1") == [0.0, 0.3, 0.6, 0.9]
    assert parse_grid("0:0.3:1.05")[-1] == 1.2
    assert parse_grid("2:1:2") == [2.0]


@pytest.mark.parametrize("spec", ["0:0.1", "a:b:c", "0:0:1", "1:0.1:0", "0:-1:1", "0:1:inf"])
def test_bad_grids_exit_2(capsys, spec):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--rho-grid", spec])
    assert exc.value.code == 2


def test_eval_single_row(capsys):
    code, out, _ = run(capsys, "eval", "--n", "4", "--a", "1", "--x", "2", "--rho", "0.5", "--method", "closed")
    assert code == 0
    (row,) = rows(out)
    assert out.splitlines()[0] == "n,a,x,rho,value,method,err_estimate"
    assert row["method"] == "closed" and row["n"] == "4"
    assert float(row["value"]) == pytest.approx(0.10707991519020932, rel=1e-12)


def test_eval_grid_rows_and_determinism(capsys):
    argv = ["eval", "--n", "3", "--a", "1", "--x", "1.5", "--rho-grid", "0:0.1:5"]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    table = rows(first)
    assert len(table) == 51
    assert [float(r["rho"]) for r in table][-1] == 5.0
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_eval_values_round_trip(capsys):
    from hyperpoisson.kernel import kernel_values
    from hyperpoisson.wfun import Geometry

    _, out, _ = run(capsys, "eval", "--n", "5", "--x", "3", "--rho-grid", "0:0.7:2.1")
    exact = [kv.value for kv in kernel_values(Geometry(5, 1.0, 3.0), [0.0, 0.7, 1.4, 2.1])]
    assert [float(r["value"]) for r in rows(out)] == exact


def test_eval_json_and_output_file(capsys, tmp_path):
    target = tmp_path / "k.json"
    code, out, _ = run(capsys, "eval", "--rho", "1", "--method", "hankel", "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    (rec,) = json.loads(target.read_text())
    assert set(rec) == {"n", "a", "x", "rho", "value", "method", "err_estimate"}
    assert rec["method"] == "hankel"


def test_eval_rep_alias(capsys):
    _, out, _ = run(capsys, "eval", "--rho", "1", "--method", "rep")
    assert rows(out)[0]["method"] == "representation"


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--x", "0.5", "--rho", "1"],
        ["eval", "--n", "1", "--rho", "1"],
        ["eval", "--rho", "-1"],
        ["eval"],
        ["eval", "--n", "5", "--rho", "1", "--method", "closed"],
        ["eval", "--rho", "1", "--method", "spline"],
        ["validate", "--only", "nonsense"],
        ["mc", "--validate"],
        ["mc", "--paths", "0", "--seed", "1"],
        ["zeros", "--n", "2"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_validate_only_moments(capsys, tmp_path):
    report = tmp_path / "out.json"
    code, out, _ = run(capsys, "validate", "--only", "moments", "--json", str(report), "--n", "3,4")
    assert code == 0
    records = json.loads(report.read_text())
    assert records and all(r["group"] == "moments" for r in records)
    assert {"name", "group", "status", "measured", "threshold", "runtime"} <= set(records[0])
    assert all(r["status"] == "PASS" for r in records)
    assert "checks passed" in out


def test_validate_schema_stable(capsys, tmp_path):
    keys = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        run(capsys, "validate", "--only", "zeros", "--json", str(path), "--quiet")
        keys.append([(r["name"], sorted(r)) for r in json.loads(path.read_text())])
    assert keys[0] == keys[1]


def test_validate_fail_exits_1(capsys):
    # the boundary-limit group is known to miss its threshold at a = 0.02
    code, out, _ = run(capsys, "validate", "--only", "global_limit", "--n", "3")
    assert code == 1
    assert "FAIL" in out


def test_mc_table(capsys):
    argv = ["mc", "--n", "3", "--a", "1", "--x", "1.5", "--paths", "3000", "--dt", "1e-3", "--seed", "7",
            "--u", "0.5,1,2"]
    code, out, err = run(capsys, *argv)
    assert code == 0
    table = rows(out)
    assert [float(r["u"]) for r in table] == [0.5, 1.0, 2.0]
    assert all(abs(float(r["z"])) < 4 for r in table)
    assert "max|z|" in err
    _, again, _ = run(capsys, *argv)
    assert again == out


def test_mc_histogram(capsys):
    code, out, _ = run(capsys, "mc", "--hist", "--bins", "20", "--rmax", "6", "--paths", "3000", "--dt", "1e-3",
                       "--seed", "3", "--validate")
    assert code == 0
    table = rows(out)
    assert len(table) == 20
    assert float(table[-1]["bin_hi"]) == 6.0


def test_mc_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("HYPERPOISSON_THREADS", "2")
    argv = ["mc", "--paths", "5000", "--dt", "1e-3", "--seed", "1", "--u", "1"]
    _, threaded, _ = run(capsys, *argv)
    monkeypatch.delenv("HYPERPOISSON_THREADS")
    _, single, _ = run(capsys, *argv)
    assert threaded == single


def test_zeros_output(capsys):
    code, out, err = run(capsys, "zeros", "--n", "6")
    assert code == 0
    table = rows(out)
    assert len(table) == 2
    assert sorted(float(r["im"]) for r in table) == pytest.approx([-(3**0.5) / 2, 3**0.5 / 2])
    assert "count=2" in err


@pytest.mark.parametrize("regime", ["rho", "x", "blowup", "linear"])
def test_asymptote_regimes(capsys, regime):
    code, out, _ = run(capsys, "asymptote", "--regime", regime, "--n", "4")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2 and lines[1].endswith("PASS")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hyperpoisson", "zeros", "--n", "4"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("0,-1,")
