import json
import shutil
import subprocess
import sys

import pytest

from spheralg.cli import main
from spheralg.reports import SCAN_COLUMNS, VerificationReport


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_default_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    assert out.startswith("spheralg-identities: PASS")


def test_verify_small_lmax_still_runs(capsys):
    code, out, _ = run(capsys, "verify", "--lmax", "4")
    assert code == 0


def test_verify_unattainable_tolerance_fails(capsys):
    code, out, _ = run(capsys, "verify", "--tol", "1e-30", "--format", "json", "--reproducible")
    assert code == 1
    rep = json.loads(out)
    assert rep["status"] == "fail"
    failed = [c for c in rep["checks"] if c["status"] == "fail"]
    assert failed and all(c["residual"] > 0 for c in failed)


def test_verify_json_is_reproducible_and_roundtrips(capsys):
    _, first, _ = run(capsys, "verify", "--format", "json", "--reproducible", "--lmax", "6")
    _, second, _ = run(capsys, "verify", "--format", "json", "--reproducible", "--lmax", "6")
    assert first == second
    data = json.loads(first)
    assert "timestamp" not in data
    assert data["schema"] == "spheralg-report/1" and data["tool_version"]
    assert data["config"]["lmax"] == 6
    assert VerificationReport.from_dict(data).to_dict() == data


def test_timestamp_present_without_reproducible(capsys):
    _, out, _ = run(capsys, "classify", "--a", "1", "--b", "0", "--format", "json")
    assert "timestamp" in json.loads(out)


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--lmax", "1"],
        ["verify", "--tol", "0"],
        ["verify", "--jobs", "0"],
        ["scan", "--a-range", "0:1:0"],
        ["scan", "--a-range", "2:1:1"],
        ["scan", "--b-range", "0:1"],
        ["eval", "--expr", "foo(N)"],
        ["eval", "--expr", "N +"],
        ["repr", "--expr", "Kplus"],
        ["repr", "--expr", "N_x*N_y*N_z", "--lmax", "2"],
        ["casimir", "--a", "2", "--b", "0"],
        ["classify", "--a", "x", "--b", "0"],
        ["eval", "--script", "/nonexistent/file"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_scan_csv_columns_and_rows(capsys):
    code, out, _ = run(capsys, "scan", "--a-range", "0:2:1/2", "--b-range", "0:1:1/2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert tuple(lines[0].split(",")) == SCAN_COLUMNS
    rows = {tuple(l.split(",")[:2]): l.split(",") for l in lines[1:]}
    assert len(rows) == 15
    assert rows[("1", "0")][7] == "1" and rows[("1", "0")][8] == "CASE1"
    assert rows[("2", "1")][7] == "1" and rows[("2", "1")][9] == "B1_GENERIC"
    assert rows[("1", "1/2")][7] == "0"
    assert rows[("1", "1/2")][4:6] == ["-1/4", "1/4"]
    # residuals carry 17 significant digits
    assert len(rows[("0", "0")][6].replace(".", "").lstrip("0")) >= 16


def test_scan_is_independent_of_jobs(capsys):
    args = ["scan", "--a-range", "-1:1:1/2", "--b-range", "0:1:1/4", "--format", "csv"]
    _, one, _ = run(capsys, *args)
    _, two, _ = run(capsys, *args, "--jobs", "2")
    assert one == two


def test_classify_renderings(capsys):
    code, out, _ = run(capsys, "classify", "--a", "1", "--b", "0")
    assert code == 0 and "G(-1, 0)" in out and "su(1,1)-type" in out
    _, out, _ = run(capsys, "classify", "--a", "1", "--b", "1")
    assert "raw (a0, b0) = (-4, 2)" in out and "note:" in out
    _, out, _ = run(capsys, "classify", "--a", "1", "--b", "0.5")
    assert "not closed" in out


def test_casimir_exit_codes(capsys):
    assert run(capsys, "casimir", "--a", "1", "--b", "0", "--lmax", "8")[0] == 0
    # printed linear coefficient is wrong when b0 != 0
    assert run(capsys, "casimir", "--a", "1", "--b", "1", "--lmax", "8")[0] == 1


def test_repr_examples(capsys):
    _, out, _ = run(capsys, "repr", "--expr", "L_z", "--lmax", "1")
    assert [float(l.split()[4]) for l in out.splitlines()] == [0, -1, 0, 1]
    _, out, _ = run(capsys, "repr", "--expr", "N_z", "--lmax", "1")
    assert "1 0 0 0 0.57735026918962573 0" in out


def test_repr_closed_commutator_matches_lz(capsys, tmp_path):
    from spheralg.sphere import Basis, parse_dump, residual_norm

    _, lhs, _ = run(capsys, "repr", "--expr", "comm(Kplus,Kminus)", "--params", "a=1,b=0,c=-1,d=0", "--lmax", "5")
    _, rhs, _ = run(capsys, "repr", "--expr=-2*L_z", "--lmax", "5")
    b = Basis(5)
    assert residual_norm(parse_dump(lhs, b), parse_dump(rhs, b), 2) <= 1e-12


def test_eval_and_script_file(capsys, tmp_path):
    script = tmp_path / "k.alg"
    script.write_text("let X = comm(Kplus, Kminus)\nX\n")
    code, out, _ = run(capsys, "eval", "--script", str(script), "--params", "a=1,b=0,c=-1,d=0")
    assert code == 0 and out.strip() == "(-2) LZ"
    _, out, _ = run(capsys, "eval", "--expr", "cross(N, N)")
    assert out.splitlines() == ["0", "0", "0"]


def test_derive_constraints(capsys):
    code, out, _ = run(capsys, "derive-constraints", "--lmax", "8", "--format", "json", "--reproducible")
    assert code == 0
    data = json.loads(out)["result"]
    assert data["conjugacy"]["solution"] == {"c": "-2 + a - b", "d": "b"}
    assert data["commutator"]["branch"] == "modulo N.L=0 given d=b"


def test_output_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "classify", "--a", "1", "--b", "0", "--format", "json", "--output", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["result"]["g_entry"] == [-1, 0]


@pytest.mark.skipif(shutil.which("spheralg") is None, reason="console script not installed")
def test_console_script_exit_codes():
    ok = subprocess.run(["spheralg", "classify", "--a", "1", "--b", "0"], capture_output=True, text=True)
    assert ok.returncode == 0
    bad = subprocess.run(["spheralg", "verify", "--lmax", "0"], capture_output=True, text=True)
    assert bad.returncode == 2
    mod = subprocess.run([sys.executable, "-m", "spheralg.cli", "eval", "--expr", "L_z"], capture_output=True, text=True)
    assert mod.returncode == 0 and mod.stdout.strip() == "(1) LZ"


def test_negative_values_are_accepted(capsys):
    code, out, _ = run(capsys, "classify", "--a", "-3/2", "--b", "1")
    assert code == 0 and "(a, b, c, d) = (-3/2, 1, -9/2, 1)" in out
    code, out, _ = run(capsys, "eval", "--expr", "-2*L_z")
    assert out.strip() == "(-2) LZ"
