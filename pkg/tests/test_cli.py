import csv
import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from ptsym.cli import dump_csv, dump_json, main, to_plain

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.mark.parametrize(
    "argv,golden",
    [
        (["perturb", "--model", "ix3", "--n", "0", "--order", "2"], "perturb_ix3_n0_order2.json"),
        (["perturb", "--model", "ixyz", "--index", "1,0,2"], "perturb_ixyz_102.json"),
        (["coperator", "--model", "ixyz", "--order", "1", "--format", "text"], "coperator_ixyz.txt"),
        (["coperator", "--model", "ix3", "--order", "2"], "coperator_ix3_order2.json"),
        (["degenerate", "--level", "2"], "degenerate_n2.json"),
        (["degenerate", "--level", "4"], "degenerate_n4.json"),
        (["bindings", "--m", "1", "--g", "0.04", "--k", "2", "--model", "pt"], "bindings_pt_k2.json"),
    ],
)
def test_golden_outputs(capsys, argv, golden):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / golden).read_text()


def test_kernel_texts_golden(capsys):
    lines = []
    for model, order in [("ix3", "1"), ("ix3", "2"), ("ix2y", "1"), ("ixyz", "1")]:
        _, out, _ = run(capsys, "coperator", "--model", model, "--order", order, "--format", "text")
        lines.append(f"{model} order {order}: {out}")
    assert "".join(lines) == (GOLDEN / "kernels.txt").read_text()


def test_perturb_example_fields(capsys):
    _, out, _ = run(capsys, "perturb", "--model", "ix3", "--n", "0", "--order", "2")
    data = json.loads(out)
    assert data["B"] == "11/8"
    assert {t["re"] for t in data["Q"]["terms"]} == {"-27/32", "-7/128", "-1/1152"}


def test_spectrum_sweep_example(capsys):
    code, out, _ = run(capsys, "spectrum", "--family", "eps", "--sweep", "0:2:0.1", "--levels", "10", "--basis", "200")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["epsilon", "n", "re_E", "im_E", "pt_sign", "converged"]
    eps = sorted({float(r["epsilon"]) for r in rows})
    assert eps == pytest.approx([k / 10 for k in range(20)])
    assert all(float(r["im_E"]) == 0 for r in rows)
    assert all(int(r["pt_sign"]) == (-1) ** int(r["n"]) for r in rows if r["converged"] == "true")
    keys = [(float(r["epsilon"]), int(r["n"])) for r in rows]
    assert keys == sorted(keys)


def test_sweep_is_deterministic_across_threads(capsys):
    argv = ["spectrum", "--sweep", "0.5:1.5:0.25", "--levels", "4", "--basis", "60"]
    _, one, _ = run(capsys, *argv, "--threads", "1")
    _, four, _ = run(capsys, *argv, "--threads", "4")
    assert one == four


def test_out_file_and_format_alias(capsys, tmp_path):
    target = tmp_path / "spec.json"
    code, out, _ = run(capsys, "spectrum", "--param", "1", "--levels", "3", "--basis", "60", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    data = json.loads(target.read_text())
    assert data["levels"][0]["re_E"] == pytest.approx(1.15627, abs=1e-5)
    _, alias, _ = run(capsys, "spectrum", "--param", "1", "--levels", "3", "--basis", "60", "--out", "json")
    assert alias == target.read_text()


def test_matrix2x2(capsys):
    code, out, _ = run(capsys, "matrix2x2", "--r", "1", "--s", "2", "--theta", "0.8", "--t", "1.5", "--psi0", "1+2i,0.5")
    assert code == 0
    data = json.loads(out)
    assert data["phase"] == "unbroken"
    ev = data["evolution"]
    assert ev["cpt_norm_t"] == pytest.approx(ev["cpt_norm_0"], rel=1e-10)
    code, out, _ = run(capsys, "matrix2x2", "--r", "1", "--s", "0.5", "--theta", "1.5707963267948966")
    assert json.loads(out)["phase"] == "broken"


def test_zeta_outputs(capsys):
    code, out, _ = run(capsys, "zeta", "--epsilon", "1")
    data = json.loads(out)
    assert code == 0
    assert data["closed_corrected"] == pytest.approx(2.83509493, rel=1e-8)
    code, out, _ = run(capsys, "zeta", "--epsilon", "1", "--compare-numeric", "--basis", "400")
    data = json.loads(out)
    assert code == 0 and data["rel_diff_corrected"] < 1e-5


def test_zeta_nonconvergence_is_numeric_failure(capsys):
    code, _, _ = run(capsys, "zeta", "--epsilon", "0.02", "--compare-numeric", "--basis", "100")
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["spectrum", "--family", "nope"],
        ["spectrum", "--param", "2.5"],
        ["spectrum", "--sweep", "1:0:0.1"],
        ["spectrum"],
        ["perturb", "--model", "ixyz", "--n", "1"],
        ["perturb", "--model", "ix2y", "--index", "1,0", "--order", "2"],
        ["coperator", "--model", "ixyz", "--order", "2"],
        ["zeta", "--epsilon", "0"],
        ["degenerate", "--level", "1"],
        ["bindings", "--m", "1", "--g", "0.1", "--k", "1"],
        ["matrix2x2", "--r", "1", "--s", "1", "--theta", "0", "--t", "1", "--psi0", "1,2,3"],
        ["perturb", "--model", "ix3", "--n", "0", "--out", "csv"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 2
    assert out == ""


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--only", "1,3")
    assert code == 0
    assert out.count("PASS") == 2
    # machine-readable output moves the table to stderr
    code, out, err = run(capsys, "verify", "--only", "1", "--format", "json")
    assert json.loads(out)["all_passed"] and "criterion 1 PASS" in err


def test_verify_fails_nonzero_on_known_failure(capsys):
    code, out, _ = run(capsys, "verify", "--only", "2")
    assert code == 1
    assert "criterion 2 FAIL" in out


def test_serialization_helpers():
    from fractions import Fraction

    assert to_plain(Fraction(3, 4)) == "3/4"
    assert to_plain(1 + 2j) == [1.0, 2.0]
    assert to_plain(float("inf")) == "inf"
    assert dump_json({"b": 1, "a": [0.1]}) == '{\n  "a": [\n    0.1\n  ],\n  "b": 1\n}\n'
    assert dump_csv([{"y": True, "x": 0.1}]) == "x,y\n0.1,true\n"


@pytest.mark.skipif(shutil.which("ptsym") is None, reason="console script not installed")
def test_console_script_byte_identical():
    argv = ["ptsym", "perturb", "--model", "ix2y", "--index", "2,1"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a


def test_module_entry_point_usage_code():
    proc = subprocess.run([sys.executable, "-m", "ptsym.cli", "spectrum", "--bogus"], capture_output=True)
    assert proc.returncode == 2
