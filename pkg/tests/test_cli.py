import csv
import io
import json
import subprocess
import sys

import pytest

from kappa_forge.cli import EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:  # argparse rejects the command line itself
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_text(capsys):
    code, out, _ = run(capsys, "eval", "comm(t,x)", "y = d(x)")
    assert code == EXIT_OK
    assert out.splitlines() == ["(i/κ)·x", "y = dx·1"]


def test_eval_json_and_csv(capsys):
    code, out, _ = run(capsys, "eval", "t*x", "--out", "json", "--kappa", "2")
    data = json.loads(out)
    assert code == EXIT_OK and data["schema"] == "kappa-forge/1" and data["kappa"] == 2.0
    (row,) = data["results"]
    assert row["type"] == "element" and row["value"]["type"] == "element"
    code, out, _ = run(capsys, "eval", "comm(t,x)", "--out", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows == [["source", "type", "text"], ["comm(t, x)", "element", "(i/κ)·x"]]


def test_eval_from_file(capsys, tmp_path):
    src = tmp_path / "prog.kf"
    src.write_text("a = t*x\nadj(a)\n")
    code, out, _ = run(capsys, "eval", "-f", str(src))
    assert code == EXIT_OK and out.splitlines()[1] == "x·t"


def test_parse_command(capsys):
    code, out, _ = run(capsys, "parse", "--", "-(t+x)*t")
    assert code == EXIT_OK and out.strip() == "-(t + x) * t    : element"


@pytest.mark.parametrize("argv", [
    ["eval", "trace(t)"],
    ["eval", "1 +"],
    ["eval", "nosuch(t)"],
    ["eval", "t", "--nv", "15"],
    ["eval"],
    ["suite", "symbolic", "--kappa=-1"],
    ["suite", "nosuch"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and err


def test_type_error_reports_location(capsys):
    _, _, err = run(capsys, "eval", "a = t\ntrace(a)")
    assert "line 2, column 1" in err


def test_numeric_error_exit_3(capsys):
    code, _, err = run(capsys, "eval", "eta(0, 3, gauss1)")
    assert code == EXIT_NUMERIC and "SupportOverflow" in err


def test_suite_pass_and_fail(capsys):
    code, out, _ = run(capsys, "suite", "symbolic")
    assert code == EXIT_OK and json.loads(out)["pass"]
    code, out, _ = run(capsys, "suite", "symbolic", "--tol-symbolic", "1e-30")
    assert code == EXIT_FAIL and not json.loads(out)["pass"]


def test_suite_csv(capsys):
    code, out, _ = run(capsys, "suite", "hopf", "--out", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and rows and all(r["pass"] == "1" for r in rows)


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kappa": 3.0, "tol_symbolic": 1e-30}))
    code, out, _ = run(capsys, "suite", "symbolic", "--config", str(cfg))
    assert code == EXIT_FAIL and json.loads(out)["config"]["kappa"] == 3.0
    code, out, _ = run(capsys, "suite", "symbolic", "--config", str(cfg), "--tol-symbolic", "1e-10")
    assert code == EXIT_OK
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(capsys, "suite", "symbolic", "--config", str(bad))[0] == EXIT_USAGE


def test_byte_identical_reports(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run(capsys, "suite", "calculus", "--threads", "1", "-o", str(p))[0] == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_figures(capsys, tmp_path):
    code, out, err = run(capsys, "suite", "grid", "--figures", str(tmp_path / "figs"))
    assert code == EXIT_OK and json.loads(out)["pass"]
    made = sorted(p.name for p in (tmp_path / "figs").iterdir())
    assert made == ["cross_engine.png", "grid_margins.png", "star3_convergence.png"]
    assert all((tmp_path / "figs" / m).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n" for m in made)
    assert err.count("figure:") == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kappa_forge.cli", "eval", "comm(t,x)"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.strip() == "(i/κ)·x"
