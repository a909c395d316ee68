from __future__ import annotations

import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from futamix.cli import main
from futamix.ddsl import fixture_text
from futamix.lcore import lift_program, parse_datum

IDENT = "(program (def id (x) x))\n"
FAILY = "(program (def f (x) (fail x)))\n"
LOOP = ("(program (def f (n) (if (< n (quote 1)) (quote done)"
        " (call f (- n (quote 1))))))\n")


@pytest.fixture
def ident_file(tmp_path):
    p = tmp_path / "ident.l0"
    p.write_text(IDENT)
    return str(p)


@pytest.fixture
def coffee_file(tmp_path):
    p = tmp_path / "coffee.dlg"
    p.write_text(fixture_text("coffee"))
    return str(p)


def test_run_identity(ident_file, capsys):
    assert main(["run", ident_file, "--args", "(a)"]) == 0
    out = capsys.readouterr().out
    assert "result: a" in out and "steps:" in out


def test_run_abort_exits_1(tmp_path, capsys):
    p = tmp_path / "f.l0"
    p.write_text(FAILY)
    assert main(["run", str(p), "--args", "(boom)"]) == 1
    assert "abort: boom" in capsys.readouterr().out


def test_run_parse_error_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.l0"
    p.write_text("(program (def f (x)")
    assert main(["run", str(p)]) == 2
    assert "at 1:" in capsys.readouterr().err


def test_run_budget_exits_3(tmp_path):
    p = tmp_path / "loop.l0"
    p.write_text(LOOP)
    assert main(["run", str(p), "--args", "(100000)", "--budget-steps", "50"]) == 3


def test_run_json(ident_file, capsys):
    assert main(["run", ident_file, "--args", "(a)", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["result"] == "a" and payload["steps"] >= 1


def test_run_coffee_interp(capsys):
    from importlib import resources
    asset = str(resources.files("futamix") / "assets" / "interp.l0")
    dialog = fixture_text("coffee")
    gd = " ".join(dialog.split("\n"))
    # strip comments for inline embedding
    from futamix.lcore import parse_datum, print_datum
    gd = print_datum(parse_datum(dialog))
    assert main(["run", asset, "--args", f"({gd} (small dark no))"]) == 0
    assert '"coffee as ordered"' in capsys.readouterr().out


def test_mix_engines_agree(ident_file, tmp_path, capsys):
    out_host = tmp_path / "host.l0"
    out_l0 = tmp_path / "l0.l0"
    assert main(["mix", ident_file, "--static", "((x a))", "-o", str(out_host)]) == 0
    assert main(["mix", ident_file, "--static", "((x a))", "--engine", "l0",
                 "-o", str(out_l0)]) == 0
    from futamix.mixer import programs_alpha_equal
    a = lift_program(parse_datum(out_host.read_text()))
    b = lift_program(parse_datum(out_l0.read_text()))
    assert programs_alpha_equal(a, b)


def test_project1_writes_stager(coffee_file, tmp_path, capsys):
    out = tmp_path / "artifacts"
    assert main(["project", "1", "--dialog", coffee_file, "--out", str(out)]) == 0
    stager = out / "stager_coffee.l0"
    assert stager.exists()
    assert "stager_coffee.l0" in capsys.readouterr().out
    prog = lift_program(parse_datum(stager.read_text()))
    assert prog.by_name[prog.entry].params == ("responses",)


def test_project2_and_3_write_artifacts(tmp_path):
    out = tmp_path / "artifacts"
    assert main(["project", "2", "--out", str(out)]) == 0
    assert main(["project", "3", "--out", str(out)]) == 0
    assert (out / "compiler.l0").exists() and (out / "cogen.l0").exists()


def test_project_budget_exceeded_exits_3(tmp_path):
    assert main(["project", "2", "--budget-points", "10",
                 "--out", str(tmp_path)]) == 3


def test_futamix_out_env(coffee_file, tmp_path, monkeypatch):
    monkeypatch.setenv("FUTAMIX_OUT", str(tmp_path / "env_out"))
    assert main(["project", "1", "--dialog", coffee_file]) == 0
    assert (tmp_path / "env_out" / "stager_coffee.l0").exists()


def test_project1_missing_dialog_exits_2():
    assert main(["project", "1"]) == 2


@pytest.mark.parametrize("engine", ["interp", "stager", "compiled", "cogen"])
def test_stage_engines(coffee_file, engine, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("small\ndark\nno\n"))
    assert main(["stage", coffee_file, "--engine", engine]) == 0
    out = capsys.readouterr().out
    assert '"coffee as ordered"' in out
    assert "size = small" in out  # transcript printed


def test_stage_reprompts_on_invalid(coffee_file, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("huge\nsmall\ndark\nno\n"))
    assert main(["stage", coffee_file]) == 0
    out = capsys.readouterr().out
    assert "not one of: small / medium / large" in out


def test_stage_strict_records_invalid(coffee_file, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("huge\n"))
    assert main(["stage", coffee_file, "--strict"]) == 1
    assert "(invalid size huge)" in capsys.readouterr().out


def test_stage_empty_dialog(tmp_path, capsys):
    p = tmp_path / "empty.dlg"
    p.write_text(fixture_text("empty"))
    assert main(["stage", str(p)]) == 0
    assert '(done "done" ())' in capsys.readouterr().out


def test_check_default_fixtures(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "all" in out and "cells ok" in out
    assert "speedup" in out


def test_check_single_fixture_dir_json(tmp_path, capsys):
    (tmp_path / "empty.dlg").write_text(fixture_text("empty"))
    assert main(["check", str(tmp_path), "--json"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = [json.loads(l) for l in lines if l.startswith("{")]
    assert all(r["ok"] for r in rows)


def test_check_missing_dir_exits_2(tmp_path):
    assert main(["check", str(tmp_path / "nope")]) == 2


def test_cli_entrypoint_subprocess(ident_file):
    out = subprocess.run(
        [sys.executable, "-m", "futamix.cli", "run", ident_file, "--args", "(hi)"],
        capture_output=True, text=True)
    assert out.returncode == 0 and "result: hi" in out.stdout
