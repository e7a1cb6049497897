import json
from pathlib import Path

import pytest

from supercheck.cli import main
from supercheck.syntax import parse_expr, parse_program

CORPUS = Path(__file__).resolve().parent.parent / "src" / "supercheck" / "corpus"
SYNAPSE = str(CORPUS / "synapse.l")
SELFINT = str(CORPUS / "selfint.l")
MUTANT = str(CORPUS / "mutations" / "wm_double_dirty.l")


def test_run_true_case(capsys):
    code = main(["run", SYNAPSE, "--entry", "Main",
                 "--data", "([]) : ([])"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "True"


def test_run_bottom_case(capsys):
    code = main(["run", SYNAPSE, "--entry", "Main",
                 "--data", "(wh2) : ([])"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "Bottom"


def test_run_via_interpreter_agrees(capsys):
    for datum in ["([]) : ([])", "(wm rm) : (I)", "(wh2) : ([])"]:
        main(["run", SYNAPSE, "--data", datum])
        native = capsys.readouterr().out
        main(["run", SYNAPSE, "--data", datum, "--via-interpreter"])
        assert capsys.readouterr().out == native, datum


def test_run_rejects_bad_data(capsys):
    code = main(["run", SYNAPSE, "--data", "(unclosed"])
    assert code == 2
    assert "supercheck:" in capsys.readouterr().err


def test_run_missing_file(capsys):
    assert main(["run", "/nonexistent.l", "--data", "[]"]) == 2


def test_run_budget_exhaustion(capsys):
    code = main(["run", SYNAPSE, "--data", "(rm wm rm wm) : (I I I)",
                 "--budget", "3"])
    assert code == 3


def test_encode_output_is_concrete_syntax(capsys):
    assert main(["encode", SYNAPSE]) == 0
    out = capsys.readouterr().out
    parse_expr(out)  # parses as one expression


def test_encode_rejects_programs_outside_the_fragment(capsys):
    assert main(["encode", SELFINT]) == 2


def test_supercompile_prints_residual_and_graph(tmp_path, capsys):
    graph = tmp_path / "g.json"
    code = main(["supercompile", SYNAPSE, "--entry", "Main(e.d)",
                 "--graph", str(graph)])
    assert code == 0
    residual = parse_program(capsys.readouterr().out)
    assert residual.defs[0].name == "Main"
    doc = json.loads(graph.read_text())
    assert doc["format"] == "scpgraph-v1"


def test_supercompile_budget(tmp_path, capsys):
    assert main(["supercompile", SYNAPSE, "--entry", "Main(e.d)",
                 "--budget", "5"]) == 3


def test_verify_direct_safe(tmp_path, capsys):
    out = tmp_path / "residual.l"
    code = main(["verify", SYNAPSE, "--emit-residual", str(out)])
    assert code == 0
    assert "verdict: Safe" in capsys.readouterr().out
    text = out.read_text()
    assert "False" not in text
    parse_program(text)


def test_verify_via_interpreter_two_rounds(capsys):
    code = main(["verify", SYNAPSE, "--via-interpreter", "--rounds", "2"])
    assert code == 0
    out = capsys.readouterr().out
    assert "verdict: Safe" in out and "round 2:" in out


def test_verify_mutant_not_shown_safe(capsys):
    code = main(["verify", MUTANT, "--rounds", "2"])
    assert code == 1
    assert "verdict: NotShownSafe" in capsys.readouterr().out


def test_verify_report_dir(tmp_path, capsys):
    code = main(["verify", SYNAPSE, "--report-dir", str(tmp_path)])
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"summary.csv", "rounds.png", "events.png",
            "graph.png", "report.txt"} <= names


def test_verify_unknown_entry(capsys):
    assert main(["verify", SYNAPSE, "--entry", "Nope"]) == 2


def test_lint_clean_model(capsys):
    assert main(["lint", SYNAPSE]) == 0
    assert capsys.readouterr().out == ""


def test_lint_reports_the_interpreter_lookup_hole(capsys):
    # the bundled interpreter deliberately defers Prog to synthesis time
    assert main(["lint", SELFINT]) == 1
    out = capsys.readouterr().out.strip().splitlines()
    assert out == ["error: EvalCall rule 1: call to undefined function Prog"]
