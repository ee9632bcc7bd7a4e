import json

import pytest

from fgacsql.cli import main

from .conftest import CASESTUDY, detect_solver


def _args(*pairs):
    return [str(p) for p in pairs]


def test_schema_to_stdout(capsys):
    code = main(["schema", "--model", str(CASESTUDY / "university.json")])
    out = capsys.readouterr().out
    assert code == 0
    assert "CREATE TABLE Lecturer" in out


def test_schema_with_scenario_to_file(tmp_path):
    target = tmp_path / "schema.sql"
    code = main(
        [
            "schema",
            "--model", str(CASESTUDY / "university.json"),
            "--scenario", str(CASESTUDY / "scenario_demo.json"),
            "--output", str(target),
        ]
    )
    assert code == 0
    text = target.read_text(encoding="utf-8")
    assert "INSERT INTO Enrolment" in text


def test_compile_emits_procedure_and_functions(tmp_path):
    target = tmp_path / "secured.sql"
    code = main(
        [
            "compile",
            "--model", str(CASESTUDY / "university.json"),
            "--policy", str(CASESTUDY / "policy_secvgu_1.json"),
            "--query", str(CASESTUDY / "queries" / "q4.sql"),
            "--registry", str(CASESTUDY / "registry.json"),
            "--output", str(target),
        ]
    )
    assert code == 0
    text = target.read_text(encoding="utf-8")
    assert "CREATE PROCEDURE SecQuery_SecVGU1_" in text
    assert "CREATE FUNCTION AuthFunc_SecVGU1_Student_age" in text
    assert "throw_error" in text


def test_compile_is_byte_reproducible(tmp_path):
    outputs = []
    for name in ("a.sql", "b.sql"):
        target = tmp_path / name
        main(
            [
                "compile",
                "--model", str(CASESTUDY / "university.json"),
                "--policy", str(CASESTUDY / "policy_secvgu_2.json"),
                "--query", str(CASESTUDY / "queries" / "q6.sql"),
                "--registry", str(CASESTUDY / "registry.json"),
                "--output", str(target),
            ]
        )
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]


def test_run_secured_query_rows(capsys):
    code = main(
        [
            "run",
            "--model", str(CASESTUDY / "university.json"),
            "--policy", str(CASESTUDY / "policy_secvgu_1.json"),
            "--scenario", str(CASESTUDY / "scenario_demo.json"),
            "--query", str(CASESTUDY / "queries" / "q4.sql"),
            "--registry", str(CASESTUDY / "registry.json"),
            "--caller", "Huong",
            "--role", "Lecturer",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert out.strip().splitlines()[-1] == "1"  # Thanh (20) is the only >18


def test_run_denied_caller_prints_error(capsys):
    code = main(
        [
            "run",
            "--model", str(CASESTUDY / "university.json"),
            "--policy", str(CASESTUDY / "policy_secvgu_1.json"),
            "--scenario", str(CASESTUDY / "scenario_demo.json"),
            "--query", str(CASESTUDY / "queries" / "q4.sql"),
            "--registry", str(CASESTUDY / "registry.json"),
            "--caller", "Manuel",
            "--role", "Lecturer",
        ]
    )
    err = capsys.readouterr().err
    assert code == 1
    assert "security_error" in err


def test_eval_constraint(capsys):
    code = main(
        [
            "eval",
            "--model", str(CASESTUDY / "university.json"),
            "--scenario", str(CASESTUDY / "scenario_demo.json"),
            "--bind", "caller=Huong",
            "Lecturer.allInstances()->select(l|l.age > caller.age)->isEmpty()",
        ]
    )
    out = capsys.readouterr().out
    assert code == 0 and out.strip() == "True"


def test_usage_error_exit_code():
    assert main(["schema"]) == 2  # missing --model


def test_domain_error_exit_code(tmp_path):
    missing = tmp_path / "nope.json"
    assert main(["schema", "--model", str(missing)]) == 1


@pytest.mark.skipif(detect_solver() is None, reason="no solver available")
def test_prove_subcommand(tmp_path, capsys, solver_cmd):
    script = tmp_path / "trivial.smt2"
    script.write_text(
        "(set-logic ALL)\n(declare-const x Int)\n(assert (> x 0))\n(assert (< x 0))\n(check-sat)\n",
        encoding="utf-8",
    )
    code = main(["prove", "--script", str(script), "--solver", solver_cmd])
    out = capsys.readouterr().out
    assert code == 0 and out.strip() == "unsat"


@pytest.mark.skipif(detect_solver() is None, reason="no solver available")
def test_optimize_subcommand(tmp_path, capsys, solver_cmd):
    outdir = tmp_path / "out"
    code = main(
        [
            "optimize",
            "--model", str(CASESTUDY / "university.json"),
            "--policy", str(CASESTUDY / "policy_secvgu_1.json"),
            "--query", str(CASESTUDY / "queries" / "q4.sql"),
            "--facts", str(CASESTUDY / "facts" / "case1_oldest.json"),
            "--registry", str(CASESTUDY / "registry.json"),
            "--solver", solver_cmd,
            "--output-dir", str(outdir),
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "unsat" in out and "GUARDED" in out
    assert (outdir / "optimized_procedure.sql").exists()
    assert (outdir / "report.txt").exists()
    assert list((outdir / "smt").glob("*.smt2"))
    optimized = (outdir / "optimized_procedure.sql").read_text(encoding="utf-8")
    assert "IF (role = 'Lecturer'" in optimized
