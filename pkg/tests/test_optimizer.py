import sys
import textwrap

import pytest

from fgacsql.errors import InconsistentChecks, SolverProtocolError, SolverUnavailable
from fgacsql.optimizer import (
    ContextFact,
    ProofOutcome,
    build_elimination_problem,
    gen_optimized_proc,
    load_facts,
    plan_eliminations,
    prove_check_unnecessary,
    run_optimization,
    sigma_for,
)
from fgacsql.policy import AssociationRes, AttributeRes
from fgacsql.secquery import IfStep, gen_sec_query, render_procedure, render_step
from fgacsql.sql.parser import parse_select

from .conftest import CASESTUDY, GOLDEN, query_text
from .helpers import smt_forms, sql_tokens

AGE = AttributeRes("Student", "age")
ENR = AssociationRes("Enrolment")


def _facts(name, policy):
    return load_facts(str(CASESTUDY / "facts" / name), policy)


def _problem(policy, res, facts):
    sigma = list(sigma_for(policy, res))
    auth = policy.rules[("Lecturer", res)]
    return build_elimination_problem(policy.data_model, sigma, facts, auth)


def _normalize_names(text: str, funcs) -> list[str]:
    for func in funcs:
        text = text.replace(func.name, f"__AUTHFUNC_{func.resource.token()}__")
    return sql_tokens(text)


# -- golden elimination scripts (appendix listings) ----------------------------

@pytest.mark.parametrize(
    "policy_fixture,res,facts_file,fact_index,golden",
    [
        ("secvgu_1", AGE, "case1_oldest.json", None, "listing2_case1_secvgu1.smt2"),
        ("secvgu_2", ENR, "case2_lecturer_of_all.json", None, "listing4_case2_secvgu2.smt2"),
        ("secvgu_2", ENR, "case3_by_construction.json", 0, "listing6_case3a_secvgu2.smt2"),
        ("secvgu_2", AGE, "case3_by_construction.json", 1, "listing7_case3b_secvgu2.smt2"),
    ],
)
def test_golden_elimination_scripts(request, policy_fixture, res, facts_file, fact_index, golden):
    policy = request.getfixturevalue(policy_fixture)
    facts = _facts(facts_file, policy)
    if fact_index is not None:
        facts = [facts[fact_index]]
    problem = _problem(policy, res, facts)
    emitted = problem.smtlib()
    expected = (GOLDEN / golden).read_text(encoding="utf-8")
    assert smt_forms(emitted) == smt_forms(expected)


def test_problem_emission_deterministic(secvgu_1):
    facts = _facts("case1_oldest.json", secvgu_1)
    problem = _problem(secvgu_1, AGE, facts)
    assert problem.smtlib() == problem.smtlib()


# -- solver adapter over scripted fake solvers ---------------------------------

def _fake_solver(tmp_path, body: str) -> str:
    path = tmp_path / "solver.py"
    path.write_text(textwrap.dedent(body), encoding="utf-8")
    return f"{sys.executable} {path}"


def test_outcome_mapping(tmp_path, secvgu_1):
    problem = _problem(secvgu_1, AGE, [])
    for answer, proven in (("unsat", True), ("sat", False), ("unknown", False)):
        solver = _fake_solver(tmp_path, f"print({answer!r})")
        outcome = prove_check_unnecessary(problem, solver, timeout=5)
        assert outcome.proven is proven and outcome.reason == answer


def test_unknown_is_never_proven(tmp_path, secvgu_1):
    problem = _problem(secvgu_1, AGE, [])
    solver = _fake_solver(tmp_path, "print('unknown')")
    assert prove_check_unnecessary(problem, solver, timeout=5).proven is False


def test_timeout_is_not_proven(tmp_path, secvgu_1):
    problem = _problem(secvgu_1, AGE, [])
    solver = _fake_solver(tmp_path, "import time\ntime.sleep(30)\nprint('unsat')")
    outcome = prove_check_unnecessary(problem, solver, timeout=0.5)
    assert outcome.proven is False and outcome.reason == "timeout"


def test_missing_solver(secvgu_1):
    problem = _problem(secvgu_1, AGE, [])
    with pytest.raises(SolverUnavailable):
        prove_check_unnecessary(problem, "/nonexistent/solver", timeout=5)


def test_garbage_output_is_protocol_error(tmp_path, secvgu_1):
    problem = _problem(secvgu_1, AGE, [])
    solver = _fake_solver(tmp_path, "print('segmentation fault (core dumped)')")
    with pytest.raises(SolverProtocolError):
        prove_check_unnecessary(problem, solver, timeout=5)


def test_facts_require_runtime_guard(secvgu_1, tmp_path):
    bad = tmp_path / "facts.json"
    bad.write_text(
        '[{"description": "x", "ocl": "caller = caller", "sqlGuard": ""}]',
        encoding="utf-8",
    )
    with pytest.raises(ValueError):
        load_facts(str(bad), secvgu_1)


# -- optimized procedure generation ---------------------------------------------

def _proven():
    return ProofOutcome(True, "unsat", 0.01)


def _not_proven():
    return ProofOutcome(False, "sat", 0.01)


def test_golden_optimized_case1(secvgu_1, registry):
    q = parse_select(query_text("q4"))
    facts = tuple(_facts("case1_oldest.json", secvgu_1))
    optimized, funcs = gen_optimized_proc(
        secvgu_1, q, [("TEMP1:Student_age", "Lecturer", facts, _proven())], registry
    )
    if_steps = [s for s in optimized.steps if isinstance(s, IfStep)]
    assert len(if_steps) == 1
    fragment = _normalize_names(render_step(if_steps[0], ""), funcs)
    expected = sql_tokens((GOLDEN / "case1_optimized.sql").read_text(encoding="utf-8"))
    assert fragment == expected


def test_golden_optimized_case2(secvgu_2, registry):
    q = parse_select(query_text("q5"))
    facts = tuple(_facts("case2_lecturer_of_all.json", secvgu_2))
    optimized, funcs = gen_optimized_proc(
        secvgu_2, q, [("TEMP2:Enrolment", "Lecturer", facts, _proven())], registry
    )
    if_steps = [s for s in optimized.steps if isinstance(s, IfStep)]
    fragment = _normalize_names(render_step(if_steps[0], ""), funcs)
    expected = sql_tokens((GOLDEN / "case2_optimized.sql").read_text(encoding="utf-8"))
    assert fragment == expected


def test_golden_optimized_case3(secvgu_2, registry):
    q = parse_select(query_text("q6"))
    facts = _facts("case3_by_construction.json", secvgu_2)
    optimized, funcs = gen_optimized_proc(
        secvgu_2,
        q,
        [
            ("TEMP2:Enrolment", "Lecturer", (facts[0],), _proven()),
            ("TEMP5:Student_age", "Lecturer", (facts[1],), _proven()),
        ],
        registry,
    )
    if_steps = [s for s in optimized.steps if isinstance(s, IfStep)]
    assert len(if_steps) == 2
    golden_text = (GOLDEN / "case3_optimized.sql").read_text(encoding="utf-8")
    fragments = [f.strip() for f in golden_text.split("...")]
    for step, fragment_text in zip(if_steps, fragments):
        assert _normalize_names(render_step(step, ""), funcs) == sql_tokens(fragment_text)


def test_optimized_procedure_is_observationally_sound(secvgu_1, registry, university):
    """With the guard true the THEN branch skips checks but yields the same
    outcome; with the guard false the ELSE branch is the original step, so
    outcomes coincide for every caller."""
    from fgacsql.harness import database_from_scenario, exec_procedure
    from .helpers import scenario

    q = parse_select(query_text("q4"))
    base, funcs = gen_sec_query(secvgu_1, q, registry)
    facts = tuple(_facts("case1_oldest.json", secvgu_1))
    optimized, _ = gen_optimized_proc(
        secvgu_1, q, [("TEMP1:Student_age", "Lecturer", facts, _proven())], registry
    )
    grids = [
        scenario({"L0": 40, "L1": 35}, {"S0": 20, "S1": 17}, [("L0", "S0")]),
        scenario({"L0": 40, "L1": 40}, {"S0": 19}, []),
        scenario({"L0": 30}, {"S0": 22, "S1": 18}, [("L0", "S1")]),
    ]
    for sc in grids:
        db = database_from_scenario(university, sc)
        for caller in sorted(sc.object_ids("Lecturer")):
            for role in ("Lecturer", "Other"):
                first = exec_procedure(db, base, funcs, caller, role)
                second = exec_procedure(db, optimized, funcs, caller, role)
                assert first.kind == second.kind
                assert first.rows == second.rows


def test_not_proven_keeps_step_identical(secvgu_1, registry):
    q = parse_select(query_text("q4"))
    base, _ = gen_sec_query(secvgu_1, q, registry)
    facts = tuple(_facts("case1_oldest.json", secvgu_1))
    optimized, _ = gen_optimized_proc(
        secvgu_1, q, [("TEMP1:Student_age", "Lecturer", facts, _not_proven())], registry
    )
    assert render_procedure(optimized) == render_procedure(base)


def test_unknown_check_id_rejected(secvgu_1, registry):
    q = parse_select(query_text("q4"))
    with pytest.raises(InconsistentChecks):
        gen_optimized_proc(secvgu_1, q, [("TEMP9:Nope", "Lecturer", (), _proven())], registry)


def test_plan_eliminations_scopes_facts(secvgu_2, registry):
    q = parse_select(query_text("q6"))
    proc, _ = gen_sec_query(secvgu_2, q, registry)
    facts = _facts("case3_by_construction.json", secvgu_2)
    plans = plan_eliminations(secvgu_2, proc, facts)
    by_check = {p.check.check_id: p for p in plans}
    assert by_check["TEMP2:Enrolment"].facts == (facts[0],)
    assert by_check["TEMP5:Student_age"].facts == (facts[1],)


def test_run_optimization_with_solver(secvgu_1, registry, solver_cmd, tmp_path):
    q = parse_select(query_text("q4"))
    facts = _facts("case1_oldest.json", secvgu_1)
    optimized, funcs, reports = run_optimization(
        secvgu_1, q, facts, solver_cmd, registry=registry, timeout=10,
        script_dir=tmp_path / "smt",
    )
    assert len(reports) == 1
    assert reports[0].outcome.reason == "unsat" and reports[0].action == "GUARDED"
    assert any(isinstance(s, IfStep) for s in optimized.steps)
    assert (tmp_path / "smt").exists()


def test_run_optimization_parallel_jobs(secvgu_2, registry, solver_cmd):
    q = parse_select(query_text("q6"))
    facts = _facts("case3_by_construction.json", secvgu_2)
    optimized, _, reports = run_optimization(
        secvgu_2, q, facts, solver_cmd, registry=registry, timeout=10, jobs=2
    )
    assert sorted(r.action for r in reports) == ["REMOVED", "REMOVED"]
    assert sum(isinstance(s, IfStep) for s in optimized.steps) == 2
