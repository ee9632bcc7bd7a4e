"""Proving authorization checks unnecessary and emitting optimized procedures.

For a check guarding resource access under some role, the elimination
problem conjoins the data-model theory, the keyword constants, the
trusted context facts, and the negation of the constraint's truth
formula. An unsat answer means the constraint cannot be false in any
scenario satisfying the facts, so the check may be skipped whenever the
facts' runtime guards hold; the guards (plus the role test) become the
condition of an if-then-else around the staged step.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import InconsistentChecks, SolverProtocolError, SolverUnavailable
from .model import DataModel
from .msfol import (
    Assert,
    Blank,
    Comment,
    DefinitionSet,
    MsfolTheory,
    emit_smtlib,
    map_datamodel_theory,
    map_sigma,
    map_true,
)
from .ocl import OclExpr, parse_bool_ocl, render_ocl
from .ocl2sql import ConstraintRegistry
from .policy import AssociationRes, AttributeRes, Resource, SecurityModel, resource_keywords
from .secquery import (
    AuthFuncDef,
    CheckInfo,
    IfStep,
    StoredProcedure,
    TempTableStep,
    gen_sec_query,
)
from .sql.ast import And, CheckedExpr, Comparison, Not, Or, SelectItem, SelectQuery, SqlExpr, Star, render_expr
from .sql.parser import parse_sql_condition


@dataclass(frozen=True)
class ContextFact:
    """A trusted hypothesis with a first-order form (for proving) and a
    runtime SQL guard (for the generated if-then-else). A guard of TRUE
    marks facts that hold by construction of the staged tables."""

    description: str
    ocl: OclExpr
    sql_guard: str
    resource_scope: Resource | None = None


@dataclass
class EliminationProblem:
    dm: DataModel
    sigma: tuple[tuple[str, str], ...]
    facts: tuple[ContextFact, ...]
    auth: OclExpr

    def smtlib(self) -> str:
        theory = map_datamodel_theory(self.dm)
        theory.extend(map_sigma(self.dm, list(self.sigma)))
        defs = DefinitionSet()
        tail = MsfolTheory()
        for fact in self.facts:
            mark = len(defs.items)
            formula, _ = map_true(fact.ocl, defs)
            tail.items.extend(defs.items[mark:])
            tail.items += [
                Comment(f"context fact: {fact.description}"),
                Comment(render_ocl(fact.ocl)),
                Assert(formula),
                Blank(),
            ]
        mark = len(defs.items)
        goal, _ = map_true(self.auth, defs)
        tail.items.extend(defs.items[mark:])
        tail.items += [
            Comment("authorisation constraint under test"),
            Comment(render_ocl(self.auth)),
            Comment("below is the negation of its truth formula"),
            Assert(("not", goal)),
        ]
        return emit_smtlib(theory, tail)


@dataclass(frozen=True)
class ProofOutcome:
    proven: bool
    reason: str  # unsat | sat | unknown | timeout | solver-error
    elapsed: float

    @staticmethod
    def from_answer(answer: str, elapsed: float) -> "ProofOutcome":
        if answer == "unsat":
            return ProofOutcome(True, "unsat", elapsed)
        return ProofOutcome(False, answer, elapsed)


def sigma_for(s: SecurityModel, res: Resource) -> tuple[tuple[str, str], ...]:
    keywords = resource_keywords(s.data_model, s.user_class, res)
    return tuple(keywords.items())


def build_elimination_problem(
    dm: DataModel,
    sigma_decls: list[tuple[str, str]],
    facts: list[ContextFact],
    auth: OclExpr,
) -> EliminationProblem:
    return EliminationProblem(dm, tuple(sigma_decls), tuple(facts), auth)


def prove_check_unnecessary(
    problem: EliminationProblem,
    solver_cmd: str | list[str],
    timeout: float = 10.0,
    script_path: str | Path | None = None,
) -> ProofOutcome:
    """Run the solver on the emitted script; only `unsat` proves anything."""
    command = shlex.split(solver_cmd) if isinstance(solver_cmd, str) else list(solver_cmd)
    script = problem.smtlib()
    if script_path is None:
        handle = tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False)
        handle.write(script)
        handle.close()
        path = Path(handle.name)
    else:
        path = Path(script_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(script, encoding="utf-8")

    started = time.monotonic()
    try:
        completed = subprocess.run(
            [*command, str(path)],
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except FileNotFoundError as err:
        raise SolverUnavailable(f"cannot run solver {command[0]!r}") from err
    except subprocess.TimeoutExpired:
        return ProofOutcome(False, "timeout", time.monotonic() - started)
    elapsed = time.monotonic() - started

    for line in completed.stdout.splitlines():
        word = line.strip()
        if word in ("sat", "unsat", "unknown"):
            return ProofOutcome.from_answer(word, elapsed)
    if completed.returncode != 0:
        return ProofOutcome(False, "solver-error", elapsed)
    raise SolverProtocolError(completed.stdout + completed.stderr)


# --- wiring checks to facts and emitting the optimized procedure -------------

@dataclass
class CheckPlan:
    check: CheckInfo
    role: str
    facts: tuple[ContextFact, ...]
    problem: EliminationProblem


@dataclass
class CheckReport:
    check_id: str
    resource: str
    role: str
    facts: tuple[str, ...]
    outcome: ProofOutcome
    action: str  # REMOVED | GUARDED | KEPT

    def line(self) -> str:
        facts = ", ".join(self.facts) if self.facts else "-"
        ms = int(self.outcome.elapsed * 1000)
        return (
            f"{self.check_id} | {self.resource} | role={self.role} | "
            f"facts=[{facts}] | {self.outcome.reason} | {ms} ms | {self.action}"
        )


def plan_eliminations(
    s: SecurityModel, proc: StoredProcedure, facts: list[ContextFact]
) -> list[CheckPlan]:
    plans: list[CheckPlan] = []
    for _, check in proc.checks():
        res = check.resource
        sigma = sigma_for(s, res)
        applicable = tuple(
            f for f in facts if f.resource_scope is None or f.resource_scope == res
        )
        for role in s.roles:
            auth = s.rules.get((role, res))
            if auth is None:
                continue
            problem = build_elimination_problem(s.data_model, list(sigma), list(applicable), auth)
            plans.append(CheckPlan(check, role, applicable, problem))
    return plans


def _strip_expr(e: SqlExpr) -> SqlExpr:
    if isinstance(e, CheckedExpr):
        return e.yielded
    if isinstance(e, Comparison):
        return Comparison(e.op, _strip_expr(e.lhs), _strip_expr(e.rhs))
    if isinstance(e, And):
        return And(_strip_expr(e.lhs), _strip_expr(e.rhs))
    if isinstance(e, Or):
        return Or(_strip_expr(e.lhs), _strip_expr(e.rhs))
    if isinstance(e, Not):
        return Not(_strip_expr(e.arg))
    return e


def strip_checks(step: TempTableStep) -> TempTableStep:
    """The unchecked variant: CASE wrappers replaced by the read they guard."""
    body = step.body
    items = []
    for item in body.items:
        if isinstance(item.expr, Star):
            items.append(item)
            continue
        stripped = _strip_expr(item.expr)
        alias = item.alias
        if alias is not None and render_expr(stripped) == alias:
            alias = None
        items.append(SelectItem(stripped, alias))
    where = _strip_expr(body.where) if body.where is not None else None
    joins = tuple(replace(j, on=_strip_expr(j.on)) for j in body.joins)
    return TempTableStep(step.name, replace(body, items=tuple(items), joins=joins, where=where))


def gen_optimized_proc(
    s: SecurityModel,
    q: SelectQuery,
    check_results: list[tuple[str, str, tuple[ContextFact, ...], ProofOutcome]],
    registry: ConstraintRegistry | None = None,
) -> tuple[StoredProcedure, list[AuthFuncDef]]:
    """Wrap proven checks in if-then-else guards; unproven steps stay untouched.

    check_results rows are (check_id, role, facts, outcome).
    """
    proc, funcs = gen_sec_query(s, q, registry)
    known = {check.check_id for _, check in proc.checks()}
    for check_id, _, _, _ in check_results:
        if check_id not in known:
            raise InconsistentChecks(check_id)

    proven: dict[str, list[tuple[str, tuple[ContextFact, ...]]]] = {}
    for check_id, role, facts, outcome in check_results:
        if outcome.proven:
            proven.setdefault(check_id, []).append((role, facts))

    new_steps = []
    for step in proc.steps:
        if not isinstance(step, TempTableStep) or not step.checks:
            new_steps.append(step)
            continue
        entries = [proven.get(c.check_id) for c in step.checks]
        if any(entry is None for entry in entries):
            new_steps.append(step)  # some check not proven: byte-identical step
            continue
        guard_text = _guard_text([e for entry in entries for e in entry])
        unchecked = strip_checks(step)
        if guard_text is None:
            new_steps.append(unchecked)  # tautological constraint: full removal
            continue
        guard = parse_sql_condition(guard_text, frozenset({"caller", "role"}))
        new_steps.append(IfStep(guard_text, guard, unchecked, step))
    optimized = StoredProcedure(proc.name, new_steps, proc.epilogue)
    return optimized, funcs


def _guard_text(entries: list[tuple[str, tuple[ContextFact, ...]]]) -> str | None:
    """Role test plus the conjunction of runtime guards; None when nothing
    needs testing at all (a constraint proven without facts or role)."""
    per_role: dict[str, list[str]] = {}
    for role, facts in entries:
        guards = per_role.setdefault(role, [])
        for fact in facts:
            text = fact.sql_guard.strip()
            if text.upper() != "TRUE" and text not in guards:
                guards.append(text)
    parts = []
    for role, guards in per_role.items():
        if guards:
            parts.append(f"role = '{role}' AND ({' AND '.join(guards)})")
        else:
            parts.append(f"role = '{role}'")
    if not parts:
        return None
    return " OR ".join(f"({p})" for p in parts) if len(parts) > 1 else parts[0]


def run_optimization(
    s: SecurityModel,
    q: SelectQuery,
    facts: list[ContextFact],
    solver_cmd: str | list[str],
    registry: ConstraintRegistry | None = None,
    timeout: float = 10.0,
    jobs: int = 1,
    script_dir: str | Path | None = None,
) -> tuple[StoredProcedure, list[AuthFuncDef], list[CheckReport]]:
    """Full pipeline: plan, prove (possibly in parallel), regenerate."""
    proc, _ = gen_sec_query(s, q, registry)
    plans = plan_eliminations(s, proc, facts)

    def prove(indexed: tuple[int, CheckPlan]) -> tuple[int, ProofOutcome]:
        index, plan = indexed
        path = None
        if script_dir is not None:
            token = plan.check.check_id.replace(":", "_")
            path = Path(script_dir) / f"{token}_{plan.role}.smt2"
        return index, prove_check_unnecessary(plan.problem, solver_cmd, timeout, path)

    if jobs > 1 and len(plans) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = dict(pool.map(prove, enumerate(plans)))
    else:
        outcomes = dict(prove(item) for item in enumerate(plans))

    results = []
    reports = []
    for index, plan in enumerate(plans):
        outcome = outcomes[index]
        results.append((plan.check.check_id, plan.role, plan.facts, outcome))
        if not outcome.proven:
            action = "KEPT"
        elif any(f.sql_guard.strip().upper() != "TRUE" for f in plan.facts):
            action = "GUARDED"
        else:
            action = "REMOVED"
        reports.append(
            CheckReport(
                plan.check.check_id,
                plan.check.resource.label(),
                plan.role,
                tuple(f.description for f in plan.facts),
                outcome,
                action,
            )
        )
    optimized, funcs = gen_optimized_proc(s, q, results, registry)
    return optimized, funcs, reports


# --- facts file ----------------------------------------------------------------

def load_facts(path: str, s: SecurityModel) -> list[ContextFact]:
    """Facts file: [{description, ocl, sqlGuard, resource?}]; every fact needs a
    runtime guard (TRUE is allowed for by-construction facts)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    facts: list[ContextFact] = []
    for entry in raw:
        guard = entry.get("sqlGuard")
        if guard is None or not str(guard).strip():
            raise ValueError(
                f"fact {entry.get('description', '?')!r} has no runtime sqlGuard"
            )
        scope: Resource | None = None
        if "resource" in entry:
            res_raw = entry["resource"]
            if res_raw.get("kind") == "attribute":
                scope = AttributeRes(res_raw["class"], res_raw["attribute"])
            else:
                scope = AssociationRes(res_raw["association"])
        if scope is not None:
            keywords = resource_keywords(s.data_model, s.user_class, scope)
        else:
            keywords = {"caller": s.user_class}
        constraint = parse_bool_ocl(entry["ocl"], s.data_model, keywords)
        parse_sql_condition(str(guard), frozenset({"caller", "role"}))  # validate now
        facts.append(ContextFact(entry["description"], constraint, str(guard), scope))
    return facts
