"""Execution of generated stored procedures against the in-memory engine."""

from __future__ import annotations

from ..errors import SecurityViolation, SqlRuntimeError
from ..secquery import AuthFuncDef, IfStep, StoredProcedure
from ..sql.parser import parse_sql_condition
from .engine import Database, Env, ExecResult, eval_expr, run_select


def _auth_callable(db: Database, func: AuthFuncDef):
    """Callable evaluating the function's role dispatch over its SQL bodies."""
    param_set = frozenset(func.params)
    parsed = [(role, parse_sql_condition(impl.sql_body, param_set)) for role, impl in func.cases]

    def call(*args):
        bound = dict(zip(func.params, args))
        role = bound.get("role")
        for case_role, condition in parsed:
            if case_role == role:
                env = Env(params=bound)
                return eval_expr(db, condition, None, env)
        return False

    return call


def build_auth_env(
    db: Database, funcs: list[AuthFuncDef], caller: str, role: str
) -> Env:
    env = Env(params={"caller": caller, "role": role})
    for func in funcs:
        env.functions[func.name] = _auth_callable(db, func)
    return env


def exec_procedure(
    db: Database,
    proc: StoredProcedure,
    funcs: list[AuthFuncDef],
    caller: str,
    role: str,
    env: Env | None = None,
) -> ExecResult:
    """Run the procedure's steps; a failed check takes the rollback path.

    Temp tables are session-scoped: the underlying database is never
    mutated. AuthFunc invocation counts are reported on the result.
    """
    session = db.overlay()
    if env is None:
        env = build_auth_env(session, funcs, caller, role)
    try:
        for step in proc.steps:
            if isinstance(step, IfStep):
                verdict = eval_expr(session, step.guard, None, env)
                step = step.then_step if verdict is True else step.else_step
            columns, rows = run_select(session, step.body, env, None)
            session.create(step.name, columns, rows)
        columns, rows = run_select(session, proc.epilogue, env, None)
        return ExecResult("rows", columns, rows, auth_calls=dict(env.counters))
    except SecurityViolation as err:
        return ExecResult(
            "security_error", message=f"45000: {err}", auth_calls=dict(env.counters)
        )
    except SqlRuntimeError as err:
        return ExecResult("sql_error", message=str(err), auth_calls=dict(env.counters))
