from .authquery import auth_query_ref
from .engine import (
    Database,
    Env,
    ExecResult,
    apply_script,
    database_from_scenario,
    database_to_scenario,
    evaluate_condition,
    exec_query,
)
from .procedures import build_auth_env, exec_procedure

__all__ = [
    "auth_query_ref",
    "Database",
    "Env",
    "ExecResult",
    "apply_script",
    "database_from_scenario",
    "database_to_scenario",
    "evaluate_condition",
    "exec_query",
    "build_auth_env",
    "exec_procedure",
]
