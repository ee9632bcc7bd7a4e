"""Reference authorization judgment for whole queries.

A user may execute a query when every piece of information the query
uses is policy-compliant: every candidate pair evaluated by an
association check and every row reaching a guarded attribute read must
pass the constraint. The judgment shares the staging of the procedure
generator but decides each check with the constraint evaluator, so it is
independent of the SQL implementations the procedures run.
"""

from __future__ import annotations

from ..errors import UnknownRole
from ..ocl import ObjectRef
from ..policy import AttributeRes, SecurityModel, auth_decision, resource_keywords
from ..secquery import AuthFuncDef, StoredProcedure, gen_sec_query
from ..sql.ast import SelectQuery
from .engine import Database, Env, database_to_scenario
from .procedures import exec_procedure


def _oracle_callable(s: SecurityModel, sc, func: AuthFuncDef):
    keywords = resource_keywords(s.data_model, s.user_class, func.resource)
    keyword_params = func.params[2:]  # after caller, role
    if isinstance(func.resource, AttributeRes):
        target_classes = {"self": keywords["self"]}
    else:
        target_classes = {name: keywords[name] for name in keyword_params}

    def call(*args):
        bound = dict(zip(func.params, args))
        caller = ObjectRef(bound["caller"], s.user_class)
        targets = {
            name: ObjectRef(bound[name], target_classes[name]) for name in keyword_params
        }
        return auth_decision(s, sc, caller, bound["role"], func.resource, targets)

    return call


def auth_query_ref(
    s: SecurityModel,
    caller: str,
    role: str,
    q: SelectQuery,
    db: Database,
    generated: tuple[StoredProcedure, list[AuthFuncDef]] | None = None,
) -> bool:
    """True iff every check the secured procedure would evaluate authorizes."""
    if role not in s.roles:
        raise UnknownRole(role)
    sc = database_to_scenario(s.data_model, db)
    proc, funcs = generated if generated is not None else gen_sec_query(s, q)
    env = Env(params={"caller": caller, "role": role})
    for func in funcs:
        env.functions[func.name] = _oracle_callable(s, sc, func)
    result = exec_procedure(db, proc, funcs, caller, role, env=env)
    return not result.is_security_error
