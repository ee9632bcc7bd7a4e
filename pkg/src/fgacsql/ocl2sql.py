"""SQL implementations of authorization constraints.

Hand-written implementations live in a registry keyed by the normalized
constraint text (iterator names alpha-renamed); when no entry exists, a
naive compiler covers the constraint subset. The result is a boolean SQL
expression whose free parameters are the constraint's keywords.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import Uncompilable
from .ocl import (
    AllInstances,
    AttrNav,
    BoolLit,
    BoolOp,
    Compare,
    EndNav,
    Exists,
    Includes,
    IntLit,
    IsEmpty,
    Keyword,
    Not,
    ObjectLit,
    OclExpr,
    Select,
    StrLit,
    Var,
    keywords_of,
    normalized_key,
)


@dataclass(frozen=True)
class SqlConstraintImpl:
    constraint: OclExpr
    sql_body: str  # boolean SQL expression over the constraint's keywords
    origin: str  # Manual | Generated

    def params(self) -> list[str]:
        return keywords_of(self.constraint)


class ConstraintRegistry:
    """Normalized constraint text -> hand-written SQL body."""

    def __init__(self):
        self._entries: dict[str, str] = {}

    def register(self, constraint: OclExpr, sql_body: str) -> None:
        self._entries[normalized_key(constraint)] = sql_body

    def lookup(self, constraint: OclExpr) -> str | None:
        return self._entries.get(normalized_key(constraint))

    def __len__(self) -> int:
        return len(self._entries)


def load_registry(path: str, dm, keyword_typings: list[dict[str, str]]) -> ConstraintRegistry:
    """Load {ocl, sql} pairs; each constraint is typed against the supplied
    keyword environments until one fits. Entries that type under none of
    them belong to resources outside the caller's policy and are skipped
    (the fallback compiler covers any lookup miss)."""
    from .errors import FgacError
    from .ocl import parse_bool_ocl

    registry = ConstraintRegistry()
    with open(path, encoding="utf-8") as fh:
        entries = json.load(fh)
    for entry in entries:
        for keywords in keyword_typings:
            try:
                constraint = parse_bool_ocl(entry["ocl"], dm, keywords)
            except FgacError:
                continue
            registry.register(constraint, entry["sql"])
            break
    return registry


def map_ocl_to_sql(e: OclExpr, registry: ConstraintRegistry | None = None) -> SqlConstraintImpl:
    """Manual implementation when registered, generated fallback otherwise."""
    if registry is not None:
        manual = registry.lookup(e)
        if manual is not None:
            return SqlConstraintImpl(e, manual, "Manual")
    return SqlConstraintImpl(e, _compile_bool(e, _Scope()), "Generated")


# --- fallback compiler ------------------------------------------------------

class _Bound:
    """How an iterator variable is realized in SQL.

    kind "row":   the variable ranges over rows of a class table under
                  `alias`; the object is `alias.<cls>_id`.
    kind "value": the variable denotes an id value held in `column`.
    """

    def __init__(self, kind: str, cls: str, alias: str = "", column: str = ""):
        self.kind = kind
        self.cls = cls
        self.alias = alias
        self.column = column

    def object_sql(self) -> str:
        if self.kind == "row":
            return f"{self.alias}.{self.cls}_id"
        return self.column


class _Scope:
    def __init__(self):
        self.vars: dict[str, _Bound] = {}
        self.counter = 0

    def fresh_alias(self) -> str:
        alias = f"v{self.counter}"
        self.counter += 1
        return alias


def _compile_bool(e: OclExpr, scope: _Scope) -> str:
    if isinstance(e, BoolLit):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, BoolOp):
        op = "AND" if e.op == "and" else "OR"
        return f"({_compile_bool(e.lhs, scope)} {op} {_compile_bool(e.rhs, scope)})"
    if isinstance(e, Not):
        return f"NOT ({_compile_bool(e.arg, scope)})"
    if isinstance(e, Compare):
        return f"{_compile_term(e.lhs, scope)} {e.op} {_compile_term(e.rhs, scope)}"
    if isinstance(e, IsEmpty):
        return f"NOT EXISTS ({_member_query(e.source, None, None, scope)})"
    if isinstance(e, Exists):
        return f"EXISTS ({_member_query(e.source, e.var, e.body, scope)})"
    if isinstance(e, Includes):
        return f"EXISTS ({_member_query(e.source, None, e.arg, scope, arg_is_body=False)})"
    raise Uncompilable(type(e).__name__)


def _member_query(
    source: OclExpr,
    var: str | None,
    body_or_arg: OclExpr | None,
    scope: _Scope,
    arg_is_body: bool = True,
) -> str:
    """SELECT 1 over the collection's relation, constrained by membership,
    the select filter (if the source is a select), and the body."""
    conditions: list[str] = []
    filter_body = None
    if isinstance(source, Select):
        filter_body = (source.var, source.body)
        source = source.source

    alias = scope.fresh_alias()
    if isinstance(source, AllInstances):
        table = f"{source.cls} {alias}"
        bound = _Bound("row", source.cls, alias=alias)
    elif isinstance(source, EndNav):
        receiver = _compile_term(source.source, scope)
        table = f"{source.assoc} {alias}"
        conditions.append(f"{alias}.{source.source_end} = {receiver}")
        bound = _Bound("value", source.target_cls, column=f"{alias}.{source.end}")
    else:
        raise Uncompilable(type(source).__name__)

    if filter_body is not None:
        scope.vars[filter_body[0]] = bound
        conditions.append(_compile_bool(filter_body[1], scope))
        del scope.vars[filter_body[0]]

    if body_or_arg is not None:
        if arg_is_body:
            scope.vars[var] = bound
            conditions.append(_compile_bool(body_or_arg, scope))
            del scope.vars[var]
        else:
            conditions.append(f"{bound.object_sql()} = {_compile_term(body_or_arg, scope)}")

    where = f" WHERE {' AND '.join(conditions)}" if conditions else ""
    return f"SELECT 1 FROM {table}{where}"


def _compile_term(e: OclExpr, scope: _Scope) -> str:
    if isinstance(e, Keyword):
        return e.name
    if isinstance(e, Var):
        bound = scope.vars.get(e.name)
        if bound is None:
            raise Uncompilable(f"unbound iterator {e.name!r}")
        return bound.object_sql()
    if isinstance(e, ObjectLit):
        return "'" + e.object_id.replace("'", "''") + "'"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return "'" + e.value.replace("'", "''") + "'"
    if isinstance(e, AttrNav):
        return _compile_attr(e, scope)
    raise Uncompilable(type(e).__name__)


def _compile_attr(e: AttrNav, scope: _Scope) -> str:
    source = e.source
    if isinstance(source, Var):
        bound = scope.vars.get(source.name)
        if bound is None:
            raise Uncompilable(f"unbound iterator {source.name!r}")
        if bound.kind == "row":
            return f"{bound.alias}.{e.attr}"
        return (
            f"(SELECT {e.attr} FROM {e.source_cls} "
            f"WHERE {e.source_cls}_id = {bound.object_sql()})"
        )
    if isinstance(source, (Keyword, ObjectLit)):
        receiver = _compile_term(source, scope)
        return (
            f"(SELECT {e.attr} FROM {e.source_cls} "
            f"WHERE {e.source_cls}_id = {receiver})"
        )
    raise Uncompilable("attribute of a computed object")
