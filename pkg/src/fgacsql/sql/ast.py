"""AST and renderer for the select-statement subset.

The subset covers plain and DISTINCT select lists, COUNT(*), column
aliases, base tables and aliased subqueries in FROM (comma lists form
cartesian products), JOIN ... ON chains, and WHERE conditions built from
comparisons, AND/OR/NOT, EXISTS, literals, column references, scalar
subqueries, and named parameters (`caller`). Checked reads (CASE over an
authorization function) are part of the AST so generated procedures can
carry them, but they never occur in parsed user queries.
"""

from __future__ import annotations

from dataclasses import dataclass


class SqlExpr:
    __slots__ = ()


@dataclass(frozen=True)
class ColumnRef(SqlExpr):
    table: str | None
    name: str


@dataclass(frozen=True)
class Param(SqlExpr):
    """Free variable resolved at call time, e.g. `caller`."""

    name: str


@dataclass(frozen=True)
class IntLit(SqlExpr):
    value: int


@dataclass(frozen=True)
class StrLit(SqlExpr):
    value: str


@dataclass(frozen=True)
class BoolLit(SqlExpr):
    value: bool


@dataclass(frozen=True)
class NullLit(SqlExpr):
    pass


@dataclass(frozen=True)
class Comparison(SqlExpr):
    op: str  # = <> < > <= >=
    lhs: SqlExpr
    rhs: SqlExpr


@dataclass(frozen=True)
class And(SqlExpr):
    lhs: SqlExpr
    rhs: SqlExpr


@dataclass(frozen=True)
class Or(SqlExpr):
    lhs: SqlExpr
    rhs: SqlExpr


@dataclass(frozen=True)
class Not(SqlExpr):
    arg: SqlExpr


@dataclass(frozen=True)
class Exists(SqlExpr):
    query: "SelectQuery"


@dataclass(frozen=True)
class ScalarSubquery(SqlExpr):
    query: "SelectQuery"


@dataclass(frozen=True)
class AggCall(SqlExpr):
    func: str  # COUNT | MAX
    arg: ColumnRef | None  # None means COUNT(*)


@dataclass(frozen=True)
class CheckedExpr(SqlExpr):
    """CASE <func>(args) WHEN <match> THEN <yielded> ELSE throw_error() END."""

    func_name: str
    args: tuple[SqlExpr, ...]
    match: str  # "1" for attribute checks, "TRUE" for association checks
    yielded: SqlExpr


@dataclass(frozen=True)
class Star:
    pass


@dataclass(frozen=True)
class SelectItem:
    expr: SqlExpr | Star
    alias: str | None = None
    lowercase_as: bool = False  # generated reads render `as`, plain aliases `AS`


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None = None


@dataclass(frozen=True)
class SubqueryRef:
    query: "SelectQuery"
    alias: str


FromItem = TableRef | SubqueryRef


@dataclass(frozen=True)
class Join:
    item: FromItem
    on: SqlExpr


@dataclass(frozen=True)
class SelectQuery:
    items: tuple[SelectItem, ...]
    from_items: tuple[FromItem, ...]
    joins: tuple[Join, ...] = ()
    where: SqlExpr | None = None
    distinct: bool = False


def render_sql(q: SelectQuery) -> str:
    head = "SELECT DISTINCT" if q.distinct else "SELECT"
    items = ", ".join(_render_item(item) for item in q.items)
    froms = ", ".join(_render_from(f) for f in q.from_items)
    text = f"{head} {items} FROM {froms}"
    for join in q.joins:
        text += f" JOIN {_render_from(join.item)} ON {render_expr(join.on)}"
    if q.where is not None:
        text += f" WHERE {render_expr(q.where)}"
    return text


def _render_item(item: SelectItem) -> str:
    body = "*" if isinstance(item.expr, Star) else render_expr(item.expr)
    if item.alias:
        return f"{body} {'as' if item.lowercase_as else 'AS'} {item.alias}"
    return body


def _render_from(f: FromItem) -> str:
    if isinstance(f, TableRef):
        return f"{f.name} {f.alias}" if f.alias else f.name
    return f"({render_sql(f.query)}) AS {f.alias}"


_PREC = {"or": 1, "and": 2}


def render_expr(e: SqlExpr, parent_prec: int = 0) -> str:
    if isinstance(e, ColumnRef):
        return f"{e.table}.{e.name}" if e.table else e.name
    if isinstance(e, Param):
        return e.name
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return "'" + e.value.replace("'", "''") + "'"
    if isinstance(e, BoolLit):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, NullLit):
        return "NULL"
    if isinstance(e, Comparison):
        return f"{render_expr(e.lhs, 3)} {e.op} {render_expr(e.rhs, 3)}"
    if isinstance(e, And):
        text = f"{render_expr(e.lhs, 2)} AND {render_expr(e.rhs, 2)}"
        return f"({text})" if parent_prec > 2 else text
    if isinstance(e, Or):
        text = f"{render_expr(e.lhs, 1)} OR {render_expr(e.rhs, 1)}"
        return f"({text})" if parent_prec > 1 else text
    if isinstance(e, Not):
        return f"NOT {render_expr(e.arg, 3)}"
    if isinstance(e, Exists):
        return f"EXISTS ({render_sql(e.query)})"
    if isinstance(e, ScalarSubquery):
        return f"({render_sql(e.query)})"
    if isinstance(e, AggCall):
        inner = "*" if e.arg is None else render_expr(e.arg)
        return f"{e.func}({inner})"
    if isinstance(e, CheckedExpr):
        args = ", ".join(render_expr(a) for a in e.args)
        yielded = render_expr(e.yielded)
        return (
            f"CASE {e.func_name}({args}) WHEN {e.match} "
            f"THEN {yielded} ELSE throw_error() END"
        )
    raise TypeError(f"unrenderable expression: {e!r}")
