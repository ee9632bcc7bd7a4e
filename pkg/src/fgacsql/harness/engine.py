"""In-memory execution engine for the SQL subset.

This is a test oracle, not a DBMS: deterministic row order (insertion
order, nested-loop joins), three-valued NULL comparisons filtered out of
WHERE, and built-in counting of authorization-function invocations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import SecurityViolation, SqlRuntimeError
from ..model import DataModel, Scenario, scenario_to_inserts, sql_schema
from ..sql.ast import (
    AggCall,
    And,
    BoolLit,
    CheckedExpr,
    ColumnRef,
    Comparison,
    Exists,
    IntLit,
    Not,
    NullLit,
    Or,
    Param,
    ScalarSubquery,
    SelectQuery,
    SqlExpr,
    Star,
    StrLit,
    SubqueryRef,
    TableRef,
)


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]


@dataclass
class Database:
    tables: dict[str, Table] = field(default_factory=dict)

    def table(self, name: str) -> Table:
        if name not in self.tables:
            raise SqlRuntimeError(f"unknown table {name!r}")
        return self.tables[name]

    def create(self, name: str, columns: list[str], rows: list[tuple] | None = None) -> None:
        self.tables[name] = Table(list(columns), list(rows or []))

    def overlay(self) -> "Database":
        """Session view sharing base tables; temp tables stay local."""
        return Database(dict(self.tables))


@dataclass
class ExecResult:
    kind: str  # rows | security_error | sql_error
    columns: list[str] = field(default_factory=list)
    rows: list[tuple] = field(default_factory=list)
    message: str = ""
    auth_calls: dict[str, int] = field(default_factory=dict)

    @property
    def is_rows(self) -> bool:
        return self.kind == "rows"

    @property
    def is_security_error(self) -> bool:
        return self.kind == "security_error"


@dataclass
class Env:
    """Evaluation context: named parameters, auth functions, call counters,
    and an optional log of (row source, column) reads for exhaustiveness
    checks against the static access analysis."""

    params: dict[str, object] = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)
    read_log: set | None = None


class _RowScope:
    """Chain of visible row sources, innermost first."""

    def __init__(self, sources: list[tuple[str, list[str], tuple]], outer: "_RowScope | None" = None):
        self.sources = sources
        self.outer = outer

    def resolve(self, table: str | None, name: str):
        scope: _RowScope | None = self
        while scope is not None:
            for src_name, columns, row in scope.sources:
                if table is not None and src_name != table:
                    continue
                if name in columns:
                    return row[columns.index(name)]
                if table is not None:
                    raise SqlRuntimeError(f"unknown column {table}.{name}")
            scope = scope.outer
        target = f"{table}.{name}" if table else name
        raise SqlRuntimeError(f"unknown column {target!r}")

    def locate(self, table: str | None, name: str) -> str | None:
        scope: _RowScope | None = self
        while scope is not None:
            for src_name, columns, _ in scope.sources:
                if table is not None and src_name != table:
                    continue
                if name in columns:
                    return src_name
            scope = scope.outer
        return None


def exec_query(
    db: Database,
    q: SelectQuery,
    params: dict[str, object] | None = None,
    read_log: set | None = None,
) -> ExecResult:
    """Run a select statement; unknown tables/columns become sql_error results."""
    env = Env(params=dict(params or {}), read_log=read_log)
    try:
        columns, rows = run_select(db, q, env, None)
        return ExecResult("rows", columns, rows)
    except SqlRuntimeError as err:
        return ExecResult("sql_error", message=str(err))


def run_select(db: Database, q: SelectQuery, env: Env, outer: _RowScope | None) -> tuple[list[str], list[tuple]]:
    sources: list[tuple[str, list[str], list[tuple]]] = []
    for item in q.from_items:
        sources.append(_materialize(db, item, env, outer))

    combined: list[list[tuple[str, list[str], tuple]]] = [[]]
    for name, cols, rows in sources:
        combined = [prefix + [(name, cols, row)] for prefix in combined for row in rows]

    for join in q.joins:
        name, cols, rows = _materialize(db, join.item, env, outer)
        joined = []
        for prefix in combined:
            for row in rows:
                scope = _RowScope(prefix + [(name, cols, row)], outer)
                if eval_expr(db, join.on, scope, env) is True:
                    joined.append(prefix + [(name, cols, row)])
        combined = joined

    if q.where is not None:
        combined = [
            prefix
            for prefix in combined
            if eval_expr(db, q.where, _RowScope(prefix, outer), env) is True
        ]

    return _project(db, q, combined, env, outer)


def _materialize(db: Database, item, env: Env, outer: _RowScope | None):
    if isinstance(item, TableRef):
        table = db.table(item.name)
        return (item.alias or item.name, table.columns, table.rows)
    columns, rows = run_select(db, item.query, env, outer)
    return (item.alias, columns, rows)


def _project(db: Database, q: SelectQuery, combined, env: Env, outer) -> tuple[list[str], list[tuple]]:
    if len(q.items) == 1 and isinstance(q.items[0].expr, AggCall):
        agg = q.items[0].expr
        name = q.items[0].alias or f"{agg.func}({'*' if agg.arg is None else agg.arg.name})"
        if agg.func == "COUNT":
            return [name], [(len(combined),)]
        values = [
            eval_expr(db, agg.arg, _RowScope(prefix, outer), env)
            for prefix in combined
        ]
        values = [v for v in values if v is not None]
        return [name], [(max(values) if values else None,)]

    columns: list[str] = []
    for item in q.items:
        if isinstance(item.expr, Star):
            for prefix_src in (combined[0] if combined else []):
                columns.extend(prefix_src[1])
            if not combined:
                # no rows: derive star columns from the sources themselves
                for src_item in q.from_items:
                    columns.extend(_materialize(db, src_item, env, outer)[1])
                for join in q.joins:
                    columns.extend(_materialize(db, join.item, env, outer)[1])
        elif item.alias:
            columns.append(item.alias)
        elif isinstance(item.expr, ColumnRef):
            columns.append(item.expr.name)
        else:
            columns.append("expr")

    rows: list[tuple] = []
    for prefix in combined:
        scope = _RowScope(prefix, outer)
        values: list[object] = []
        for item in q.items:
            if isinstance(item.expr, Star):
                for src_name, src_cols, row in prefix:
                    values.extend(row)
                    if env.read_log is not None:
                        env.read_log.update((src_name, c) for c in src_cols)
            else:
                values.append(eval_expr(db, item.expr, scope, env))
        rows.append(tuple(values))

    if q.distinct:
        seen = set()
        unique = []
        for row in rows:
            if row not in seen:
                seen.add(row)
                unique.append(row)
        rows = unique
    return columns, rows


def eval_expr(db: Database, e: SqlExpr, scope: _RowScope | None, env: Env):
    """Three-valued evaluation: returns a value, True/False, or None for unknown."""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, StrLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, NullLit):
        return None
    if isinstance(e, Param):
        if e.name not in env.params:
            raise SqlRuntimeError(f"unbound parameter {e.name!r}")
        return env.params[e.name]
    if isinstance(e, ColumnRef):
        if scope is None:
            raise SqlRuntimeError(f"column {e.name!r} outside row context")
        if env.read_log is not None:
            owner = scope.locate(e.table, e.name)
            if owner is not None:
                env.read_log.add((owner, e.name))
        return scope.resolve(e.table, e.name)
    if isinstance(e, Comparison):
        return _compare(e.op, eval_expr(db, e.lhs, scope, env), eval_expr(db, e.rhs, scope, env))
    if isinstance(e, And):
        lhs = eval_expr(db, e.lhs, scope, env)
        if lhs is False:
            return False
        rhs = eval_expr(db, e.rhs, scope, env)
        if rhs is False:
            return False
        if lhs is None or rhs is None:
            return None
        return True
    if isinstance(e, Or):
        lhs = eval_expr(db, e.lhs, scope, env)
        if lhs is True:
            return True
        rhs = eval_expr(db, e.rhs, scope, env)
        if rhs is True:
            return True
        if lhs is None or rhs is None:
            return None
        return False
    if isinstance(e, Not):
        value = eval_expr(db, e.arg, scope, env)
        return None if value is None else not value
    if isinstance(e, Exists):
        _, rows = run_select(db, e.query, env, scope)
        return len(rows) > 0
    if isinstance(e, ScalarSubquery):
        _, rows = run_select(db, e.query, env, scope)
        if not rows:
            return None
        if len(rows) > 1 or len(rows[0]) != 1:
            raise SqlRuntimeError("scalar subquery returned more than one value")
        return rows[0][0]
    if isinstance(e, AggCall):
        raise SqlRuntimeError("aggregate outside a select list")
    if isinstance(e, CheckedExpr):
        func = env.functions.get(e.func_name)
        if func is None:
            raise SqlRuntimeError(f"undefined function {e.func_name!r}")
        args = [eval_expr(db, a, scope, env) for a in e.args]
        env.counters[e.func_name] = env.counters.get(e.func_name, 0) + 1
        verdict = func(*args)
        if verdict is not True:
            raise SecurityViolation(f"{e.func_name} denied access")
        return eval_expr(db, e.yielded, scope, env)
    raise SqlRuntimeError(f"cannot evaluate {e!r}")


def _compare(op: str, lhs, rhs):
    if lhs is None or rhs is None:
        return None
    if op in ("=", "<>"):
        a = int(lhs) if isinstance(lhs, bool) else lhs
        b = int(rhs) if isinstance(rhs, bool) else rhs
        equal = a == b if type(a) is type(b) else False
        return equal if op == "=" else not equal
    if type(lhs) is not type(rhs):
        raise SqlRuntimeError(f"cannot order {lhs!r} against {rhs!r}")
    if op == "<":
        return lhs < rhs
    if op == ">":
        return lhs > rhs
    if op == "<=":
        return lhs <= rhs
    return lhs >= rhs


def evaluate_condition(db: Database, e: SqlExpr, params: dict[str, object], env: Env | None = None) -> object:
    """Evaluate a standalone boolean expression (guards, function bodies)."""
    context = env or Env()
    merged = Env(params={**context.params, **params}, functions=context.functions, counters=context.counters)
    return eval_expr(db, e, None, merged)


# --- script application and scenario round trips ---------------------------

_CREATE_RE = re.compile(r"^CREATE\s+TABLE\s+(\w+)\s*\((.*)\)\s*$", re.IGNORECASE | re.DOTALL)
_INSERT_RE = re.compile(
    r"^INSERT\s+INTO\s+(\w+)\s*\(([^)]*)\)\s*VALUES\s*\((.*)\)\s*$", re.IGNORECASE | re.DOTALL
)


def _split_statements(script: str) -> list[str]:
    statements = []
    depth = 0
    in_string = False
    current: list[str] = []
    i = 0
    while i < len(script):
        ch = script[i]
        if in_string:
            if ch == "'":
                if i + 1 < len(script) and script[i + 1] == "'":
                    current.append("''")
                    i += 2
                    continue
                in_string = False
            current.append(ch)
        elif ch == "'":
            in_string = True
            current.append(ch)
        elif ch == "(":
            depth += 1
            current.append(ch)
        elif ch == ")":
            depth -= 1
            current.append(ch)
        elif ch == ";" and depth == 0:
            text = "".join(current).strip()
            if text:
                statements.append(text)
            current = []
        else:
            current.append(ch)
        i += 1
    trailing = "".join(current).strip()
    if trailing:
        statements.append(trailing)
    return statements


def _split_commas(text: str) -> list[str]:
    parts = []
    depth = 0
    in_string = False
    current: list[str] = []
    for ch in text:
        if in_string:
            current.append(ch)
            if ch == "'":
                in_string = False
        elif ch == "'":
            in_string = True
            current.append(ch)
        elif ch == "(":
            depth += 1
            current.append(ch)
        elif ch == ")":
            depth -= 1
            current.append(ch)
        elif ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    if "".join(current).strip():
        parts.append("".join(current).strip())
    return parts


def _parse_value(text: str):
    text = text.strip()
    if text.upper() == "NULL":
        return None
    if text.startswith("'") and text.endswith("'"):
        return text[1:-1].replace("''", "'")
    return int(text)


def apply_script(db: Database, script: str) -> None:
    """Apply CREATE TABLE and INSERT statements emitted by the schema generators."""
    for statement in _split_statements(script):
        create = _CREATE_RE.match(statement)
        if create:
            name, body = create.group(1), create.group(2)
            columns = []
            for entry in _split_commas(body):
                head = entry.split()[0].upper()
                if head in ("PRIMARY", "FOREIGN", "UNIQUE", "KEY", "CONSTRAINT"):
                    continue
                columns.append(entry.split()[0])
            db.create(name, columns)
            continue
        insert = _INSERT_RE.match(statement)
        if insert:
            name = insert.group(1)
            columns = [c.strip() for c in insert.group(2).split(",")]
            values = [_parse_value(v) for v in _split_commas(insert.group(3))]
            table = db.table(name)
            if columns != table.columns:
                raise SqlRuntimeError(f"insert columns {columns} do not match table {name}")
            if len(values) != len(table.columns):
                raise SqlRuntimeError(f"insert arity mismatch for table {name}")
            table.rows.append(tuple(values))
            continue
        raise SqlRuntimeError(f"unsupported statement: {statement[:60]}...")


def database_from_scenario(dm: DataModel, sc: Scenario) -> Database:
    db = Database()
    apply_script(db, sql_schema(dm))
    apply_script(db, scenario_to_inserts(dm, sc))
    return db


def database_to_scenario(dm: DataModel, db: Database) -> Scenario:
    """Read the class and association tables back into a scenario."""
    sc = Scenario()
    for cls in dm.classes:
        table = db.table(cls.name)
        objs: dict[str, dict[str, object]] = {}
        id_index = table.columns.index(cls.id_column())
        for row in table.rows:
            record = {}
            for attr in cls.attributes:
                value = row[table.columns.index(attr.name)]
                record[attr.name] = value
            objs[row[id_index]] = record
        sc.objects[cls.name] = objs
    for assoc in dm.associations:
        table = db.table(assoc.name)
        i1 = table.columns.index(assoc.end1.name)
        i2 = table.columns.index(assoc.end2.name)
        sc.links[assoc.name] = [(row[i1], row[i2]) for row in table.rows]
    return sc
