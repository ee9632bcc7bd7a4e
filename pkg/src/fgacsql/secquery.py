"""Generation of policy-enforcing stored procedures.

A secured procedure stages the query through temporary tables. Each
protected read happens inside a CASE expression that calls an
authorization function and signals an error on anything but an
authorizing answer. Checks live in separate temp-table creation steps,
never inline subqueries, so a SQL optimizer cannot skip them.

Staging scheme (normative for this artifact, pinned by golden tests):

* each association appearance yields three steps: the candidate pair set
  (cartesian product of the end classes, keeping any end-column equality
  filters rewritten to id columns, filtered ends ordered last), the
  checked candidate set, and the real association rows;
* the main query then becomes a row-staging step (join/filter, with
  attribute reads in WHERE/ON guarded) followed by a reading step that
  guards attribute reads in the select list (or projects the id column
  when the query just counts);
* the epilogue runs the final select over the last temp table.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field, replace

from .errors import UnsupportedQuery
from .ocl2sql import ConstraintRegistry, SqlConstraintImpl, map_ocl_to_sql
from .policy import AssociationRes, AttributeRes, Resource, SecurityModel
from .sql.ast import (
    AggCall,
    And,
    BoolLit,
    CheckedExpr,
    ColumnRef,
    Comparison,
    Exists,
    Join,
    Not,
    Or,
    Param,
    ScalarSubquery,
    SelectItem,
    SelectQuery,
    SqlExpr,
    Star,
    SubqueryRef,
    TableRef,
    render_expr,
    render_sql,
)


@dataclass(frozen=True)
class CheckInfo:
    check_id: str
    resource: Resource
    func_name: str


@dataclass
class TempTableStep:
    name: str
    body: SelectQuery
    checks: tuple[CheckInfo, ...] = ()


@dataclass
class IfStep:
    """Optimized step: the guard picks the unchecked or the checked variant."""

    guard_text: str
    guard: SqlExpr
    then_step: TempTableStep
    else_step: TempTableStep

    @property
    def name(self) -> str:
        return self.then_step.name


@dataclass
class AuthFuncDef:
    name: str
    resource: Resource
    params: tuple[str, ...]  # caller, role, then one id per keyword
    cases: tuple[tuple[str, SqlConstraintImpl], ...]  # role -> implementation


@dataclass
class StoredProcedure:
    name: str
    steps: list = field(default_factory=list)
    epilogue: SelectQuery | None = None

    def checks(self) -> list[tuple[TempTableStep, CheckInfo]]:
        out = []
        for step in self.steps:
            target = step.else_step if isinstance(step, IfStep) else step
            for check in target.checks:
                out.append((target, check))
        return out


def _sanitize(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "", name)


def auth_func_name(policy_name: str, res: Resource) -> str:
    return f"AuthFunc_{_sanitize(policy_name)}_{res.token()}"


def procedure_name(policy_name: str, query_text: str) -> str:
    digest = hashlib.sha256(query_text.encode()).hexdigest()[:8]
    return f"SecQuery_{_sanitize(policy_name)}_{digest}"


def gen_auth_func(s: SecurityModel, res: Resource, registry: ConstraintRegistry | None = None) -> AuthFuncDef:
    """Per-role dispatch over the mapped constraint; roles without a rule deny."""
    if isinstance(res, AttributeRes):
        params: tuple[str, ...] = ("caller", "role", "self")
    else:
        assoc = s.data_model.association_named(res.association)
        params = ("caller", "role", assoc.end1.name, assoc.end2.name)
    cases = []
    for role in s.roles:
        constraint = s.rules.get((role, res))
        if constraint is not None:
            cases.append((role, map_ocl_to_sql(constraint, registry)))
    return AuthFuncDef(auth_func_name(s.name, res), res, params, tuple(cases))


# --- generation --------------------------------------------------------------

class _Generator:
    def __init__(self, s: SecurityModel, registry: ConstraintRegistry | None):
        self.s = s
        self.dm = s.data_model
        self.registry = registry
        self.steps: list[TempTableStep] = []
        self.counter = 1
        self.funcs: dict[str, AuthFuncDef] = {}
        self.temp_columns: dict[str, list[str]] = {}

    def fresh_temp(self) -> str:
        name = f"TEMP{self.counter}"
        self.counter += 1
        return name

    def func_for(self, res: Resource) -> AuthFuncDef:
        name = auth_func_name(self.s.name, res)
        if name not in self.funcs:
            self.funcs[name] = gen_auth_func(self.s, res, self.registry)
        return self.funcs[name]

    # -- column bookkeeping -----------------------------------------------

    def source_columns(self, item) -> list[str]:
        if isinstance(item, TableRef):
            if item.name in self.temp_columns:
                return list(self.temp_columns[item.name])
            cls = self.dm.class_named(item.name)
            if cls is not None:
                return [cls.id_column()] + [a.name for a in cls.attributes]
            assoc = self.dm.association_named(item.name)
            if assoc is not None:
                return [assoc.end1.name, assoc.end2.name]
            return []
        return self.query_outputs(item.query)

    def query_outputs(self, q: SelectQuery) -> list[str]:
        out: list[str] = []
        for item in q.items:
            if isinstance(item.expr, Star):
                for src in list(q.from_items) + [j.item for j in q.joins]:
                    out.extend(self.source_columns(src))
            elif item.alias:
                out.append(item.alias)
            elif isinstance(item.expr, ColumnRef):
                out.append(item.expr.name)
            elif isinstance(item.expr, AggCall):
                out.append(item.expr.func)
            else:
                out.append("expr")
        return out

    def column_origin(self, q: SelectQuery, col: ColumnRef):
        """Resolve a column of q's row sources to its base provenance."""
        for item in list(q.from_items) + [j.item for j in q.joins]:
            name = item.alias if isinstance(item, SubqueryRef) else (item.alias or item.name)
            if col.table is not None and name != col.table:
                continue
            origin = self._origin_in(item, col.name)
            if origin is not None:
                return origin
        return ("opaque",)

    def _origin_in(self, item, column: str):
        if isinstance(item, TableRef):
            cls = self.dm.class_named(item.name)
            if cls is not None:
                if column == cls.id_column():
                    return ("id", cls.name)
                if cls.attribute(column) is not None:
                    return ("attr", cls.name, column)
                return None
            assoc = self.dm.association_named(item.name)
            if assoc is not None:
                end = assoc.end_named(column)
                return ("end", assoc.name, column) if end else None
            if item.name in self.temp_columns and column in self.temp_columns[item.name]:
                return ("opaque",)
            return None
        inner = item.query
        for sel in inner.items:
            if isinstance(sel.expr, Star):
                for src in list(inner.from_items) + [j.item for j in inner.joins]:
                    origin = self._origin_in(src, column)
                    if origin is not None:
                        return origin
            else:
                name = sel.alias or (sel.expr.name if isinstance(sel.expr, ColumnRef) else None)
                if name == column:
                    if isinstance(sel.expr, ColumnRef):
                        return self.column_origin(inner, sel.expr)
                    return ("opaque",)
        return None

    # -- association staging -----------------------------------------------

    def stage_association_units(self, q: SelectQuery) -> SelectQuery:
        """Replace every association appearance by its staged data temp."""
        dropped: dict[str, str] = {}
        new_from = tuple(self._stage_item(item, q, dropped) for item in q.from_items)
        new_joins = tuple(Join(self._stage_item(j.item, q, dropped), j.on) for j in q.joins)
        staged = replace(q, from_items=new_from, joins=new_joins)
        if dropped:
            visible: dict[str, int] = {}
            for item in list(staged.from_items) + [j.item for j in staged.joins]:
                for name in self.source_columns(item):
                    visible[name] = visible.get(name, 0) + 1
            staged = _requalify(staged, dropped, visible)
        return staged

    def _stage_item(self, item, enclosing: SelectQuery, dropped: dict[str, str]):
        if isinstance(item, TableRef):
            assoc = self.dm.association_named(item.name)
            if assoc is None:
                return item
            temp = self._emit_association_steps(assoc, None, enclosing)
            return TableRef(temp, item.alias)
        inner = item.query
        if (
            len(inner.from_items) == 1
            and not inner.joins
            and isinstance(inner.from_items[0], TableRef)
            and self.dm.association_named(inner.from_items[0].name) is not None
        ):
            assoc = self.dm.association_named(inner.from_items[0].name)
            temp = self._emit_association_steps(assoc, inner, enclosing)
            dropped[item.alias] = temp
            return TableRef(temp)
        return SubqueryRef(self.stage_association_units(inner), item.alias)

    def _emit_association_steps(self, assoc, unit_query: SelectQuery | None, enclosing: SelectQuery) -> str:
        ends = [assoc.end1, assoc.end2]
        where = unit_query.where if unit_query is not None else None
        filtered: set[str] = set()
        if where is not None:
            for col in _equality_columns(where):
                end = assoc.end_named(col)
                if end is None:
                    raise UnsupportedQuery(f"association filter on non-end column {col!r}")
                filtered.add(end.name)
        ordered = [e for e in ends if e.name not in filtered] + [e for e in ends if e.name in filtered]

        candidates = TempTableStep(
            self.fresh_temp(),
            SelectQuery(
                items=tuple(SelectItem(ColumnRef(None, f"{end.cls}_id"), end.name) for end in ordered),
                from_items=tuple(TableRef(end.cls) for end in ordered),
                where=_rewrite_end_columns(where, assoc) if where is not None else None,
            ),
        )
        self.steps.append(candidates)
        self.temp_columns[candidates.name] = [e.name for e in ordered]

        res = AssociationRes(assoc.name)
        func = self.func_for(res)
        checked = TempTableStep(
            self.fresh_temp(),
            SelectQuery(
                items=(SelectItem(Star()),),
                from_items=(TableRef(candidates.name),),
                where=CheckedExpr(
                    func.name,
                    (
                        Param("caller"),
                        Param("role"),
                        ColumnRef(None, assoc.end1.name),
                        ColumnRef(None, assoc.end2.name),
                    ),
                    "TRUE",
                    BoolLit(True),
                ),
            ),
        )
        checked.checks = (CheckInfo(f"{checked.name}:{res.token()}", res, func.name),)
        self.steps.append(checked)
        self.temp_columns[checked.name] = list(self.temp_columns[candidates.name])

        if unit_query is not None:
            data_body = unit_query
        else:
            referenced = _referenced_columns(enclosing)
            ends_used = [e for e in ends if e.name in referenced]
            projection = ends_used or [assoc.end2]
            data_body = SelectQuery(
                items=tuple(SelectItem(ColumnRef(None, e.name)) for e in projection),
                from_items=(TableRef(assoc.name),),
            )
        data = TempTableStep(self.fresh_temp(), data_body)
        self.steps.append(data)
        self.temp_columns[data.name] = self.query_outputs(data_body)
        return data.name

    # -- main staging -------------------------------------------------------

    def generate(self, q: SelectQuery) -> StoredProcedure:
        staged = self.stage_association_units(q)

        needs_row_temp = (
            bool(staged.joins)
            or len(staged.from_items) > 1
            or staged.where is not None
            or (staged.from_items and isinstance(staged.from_items[0], SubqueryRef))
        )

        last_source: str
        if needs_row_temp:
            guarded_where = self._guard_reads(staged.where, staged) if staged.where is not None else None
            guarded_joins = tuple(Join(j.item, self._guard_reads(j.on, staged)) for j in staged.joins)
            row_body = SelectQuery(
                items=(SelectItem(Star()),),
                from_items=staged.from_items,
                joins=guarded_joins,
                where=guarded_where,
            )
            row_step = TempTableStep(self.fresh_temp(), row_body)
            row_step.checks = tuple(self._collect_checks(row_step.name, row_body))
            self.steps.append(row_step)
            self.temp_columns[row_step.name] = self.query_outputs(row_body)
            last_source = row_step.name
        else:
            only = staged.from_items[0]
            if not isinstance(only, TableRef):
                raise UnsupportedQuery("cannot stage the main row source")
            last_source = only.name

        count_only = len(q.items) == 1 and isinstance(q.items[0].expr, AggCall) and q.items[0].expr.func == "COUNT"
        select_reads = any(
            isinstance(item.expr, ColumnRef) and self.column_origin(staged, item.expr)[0] == "attr"
            for item in q.items
        )

        if needs_row_temp and count_only:
            id_col = self._first_class_id(staged)
            if id_col is not None:
                read_body = SelectQuery(
                    items=(SelectItem(ColumnRef(None, id_col), id_col),),
                    from_items=(TableRef(last_source),),
                )
                read_step = TempTableStep(self.fresh_temp(), read_body)
                self.steps.append(read_step)
                self.temp_columns[read_step.name] = [id_col]
                last_source = read_step.name
        elif select_reads:
            read_items = tuple(self._reading_item(item, staged) for item in q.items)
            read_body = SelectQuery(items=read_items, from_items=(TableRef(last_source),))
            read_step = TempTableStep(self.fresh_temp(), read_body)
            read_step.checks = tuple(self._collect_checks(read_step.name, read_body))
            self.steps.append(read_step)
            self.temp_columns[read_step.name] = self.query_outputs(read_body)
            last_source = read_step.name

        return StoredProcedure(name="", steps=self.steps, epilogue=self._epilogue(q, last_source))

    def _first_class_id(self, staged: SelectQuery) -> str | None:
        for item in list(staged.from_items) + [j.item for j in staged.joins]:
            if isinstance(item, TableRef):
                cls = self.dm.class_named(item.name)
                if cls is not None:
                    return cls.id_column()
        return None

    def _guard_reads(self, e: SqlExpr, staged: SelectQuery) -> SqlExpr:
        if isinstance(e, ColumnRef):
            origin = self.column_origin(staged, e)
            if origin[0] == "attr":
                res = AttributeRes(origin[1], origin[2])
                func = self.func_for(res)
                return CheckedExpr(
                    func.name,
                    (Param("caller"), Param("role"), ColumnRef(e.table, f"{origin[1]}_id")),
                    "1",
                    e,
                )
            return e
        if isinstance(e, Comparison):
            return Comparison(e.op, self._guard_reads(e.lhs, staged), self._guard_reads(e.rhs, staged))
        if isinstance(e, And):
            return And(self._guard_reads(e.lhs, staged), self._guard_reads(e.rhs, staged))
        if isinstance(e, Or):
            return Or(self._guard_reads(e.lhs, staged), self._guard_reads(e.rhs, staged))
        if isinstance(e, Not):
            return Not(self._guard_reads(e.arg, staged))
        if isinstance(e, (Exists, ScalarSubquery)):
            raise UnsupportedQuery("attribute reads inside condition subqueries cannot be staged")
        return e

    def _reading_item(self, item: SelectItem, staged: SelectQuery) -> SelectItem:
        if isinstance(item.expr, Star):
            raise UnsupportedQuery("SELECT * combined with guarded attribute reads")
        expr = item.expr
        if isinstance(expr, ColumnRef):
            origin = self.column_origin(staged, expr)
            output = item.alias or expr.name
            if origin[0] == "attr":
                res = AttributeRes(origin[1], origin[2])
                func = self.func_for(res)
                checked = CheckedExpr(
                    func.name,
                    (Param("caller"), Param("role"), ColumnRef(None, f"{origin[1]}_id")),
                    "1",
                    ColumnRef(None, expr.name),
                )
                return SelectItem(checked, output, lowercase_as=True)
            return SelectItem(ColumnRef(None, expr.name), output)
        raise UnsupportedQuery("unsupported select item in reading step")

    def _collect_checks(self, step_name: str, body: SelectQuery) -> list[CheckInfo]:
        checks: list[CheckInfo] = []
        seen: set[str] = set()

        def walk_expr(e) -> None:
            if isinstance(e, CheckedExpr):
                func = self.funcs[e.func_name]
                key = f"{step_name}:{func.resource.token()}"
                if key not in seen:
                    seen.add(key)
                    checks.append(CheckInfo(key, func.resource, e.func_name))
            elif isinstance(e, (And, Or, Comparison)):
                walk_expr(e.lhs)
                walk_expr(e.rhs)
            elif isinstance(e, Not):
                walk_expr(e.arg)

        for item in body.items:
            if not isinstance(item.expr, Star):
                walk_expr(item.expr)
        for join in body.joins:
            walk_expr(join.on)
        if body.where is not None:
            walk_expr(body.where)
        return checks

    def _epilogue(self, q: SelectQuery, source: str) -> SelectQuery:
        if len(q.items) == 1 and isinstance(q.items[0].expr, AggCall) and q.items[0].expr.func == "COUNT":
            items: tuple[SelectItem, ...] = (SelectItem(q.items[0].expr),)
        else:
            named = [
                SelectItem(ColumnRef(None, item.alias or item.expr.name))
                for item in q.items
                if isinstance(item.expr, ColumnRef)
            ]
            items = tuple(named) if named else (SelectItem(Star()),)
        return SelectQuery(items=items, from_items=(TableRef(source),), distinct=q.distinct)


def gen_sec_query(
    s: SecurityModel, q: SelectQuery, registry: ConstraintRegistry | None = None
) -> tuple[StoredProcedure, list[AuthFuncDef]]:
    """Build the secured procedure and the authorization functions it calls."""
    generator = _Generator(s, registry)
    proc = generator.generate(q)
    proc.name = procedure_name(s.name, render_sql(q))
    return proc, list(generator.funcs.values())


# --- helpers over expressions -------------------------------------------------

def _equality_columns(e: SqlExpr) -> list[str]:
    """Bare columns used in equality comparisons (association unit filters)."""
    out: list[str] = []

    def walk(node: SqlExpr) -> None:
        if isinstance(node, Comparison):
            for side in (node.lhs, node.rhs):
                if isinstance(side, ColumnRef) and side.table is None:
                    out.append(side.name)
        elif isinstance(node, (And, Or)):
            walk(node.lhs)
            walk(node.rhs)
        elif isinstance(node, Not):
            walk(node.arg)
        elif isinstance(node, (Exists, ScalarSubquery)):
            raise UnsupportedQuery("subquery inside an association filter")

    walk(e)
    return out


def _rewrite_end_columns(e: SqlExpr, assoc) -> SqlExpr:
    """Turn end-column references into the end class's id column."""
    mapping = {end.name: f"{end.cls}_id" for end in assoc.ends()}
    return _map_columns(
        e,
        lambda col: ColumnRef(None, mapping.get(col.name, col.name)) if col.table is None else col,
    )


def _map_columns(e: SqlExpr, fn) -> SqlExpr:
    if isinstance(e, ColumnRef):
        return fn(e)
    if isinstance(e, Comparison):
        return Comparison(e.op, _map_columns(e.lhs, fn), _map_columns(e.rhs, fn))
    if isinstance(e, And):
        return And(_map_columns(e.lhs, fn), _map_columns(e.rhs, fn))
    if isinstance(e, Or):
        return Or(_map_columns(e.lhs, fn), _map_columns(e.rhs, fn))
    if isinstance(e, Not):
        return Not(_map_columns(e.arg, fn))
    return e


def _referenced_columns(q: SelectQuery) -> set[str]:
    names: set[str] = set()

    def walk_expr(e) -> None:
        if isinstance(e, ColumnRef):
            names.add(e.name)
        elif isinstance(e, (Comparison, And, Or)):
            walk_expr(e.lhs)
            walk_expr(e.rhs)
        elif isinstance(e, Not):
            walk_expr(e.arg)
        elif isinstance(e, (Exists, ScalarSubquery)):
            walk_query(e.query)

    def walk_query(query: SelectQuery) -> None:
        for item in query.items:
            if not isinstance(item.expr, Star):
                walk_expr(item.expr)
        for join in query.joins:
            walk_expr(join.on)
        if query.where is not None:
            walk_expr(query.where)

    walk_query(q)
    return names


def _requalify(q: SelectQuery, dropped: dict[str, str], visible: dict[str, int]) -> SelectQuery:
    """Rewrite references to dropped subquery aliases.

    Unambiguous columns lose their qualifier (the generated procedures
    reference staged tables bare); ambiguous ones are requalified with the
    temp table's name. Equalities are reordered so the staged table's
    column sits on the right-hand side.
    """

    def fix_col(col: ColumnRef) -> ColumnRef:
        if col.table in dropped:
            if visible.get(col.name, 0) <= 1:
                return ColumnRef(None, col.name)
            return ColumnRef(dropped[col.table], col.name)
        return col

    def staged_side(original: SqlExpr) -> bool:
        return isinstance(original, ColumnRef) and original.table in dropped

    def fix_expr(e: SqlExpr) -> SqlExpr:
        if isinstance(e, ColumnRef):
            return fix_col(e)
        if isinstance(e, Comparison):
            lhs, rhs = fix_expr(e.lhs), fix_expr(e.rhs)
            if e.op == "=" and staged_side(e.lhs) and not staged_side(e.rhs) and isinstance(e.rhs, ColumnRef):
                return Comparison("=", rhs, lhs)
            return Comparison(e.op, lhs, rhs)
        if isinstance(e, And):
            return And(fix_expr(e.lhs), fix_expr(e.rhs))
        if isinstance(e, Or):
            return Or(fix_expr(e.lhs), fix_expr(e.rhs))
        if isinstance(e, Not):
            return Not(fix_expr(e.arg))
        if isinstance(e, Exists):
            return Exists(fix_query(e.query))
        if isinstance(e, ScalarSubquery):
            return ScalarSubquery(fix_query(e.query))
        return e

    def fix_query(query: SelectQuery) -> SelectQuery:
        items = tuple(
            item
            if isinstance(item.expr, Star)
            else SelectItem(fix_expr(item.expr), item.alias, item.lowercase_as)
            for item in query.items
        )
        joins = tuple(Join(j.item, fix_expr(j.on)) for j in query.joins)
        where = fix_expr(query.where) if query.where is not None else None
        return replace(query, items=items, joins=joins, where=where)

    return fix_query(q)


# --- rendering ----------------------------------------------------------------

_PROLOGUE = """\
CREATE PROCEDURE {name}
  (in caller varchar(250), in role varchar(250))
BEGIN
  DECLARE _rollback int DEFAULT 0;
  DECLARE EXIT HANDLER FOR SQLEXCEPTION
  BEGIN
    SET _rollback = 1;
    GET STACKED DIAGNOSTICS CONDITION 1
      @p1 = RETURNED_SQLSTATE, @p2 = MESSAGE_TEXT;
    SELECT @p1, @p2;
    ROLLBACK;
  END;
  START TRANSACTION;
"""

THROW_ERROR_SQL = """\
CREATE FUNCTION throw_error() RETURNS INT DETERMINISTIC
BEGIN
  SIGNAL SQLSTATE '45000' SET MESSAGE_TEXT = 'unauthorized access';
  RETURN 0;
END
"""


def _render_temp(step: TempTableStep, indent: str = "  ") -> str:
    return (
        f"{indent}CREATE TEMPORARY TABLE {step.name} AS (\n"
        f"{indent}  {render_sql(step.body)}\n"
        f"{indent});\n"
    )


def render_epilogue_select(q: SelectQuery) -> str:
    """Final select; the source keyword is lowercased as in the target dialect."""
    head = "SELECT DISTINCT" if q.distinct else "SELECT"
    items = ", ".join("*" if isinstance(i.expr, Star) else render_expr(i.expr) for i in q.items)
    return f"{head} {items} from {q.from_items[0].name}"


def render_step(step, indent: str = "  ") -> str:
    if isinstance(step, IfStep):
        inner = indent + "  "
        return (
            f"{indent}IF ({step.guard_text})\n"
            f"{indent}THEN\n"
            f"{_render_temp(step.then_step, inner)}"
            f"{indent}ELSE\n"
            f"{_render_temp(step.else_step, inner)}"
            f"{indent}END IF;\n"
        )
    return _render_temp(step, indent)


def render_procedure(proc: StoredProcedure) -> str:
    out = [_PROLOGUE.format(name=proc.name)]
    for step in proc.steps:
        out.append("\n")
        out.append(render_step(step))
    out.append("\n  IF _rollback = 0\n")
    out.append(f"    THEN {render_epilogue_select(proc.epilogue)};\n")
    out.append("  END IF;\nEND\n")
    return "".join(out)


def render_auth_func(func: AuthFuncDef) -> str:
    params = ", ".join(f"{p} varchar(250)" for p in func.params)
    lines = [
        f"CREATE FUNCTION {func.name}({params})",
        "RETURNS INT DETERMINISTIC",
        "BEGIN",
        "  RETURN CASE role",
    ]
    for role, impl in func.cases:
        lines.append(f"    WHEN '{role}' THEN ({impl.sql_body})")
    lines.append("    ELSE FALSE")
    lines.append("  END;")
    lines.append("END")
    return "\n".join(lines) + "\n"


def render_artifacts(proc: StoredProcedure, funcs: list[AuthFuncDef]) -> str:
    """Full .sql artifact: helper, authorization functions, then the procedure."""
    parts = [THROW_ERROR_SQL]
    parts.extend(render_auth_func(f) for f in funcs)
    parts.append(render_procedure(proc))
    return "\n".join(parts)
