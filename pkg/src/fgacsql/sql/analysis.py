"""Resource-access analysis: which protected reads a query performs.

Every distinct (class, attribute) read anywhere in a query is an
attribute access; every appearance of an association table is an
association access. Id columns are not protected resources, so reads of
`<Class>_id` contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnknownColumn, UnknownTable
from ..model import DataModel
from .ast import (
    AggCall,
    And,
    CheckedExpr,
    ColumnRef,
    Comparison,
    Exists,
    Join,
    Not,
    Or,
    ScalarSubquery,
    SelectQuery,
    SqlExpr,
    Star,
    SubqueryRef,
    TableRef,
)


@dataclass(frozen=True)
class AttrAccess:
    cls: str
    attribute: str
    row_source: str  # FROM/JOIN item (table name or alias) whose rows bind `self`


@dataclass(frozen=True)
class AssocAccess:
    association: str
    end1_source: str  # class providing candidate rows for end 1
    end2_source: str


ResourceAccess = AttrAccess | AssocAccess

# provenance of one visible column:
#   ("id", cls) | ("attr", cls, attr) | ("end", assoc, end_name) | ("opaque",)
_Prov = tuple


class _Source:
    """One FROM/JOIN item with its visible columns and their provenance."""

    def __init__(self, name: str, columns: dict[str, _Prov]):
        self.name = name
        self.columns = columns


def _table_source(dm: DataModel, ref: TableRef, outer: list[_Source]) -> _Source:
    name = ref.alias or ref.name
    cls = dm.class_named(ref.name)
    if cls is not None:
        columns: dict[str, _Prov] = {cls.id_column(): ("id", cls.name)}
        for attr in cls.attributes:
            columns[attr.name] = ("attr", cls.name, attr.name)
        return _Source(name, columns)
    assoc = dm.association_named(ref.name)
    if assoc is not None:
        columns = {end.name: ("end", assoc.name, end.name) for end in assoc.ends()}
        return _Source(name, columns)
    # temp tables and other engine-provided names: columns are opaque
    for source in outer:
        if source.name == ref.name:
            return _Source(name, dict(source.columns))
    return _Source(name, {})


class _Analyzer:
    def __init__(self, dm: DataModel):
        self.dm = dm
        self.attr_accesses: list[AttrAccess] = []
        self.assoc_accesses: list[AssocAccess] = []
        self._seen_attrs: set[tuple[str, str]] = set()

    def analyze(self, q: SelectQuery) -> list[ResourceAccess]:
        self._query(q, [])
        return [*self.assoc_accesses, *self.attr_accesses]

    # Traversal order mirrors logical evaluation: row sources first
    # (recursing into subqueries), then ON conditions, then WHERE, and
    # the select list last.
    def _query(self, q: SelectQuery, outer: list[_Source]) -> list[_Source]:
        sources: list[_Source] = []
        for item in q.from_items:
            sources.append(self._from_item(item, outer))
        for join in q.joins:
            sources.append(self._from_item(join.item, outer))
        scope = sources + outer
        for join in q.joins:
            self._expr(join.on, scope)
        if q.where is not None:
            self._expr(q.where, scope)
        for item in q.items:
            if not isinstance(item.expr, Star):
                self._expr(item.expr, scope)
        return sources

    def _from_item(self, item, outer: list[_Source]) -> _Source:
        if isinstance(item, TableRef):
            assoc = self.dm.association_named(item.name)
            if assoc is not None:
                self.assoc_accesses.append(
                    AssocAccess(assoc.name, assoc.end1.cls, assoc.end2.cls)
                )
            return _table_source(self.dm, item, outer)
        inner_sources = self._query(item.query, outer)
        columns: dict[str, _Prov] = {}
        for sel in item.query.items:
            if isinstance(sel.expr, Star):
                for src in inner_sources:
                    columns.update(src.columns)
            else:
                name = sel.alias or (sel.expr.name if isinstance(sel.expr, ColumnRef) else None)
                if name is not None:
                    columns[name] = self._provenance(sel.expr, inner_sources + outer)
        return _Source(item.alias, columns)

    def _provenance(self, expr: SqlExpr, scope: list[_Source]) -> _Prov:
        if isinstance(expr, ColumnRef):
            return self._resolve(expr, scope)
        return ("opaque",)

    def _resolve(self, col: ColumnRef, scope: list[_Source]) -> _Prov:
        if col.table is not None:
            for source in scope:
                if source.name == col.table:
                    if col.name not in source.columns:
                        raise UnknownColumn(f"{col.table}.{col.name}")
                    return source.columns[col.name]
            raise UnknownTable(col.table)
        for source in scope:
            if col.name in source.columns:
                return source.columns[col.name]
        raise UnknownColumn(col.name)

    def _note_read(self, prov: _Prov, source_name: str) -> None:
        if prov[0] == "attr":
            key = (prov[1], prov[2])
            if key not in self._seen_attrs:
                self._seen_attrs.add(key)
                self.attr_accesses.append(AttrAccess(prov[1], prov[2], source_name))

    def _expr(self, e: SqlExpr, scope: list[_Source]) -> None:
        if isinstance(e, ColumnRef):
            prov = self._resolve(e, scope)
            owner = e.table or next(
                (s.name for s in scope if e.name in s.columns), scope[0].name if scope else ""
            )
            self._note_read(prov, owner)
        elif isinstance(e, Comparison):
            self._expr(e.lhs, scope)
            self._expr(e.rhs, scope)
        elif isinstance(e, (And, Or)):
            self._expr(e.lhs, scope)
            self._expr(e.rhs, scope)
        elif isinstance(e, Not):
            self._expr(e.arg, scope)
        elif isinstance(e, (Exists, ScalarSubquery)):
            self._query(e.query, scope)
        elif isinstance(e, AggCall):
            if e.arg is not None:
                self._expr(e.arg, scope)
        elif isinstance(e, CheckedExpr):
            for arg in e.args:
                self._expr(arg, scope)
            self._expr(e.yielded, scope)
        # literals and params read nothing


def resource_accesses(q: SelectQuery, dm: DataModel) -> list[ResourceAccess]:
    """Association accesses in appearance order, then distinct attribute reads."""
    return _Analyzer(dm).analyze(q)


def output_columns(q: SelectQuery, dm: DataModel) -> list[str]:
    """Visible column names a query produces (for staging and validation)."""
    analyzer = _Analyzer(dm)
    sources = []
    for item in q.from_items:
        sources.append(analyzer._from_item(item, []))
    for join in q.joins:
        sources.append(analyzer._from_item(join.item, []))
    names: list[str] = []
    for sel in q.items:
        if isinstance(sel.expr, Star):
            for src in sources:
                names.extend(src.columns)
        elif sel.alias:
            names.append(sel.alias)
        elif isinstance(sel.expr, ColumnRef):
            names.append(sel.expr.name)
        else:
            names.append("expr")
    return names
