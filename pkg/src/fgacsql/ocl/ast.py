"""Typed AST and value domain for the authorization-constraint subset."""

from __future__ import annotations

from dataclasses import dataclass


class OclExpr:
    """Base class; all nodes are frozen dataclasses and safe to share."""

    __slots__ = ()


@dataclass(frozen=True)
class Keyword(OclExpr):
    """`caller`, `self`, or an association-end keyword, typed by a class."""

    name: str
    cls: str


@dataclass(frozen=True)
class Var(OclExpr):
    """Occurrence of an iterator variable bound by select/exists/forAll."""

    name: str
    cls: str


@dataclass(frozen=True)
class ObjectLit(OclExpr):
    """A concrete object, produced by substitution; renders as `<id>`."""

    object_id: str
    cls: str


@dataclass(frozen=True)
class IntLit(OclExpr):
    value: int


@dataclass(frozen=True)
class StrLit(OclExpr):
    value: str


@dataclass(frozen=True)
class BoolLit(OclExpr):
    value: bool


@dataclass(frozen=True)
class AttrNav(OclExpr):
    source: OclExpr
    attr: str
    source_cls: str
    attr_type: str  # Int | String


@dataclass(frozen=True)
class EndNav(OclExpr):
    """Association-end navigation; source sits at `source_position` (1 or 2)
    under the end named `source_end`, collecting objects at `end`."""

    source: OclExpr
    assoc: str
    end: str
    source_end: str
    source_position: int
    target_cls: str


@dataclass(frozen=True)
class AllInstances(OclExpr):
    cls: str


@dataclass(frozen=True)
class Select(OclExpr):
    source: OclExpr
    var: str
    var_cls: str
    body: OclExpr


@dataclass(frozen=True)
class Exists(OclExpr):
    source: OclExpr
    var: str
    var_cls: str
    body: OclExpr


@dataclass(frozen=True)
class ForAll(OclExpr):
    source: OclExpr
    var: str
    var_cls: str
    body: OclExpr


@dataclass(frozen=True)
class Includes(OclExpr):
    source: OclExpr
    arg: OclExpr


@dataclass(frozen=True)
class IsEmpty(OclExpr):
    source: OclExpr


@dataclass(frozen=True)
class Compare(OclExpr):
    op: str  # = <> < > <= >=
    lhs: OclExpr
    rhs: OclExpr


@dataclass(frozen=True)
class BoolOp(OclExpr):
    op: str  # and | or
    lhs: OclExpr
    rhs: OclExpr


@dataclass(frozen=True)
class Not(OclExpr):
    arg: OclExpr


# --- values -----------------------------------------------------------------

class _Null:
    __slots__ = ()

    def __repr__(self) -> str:
        return "null"


class _Invalid:
    __slots__ = ()

    def __repr__(self) -> str:
        return "invalid"


#: Distinguished absent value; comparable with `=`, absorbs navigation.
NULL = _Null()
#: Scalar error sentinel; never stored inside a collection.
INVALID = _Invalid()


@dataclass(frozen=True)
class ObjectRef:
    object_id: str
    cls: str


#: keyword name -> ObjectRef; must bind `caller` plus whatever the context needs
Binding = dict


_PRECEDENCE = {"or": 1, "and": 2}


def render_ocl(e: OclExpr) -> str:
    """Canonical source text; parses back to a structurally equal AST."""
    return _render(e, 0)


def _render(e: OclExpr, parent_prec: int) -> str:
    if isinstance(e, Keyword) or isinstance(e, Var):
        return e.name
    if isinstance(e, ObjectLit):
        return f"<{e.object_id}>"
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return "'" + e.value.replace("'", "\\'") + "'"
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, AttrNav):
        return f"{_render(e.source, 9)}.{e.attr}"
    if isinstance(e, EndNav):
        return f"{_render(e.source, 9)}.{e.end}"
    if isinstance(e, AllInstances):
        return f"{e.cls}.allInstances()"
    if isinstance(e, (Select, Exists, ForAll)):
        op = {Select: "select", Exists: "exists", ForAll: "forAll"}[type(e)]
        return f"{_render(e.source, 9)}->{op}({e.var}|{_render(e.body, 0)})"
    if isinstance(e, Includes):
        return f"{_render(e.source, 9)}->includes({_render(e.arg, 0)})"
    if isinstance(e, IsEmpty):
        return f"{_render(e.source, 9)}->isEmpty()"
    if isinstance(e, Compare):
        text = f"{_render(e.lhs, 3)} {e.op} {_render(e.rhs, 3)}"
        return f"({text})" if parent_prec >= 3 else text
    if isinstance(e, BoolOp):
        prec = _PRECEDENCE[e.op]
        text = f"{_render(e.lhs, prec)} {e.op} {_render(e.rhs, prec - 1)}"
        return f"({text})" if parent_prec >= prec else text
    if isinstance(e, Not):
        return f"not {_render(e.arg, 8)}"
    raise TypeError(f"unrenderable node: {e!r}")


def keywords_of(e: OclExpr) -> list[str]:
    """Free keyword names in traversal order, without duplicates."""
    out: list[str] = []

    def walk(node: OclExpr) -> None:
        if isinstance(node, Keyword):
            if node.name not in out:
                out.append(node.name)
        for child in _children(node):
            walk(child)

    walk(e)
    return out


def _children(e: OclExpr) -> tuple[OclExpr, ...]:
    if isinstance(e, (AttrNav, EndNav, IsEmpty)):
        return (e.source,)
    if isinstance(e, (Select, Exists, ForAll)):
        return (e.source, e.body)
    if isinstance(e, Includes):
        return (e.source, e.arg)
    if isinstance(e, (Compare, BoolOp)):
        return (e.lhs, e.rhs)
    if isinstance(e, Not):
        return (e.arg,)
    return ()


def normalized_key(e: OclExpr) -> str:
    """Registry key: rendered text with iterator variables alpha-renamed."""
    counter = [0]

    def rename(node: OclExpr, env: dict[str, str]) -> OclExpr:
        if isinstance(node, Var):
            return Var(env[node.name], node.cls)
        if isinstance(node, (Select, Exists, ForAll)):
            fresh = f"v{counter[0]}"
            counter[0] += 1
            inner = dict(env)
            inner[node.var] = fresh
            return type(node)(rename(node.source, env), fresh, node.var_cls, rename(node.body, inner))
        if isinstance(node, AttrNav):
            return AttrNav(rename(node.source, env), node.attr, node.source_cls, node.attr_type)
        if isinstance(node, EndNav):
            return EndNav(
                rename(node.source, env), node.assoc, node.end,
                node.source_end, node.source_position, node.target_cls,
            )
        if isinstance(node, IsEmpty):
            return IsEmpty(rename(node.source, env))
        if isinstance(node, Includes):
            return Includes(rename(node.source, env), rename(node.arg, env))
        if isinstance(node, Compare):
            return Compare(node.op, rename(node.lhs, env), rename(node.rhs, env))
        if isinstance(node, BoolOp):
            return BoolOp(node.op, rename(node.lhs, env), rename(node.rhs, env))
        if isinstance(node, Not):
            return Not(rename(node.arg, env))
        return node

    return render_ocl(rename(e, {}))
