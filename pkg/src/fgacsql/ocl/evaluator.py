"""Four-valued evaluator for constraints over concrete scenarios.

Truth values are python bool, plus the NULL and INVALID sentinels.
Collection operations use definite semantics: an element contributes
only when its body evaluates to literal true, so null or invalid body
results exclude the element rather than poisoning the collection. This
mirrors how collection predicates are unfolded in the first-order
encoding, which carries explicit null/invalid exclusion conjuncts.
"""

from __future__ import annotations

from ..errors import UnboundKeyword
from ..model import Scenario
from .ast import (
    NULL,
    INVALID,
    AllInstances,
    AttrNav,
    Binding,
    BoolLit,
    BoolOp,
    Compare,
    EndNav,
    Exists,
    ForAll,
    Includes,
    IntLit,
    IsEmpty,
    Keyword,
    Not,
    ObjectLit,
    ObjectRef,
    OclExpr,
    Select,
    StrLit,
    Var,
)


def eval_ocl(sc: Scenario, e: OclExpr, b: Binding | None = None):
    """Evaluate a typed constraint; returns bool, int, str, ObjectRef,
    a list of ObjectRef, NULL, or INVALID."""
    return _eval(sc, e, dict(b or {}))


def _eval(sc: Scenario, e: OclExpr, env: dict):
    if isinstance(e, Keyword):
        if e.name not in env:
            raise UnboundKeyword(e.name)
        return env[e.name]
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundKeyword(e.name)
        return env[e.name]
    if isinstance(e, ObjectLit):
        return ObjectRef(e.object_id, e.cls)
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, StrLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, AttrNav):
        src = _eval(sc, e.source, env)
        if src is NULL or src is INVALID:
            return INVALID
        record = sc.objects.get(src.cls, {}).get(src.object_id)
        if record is None:
            return INVALID  # dangling reference behaves like an invalid object
        value = record.get(e.attr)
        return NULL if value is None else value
    if isinstance(e, EndNav):
        src = _eval(sc, e.source, env)
        if src is NULL or src is INVALID:
            return INVALID
        pairs = sc.link_pairs(e.assoc)
        if e.source_position == 1:
            ids = sorted(p[1] for p in pairs if p[0] == src.object_id)
        else:
            ids = sorted(p[0] for p in pairs if p[1] == src.object_id)
        return [ObjectRef(i, e.target_cls) for i in ids]
    if isinstance(e, AllInstances):
        return [ObjectRef(i, e.cls) for i in sorted(sc.object_ids(e.cls))]
    if isinstance(e, Select):
        src = _eval(sc, e.source, env)
        if src is NULL or src is INVALID:
            return INVALID
        kept = []
        for item in src:
            env[e.var] = item
            if _eval(sc, e.body, env) is True:
                kept.append(item)
            del env[e.var]
        return kept
    if isinstance(e, Exists):
        src = _eval(sc, e.source, env)
        if src is NULL or src is INVALID:
            return INVALID
        for item in src:
            env[e.var] = item
            hit = _eval(sc, e.body, env) is True
            del env[e.var]
            if hit:
                return True
        return False
    if isinstance(e, ForAll):
        src = _eval(sc, e.source, env)
        if src is NULL or src is INVALID:
            return INVALID
        for item in src:
            env[e.var] = item
            hit = _eval(sc, e.body, env) is True
            del env[e.var]
            if not hit:
                return False
        return True
    if isinstance(e, Includes):
        src = _eval(sc, e.source, env)
        if src is NULL or src is INVALID:
            return INVALID
        arg = _eval(sc, e.arg, env)
        if arg is NULL or arg is INVALID:
            return False  # collections never hold null/invalid
        return any(item == arg for item in src)
    if isinstance(e, IsEmpty):
        src = _eval(sc, e.source, env)
        if src is INVALID:
            return INVALID
        if src is NULL:
            return True  # null coerces to the empty collection
        return len(src) == 0
    if isinstance(e, Compare):
        return _compare(e.op, _eval(sc, e.lhs, env), _eval(sc, e.rhs, env))
    if isinstance(e, BoolOp):
        lhs = _eval(sc, e.lhs, env)
        rhs = _eval(sc, e.rhs, env)
        return _bool_and(lhs, rhs) if e.op == "and" else _bool_or(lhs, rhs)
    if isinstance(e, Not):
        value = _eval(sc, e.arg, env)
        if value is True:
            return False
        if value is False:
            return True
        return value  # NULL and INVALID are fixpoints of negation
    raise TypeError(f"cannot evaluate {e!r}")


def _compare(op: str, lhs, rhs):
    if lhs is INVALID or rhs is INVALID:
        return INVALID
    if op in ("=", "<>"):
        if lhs is NULL or rhs is NULL:
            equal = lhs is NULL and rhs is NULL
        elif isinstance(lhs, ObjectRef) and isinstance(rhs, ObjectRef):
            equal = lhs.object_id == rhs.object_id
        else:
            equal = lhs == rhs
        return equal if op == "=" else not equal
    if lhs is NULL or rhs is NULL:
        return INVALID
    if op == "<":
        return lhs < rhs
    if op == ">":
        return lhs > rhs
    if op == "<=":
        return lhs <= rhs
    return lhs >= rhs


def _bool_and(lhs, rhs):
    if lhs is False or rhs is False:
        return False
    if lhs is INVALID or rhs is INVALID:
        return INVALID
    if lhs is NULL or rhs is NULL:
        return NULL
    return True


def _bool_or(lhs, rhs):
    if lhs is True or rhs is True:
        return True
    if lhs is INVALID or rhs is INVALID:
        return INVALID
    if lhs is NULL or rhs is NULL:
        return NULL
    return False


def substitute(e: OclExpr, b: Binding) -> OclExpr:
    """Replace bound keywords with object literals; unbound keywords stay."""
    if isinstance(e, Keyword):
        if e.name in b:
            ref = b[e.name]
            return ObjectLit(ref.object_id, ref.cls)
        return e
    if isinstance(e, AttrNav):
        return AttrNav(substitute(e.source, b), e.attr, e.source_cls, e.attr_type)
    if isinstance(e, EndNav):
        return EndNav(
            substitute(e.source, b), e.assoc, e.end,
            e.source_end, e.source_position, e.target_cls,
        )
    if isinstance(e, IsEmpty):
        return IsEmpty(substitute(e.source, b))
    if isinstance(e, Includes):
        return Includes(substitute(e.source, b), substitute(e.arg, b))
    if isinstance(e, (Select, Exists, ForAll)):
        return type(e)(substitute(e.source, b), e.var, e.var_cls, substitute(e.body, b))
    if isinstance(e, Compare):
        return Compare(e.op, substitute(e.lhs, b), substitute(e.rhs, b))
    if isinstance(e, BoolOp):
        return BoolOp(e.op, substitute(e.lhs, b), substitute(e.rhs, b))
    if isinstance(e, Not):
        return Not(substitute(e.arg, b))
    return e
