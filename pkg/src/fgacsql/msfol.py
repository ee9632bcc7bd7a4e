"""Translation of data models, scenarios, and constraints into many-sorted
first-order logic, emitted as SMT-LIB 2.

Everything lives in a single uninterpreted sort `Classifier` plus the
builtin Int and String sorts. Null and invalid are distinguished
constants per sort. Constraint formulas assert "evaluates to literal
true": every rule carries explicit exclusion conjuncts for the null and
invalid cases of the subterms involved, and every collection-valued
select subexpression becomes an auxiliary TEMPk predicate whose
definition joins the translation (the definition set).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import Untranslatable
from .model import INT, DataModel, Scenario
from .ocl import (
    AllInstances,
    AttrNav,
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
    OclExpr,
    Select,
    StrLit,
    Var,
    render_ocl,
)

Sexpr = str | tuple


def render_sexpr(x: Sexpr) -> str:
    if isinstance(x, str):
        return x
    return "(" + " ".join(render_sexpr(part) for part in x) + ")"


@dataclass(frozen=True)
class Comment:
    text: str


@dataclass(frozen=True)
class DeclareSort:
    name: str
    arity: int = 0


@dataclass(frozen=True)
class DeclareConst:
    name: str
    sort: str


@dataclass(frozen=True)
class DeclareFun:
    name: str
    args: tuple[str, ...]
    ret: str


@dataclass(frozen=True)
class Assert:
    formula: Sexpr


@dataclass(frozen=True)
class Blank:
    pass


TheoryItem = Comment | DeclareSort | DeclareConst | DeclareFun | Assert | Blank


@dataclass
class MsfolTheory:
    items: list[TheoryItem] = field(default_factory=list)

    def extend(self, other: "MsfolTheory") -> "MsfolTheory":
        self.items.extend(other.items)
        return self


@dataclass
class DefinitionSet:
    """Auxiliary TEMPk predicates with their defining assertions."""

    items: list[TheoryItem] = field(default_factory=list)
    next_index: int = 0


def render_item(item: TheoryItem) -> str:
    if isinstance(item, Comment):
        return f"; {item.text}"
    if isinstance(item, Blank):
        return ""
    if isinstance(item, DeclareSort):
        return f"(declare-sort {item.name} {item.arity})"
    if isinstance(item, DeclareConst):
        return f"(declare-const {item.name} {item.sort})"
    if isinstance(item, DeclareFun):
        args = " ".join(item.args)
        return f"(declare-fun {item.name} ({args}) {item.ret})"
    if isinstance(item, Assert):
        return f"(assert {render_sexpr(item.formula)})"
    raise TypeError(f"unrenderable item {item!r}")


def emit_smtlib(*parts: MsfolTheory | DefinitionSet | Assert) -> str:
    """Byte-deterministic SMT-LIB 2 script with set-logic and check-sat."""
    lines = ["(set-logic ALL)", ""]
    for part in parts:
        if isinstance(part, Assert):
            lines.append(render_item(part))
            continue
        for item in part.items:
            lines.append(render_item(item))
    lines.append("")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# --- data model theory --------------------------------------------------------

def _null_pair(kind: str) -> tuple[str, str]:
    return {
        "Int": ("nullInt", "invalInt"),
        "String": ("nullString", "invalString"),
        "Classifier": ("nullClassifier", "invalClassifier"),
    }[kind]


def map_datamodel_theory(dm: DataModel) -> MsfolTheory:
    """Sort, null/invalid constants, class predicates with disjointness,
    attribute functions with definedness axioms, association predicates."""
    t = MsfolTheory()
    t.items += [Comment("sort declaration"), DeclareSort("Classifier", 0), Blank()]
    for kind, label in (("Classifier", "object"), ("Int", "integer"), ("String", "string")):
        null_c, inval_c = _null_pair(kind)
        sort = "Classifier" if kind == "Classifier" else kind
        t.items += [
            Comment(f"null and invalid {label} and its axiom"),
            DeclareConst(null_c, sort),
            DeclareConst(inval_c, sort),
            Assert(("distinct", null_c, inval_c)),
            Blank(),
        ]
    for cls in dm.classes:
        t.items += [
            Comment(f"unary predicate {cls.name}(x) and its axiom"),
            DeclareFun(cls.name, ("Classifier",), "Bool"),
            Assert(("not", (cls.name, "nullClassifier"))),
            Assert(("not", (cls.name, "invalClassifier"))),
            Blank(),
        ]
    if len(dm.classes) > 1:
        t.items.append(Comment("axiom: disjoint set of objects of different classes"))
        for cls in dm.classes:
            for other in dm.classes:
                if cls.name == other.name:
                    continue
                t.items.append(
                    Assert(
                        (
                            "forall",
                            (("x", "Classifier"),),
                            ("=>", (cls.name, "x"), ("not", (other.name, "x"))),
                        )
                    )
                )
        t.items.append(Blank())
    for cls in dm.classes:
        for attr in cls.attributes:
            sort = "Int" if attr.type == INT else "String"
            _, inval_c = _null_pair(sort)
            fun = f"{attr.name}_{cls.name}"
            t.items += [
                Comment(f"function get the {attr.name} of {cls.name.lower()} and its axiom"),
                DeclareFun(fun, ("Classifier",), sort),
                Assert(("=", (fun, "nullClassifier"), inval_c)),
                Assert(("=", (fun, "invalClassifier"), inval_c)),
                Assert(
                    (
                        "forall",
                        (("x", "Classifier"),),
                        ("=>", (cls.name, "x"), ("distinct", (fun, "x"), inval_c)),
                    )
                ),
                Blank(),
            ]
    for assoc in dm.associations:
        t.items += [
            Comment(f"binary predicate of the {assoc.name} association and its axiom"),
            DeclareFun(assoc.name, ("Classifier", "Classifier"), "Bool"),
            Assert(
                (
                    "forall",
                    (("x", "Classifier"),),
                    (
                        "forall",
                        (("y", "Classifier"),),
                        (
                            "=>",
                            (assoc.name, "x", "y"),
                            ("and", (assoc.end1.cls, "x"), (assoc.end2.cls, "y")),
                        ),
                    ),
                )
            ),
            Blank(),
        ]
    return t


def map_sigma(dm: DataModel, decls: list[tuple[str, str]]) -> MsfolTheory:
    """Keyword constants with their class-membership axioms."""
    t = MsfolTheory()
    for keyword, cls in decls:
        if dm.class_named(cls) is None:
            raise Untranslatable(f"keyword {keyword!r} typed by unknown class {cls!r}")
        t.items += [
            Comment(f"constant symbol of {keyword} and its axiom"),
            DeclareConst(keyword, "Classifier"),
            Assert((cls, keyword)),
            Blank(),
        ]
    return t


# --- constraint translation ----------------------------------------------------

def _or_list(parts: list[Sexpr]) -> Sexpr:
    if not parts:
        return "false"
    if len(parts) == 1:
        return parts[0]
    return ("or", *parts)


def _and_list(parts: list[Sexpr]) -> Sexpr:
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return ("and", *parts)


def _term(e: OclExpr) -> Sexpr:
    if isinstance(e, (Keyword, Var)):
        return e.name
    if isinstance(e, ObjectLit):
        return _symbol(e.object_id)
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return '"' + e.value.replace('"', '""') + '"'
    if isinstance(e, AttrNav):
        return (f"{e.attr}_{e.source_cls}", _term(e.source))
    raise Untranslatable(f"term {type(e).__name__}")


def _symbol(name: str) -> str:
    if name and all(ch.isalnum() or ch == "_" for ch in name) and not name[0].isdigit():
        return name
    return "|" + name.replace("|", "") + "|"


def _null_of(e: OclExpr) -> Sexpr | None:
    """Condition for the term being null; None when it cannot be."""
    if isinstance(e, (Keyword, Var, ObjectLit)):
        return ("=", _term(e), "nullClassifier")
    if isinstance(e, AttrNav):
        null_c, _ = _null_pair("Int" if e.attr_type == INT else "String")
        return ("=", _term(e), null_c)
    return None


def _inval_of(e: OclExpr) -> Sexpr | None:
    """Condition for the term being invalid; None when it cannot be."""
    if isinstance(e, (Keyword, Var, ObjectLit)):
        return ("=", _term(e), "invalClassifier")
    if isinstance(e, AttrNav):
        parts = _undef_disjuncts(e.source)
        return _or_list(parts) if parts else None
    return None


def _undef_disjuncts(e: OclExpr) -> list[Sexpr]:
    parts = []
    null_c = _null_of(e)
    if null_c is not None:
        parts.append(null_c)
    inval_c = _inval_of(e)
    if inval_c is not None:
        parts.append(inval_c)
    return parts


def _assoc_atom(assoc_name: str, position_of_first: int, first: Sexpr, second: Sexpr) -> Sexpr:
    """Membership atom with `first` at the given end position."""
    if position_of_first == 1:
        return (assoc_name, first, second)
    return (assoc_name, second, first)


class _Translator:
    def __init__(self, defs: DefinitionSet):
        self.defs = defs

    # collection sources: membership atom for a bound element, plus the
    # source's own undefinedness condition
    def _source_parts(self, source: OclExpr, element: str) -> tuple[Sexpr, Sexpr]:
        if isinstance(source, AllInstances):
            return (source.cls, element), "false"
        if isinstance(source, EndNav):
            atom = _assoc_atom(source.assoc, source.source_position, _term(source.source), element)
            return atom, _or_list(_undef_disjuncts(source.source))
        if isinstance(source, Select):
            pred = self._define_select(source)
            inner_undef = self._source_undef(source.source)
            return (pred, element), inner_undef
        raise Untranslatable(f"collection source {type(source).__name__}")

    def _source_undef(self, source: OclExpr) -> Sexpr:
        if isinstance(source, AllInstances):
            return "false"
        if isinstance(source, EndNav):
            return _or_list(_undef_disjuncts(source.source))
        if isinstance(source, Select):
            return self._source_undef(source.source)
        raise Untranslatable(f"collection source {type(source).__name__}")

    def _define_select(self, sel: Select) -> str:
        name = f"TEMP{self.defs.next_index}"
        self.defs.next_index += 1
        if isinstance(sel.source, AllInstances):
            membership: Sexpr = (sel.source.cls, sel.var)
        elif isinstance(sel.source, EndNav):
            membership = _assoc_atom(
                sel.source.assoc, sel.source.source_position, _term(sel.source.source), sel.var
            )
        else:
            raise Untranslatable("nested select sources")
        self.defs.items += [
            Comment(f"this {name} function is the OCL expression"),
            Comment(render_ocl(sel)),
            DeclareFun(name, ("Classifier",), "Bool"),
            Assert(
                (
                    "forall",
                    ((sel.var, "Classifier"),),
                    ("=", (name, sel.var), ("and", membership, self.translate(sel.body))),
                )
            ),
            Blank(),
        ]
        return name

    def translate(self, e: OclExpr) -> Sexpr:
        """Formula asserting that e evaluates to literal true."""
        if isinstance(e, BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, BoolOp):
            op = "and" if e.op == "and" else "or"
            return (op, self.translate(e.lhs), self.translate(e.rhs))
        if isinstance(e, Not):
            return self._translate_not(e.arg)
        if isinstance(e, Compare):
            if e.op == "=":
                return self._equality(e.lhs, e.rhs)
            if e.op == "<>":
                return self._inequality(e.lhs, e.rhs)
            return self._ordering(e.op, e.lhs, e.rhs)
        if isinstance(e, Exists):
            return self._exists(e.source, e.var, e.body)
        if isinstance(e, Includes):
            return self._membership(e.source, e.arg)
        if isinstance(e, ForAll):
            return self._forall(e.source, e.var, e.body)
        if isinstance(e, IsEmpty):
            return self._isempty(e.source)
        raise Untranslatable(type(e).__name__)

    def _translate_not(self, e: OclExpr) -> Sexpr:
        flips = {"<": ">=", ">": "<=", "<=": ">", ">=": "<"}
        if isinstance(e, Not):
            return self.translate(e.arg)
        if isinstance(e, BoolLit):
            return "false" if e.value else "true"
        if isinstance(e, BoolOp):
            dual = "or" if e.op == "and" else "and"
            return (dual, self._translate_not(e.lhs), self._translate_not(e.rhs))
        if isinstance(e, Compare):
            if e.op == "=":
                return self._inequality(e.lhs, e.rhs)
            if e.op == "<>":
                return self._equality(e.lhs, e.rhs)
            return self._ordering(flips[e.op], e.lhs, e.rhs)
        raise Untranslatable(f"negation of {type(e).__name__}")

    def _undef_or(self, *exprs: OclExpr) -> Sexpr:
        parts: list[Sexpr] = []
        for expr in exprs:
            parts.extend(_undef_disjuncts(expr))
        return _or_list(parts)

    def _equality(self, lhs: OclExpr, rhs: OclExpr) -> Sexpr:
        both_null = self._both_null(lhs, rhs)
        defined_eq = ("and", ("=", _term(lhs), _term(rhs)), ("not", self._undef_or(lhs, rhs)))
        if both_null is None:
            return defined_eq
        return ("or", both_null, defined_eq)

    def _both_null(self, lhs: OclExpr, rhs: OclExpr) -> Sexpr | None:
        left_null = _null_of(lhs)
        right_null = _null_of(rhs)
        if left_null is None or right_null is None:
            return None
        return ("and", left_null, right_null)

    def _inequality(self, lhs: OclExpr, rhs: OclExpr) -> Sexpr:
        parts: list[Sexpr] = []
        left_null, right_null = _null_of(lhs), _null_of(rhs)
        if left_null is not None:
            defined_rhs = [("not", c) for c in _undef_disjuncts(rhs)]
            parts.append(_and_list([left_null, *defined_rhs]))
        if right_null is not None:
            defined_lhs = [("not", c) for c in _undef_disjuncts(lhs)]
            parts.append(_and_list([right_null, *defined_lhs]))
        parts.append(
            ("and", ("distinct", _term(lhs), _term(rhs)), ("not", self._undef_or(lhs, rhs)))
        )
        return _or_list(parts)

    def _ordering(self, op: str, lhs: OclExpr, rhs: OclExpr) -> Sexpr:
        return ("and", (op, _term(lhs), _term(rhs)), ("not", self._undef_or(lhs, rhs)))

    def _exists(self, source: OclExpr, var: str, body: OclExpr) -> Sexpr:
        # an equality test against the iterator is a membership check
        if isinstance(body, Compare) and body.op == "=":
            arg = None
            if isinstance(body.lhs, Var) and body.lhs.name == var:
                arg = body.rhs
            elif isinstance(body.rhs, Var) and body.rhs.name == var:
                arg = body.lhs
            if arg is not None and not _mentions_var(arg, var):
                return self._membership(source, arg)
        atom, src_undef = self._source_parts(source, var)
        return ("exists", ((var, "Classifier"),), ("and", atom, self.translate(body), ("not", src_undef)))

    def _membership(self, source: OclExpr, arg: OclExpr) -> Sexpr:
        if isinstance(source, EndNav):
            receiver = source.source
            assoc_ends = {source.end, source.source_end}
            if isinstance(arg, Keyword) and arg.name in assoc_ends:
                # orient the membership from the end keyword's side: the
                # keyword stands at its own end, the witness at the other
                arg_position = 1 if arg.name == _end1_name(source) else 2
                atom = _assoc_atom(source.assoc, arg_position, _term(arg), "temp")
                return (
                    "exists",
                    (("temp", "Classifier"),),
                    (
                        "and",
                        atom,
                        ("=", "temp", _term(receiver)),
                        ("not", self._undef_or(arg)),
                        ("not", _inval_of(receiver)),
                    ),
                )
            atom = _assoc_atom(source.assoc, source.source_position, _term(receiver), "temp")
            conjuncts: list[Sexpr] = [atom, ("=", "temp", _term(arg)), ("not", self._undef_or(receiver))]
            arg_inval = _inval_of(arg)
            if arg_inval is not None:
                conjuncts.append(("not", arg_inval))
            return ("exists", (("temp", "Classifier"),), tuple(["and", *conjuncts]))
        if isinstance(source, AllInstances):
            conjuncts = [(source.cls, "temp"), ("=", "temp", _term(arg))]
            arg_inval = _inval_of(arg)
            if arg_inval is not None:
                conjuncts.append(("not", arg_inval))
            return ("exists", (("temp", "Classifier"),), tuple(["and", *conjuncts]))
        raise Untranslatable("membership over computed collections")

    def _forall(self, source: OclExpr, var: str, body: OclExpr) -> Sexpr:
        atom, src_undef = self._source_parts(source, var)
        return (
            "forall",
            ((var, "Classifier"),),
            ("and", ("=>", atom, self.translate(body)), ("not", src_undef)),
        )

    def _isempty(self, source: OclExpr) -> Sexpr:
        if isinstance(source, Select):
            pred = self._define_select(source)
            membership: Sexpr = (pred, "x")
            src_undef = self._source_undef(source.source)
        elif isinstance(source, AllInstances):
            membership = (source.cls, "x")
            src_undef = "false"
        elif isinstance(source, EndNav):
            membership = _assoc_atom(source.assoc, source.source_position, _term(source.source), "x")
            src_undef = _or_list(_undef_disjuncts(source.source))
        else:
            raise Untranslatable("isEmpty over computed collections")
        return ("forall", (("x", "Classifier"),), ("and", ("not", membership), ("not", src_undef)))


def _end1_name(nav: EndNav) -> str:
    return nav.source_end if nav.source_position == 1 else nav.end


def _mentions_var(e: OclExpr, name: str) -> bool:
    if isinstance(e, Var) and e.name == name:
        return True
    from .ocl.ast import _children

    return any(_mentions_var(child, name) for child in _children(e))


def map_true(e: OclExpr, defs: DefinitionSet | None = None) -> tuple[Sexpr, DefinitionSet]:
    """Formula asserting e evaluates to true, plus the TEMP definitions it needs."""
    defs = defs if defs is not None else DefinitionSet()
    translator = _Translator(defs)
    formula = translator.translate(e)
    return formula, defs


# --- scenario interpretation ----------------------------------------------------

def map_interpretation(dm: DataModel, sc: Scenario) -> MsfolTheory:
    """Finite-model encoding: fresh distinct constants per object, closed
    class extents, fixed attribute values, closed association relations."""
    t = MsfolTheory()
    all_objects: list[str] = []
    for cls in dm.classes:
        all_objects.extend(sorted(sc.object_ids(cls.name)))
    if all_objects:
        t.items.append(Comment("scenario objects, pairwise distinct"))
        for oid in all_objects:
            t.items.append(DeclareConst(_symbol(oid), "Classifier"))
        t.items.append(
            Assert(("distinct", *[_symbol(o) for o in all_objects], "nullClassifier", "invalClassifier"))
        )
        t.items.append(Blank())
    for cls in dm.classes:
        ids = sorted(sc.object_ids(cls.name))
        t.items.append(Comment(f"extent of class {cls.name}"))
        for oid in ids:
            t.items.append(Assert((cls.name, _symbol(oid))))
        if ids:
            # definitional closure: the extent is exactly the listed objects
            closure = _or_list([("=", "x", _symbol(o)) for o in ids])
            t.items.append(
                Assert(("forall", (("x", "Classifier"),), ("=", (cls.name, "x"), closure)))
            )
        else:
            t.items.append(Assert(("forall", (("x", "Classifier"),), ("not", (cls.name, "x")))))
        t.items.append(Blank())
        for oid in ids:
            record = sc.objects[cls.name][oid]
            for attr in cls.attributes:
                fun = f"{attr.name}_{cls.name}"
                sort = "Int" if attr.type == INT else "String"
                null_c, inval_c = _null_pair(sort)
                value = record.get(attr.name)
                if value is None:
                    t.items.append(Assert(("=", (fun, _symbol(oid)), null_c)))
                else:
                    literal = str(value) if attr.type == INT else '"' + str(value).replace('"', '""') + '"'
                    t.items.append(Assert(("=", (fun, _symbol(oid)), literal)))
                    t.items.append(Assert(("distinct", (fun, _symbol(oid)), null_c)))
                    t.items.append(Assert(("distinct", (fun, _symbol(oid)), inval_c)))
        if ids and cls.attributes:
            t.items.append(Blank())
    for assoc in dm.associations:
        pairs = sorted(sc.link_pairs(assoc.name))
        t.items.append(Comment(f"links of association {assoc.name}"))
        for a, b in pairs:
            t.items.append(Assert((assoc.name, _symbol(a), _symbol(b))))
        if pairs:
            closure = _or_list(
                [("and", ("=", "x", _symbol(a)), ("=", "y", _symbol(b))) for a, b in pairs]
            )
            t.items.append(
                Assert(
                    (
                        "forall",
                        (("x", "Classifier"), ("y", "Classifier")),
                        ("=", (assoc.name, "x", "y"), closure),
                    )
                )
            )
        else:
            t.items.append(
                Assert(
                    (
                        "forall",
                        (("x", "Classifier"), ("y", "Classifier")),
                        ("not", (assoc.name, "x", "y")),
                    )
                )
            )
        t.items.append(Blank())
    return t
