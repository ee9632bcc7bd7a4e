"""Recursive-descent parser and typing pass for the constraint subset.

The grammar covers exactly the constructs that appear in authorization
constraints: keyword and iterator references, literals, attribute and
association-end navigation, allInstances, select/exists/forAll/includes/
isEmpty, comparisons, and boolean connectives. Everything else is a
syntax error by construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import OclSyntaxError, OclTypeError
from ..model import DataModel
from .ast import (
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
    OclExpr,
    Select,
    StrLit,
    Var,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>->)|(?P<cmp><=|>=|<>|=|<|>)|(?P<punct>[().|])"
    r"|(?P<int>\d+)|(?P<str>'(?:[^'\\]|\\.)*')|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)

_ITER_OPS = {"select", "exists", "forAll"}

# types are ("Int",) ("String",) ("Bool",) ("Object", cls) ("Collection", cls)
T_INT = ("Int",)
T_STRING = ("String",)
T_BOOL = ("Bool",)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == match.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise OclSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        pos = match.end()
        for kind in ("arrow", "cmp", "punct", "int", "str", "name"):
            value = match.group(kind)
            if value is not None:
                tokens.append(_Token(kind, value, match.start()))
                break
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    """Parses and types in one pass against a data model and keyword typing."""

    def __init__(self, tokens: list[_Token], dm: DataModel, keywords: dict[str, str]):
        self.tokens = tokens
        self.i = 0
        self.dm = dm
        self.keywords = keywords
        self.scope: list[tuple[str, str]] = []  # iterator (name, class) stack

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise OclSyntaxError(f"expected {want!r}, found {tok.text!r}", tok.pos)
        return self.advance()

    # expression := or-chain over and-chains over unary/comparison
    def parse_expr(self) -> tuple[OclExpr, tuple]:
        left, left_t = self.parse_and()
        while self.peek().kind == "name" and self.peek().text == "or":
            self.advance()
            right, right_t = self.parse_and()
            self._require_bool(left_t, "or")
            self._require_bool(right_t, "or")
            left, left_t = BoolOp("or", left, right), T_BOOL
        return left, left_t

    def parse_and(self) -> tuple[OclExpr, tuple]:
        left, left_t = self.parse_unary()
        while self.peek().kind == "name" and self.peek().text == "and":
            self.advance()
            right, right_t = self.parse_unary()
            self._require_bool(left_t, "and")
            self._require_bool(right_t, "and")
            left, left_t = BoolOp("and", left, right), T_BOOL
        return left, left_t

    def parse_unary(self) -> tuple[OclExpr, tuple]:
        tok = self.peek()
        if tok.kind == "name" and tok.text == "not":
            self.advance()
            arg, arg_t = self.parse_unary()
            self._require_bool(arg_t, "not")
            return Not(arg), T_BOOL
        return self.parse_comparison()

    def parse_comparison(self) -> tuple[OclExpr, tuple]:
        left, left_t = self.parse_postfix()
        tok = self.peek()
        if tok.kind != "cmp":
            return left, left_t
        op = self.advance().text
        right, right_t = self.parse_postfix()
        if op in ("=", "<>"):
            ok = (
                left_t[0] == right_t[0]
                and left_t[0] in ("Int", "String", "Object")
            )
            if left_t[0] == "Object" and right_t[0] == "Object":
                ok = left_t[1] == right_t[1]
            if not ok:
                raise OclTypeError(f"cannot compare {left_t} with {right_t}")
        else:
            if left_t != T_INT or right_t != T_INT:
                raise OclTypeError(f"operator {op!r} needs Int operands, got {left_t} and {right_t}")
        return Compare(op, left, right), T_BOOL

    def parse_postfix(self) -> tuple[OclExpr, tuple]:
        expr, expr_t = self.parse_primary()
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ".":
                self.advance()
                feature = self.expect("name").text
                expr, expr_t = self._navigate(expr, expr_t, feature, tok.pos)
            elif tok.kind == "arrow":
                self.advance()
                expr, expr_t = self._collection_op(expr, expr_t)
            else:
                return expr, expr_t

    def _navigate(self, expr, expr_t, feature: str, pos: int):
        if feature == "allInstances":
            raise OclSyntaxError("allInstances applies to a class name", pos)
        if expr_t[0] != "Object":
            raise OclTypeError(f"navigation {feature!r} from non-object type {expr_t}")
        cls_name = expr_t[1]
        cls = self.dm.class_named(cls_name)
        attr = cls.attribute(feature) if cls else None
        if attr is not None:
            return AttrNav(expr, feature, cls_name, attr.type), (attr.type,)
        for assoc, end in self.dm.navigations_from(cls_name):
            if end.name == feature:
                source_position = 1 if assoc.end2.name == feature else 2
                source_end = assoc.end1.name if source_position == 1 else assoc.end2.name
                node = EndNav(expr, assoc.name, feature, source_end, source_position, end.cls)
                return node, ("Collection", end.cls)
        raise OclTypeError(f"{cls_name} has no attribute or opposite end named {feature!r}")

    def _collection_op(self, expr, expr_t):
        name_tok = self.expect("name")
        op = name_tok.text
        if op in _ITER_OPS:
            if expr_t[0] != "Collection":
                raise OclTypeError(f"{op} applies to collections, not {expr_t}")
            elem_cls = expr_t[1]
            self.expect("punct", "(")
            var = self.expect("name").text
            self.expect("punct", "|")
            self.scope.append((var, elem_cls))
            body, body_t = self.parse_expr()
            self.scope.pop()
            self.expect("punct", ")")
            self._require_bool(body_t, op)
            node_type = {"select": Select, "exists": Exists, "forAll": ForAll}[op]
            node = node_type(expr, var, elem_cls, body)
            return node, (("Collection", elem_cls) if op == "select" else T_BOOL)
        if op == "includes":
            if expr_t[0] != "Collection":
                raise OclTypeError(f"includes applies to collections, not {expr_t}")
            self.expect("punct", "(")
            arg, arg_t = self.parse_expr()
            self.expect("punct", ")")
            if arg_t != ("Object", expr_t[1]):
                raise OclTypeError(f"includes argument must be a {expr_t[1]}, got {arg_t}")
            return Includes(expr, arg), T_BOOL
        if op == "isEmpty":
            if expr_t[0] != "Collection":
                raise OclTypeError(f"isEmpty applies to collections, not {expr_t}")
            self.expect("punct", "(")
            self.expect("punct", ")")
            return IsEmpty(expr), T_BOOL
        raise OclSyntaxError(f"unknown collection operation {op!r}", name_tok.pos)

    def parse_primary(self) -> tuple[OclExpr, tuple]:
        tok = self.advance()
        if tok.kind == "int":
            return IntLit(int(tok.text)), T_INT
        if tok.kind == "str":
            raw = tok.text[1:-1].replace("\\'", "'")
            return StrLit(raw), T_STRING
        if tok.kind == "punct" and tok.text == "(":
            expr, expr_t = self.parse_expr()
            self.expect("punct", ")")
            return expr, expr_t
        if tok.kind == "name":
            return self._resolve_name(tok)
        raise OclSyntaxError(f"unexpected token {tok.text!r}", tok.pos)

    def _resolve_name(self, tok: _Token) -> tuple[OclExpr, tuple]:
        name = tok.text
        if name == "true":
            return BoolLit(True), T_BOOL
        if name == "false":
            return BoolLit(False), T_BOOL
        for var, cls in reversed(self.scope):
            if var == name:
                return Var(name, cls), ("Object", cls)
        if name in self.keywords:
            cls = self.keywords[name]
            if self.dm.class_named(cls) is None:
                raise OclTypeError(f"keyword {name!r} typed by undeclared class {cls!r}")
            return Keyword(name, cls), ("Object", cls)
        if self.dm.class_named(name) is not None:
            # class names only occur as allInstances sources
            if (
                self.peek().kind == "punct"
                and self.peek().text == "."
                and self.tokens[self.i + 1].kind == "name"
                and self.tokens[self.i + 1].text == "allInstances"
            ):
                self.advance()  # .
                self.advance()  # allInstances
                self.expect("punct", "(")
                self.expect("punct", ")")
                return AllInstances(name), ("Collection", name)
            raise OclTypeError(f"class {name!r} may only be used as {name}.allInstances()")
        raise OclTypeError(f"unknown identifier {name!r}")

    @staticmethod
    def _require_bool(found, op: str) -> None:
        if found != T_BOOL:
            raise OclTypeError(f"{op} needs Bool operands, got {found}")


def parse_ocl(text: str, dm: DataModel, keywords: dict[str, str] | None = None) -> OclExpr:
    """Parse and type constraint text; `keywords` maps keyword names to classes."""
    parser = _Parser(_tokenize(text), dm, keywords or {})
    expr, _ = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise OclSyntaxError(f"trailing input {trailing.text!r}", trailing.pos)
    return expr


def parse_bool_ocl(text: str, dm: DataModel, keywords: dict[str, str] | None = None) -> OclExpr:
    """Like parse_ocl but insists on a boolean result type."""
    parser = _Parser(_tokenize(text), dm, keywords or {})
    expr, expr_t = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise OclSyntaxError(f"trailing input {trailing.text!r}", trailing.pos)
    if expr_t != T_BOOL:
        raise OclTypeError(f"constraint must be boolean, got {expr_t}")
    return expr
