"""Tokenizer and parser for the select-statement subset."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SqlSyntaxError, UnsupportedFeature
from .ast import (
    AggCall,
    And,
    BoolLit,
    ColumnRef,
    Comparison,
    Exists,
    FromItem,
    IntLit,
    Join,
    Not,
    NullLit,
    Or,
    Param,
    ScalarSubquery,
    SelectItem,
    SelectQuery,
    SqlExpr,
    Star,
    StrLit,
    SubqueryRef,
    TableRef,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<cmp><=|>=|<>|!=|=|<|>)|(?P<punct>[(),.*;])"
    r"|(?P<int>\d+)|(?P<str>'(?:[^']|'')*')|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)

_KEYWORDS = {
    "SELECT", "DISTINCT", "FROM", "JOIN", "ON", "WHERE", "AND", "OR", "NOT",
    "EXISTS", "AS", "COUNT", "MAX", "TRUE", "FALSE", "NULL",
}

# recognized so we can reject them by name rather than as generic syntax errors
_UNSUPPORTED = {
    "GROUP", "ORDER", "LIMIT", "HAVING", "UNION", "LEFT", "RIGHT", "OUTER",
    "INNER", "CROSS", "CASE", "INSERT", "UPDATE", "DELETE", "SET", "VALUES",
    "BY", "LIKE", "IN", "BETWEEN", "MIN", "SUM", "AVG", "IS",
}


@dataclass(frozen=True)
class _Token:
    kind: str  # cmp | punct | int | str | name | keyword | eof
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
            raise SqlSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        pos = match.end()
        for kind in ("cmp", "punct", "int", "str", "name"):
            value = match.group(kind)
            if value is None:
                continue
            if kind == "name":
                upper = value.upper()
                if upper in _KEYWORDS or upper in _UNSUPPORTED:
                    tokens.append(_Token("keyword", upper, match.start()))
                else:
                    tokens.append(_Token("name", value, match.start()))
            elif kind == "cmp" and value == "!=":
                tokens.append(_Token("cmp", "<>", match.start()))
            else:
                tokens.append(_Token(kind, value, match.start()))
            break
    tokens.append(_Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], params: frozenset[str]):
        self.tokens = tokens
        self.i = 0
        self.params = params

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_keyword(self, *names: str) -> bool:
        tok = self.peek()
        return tok.kind == "keyword" and tok.text in names

    def expect_keyword(self, name: str) -> _Token:
        tok = self.peek()
        if tok.kind != "keyword" or tok.text != name:
            self._reject(tok, name)
        return self.advance()

    def expect_punct(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != text:
            self._reject(tok, text)
        return self.advance()

    def expect_name(self) -> _Token:
        tok = self.peek()
        if tok.kind != "name":
            self._reject(tok, "identifier")
        return self.advance()

    @staticmethod
    def _reject(tok: _Token, expected: str):
        if tok.kind == "keyword" and tok.text in _UNSUPPORTED:
            raise UnsupportedFeature(tok.text)
        raise SqlSyntaxError(f"expected {expected!r}, found {tok.text!r}", tok.pos)

    # ---- statements ----------------------------------------------------

    def parse_select(self) -> SelectQuery:
        self.expect_keyword("SELECT")
        distinct = False
        if self.at_keyword("DISTINCT"):
            self.advance()
            distinct = True
        items = self._select_items()
        self.expect_keyword("FROM")
        from_items = [self._from_item()]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.advance()
            from_items.append(self._from_item())
        joins = []
        while self.at_keyword("JOIN"):
            self.advance()
            item = self._from_item()
            self.expect_keyword("ON")
            joins.append(Join(item, self.parse_bool_expr()))
        where = None
        if self.at_keyword("WHERE"):
            self.advance()
            where = self.parse_bool_expr()
        return SelectQuery(
            items=tuple(items),
            from_items=tuple(from_items),
            joins=tuple(joins),
            where=where,
            distinct=distinct,
        )

    def _select_items(self) -> list[SelectItem]:
        items = [self._select_item()]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.advance()
            items.append(self._select_item())
        return items

    def _select_item(self) -> SelectItem:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "*":
            self.advance()
            return SelectItem(Star())
        if self.at_keyword("COUNT", "MAX"):
            expr = self._aggregate()
        elif tok.kind == "int":
            self.advance()
            expr = IntLit(int(tok.text))
        elif tok.kind == "str":
            self.advance()
            expr = StrLit(tok.text[1:-1].replace("''", "'"))
        else:
            expr = self._column_or_param()
        alias = None
        if self.at_keyword("AS"):
            self.advance()
            alias = self.expect_name().text
        elif self.peek().kind == "name":
            alias = self.advance().text
        return SelectItem(expr, alias)

    def _aggregate(self) -> AggCall:
        func = self.advance().text
        self.expect_punct("(")
        if func == "COUNT":
            self.expect_punct("*")
            self.expect_punct(")")
            return AggCall("COUNT", None)
        col = self._column_or_param()
        if not isinstance(col, ColumnRef):
            raise SqlSyntaxError("MAX takes a column", self.peek().pos)
        self.expect_punct(")")
        return AggCall("MAX", col)

    def _from_item(self) -> FromItem:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            query = self.parse_select()
            self.expect_punct(")")
            self.expect_keyword("AS")
            alias = self.expect_name().text
            return SubqueryRef(query, alias)
        name = self.expect_name().text
        alias = None
        if self.at_keyword("AS"):
            self.advance()
            alias = self.expect_name().text
        elif self.peek().kind == "name":
            alias = self.advance().text
        return TableRef(name, alias)

    # ---- expressions ---------------------------------------------------

    def parse_bool_expr(self) -> SqlExpr:
        left = self._and_expr()
        while self.at_keyword("OR"):
            self.advance()
            left = Or(left, self._and_expr())
        return left

    def _and_expr(self) -> SqlExpr:
        left = self._not_expr()
        while self.at_keyword("AND"):
            self.advance()
            left = And(left, self._not_expr())
        return left

    def _not_expr(self) -> SqlExpr:
        if self.at_keyword("NOT"):
            self.advance()
            return Not(self._not_expr())
        return self._bool_primary()

    def _bool_primary(self) -> SqlExpr:
        tok = self.peek()
        if self.at_keyword("EXISTS"):
            self.advance()
            self.expect_punct("(")
            query = self.parse_select()
            self.expect_punct(")")
            return Exists(query)
        if tok.kind == "punct" and tok.text == "(":
            if self.peek(1).kind == "keyword" and self.peek(1).text == "SELECT":
                operand = self._operand()
                return self._comparison_tail(operand)
            self.advance()
            inner = self.parse_bool_expr()
            self.expect_punct(")")
            return inner
        if self.at_keyword("TRUE", "FALSE"):
            value = self.advance().text == "TRUE"
            lit = BoolLit(value)
            if self.peek().kind == "cmp":
                return self._comparison_tail(lit)
            return lit
        operand = self._operand()
        return self._comparison_tail(operand)

    def _comparison_tail(self, lhs: SqlExpr) -> Comparison:
        tok = self.peek()
        if tok.kind != "cmp":
            self._reject(tok, "comparison operator")
        op = self.advance().text
        return Comparison(op, lhs, self._operand())

    def _operand(self) -> SqlExpr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if tok.kind == "str":
            self.advance()
            return StrLit(tok.text[1:-1].replace("''", "'"))
        if self.at_keyword("NULL"):
            self.advance()
            return NullLit()
        if self.at_keyword("TRUE", "FALSE"):
            return BoolLit(self.advance().text == "TRUE")
        if self.at_keyword("COUNT", "MAX"):
            return self._aggregate()
        if tok.kind == "punct" and tok.text == "(":
            self.advance()
            query = self.parse_select()
            self.expect_punct(")")
            return ScalarSubquery(query)
        return self._column_or_param()

    def _column_or_param(self) -> SqlExpr:
        name = self.expect_name().text
        if self.peek().kind == "punct" and self.peek().text == ".":
            self.advance()
            col = self.expect_name().text
            return ColumnRef(name, col)
        if name in self.params:
            return Param(name)
        return ColumnRef(None, name)


def parse_select(text: str, params: frozenset[str] = frozenset({"caller"})) -> SelectQuery:
    """Parse a select statement; identifiers in `params` become Param nodes."""
    parser = _Parser(_tokenize(text), params)
    query = parser.parse_select()
    trailing = parser.peek()
    if trailing.kind == "punct" and trailing.text == ";":
        parser.advance()
        trailing = parser.peek()
    if trailing.kind != "eof":
        if trailing.kind == "keyword" and trailing.text in _UNSUPPORTED:
            raise UnsupportedFeature(trailing.text)
        raise SqlSyntaxError(f"trailing input {trailing.text!r}", trailing.pos)
    return query


def parse_sql_condition(text: str, params: frozenset[str]) -> SqlExpr:
    """Parse a boolean SQL expression (registry bodies, runtime guards)."""
    parser = _Parser(_tokenize(text), params)
    expr = parser.parse_bool_expr()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise SqlSyntaxError(f"trailing input {trailing.text!r}", trailing.pos)
    return expr
