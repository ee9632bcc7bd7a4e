"""Normalizers for golden-file comparisons and small scenario builders."""

from __future__ import annotations

import re

from fgacsql.model import Scenario

_SQL_KEYWORDS = {
    "SELECT", "DISTINCT", "FROM", "WHERE", "JOIN", "ON", "AND", "OR", "NOT",
    "EXISTS", "AS", "CASE", "WHEN", "THEN", "ELSE", "END", "IF", "COUNT",
    "MAX", "TRUE", "FALSE", "NULL", "CREATE", "TEMPORARY", "TABLE",
    "PROCEDURE", "BEGIN", "DECLARE", "EXIT", "HANDLER", "FOR", "SQLEXCEPTION",
    "SET", "GET", "STACKED", "DIAGNOSTICS", "CONDITION", "ROLLBACK", "START",
    "TRANSACTION", "DEFAULT", "IN", "INT",
}


def sql_tokens(text: str) -> list[str]:
    """Token sequence with keyword case and whitespace normalized."""
    padded = re.sub(r"([(),;])", r" \1 ", text)
    tokens = padded.split()
    return [t.upper() if t.upper() in _SQL_KEYWORDS else t for t in tokens]


def smt_forms(text: str) -> list[list[str]]:
    """Top-level s-expressions as token lists: comments stripped, the
    documented invalidClassifier spelling normalized, and the set-logic /
    check-sat wrapper commands dropped."""
    stripped = "\n".join(line.split(";", 1)[0] for line in text.splitlines())
    stripped = stripped.replace("invalidClassifier", "invalClassifier")
    tokens = stripped.replace("(", " ( ").replace(")", " ) ").split()
    forms: list[list[str]] = []
    depth = 0
    current: list[str] = []
    for token in tokens:
        current.append(token)
        if token == "(":
            depth += 1
        elif token == ")":
            depth -= 1
            if depth == 0:
                forms.append(current)
                current = []
    return [f for f in forms if len(f) < 2 or f[1] not in ("set-logic", "check-sat")]


def scenario(lecturers: dict, students: dict, links: list[tuple[str, str]]) -> Scenario:
    """Build a University scenario from {id: age} maps and link pairs.

    Emails/names are synthesized from the id; an age of None stays null.
    """
    return Scenario(
        objects={
            "Lecturer": {
                oid: {"age": age, "email": f"{oid}@uni", "name": oid}
                for oid, age in lecturers.items()
            },
            "Student": {
                oid: {"age": age, "name": oid, "email": f"{oid}@uni"}
                for oid, age in students.items()
            },
        },
        links={"Enrolment": sorted(links)},
    )
