"""Data models (classes and binary associations), scenarios, and their SQL schema.

A data model maps deterministically onto a relational schema: one table per
class with an id column named ``<ClassName>_id``, one column per attribute,
and one two-column table per association whose columns carry the end names
and reference the end classes. A scenario (objects plus links) maps onto the
row population of that schema.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import InvalidModel, InvalidScenario

INT = "Int"
STRING = "String"

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def is_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name))


@dataclass(frozen=True)
class AttributeDef:
    name: str
    type: str  # Int | String


@dataclass(frozen=True)
class ClassDef:
    name: str
    attributes: tuple[AttributeDef, ...] = ()

    def id_column(self) -> str:
        return f"{self.name}_id"

    def attribute(self, name: str) -> AttributeDef | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None


@dataclass(frozen=True)
class AssociationEnd:
    name: str
    cls: str


@dataclass(frozen=True)
class AssociationDef:
    name: str
    end1: AssociationEnd
    end2: AssociationEnd

    def ends(self) -> tuple[AssociationEnd, AssociationEnd]:
        return (self.end1, self.end2)

    def end_named(self, name: str) -> AssociationEnd | None:
        for end in self.ends():
            if end.name == name:
                return end
        return None

    def opposite(self, end_name: str) -> AssociationEnd:
        if end_name == self.end1.name:
            return self.end2
        if end_name == self.end2.name:
            return self.end1
        raise KeyError(end_name)


@dataclass(frozen=True)
class DataModel:
    name: str
    classes: tuple[ClassDef, ...] = ()
    associations: tuple[AssociationDef, ...] = ()

    def class_named(self, name: str) -> ClassDef | None:
        for cls in self.classes:
            if cls.name == name:
                return cls
        return None

    def association_named(self, name: str) -> AssociationDef | None:
        for assoc in self.associations:
            if assoc.name == name:
                return assoc
        return None

    def navigations_from(self, cls_name: str) -> list[tuple[AssociationDef, AssociationEnd]]:
        """Association ends reachable from an object of `cls_name`.

        Navigating `o.endName` is allowed when o belongs to the class at the
        opposite end; the result collects objects at `endName`.
        """
        out = []
        for assoc in self.associations:
            if assoc.end1.cls == cls_name:
                out.append((assoc, assoc.end2))
            if assoc.end2.cls == cls_name:
                out.append((assoc, assoc.end1))
        return out


@dataclass
class Scenario:
    """Concrete population of a data model.

    objects: class name -> {object id -> {attribute name -> value | None}}
    links:   association name -> ordered (end1 id, end2 id) pairs, no duplicates
    """

    objects: dict[str, dict[str, dict[str, object]]] = field(default_factory=dict)
    links: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def class_of(self, object_id: str) -> str | None:
        for cls_name, objs in self.objects.items():
            if object_id in objs:
                return cls_name
        return None

    def object_ids(self, cls_name: str) -> list[str]:
        return list(self.objects.get(cls_name, {}))

    def attribute_value(self, object_id: str, attr: str) -> object:
        cls_name = self.class_of(object_id)
        if cls_name is None:
            raise KeyError(object_id)
        return self.objects[cls_name][object_id].get(attr)

    def link_pairs(self, assoc_name: str) -> list[tuple[str, str]]:
        return list(self.links.get(assoc_name, []))


@dataclass(frozen=True)
class Violation:
    element: str
    message: str


def validate_data_model(dm: DataModel) -> list[Violation]:
    """Check all structural invariants; an empty report means the model is valid."""
    report: list[Violation] = []
    seen: set[str] = set()
    for cls in dm.classes:
        if not is_identifier(cls.name):
            report.append(Violation(cls.name, "class name is not an identifier"))
        if cls.name in seen:
            report.append(Violation(cls.name, "duplicate class name"))
        seen.add(cls.name)
        attr_names: set[str] = set()
        for attr in cls.attributes:
            if not is_identifier(attr.name):
                report.append(Violation(cls.name, f"attribute {attr.name!r} is not an identifier"))
            if attr.name in attr_names:
                report.append(Violation(cls.name, f"duplicate attribute {attr.name!r}"))
            attr_names.add(attr.name)
            if attr.type not in (INT, STRING):
                report.append(Violation(cls.name, f"attribute {attr.name!r} has unsupported type {attr.type!r}"))
            if attr.name == cls.id_column():
                report.append(Violation(cls.name, f"attribute {attr.name!r} shadows the reserved id column"))
    for assoc in dm.associations:
        if not is_identifier(assoc.name):
            report.append(Violation(assoc.name, "association name is not an identifier"))
        if assoc.name in seen:
            report.append(Violation(assoc.name, "association name collides with another declaration"))
        seen.add(assoc.name)
        for end in assoc.ends():
            if not is_identifier(end.name):
                report.append(Violation(assoc.name, f"end name {end.name!r} is not an identifier"))
            if dm.class_named(end.cls) is None:
                report.append(Violation(assoc.name, f"end {end.name!r} references undeclared class {end.cls!r}"))
        if assoc.end1.name == assoc.end2.name:
            report.append(Violation(assoc.name, "the two end names must be distinct"))
    return report


def validate_scenario(dm: DataModel, sc: Scenario) -> list[Violation]:
    report: list[Violation] = []
    owner: dict[str, str] = {}
    for cls_name, objs in sc.objects.items():
        cls = dm.class_named(cls_name)
        if cls is None:
            report.append(Violation(cls_name, "objects listed for undeclared class"))
            continue
        for oid, record in objs.items():
            if oid in owner:
                report.append(Violation(oid, f"object id also used in class {owner[oid]!r}"))
            owner[oid] = cls_name
            for attr_name, value in record.items():
                attr = cls.attribute(attr_name)
                if attr is None:
                    report.append(Violation(oid, f"value for undeclared attribute {attr_name!r}"))
                elif value is not None:
                    expected = int if attr.type == INT else str
                    if not isinstance(value, expected) or isinstance(value, bool):
                        report.append(Violation(oid, f"attribute {attr_name!r} expects {attr.type}"))
    for assoc_name, pairs in sc.links.items():
        assoc = dm.association_named(assoc_name)
        if assoc is None:
            report.append(Violation(assoc_name, "links listed for undeclared association"))
            continue
        seen_pairs: set[tuple[str, str]] = set()
        for pair in pairs:
            if pair in seen_pairs:
                report.append(Violation(assoc_name, f"duplicate link {pair!r}"))
            seen_pairs.add(pair)
            for oid, end in zip(pair, assoc.ends()):
                cls_name = sc.class_of(oid)
                if cls_name is None:
                    report.append(Violation(assoc_name, f"link endpoint {oid!r} does not exist"))
                elif cls_name != end.cls:
                    report.append(Violation(assoc_name, f"link endpoint {oid!r} is not a {end.cls}"))
    return report


def _sql_type(attr_type: str) -> str:
    return "int" if attr_type == INT else "varchar(250)"


def sql_schema(dm: DataModel) -> str:
    """Emit CREATE TABLE statements for the model, one per class and association."""
    report = validate_data_model(dm)
    if report:
        raise InvalidModel("; ".join(f"{v.element}: {v.message}" for v in report))
    statements: list[str] = []
    for cls in dm.classes:
        columns = [f"  {cls.id_column()} varchar(250) NOT NULL"]
        columns += [f"  {attr.name} {_sql_type(attr.type)}" for attr in cls.attributes]
        columns.append(f"  PRIMARY KEY ({cls.id_column()})")
        statements.append(f"CREATE TABLE {cls.name} (\n" + ",\n".join(columns) + "\n);")
    for assoc in dm.associations:
        columns = [f"  {end.name} varchar(250) NOT NULL" for end in assoc.ends()]
        columns += [
            f"  FOREIGN KEY ({end.name}) REFERENCES {end.cls}({end.cls}_id)"
            for end in assoc.ends()
        ]
        statements.append(f"CREATE TABLE {assoc.name} (\n" + ",\n".join(columns) + "\n);")
    return "\n".join(statements) + ("\n" if statements else "")


def _sql_literal(value: object) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    escaped = str(value).replace("'", "''")
    return f"'{escaped}'"


def scenario_to_inserts(dm: DataModel, sc: Scenario) -> str:
    """Emit INSERT statements populating sql_schema(dm) from the scenario.

    Deterministic order: classes in declaration order with ids sorted
    lexicographically, then associations with pairs sorted the same way.
    """
    report = validate_scenario(dm, sc)
    if report:
        raise InvalidScenario("; ".join(f"{v.element}: {v.message}" for v in report))
    statements: list[str] = []
    for cls in dm.classes:
        objs = sc.objects.get(cls.name, {})
        columns = [cls.id_column()] + [attr.name for attr in cls.attributes]
        for oid in sorted(objs):
            record = objs[oid]
            values = [_sql_literal(oid)] + [_sql_literal(record.get(a.name)) for a in cls.attributes]
            statements.append(
                f"INSERT INTO {cls.name} ({', '.join(columns)}) VALUES ({', '.join(values)});"
            )
    for assoc in dm.associations:
        columns = [assoc.end1.name, assoc.end2.name]
        for pair in sorted(sc.links.get(assoc.name, [])):
            values = [_sql_literal(pair[0]), _sql_literal(pair[1])]
            statements.append(
                f"INSERT INTO {assoc.name} ({', '.join(columns)}) VALUES ({', '.join(values)});"
            )
    return "\n".join(statements) + ("\n" if statements else "")


# --- JSON interchange -------------------------------------------------------

def data_model_from_dict(raw: dict) -> DataModel:
    classes = tuple(
        ClassDef(
            name=c["name"],
            attributes=tuple(AttributeDef(a["name"], a["type"]) for a in c.get("attributes", [])),
        )
        for c in raw.get("classes", [])
    )
    associations = tuple(
        AssociationDef(
            name=a["name"],
            end1=AssociationEnd(a["end1"]["name"], a["end1"]["class"]),
            end2=AssociationEnd(a["end2"]["name"], a["end2"]["class"]),
        )
        for a in raw.get("associations", [])
    )
    return DataModel(name=raw["name"], classes=classes, associations=associations)


def load_data_model(path: str) -> DataModel:
    with open(path, encoding="utf-8") as fh:
        return data_model_from_dict(json.load(fh))


def scenario_from_dict(raw: dict) -> Scenario:
    objects = {
        cls: {oid: dict(record) for oid, record in objs.items()}
        for cls, objs in raw.get("objects", {}).items()
    }
    links = {
        assoc: [(pair[0], pair[1]) for pair in pairs]
        for assoc, pairs in raw.get("links", {}).items()
    }
    return Scenario(objects=objects, links=links)


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "objects": {cls: {oid: dict(rec) for oid, rec in objs.items()} for cls, objs in sc.objects.items()},
        "links": {assoc: [list(p) for p in pairs] for assoc, pairs in sc.links.items()},
    }
