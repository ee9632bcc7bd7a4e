"""Security models: roles plus a (role, resource) -> constraint permission table.

Resources are attribute reads and association reads. Decisions are
fail-closed: only a constraint that evaluates to literal true grants
access; false, null, invalid, and a missing rule all deny.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import OclTypeError, UnknownRole
from .model import DataModel, Scenario
from .ocl import Binding, BoolLit, ObjectRef, OclExpr, eval_ocl, parse_bool_ocl


@dataclass(frozen=True)
class AttributeRes:
    cls: str
    attribute: str

    def token(self) -> str:
        return f"{self.cls}_{self.attribute}"

    def label(self) -> str:
        return f"{self.cls}:{self.attribute}"


@dataclass(frozen=True)
class AssociationRes:
    association: str

    def token(self) -> str:
        return self.association

    def label(self) -> str:
        return self.association


Resource = AttributeRes | AssociationRes

DENY = BoolLit(False)


def resource_keywords(dm: DataModel, user_class: str, res: Resource) -> dict[str, str]:
    """Keyword typing for a resource's constraints: caller plus self or the ends."""
    keywords = {"caller": user_class}
    if isinstance(res, AttributeRes):
        keywords["self"] = res.cls
    else:
        assoc = dm.association_named(res.association)
        if assoc is None:
            raise OclTypeError(f"unknown association {res.association!r}")
        keywords[assoc.end1.name] = assoc.end1.cls
        keywords[assoc.end2.name] = assoc.end2.cls
    return keywords


@dataclass
class SecurityModel:
    name: str
    data_model: DataModel
    user_class: str
    roles: tuple[str, ...]
    rules: dict[tuple[str, Resource], OclExpr] = field(default_factory=dict)

    def resources(self) -> list[Resource]:
        """Resources mentioned by at least one rule, in insertion order."""
        seen: list[Resource] = []
        for _, res in self.rules:
            if res not in seen:
                seen.append(res)
        return seen


def validate_policy(s: SecurityModel) -> list[str]:
    problems: list[str] = []
    if s.data_model.class_named(s.user_class) is None:
        problems.append(f"user class {s.user_class!r} is not declared")
    for (role, res), _ in s.rules.items():
        if role not in s.roles:
            problems.append(f"rule for undeclared role {role!r}")
        if isinstance(res, AttributeRes):
            cls = s.data_model.class_named(res.cls)
            if cls is None or cls.attribute(res.attribute) is None:
                problems.append(f"rule for unknown attribute {res.label()}")
        else:
            if s.data_model.association_named(res.association) is None:
                problems.append(f"rule for unknown association {res.association}")
    return problems


def lookup_auth(s: SecurityModel, role: str, res: Resource) -> OclExpr:
    """The rule's constraint, or constant false when no rule exists."""
    if role not in s.roles:
        raise UnknownRole(role)
    return s.rules.get((role, res), DENY)


def auth_decision(
    s: SecurityModel,
    sc: Scenario,
    caller: ObjectRef,
    role: str,
    res: Resource,
    targets: Binding,
) -> bool:
    """True iff the applicable constraint evaluates to literal true."""
    constraint = lookup_auth(s, role, res)
    binding = {"caller": caller}
    binding.update(targets)
    return eval_ocl(sc, constraint, binding) is True


# --- JSON interchange -------------------------------------------------------

def _resource_from_dict(raw: dict) -> Resource:
    if raw["kind"] == "attribute":
        return AttributeRes(raw["class"], raw["attribute"])
    if raw["kind"] == "association":
        return AssociationRes(raw["association"])
    raise ValueError(f"unknown resource kind {raw['kind']!r}")


def security_model_from_dict(raw: dict, dm: DataModel) -> SecurityModel:
    model = SecurityModel(
        name=raw["name"],
        data_model=dm,
        user_class=raw["userClass"],
        roles=tuple(raw["roles"]),
    )
    for rule in raw.get("rules", []):
        res = _resource_from_dict(rule["resource"])
        keywords = resource_keywords(dm, model.user_class, res)
        constraint = parse_bool_ocl(rule["constraint"], dm, keywords)
        key = (rule["role"], res)
        if key in model.rules:
            raise ValueError(f"duplicate rule for {key}")
        model.rules[key] = constraint
    problems = validate_policy(model)
    if problems:
        raise ValueError("; ".join(problems))
    return model


def load_security_model(path: str, dm: DataModel) -> SecurityModel:
    with open(path, encoding="utf-8") as fh:
        return security_model_from_dict(json.load(fh), dm)
