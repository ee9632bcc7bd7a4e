"""Policy-enforcing SQL stored-procedure generation with SMT-backed check removal."""

from .model import (
    AssociationDef,
    AssociationEnd,
    AttributeDef,
    ClassDef,
    DataModel,
    Scenario,
    load_data_model,
    load_scenario,
    scenario_to_inserts,
    sql_schema,
    validate_data_model,
    validate_scenario,
)
from .policy import (
    AssociationRes,
    AttributeRes,
    SecurityModel,
    auth_decision,
    load_security_model,
    lookup_auth,
)

__all__ = [
    "AssociationDef",
    "AssociationEnd",
    "AttributeDef",
    "ClassDef",
    "DataModel",
    "Scenario",
    "load_data_model",
    "load_scenario",
    "scenario_to_inserts",
    "sql_schema",
    "validate_data_model",
    "validate_scenario",
    "AssociationRes",
    "AttributeRes",
    "SecurityModel",
    "auth_decision",
    "load_security_model",
    "lookup_auth",
]

__version__ = "0.1.0"
