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
    keywords_of,
    normalized_key,
    render_ocl,
)
from .evaluator import eval_ocl, substitute
from .parser import parse_bool_ocl, parse_ocl

__all__ = [
    "NULL",
    "INVALID",
    "AllInstances",
    "AttrNav",
    "Binding",
    "BoolLit",
    "BoolOp",
    "Compare",
    "EndNav",
    "Exists",
    "ForAll",
    "Includes",
    "IntLit",
    "IsEmpty",
    "Keyword",
    "Not",
    "ObjectLit",
    "ObjectRef",
    "OclExpr",
    "Select",
    "StrLit",
    "Var",
    "keywords_of",
    "normalized_key",
    "render_ocl",
    "eval_ocl",
    "substitute",
    "parse_ocl",
    "parse_bool_ocl",
]
