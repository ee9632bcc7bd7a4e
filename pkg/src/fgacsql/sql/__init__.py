from .analysis import AssocAccess, AttrAccess, ResourceAccess, output_columns, resource_accesses
from .ast import (
    AggCall,
    And,
    BoolLit,
    CheckedExpr,
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
    render_expr,
    render_sql,
)
from .parser import parse_select, parse_sql_condition

__all__ = [
    "AssocAccess",
    "AttrAccess",
    "ResourceAccess",
    "output_columns",
    "resource_accesses",
    "AggCall",
    "And",
    "BoolLit",
    "CheckedExpr",
    "ColumnRef",
    "Comparison",
    "Exists",
    "FromItem",
    "IntLit",
    "Join",
    "Not",
    "NullLit",
    "Or",
    "Param",
    "ScalarSubquery",
    "SelectItem",
    "SelectQuery",
    "SqlExpr",
    "Star",
    "StrLit",
    "SubqueryRef",
    "TableRef",
    "render_expr",
    "render_sql",
    "parse_select",
    "parse_sql_condition",
]
