from .ast import (
    QueryError,
    QueryPlan,
    QuerySyntaxError,
    QueryTimeout,
    QueryTypeError,
    ResourceExhausted,
    UnsupportedFeature,
)
from .evaluate import EvalContext, ResultTable, evaluate, explain
from .parser import parse_query

__all__ = [
    "EvalContext",
    "QueryError",
    "QueryPlan",
    "QuerySyntaxError",
    "QueryTimeout",
    "QueryTypeError",
    "ResourceExhausted",
    "ResultTable",
    "UnsupportedFeature",
    "evaluate",
    "explain",
    "parse_query",
]
