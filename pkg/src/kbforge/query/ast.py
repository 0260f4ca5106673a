"""Query plan model for the supported SPARQL subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..model import TermValue


class QueryError(Exception):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {message}")
        self.reason = message
        self.line = line
        self.col = col


class UnsupportedFeature(QuerySyntaxError):
    def __init__(self, feature: str, line: int = 0, col: int = 0):
        super().__init__(f"unsupported SPARQL feature: {feature}", line, col)
        self.feature = feature


class QueryTimeout(QueryError):
    pass


class ResourceExhausted(QueryTimeout):
    pass


class QueryTypeError(QueryError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PropertyTerm:
    """A predicate IRI bound to a variable (distinct from entity terms)."""

    label: str


Term = Union[TermValue, PropertyTerm]
PatternTerm = Union[Var, TermValue]
PredicateTerm = Union[Var, str]


@dataclass(frozen=True)
class Pattern:
    subject: PatternTerm
    predicate: PredicateTerm
    object: PatternTerm


@dataclass(frozen=True)
class VarExpr:
    var: Var


@dataclass(frozen=True)
class NumberLit:
    value: int | float


@dataclass(frozen=True)
class StringLit:
    value: str


@dataclass(frozen=True)
class Arithmetic:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Aggregate:
    arg: Var | None  # None means COUNT(*)
    distinct: bool = False


Expr = Union[VarExpr, NumberLit, StringLit, Arithmetic, Aggregate]


@dataclass(frozen=True)
class OptionalGroup:
    items: tuple


@dataclass(frozen=True)
class Values:
    var: Var
    terms: tuple[TermValue, ...]


@dataclass(frozen=True)
class Bind:
    expr: Expr
    var: Var


@dataclass(frozen=True)
class SubSelect:
    plan: "QueryPlan"


WhereItem = Union[Pattern, OptionalGroup, Values, Bind, SubSelect]


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: str


@dataclass
class QueryPlan:
    prefixes: dict[str, str]
    select: list[SelectItem]
    distinct: bool
    where: list[WhereItem]
    group_by: list[Var] = field(default_factory=list)
    order_by: list[tuple[Expr, bool]] = field(default_factory=list)  # (key, descending)
    limit: int | None = None

    @property
    def columns(self) -> list[str]:
        return [item.alias for item in self.select]


def expr_vars(expr: Expr) -> set[str]:
    if isinstance(expr, VarExpr):
        return {expr.var.name}
    if isinstance(expr, Arithmetic):
        return expr_vars(expr.left) | expr_vars(expr.right)
    if isinstance(expr, Aggregate) and expr.arg is not None:
        return {expr.arg.name}
    return set()


def has_aggregate(expr: Expr) -> bool:
    if isinstance(expr, Aggregate):
        return True
    if isinstance(expr, Arithmetic):
        return has_aggregate(expr.left) or has_aggregate(expr.right)
    return False


def defined_vars(items) -> set[str]:
    """Variables an item sequence can bind."""
    out: set[str] = set()
    for item in items:
        if isinstance(item, Pattern):
            for term in (item.subject, item.predicate, item.object):
                if isinstance(term, Var):
                    out.add(term.name)
        elif isinstance(item, OptionalGroup):
            out |= defined_vars(item.items)
        elif isinstance(item, Values):
            out.add(item.var.name)
        elif isinstance(item, Bind):
            out.add(item.var.name)
        elif isinstance(item, SubSelect):
            out |= set(item.plan.columns)
    return out
