"""Recursive-descent parser for the supported SPARQL subset.

Grammar (EBNF, case-insensitive keywords):

    query       = prologue select
    prologue    = { "PREFIX" PNAME_NS IRIREF }
    select      = "SELECT" ["DISTINCT"] selectors "WHERE" group modifiers
    selectors   = "*" | { VAR | "(" expr "AS" VAR ")" }-
    group       = "{" { pattern | optional | values | bind | subselect } "}"
    pattern     = term verb term ["."]
    optional    = "OPTIONAL" group
    values      = "VALUES" VAR "{" { iri-or-literal } "}"
    bind        = "BIND" "(" expr "AS" VAR ")" ["."]
    subselect   = "{" select "}" ["."]
    modifiers   = ["GROUP" "BY" { VAR }-] ["ORDER" "BY" { orderkey }-] ["LIMIT" INT]
    orderkey    = VAR | ("ASC" | "DESC") "(" expr ")"
    expr        = mult { ("+" | "-") mult }
    mult        = primary { ("*" | "/") primary }
    primary     = "COUNT" "(" ( "*" | ["DISTINCT"] VAR ) ")" | VAR | NUMBER
                | STRING | "(" expr ")"

Anything recognizably SPARQL but outside this grammar raises
UnsupportedFeature with its source location.
"""

from __future__ import annotations

import re

from ..model import DEFAULT_NAMESPACES, ENTITY, LITERAL, Namespaces, TermValue, decode_entity_iri
from .ast import (
    Aggregate,
    Arithmetic,
    Bind,
    Expr,
    NumberLit,
    OptionalGroup,
    Pattern,
    QueryPlan,
    QuerySyntaxError,
    SelectItem,
    StringLit,
    SubSelect,
    UnsupportedFeature,
    Values,
    Var,
    VarExpr,
    defined_vars,
    expr_vars,
    has_aggregate,
)

KEYWORDS = {
    "PREFIX", "SELECT", "DISTINCT", "WHERE", "OPTIONAL", "VALUES", "BIND",
    "AS", "GROUP", "BY", "ORDER", "ASC", "DESC", "LIMIT", "COUNT",
}

UNSUPPORTED_KEYWORDS = {
    "FILTER", "UNION", "MINUS", "GRAPH", "SERVICE", "CONSTRUCT", "ASK",
    "DESCRIBE", "INSERT", "DELETE", "HAVING", "OFFSET", "REDUCED", "FROM",
    "EXISTS", "NOT", "SUM", "AVG", "MIN", "MAX", "SAMPLE", "GROUP_CONCAT",
    "REGEX", "UNDEF", "A", "BASE", "UNBOUND", "COALESCE", "IF", "STR",
}

_TOKEN = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
    | (?P<pname>(?:[A-Za-z][A-Za-z0-9_]*)?:(?:[A-Za-z0-9_~%\-](?:[A-Za-z0-9_~%.\-]*[A-Za-z0-9_~%\-])?)?)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<string>"(?:[^"\\\n\r]|\\.)*"|'(?:[^'\\\n\r]|\\.)*')
    | (?P<number>\d+(?:\.\d+)?)
    | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<punct>[{}().;,*/+\-<>=!|&^\[\]@?])
    """,
    re.VERBOSE,
)

_STRING_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, str, int, int]] = []
        pos = 0
        line, line_start = 1, 0
        for match in _TOKEN.finditer(text):
            if match.start() != pos:
                line = text.count("\n", 0, pos) + 1
                col = pos - (text.rfind("\n", 0, pos) + 1) + 1
                raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
            pos = match.end()
            kind = match.lastgroup
            value = match.group()
            if kind in ("ws", "comment"):
                if "\n" in value:
                    line += value.count("\n")
                    line_start = match.start() + value.rfind("\n") + 1
                continue
            self.items.append((kind, value, line, match.start() - line_start + 1))
        if pos != len(text):
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", line, col)
        last_line = text.count("\n") + 1
        self.items.append(("eof", "", last_line, len(text) - (text.rfind("\n") + 1) + 1))
        self.i = 0

    def peek(self, ahead: int = 0) -> tuple[str, str, int, int]:
        return self.items[min(self.i + ahead, len(self.items) - 1)]

    def next(self) -> tuple[str, str, int, int]:
        item = self.items[self.i]
        if item[0] != "eof":
            self.i += 1
        return item


class _Parser:
    def __init__(self, text: str, namespaces: Namespaces):
        self.tokens = _Tokens(text)
        self.namespaces = namespaces
        self.prefixes: dict[str, str] = {}

    # ---- helpers ---------------------------------------------------------

    def error(self, message: str, item=None) -> QuerySyntaxError:
        kind, value, line, col = item or self.tokens.peek()
        shown = value or "end of input"
        return QuerySyntaxError(f"{message} (found {shown!r})", line, col)

    def expect_punct(self, char: str):
        item = self.tokens.next()
        if item[0] != "punct" or item[1] != char:
            raise self.error(f"expected {char!r}", item)
        return item

    def keyword(self, item) -> str | None:
        if item[0] != "word":
            return None
        word = item[1].upper()
        if word in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(item[1], item[2], item[3])
        return word if word in KEYWORDS else None

    def expect_keyword(self, word: str):
        item = self.tokens.next()
        if self.keyword(item) != word:
            raise self.error(f"expected {word}", item)
        return item

    def at_keyword(self, word: str, ahead: int = 0) -> bool:
        item = self.tokens.peek(ahead)
        return item[0] == "word" and item[1].upper() == word

    def expect_var(self) -> Var:
        item = self.tokens.next()
        if item[0] != "var":
            raise self.error("expected a variable", item)
        return Var(item[1][1:])

    def resolve_iri(self, item) -> str:
        kind, value, line, col = item
        if kind == "iriref":
            return value[1:-1]
        prefix, local = value.split(":", 1)
        if prefix not in self.prefixes:
            raise QuerySyntaxError(f"undeclared prefix {prefix!r}", line, col)
        return self.prefixes[prefix] + local

    def entity_term(self, item) -> TermValue:
        iri = self.resolve_iri(item)
        if not iri.startswith(self.namespaces.entity_prefix):
            raise UnsupportedFeature("IRI outside the entity namespace", item[2], item[3])
        try:
            return TermValue(ENTITY, decode_entity_iri(iri[len(self.namespaces.entity_prefix):]))
        except (ValueError, UnicodeDecodeError):
            raise QuerySyntaxError(f"undecodable entity IRI {iri!r}", item[2], item[3]) from None

    def predicate_label(self, item) -> str:
        iri = self.resolve_iri(item)
        if not iri.startswith(self.namespaces.property_prefix):
            raise UnsupportedFeature("predicate IRI outside the property namespace", item[2], item[3])
        try:
            return decode_entity_iri(iri[len(self.namespaces.property_prefix):])
        except (ValueError, UnicodeDecodeError):
            raise QuerySyntaxError(f"undecodable property IRI {iri!r}", item[2], item[3]) from None

    @staticmethod
    def unescape(raw: str) -> str:
        out = []
        i = 0
        while i < len(raw):
            if raw[i] == "\\" and i + 1 < len(raw):
                out.append(_STRING_UNESCAPES.get(raw[i + 1], raw[i + 1]))
                i += 2
            else:
                out.append(raw[i])
                i += 1
        return "".join(out)

    # ---- grammar ---------------------------------------------------------

    def parse(self) -> QueryPlan:
        while self.at_keyword("PREFIX"):
            self.tokens.next()
            item = self.tokens.next()
            if item[0] != "pname" or not item[1].endswith(":"):
                raise self.error("expected a prefix name ending in ':'", item)
            iri = self.tokens.next()
            if iri[0] != "iriref":
                raise self.error("expected an IRI", iri)
            self.prefixes[item[1][:-1]] = iri[1][1:-1]
        plan = self.parse_select()
        tail = self.tokens.peek()
        if tail[0] != "eof":
            self.keyword(tail)  # surfaces UnsupportedFeature for trailing clauses
            raise self.error("unexpected input after query", tail)
        return plan

    def parse_select(self) -> QueryPlan:
        self.expect_keyword("SELECT")
        distinct = False
        if self.at_keyword("DISTINCT"):
            self.tokens.next()
            distinct = True
        select = self.parse_selectors()
        self.expect_keyword("WHERE")
        where = self.parse_group()
        group_by: list[Var] = []
        order_by: list[tuple[Expr, bool]] = []
        limit: int | None = None
        if self.at_keyword("GROUP"):
            self.tokens.next()
            self.expect_keyword("BY")
            group_by.append(self.expect_var())
            while self.tokens.peek()[0] == "var":
                group_by.append(self.expect_var())
        if self.at_keyword("ORDER"):
            self.tokens.next()
            self.expect_keyword("BY")
            order_by.append(self.parse_order_key())
            while self.tokens.peek()[0] == "var" or self.at_keyword("ASC") or self.at_keyword("DESC"):
                order_by.append(self.parse_order_key())
        if self.at_keyword("LIMIT"):
            self.tokens.next()
            item = self.tokens.next()
            if item[0] != "number" or "." in item[1]:
                raise self.error("expected an integer limit", item)
            limit = int(item[1])
        plan = QueryPlan(
            prefixes=dict(self.prefixes),
            select=select,
            distinct=distinct,
            where=where,
            group_by=group_by,
            order_by=order_by,
            limit=limit,
        )
        self.validate(plan)
        return plan

    def parse_selectors(self) -> list[SelectItem]:
        items: list[SelectItem] = []
        star = self.tokens.peek()
        if star[0] == "punct" and star[1] == "*":
            self.tokens.next()
            return []  # resolved against the pattern during validation
        while True:
            item = self.tokens.peek()
            if item[0] == "var":
                var = self.expect_var()
                items.append(SelectItem(VarExpr(var), var.name))
            elif item[0] == "punct" and item[1] == "(":
                self.tokens.next()
                expr = self.parse_expr()
                self.expect_keyword("AS")
                alias = self.expect_var()
                self.expect_punct(")")
                items.append(SelectItem(expr, alias.name))
            else:
                break
        if not items:
            raise self.error("expected projection variables or expressions")
        return items

    def parse_group(self) -> list:
        self.expect_punct("{")
        items: list = []
        while True:
            item = self.tokens.peek()
            if item[0] == "punct" and item[1] == "}":
                self.tokens.next()
                return items
            if item[0] == "eof":
                raise self.error("unterminated group, expected '}'")
            if self.at_keyword("OPTIONAL"):
                self.tokens.next()
                items.append(OptionalGroup(tuple(self.parse_group())))
                self.skip_dot()
            elif self.at_keyword("VALUES"):
                items.append(self.parse_values())
                self.skip_dot()
            elif self.at_keyword("BIND"):
                items.append(self.parse_bind())
                self.skip_dot()
            elif item[0] == "punct" and item[1] == "{":
                if not self.at_keyword("SELECT", ahead=1):
                    raise UnsupportedFeature("group graph pattern", item[2], item[3])
                self.tokens.next()
                plan = self.parse_select()
                self.expect_punct("}")
                items.append(SubSelect(plan))
                self.skip_dot()
            else:
                items.append(self.parse_pattern())
        return items

    def skip_dot(self) -> None:
        item = self.tokens.peek()
        if item[0] == "punct" and item[1] == ".":
            self.tokens.next()

    def parse_pattern(self) -> Pattern:
        subject = self.parse_term(position="subject")
        predicate: Var | str
        item = self.tokens.peek()
        if item[0] == "var":
            predicate = self.expect_var()
        elif item[0] in ("pname", "iriref"):
            self.tokens.next()
            predicate = self.predicate_label(item)
        else:
            self.keyword(item)
            raise self.error("expected a predicate", item)
        obj = self.parse_term(position="object")
        self.skip_dot()
        return Pattern(subject, predicate, obj)

    def parse_term(self, position: str):
        item = self.tokens.next()
        if item[0] == "var":
            return Var(item[1][1:])
        if item[0] in ("pname", "iriref"):
            return self.entity_term(item)
        if item[0] == "string":
            if position == "subject":
                raise self.error("literals cannot be subjects", item)
            return TermValue(LITERAL, self.unescape(item[1][1:-1]))
        if item[0] == "number" and position == "object":
            return TermValue(LITERAL, item[1])
        self.keyword(item)
        raise self.error(f"expected a {position} term", item)

    def parse_values(self) -> Values:
        self.expect_keyword("VALUES")
        opener = self.tokens.peek()
        if opener[0] == "punct" and opener[1] == "(":
            raise UnsupportedFeature("multi-variable VALUES", opener[2], opener[3])
        var = self.expect_var()
        self.expect_punct("{")
        terms: list[TermValue] = []
        while True:
            item = self.tokens.peek()
            if item[0] == "punct" and item[1] == "}":
                self.tokens.next()
                break
            if item[0] in ("pname", "iriref"):
                self.tokens.next()
                terms.append(self.entity_term(item))
            elif item[0] == "string":
                self.tokens.next()
                terms.append(TermValue(LITERAL, self.unescape(item[1][1:-1])))
            elif item[0] == "number":
                self.tokens.next()
                terms.append(TermValue(LITERAL, item[1]))
            else:
                self.keyword(item)
                raise self.error("expected a VALUES term or '}'", item)
        return Values(var, tuple(terms))

    def parse_bind(self) -> Bind:
        self.expect_keyword("BIND")
        self.expect_punct("(")
        expr = self.parse_expr()
        self.expect_keyword("AS")
        var = self.expect_var()
        self.expect_punct(")")
        return Bind(expr, var)

    def parse_order_key(self) -> tuple[Expr, bool]:
        if self.at_keyword("ASC") or self.at_keyword("DESC"):
            word = self.tokens.next()[1].upper()
            self.expect_punct("(")
            expr = self.parse_expr()
            self.expect_punct(")")
            return (expr, word == "DESC")
        return (VarExpr(self.expect_var()), False)

    def parse_expr(self) -> Expr:
        left = self.parse_mult()
        while True:
            item = self.tokens.peek()
            if item[0] == "punct" and item[1] in "+-":
                self.tokens.next()
                left = Arithmetic(item[1], left, self.parse_mult())
            else:
                return left

    def parse_mult(self) -> Expr:
        left = self.parse_primary()
        while True:
            item = self.tokens.peek()
            if item[0] == "punct" and item[1] in "*/":
                self.tokens.next()
                left = Arithmetic(item[1], left, self.parse_primary())
            else:
                return left

    def parse_primary(self) -> Expr:
        item = self.tokens.next()
        if item[0] == "var":
            return VarExpr(Var(item[1][1:]))
        if item[0] == "number":
            return NumberLit(float(item[1]) if "." in item[1] else int(item[1]))
        if item[0] == "string":
            return StringLit(self.unescape(item[1][1:-1]))
        if item[0] == "punct" and item[1] == "(":
            expr = self.parse_expr()
            self.expect_punct(")")
            return expr
        if self.keyword(item) == "COUNT":
            self.expect_punct("(")
            inner = self.tokens.peek()
            if inner[0] == "punct" and inner[1] == "*":
                self.tokens.next()
                agg = Aggregate(None)
            else:
                distinct = False
                if self.at_keyword("DISTINCT"):
                    self.tokens.next()
                    distinct = True
                agg = Aggregate(self.expect_var(), distinct)
            self.expect_punct(")")
            return agg
        raise self.error("expected an expression", item)

    # ---- validation -------------------------------------------------------

    def validate(self, plan: QueryPlan) -> None:
        available = defined_vars(plan.where)
        if not plan.select:  # SELECT *
            if not available:
                raise QuerySyntaxError("SELECT * with no variables in the pattern", 0, 0)
            plan.select = [SelectItem(VarExpr(Var(n)), n) for n in sorted(available)]
        aggregated = any(has_aggregate(item.expr) for item in plan.select)
        if plan.group_by and not aggregated:
            aggregated = True
        group_names = {v.name for v in plan.group_by}
        for v in plan.group_by:
            if v.name not in available:
                raise QuerySyntaxError(f"GROUP BY variable ?{v.name} is never bound", 0, 0)
        seen_aliases: set[str] = set()
        for item in plan.select:
            if item.alias in seen_aliases:
                raise QuerySyntaxError(f"duplicate projection alias ?{item.alias}", 0, 0)
            seen_aliases.add(item.alias)
            is_plain_var = isinstance(item.expr, VarExpr) and item.expr.var.name == item.alias
            if not is_plain_var and item.alias in available:
                raise QuerySyntaxError(
                    f"alias ?{item.alias} collides with a pattern variable", 0, 0
                )
            if aggregated:
                if has_aggregate(item.expr):
                    continue
                bad = expr_vars(item.expr) - group_names
                if bad:
                    raise QuerySyntaxError(
                        f"non-aggregate projection uses ungrouped variable ?{sorted(bad)[0]}", 0, 0
                    )
            else:
                missing = expr_vars(item.expr) - available
                if missing:
                    raise QuerySyntaxError(
                        f"projected variable ?{sorted(missing)[0]} is never bound", 0, 0
                    )
        output = seen_aliases | group_names
        for expr, _ in plan.order_by:
            names = expr_vars(expr)
            scope = output if aggregated else (available | seen_aliases)
            missing = names - scope
            if missing:
                raise QuerySyntaxError(
                    f"ORDER BY uses unknown variable ?{sorted(missing)[0]}", 0, 0
                )
            if has_aggregate(expr):
                raise QuerySyntaxError(
                    "aggregates in ORDER BY are not supported; project them with AS first", 0, 0
                )


def parse_query(text: str, namespaces: Namespaces = DEFAULT_NAMESPACES) -> QueryPlan:
    return _Parser(text, namespaces).parse()
