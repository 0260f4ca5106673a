"""Indexed evaluator for parsed query plans.

Basic graph patterns join under bag semantics via index lookups with the
current row's bindings substituted in; OPTIONAL is a correlated left
join; aggregation groups rows by the GROUP BY key (or one implicit group
when aggregates appear without GROUP BY, including over zero rows).
Results order deterministically: ORDER BY keys first, then a total
tie-break over the projected columns (term kind, then value).

A deadline and a row budget guard every evaluation; both are checked as
intermediate rows are produced, at least once per 10k rows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..model import ENTITY, LITERAL, Namespaces, DEFAULT_NAMESPACES, TermValue, encode_entity_iri
from ..store import TriplePattern, TripleStore
from .ast import (
    Aggregate,
    Arithmetic,
    Bind,
    Expr,
    NumberLit,
    OptionalGroup,
    Pattern,
    PropertyTerm,
    QueryPlan,
    QueryTimeout,
    QueryTypeError,
    ResourceExhausted,
    StringLit,
    SubSelect,
    Values,
    Var,
    VarExpr,
)

_CHECK_EVERY = 10_000
_ROW_BYTES_ESTIMATE = 200  # coarse bound used for the memory budget

Row = dict[str, object]


@dataclass
class EvalContext:
    deadline: float | None = None  # absolute time.monotonic() deadline
    memory_budget_bytes: int = 1 << 30
    produced: int = 0
    _next_check: int = field(default=_CHECK_EVERY, init=False)

    @classmethod
    def with_timeout(cls, seconds: float | None, memory_budget_bytes: int = 1 << 30) -> "EvalContext":
        deadline = time.monotonic() + seconds if seconds is not None else None
        return cls(deadline=deadline, memory_budget_bytes=memory_budget_bytes)

    def tick(self, n: int = 1) -> None:
        self.produced += n
        if self.produced < self._next_check:
            return
        self._next_check = self.produced + _CHECK_EVERY
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise QueryTimeout("query exceeded its deadline")
        if self.produced * _ROW_BYTES_ESTIMATE > self.memory_budget_bytes:
            raise ResourceExhausted("query exceeded its memory budget")


def _pattern_estimate(store: TripleStore, pattern: Pattern) -> int:
    """Result-size estimate from the index ranges, constants only."""
    subject = pattern.subject.text if isinstance(pattern.subject, TermValue) else None
    predicate = pattern.predicate if isinstance(pattern.predicate, str) else None
    obj = pattern.object if isinstance(pattern.object, TermValue) else None
    if isinstance(pattern.subject, TermValue) and pattern.subject.kind == LITERAL:
        return 0
    return store.count(TriplePattern(subject, predicate, obj))


def _reorder_bgps(items: list, store: TripleStore) -> list:
    """Order each run of consecutive patterns by ascending estimate."""
    out: list = []
    run: list[Pattern] = []

    def flush() -> None:
        if run:
            out.extend(sorted(run, key=lambda p: _pattern_estimate(store, p)))
            run.clear()

    for item in items:
        if isinstance(item, Pattern):
            run.append(item)
        else:
            flush()
            out.append(item)
    flush()
    return out


def _substitute(pattern: Pattern, row: Row) -> TriplePattern | None:
    """Concrete match template under the row's bindings; None = no match."""
    subject = predicate = obj = None
    for slot, term in (("s", pattern.subject), ("o", pattern.object)):
        value = term
        if isinstance(term, Var):
            value = row.get(term.name)
            if value is None:
                continue
        if isinstance(value, PropertyTerm) or isinstance(value, (int, float)):
            return None  # properties and numbers never occur in stored terms
        if slot == "s":
            if value.kind != ENTITY:
                return None
            subject = value.text
        else:
            obj = value
    if isinstance(pattern.predicate, str):
        predicate = pattern.predicate
    else:
        bound = row.get(pattern.predicate.name)
        if bound is not None:
            if not isinstance(bound, PropertyTerm):
                return None
            predicate = bound.label
    return TriplePattern(subject, predicate, obj)


def _extend(pattern: Pattern, row: Row, triple) -> Row | None:
    """Bind the pattern's variables against a matching triple."""
    new = dict(row)
    for term, value in (
        (pattern.subject, TermValue(ENTITY, triple.subject.label)),
        (pattern.predicate, PropertyTerm(triple.predicate)),
        (pattern.object, triple.object),
    ):
        if isinstance(term, Var):
            existing = new.get(term.name)
            if existing is None:
                new[term.name] = value
            elif existing != value:
                return None
    return new


def _eval_items(items: list, store: TripleStore, rows: list[Row], ctx: EvalContext) -> list[Row]:
    for item in items:
        if isinstance(item, Pattern):
            next_rows: list[Row] = []
            for row in rows:
                concrete = _substitute(item, row)
                if concrete is None:
                    continue
                for triple in store.match(concrete):
                    ctx.tick()
                    extended = _extend(item, row, triple)
                    if extended is not None:
                        next_rows.append(extended)
            rows = next_rows
        elif isinstance(item, OptionalGroup):
            inner = _reorder_bgps(list(item.items), store)
            next_rows = []
            for row in rows:
                matched = _eval_items(inner, store, [dict(row)], ctx)
                if matched:
                    next_rows.extend(matched)
                else:
                    next_rows.append(row)
                ctx.tick(max(1, len(matched)))
            rows = next_rows
        elif isinstance(item, Values):
            next_rows = []
            for row in rows:
                bound = row.get(item.var.name)
                if bound is not None:
                    if bound in item.terms:
                        next_rows.append(row)
                    continue
                for term in item.terms:
                    ctx.tick()
                    new = dict(row)
                    new[item.var.name] = term
                    next_rows.append(new)
            rows = next_rows
        elif isinstance(item, Bind):
            for row in rows:
                if item.var.name in row:
                    raise QueryTypeError(f"BIND would rebind ?{item.var.name}")
                value = _eval_scalar(item.expr, row)
                if value is not None:
                    row[item.var.name] = value
                ctx.tick()
        elif isinstance(item, SubSelect):
            sub_rows = _project(item.plan, store, ctx)
            next_rows = []
            for row in rows:
                for sub in sub_rows:
                    ctx.tick()
                    merged = _merge(row, sub)
                    if merged is not None:
                        next_rows.append(merged)
            rows = next_rows
    return rows


def _merge(a: Row, b: Row) -> Row | None:
    for key, value in b.items():
        if value is None:
            continue
        if key in a and a[key] != value:
            return None
    out = dict(a)
    for key, value in b.items():
        if value is not None:
            out[key] = value
    return out


def _eval_scalar(expr: Expr, row: Row):
    """Non-aggregate expression over one row; None on evaluation error."""
    if isinstance(expr, VarExpr):
        return row.get(expr.var.name)
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, StringLit):
        return TermValue(LITERAL, expr.value)
    if isinstance(expr, Arithmetic):
        left = _eval_scalar(expr.left, row)
        right = _eval_scalar(expr.right, row)
        return _arith(expr.op, left, right)
    raise QueryTypeError("aggregate used outside an aggregation context")


def _arith(op: str, left, right):
    if not isinstance(left, (int, float)) or not isinstance(right, (int, float)):
        return None
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if right == 0:
        return None
    result = left / right
    return result


def _eval_aggregate(expr: Expr, group: list[Row]):
    if isinstance(expr, Aggregate):
        if expr.arg is None:
            return len(group)
        values = [row[expr.arg.name] for row in group if row.get(expr.arg.name) is not None]
        if expr.distinct:
            return len(set(values))
        return len(values)
    if isinstance(expr, Arithmetic):
        left = _eval_aggregate(expr.left, group)
        right = _eval_aggregate(expr.right, group)
        return _arith(expr.op, left, right)
    if isinstance(expr, NumberLit):
        return expr.value
    if isinstance(expr, StringLit):
        return TermValue(LITERAL, expr.value)
    if isinstance(expr, VarExpr):
        for row in group:
            if expr.var.name in row:
                return row[expr.var.name]
        return None
    raise QueryTypeError(f"cannot aggregate expression {expr!r}")


def _rank(value) -> tuple[int, float, str]:
    """Total order over binding values: unbound, numbers, properties, entities, literals."""
    if value is None:
        return (0, 0.0, "")
    if isinstance(value, bool):
        return (1, float(value), "")
    if isinstance(value, (int, float)):
        return (1, float(value), "")
    if isinstance(value, PropertyTerm):
        return (2, 0.0, value.label)
    if value.kind == ENTITY:
        return (3, 0.0, value.text)
    return (4, 0.0, value.text)


def _project(plan: QueryPlan, store: TripleStore, ctx: EvalContext) -> list[Row]:
    """Evaluate a plan to projected rows (before SPARQL-JSON rendering)."""
    where = _reorder_bgps(plan.where, store)
    rows = _eval_items(where, store, [{}], ctx)
    aggregated = plan.group_by or any(
        _has_aggregate(item.expr) for item in plan.select
    )
    out: list[Row] = []
    if aggregated:
        groups: dict[tuple, list[Row]] = {}
        order: list[tuple] = []
        if plan.group_by:
            for row in rows:
                key = tuple(row.get(v.name) for v in plan.group_by)
                if key not in groups:
                    groups[key] = []
                    order.append(key)
                groups[key].append(row)
        else:
            groups[()] = rows
            order.append(())
        for key in order:
            group = groups[key]
            scope: Row = {v.name: kv for v, kv in zip(plan.group_by, key)}
            projected: Row = {}
            for item in plan.select:
                if _has_aggregate(item.expr):
                    projected[item.alias] = _eval_aggregate(item.expr, group)
                else:
                    projected[item.alias] = _eval_scalar(item.expr, scope)
            projected.update({k: v for k, v in scope.items() if k not in projected})
            out.append(projected)
            ctx.tick()
    else:
        for row in rows:
            projected = {item.alias: _eval_scalar(item.expr, row) for item in plan.select}
            # keep pattern variables reachable for ORDER BY over non-projected vars
            for k, v in row.items():
                projected.setdefault(k, v)
            out.append(projected)
            ctx.tick()
    columns = plan.columns
    if plan.distinct:
        seen = set()
        deduped = []
        for row in out:
            key = tuple(row.get(c) for c in columns)
            if key not in seen:
                seen.add(key)
                deduped.append(row)
        out = deduped
    if plan.order_by or plan.limit is not None:
        # deterministic base order: tie-break over the projected columns
        out.sort(key=lambda row: tuple(_rank(row.get(c)) for c in columns))
        for expr, descending in reversed(plan.order_by):
            out.sort(key=lambda row: _order_key(expr, row), reverse=descending)
    if plan.limit is not None:
        out = out[: plan.limit]
    return [{c: row.get(c) for c in columns} for row in out]


def _order_key(expr: Expr, row: Row) -> tuple[int, float, str]:
    return _rank(_eval_scalar(expr, row))


def _has_aggregate(expr: Expr) -> bool:
    if isinstance(expr, Aggregate):
        return True
    if isinstance(expr, Arithmetic):
        return _has_aggregate(expr.left) or _has_aggregate(expr.right)
    return False


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[Row]

    def to_sparql_json(self, namespaces: Namespaces = DEFAULT_NAMESPACES) -> dict:
        bindings = []
        for row in self.rows:
            cell: dict[str, dict] = {}
            for col in self.columns:
                value = row.get(col)
                if value is None:
                    continue
                cell[col] = _json_term(value, namespaces)
            bindings.append(cell)
        return {"head": {"vars": list(self.columns)}, "results": {"bindings": bindings}}

    def to_text(self, namespaces: Namespaces = DEFAULT_NAMESPACES) -> str:
        rendered = [
            [_text_term(row.get(col), namespaces) for col in self.columns] for row in self.rows
        ]
        widths = [
            max([len(col)] + [len(r[i]) for r in rendered]) for i, col in enumerate(self.columns)
        ]
        lines = [
            "  ".join(col.ljust(widths[i]) for i, col in enumerate(self.columns)).rstrip(),
            "  ".join("-" * widths[i] for i in range(len(self.columns))).rstrip(),
        ]
        for r in rendered:
            lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(r))).rstrip())
        return "\n".join(lines)


def _json_term(value, namespaces: Namespaces) -> dict:
    if isinstance(value, PropertyTerm):
        return {"type": "uri", "value": namespaces.property_prefix + encode_entity_iri(value.label)}
    if isinstance(value, bool):
        return {"type": "literal", "value": str(value).lower()}
    if isinstance(value, int):
        return {
            "type": "literal",
            "value": str(value),
            "datatype": "http://www.w3.org/2001/XMLSchema#integer",
        }
    if isinstance(value, float):
        return {
            "type": "literal",
            "value": repr(value),
            "datatype": "http://www.w3.org/2001/XMLSchema#decimal",
        }
    if value.kind == ENTITY:
        return {"type": "uri", "value": namespaces.entity_prefix + encode_entity_iri(value.text)}
    return {"type": "literal", "value": value.text}


def _text_term(value, namespaces: Namespaces) -> str:
    if value is None:
        return ""
    if isinstance(value, PropertyTerm):
        return "gptkbp:" + encode_entity_iri(value.label)
    if isinstance(value, (int, float)):
        return repr(value) if isinstance(value, float) else str(value)
    if value.kind == ENTITY:
        return "gptkb:" + encode_entity_iri(value.text)
    return value.text


def evaluate(
    plan: QueryPlan,
    store: TripleStore,
    timeout_seconds: float | None = None,
    memory_budget_bytes: int = 1 << 30,
) -> ResultTable:
    ctx = EvalContext.with_timeout(timeout_seconds, memory_budget_bytes)
    rows = _project(plan, store, ctx)
    return ResultTable(columns=plan.columns, rows=rows)


# ----------------------------------------------------------------------
# plan explanation


def explain(plan: QueryPlan, store: TripleStore) -> str:
    lines: list[str] = []

    def term_text(term) -> str:
        if isinstance(term, Var):
            return f"?{term.name}"
        if isinstance(term, str):
            return term
        if term.kind == ENTITY:
            return f"gptkb:{encode_entity_iri(term.text)}"
        return f'"{term.text}"'

    def walk(items: list, depth: int) -> None:
        pad = "  " * depth
        for item in _reorder_bgps(items, store):
            if isinstance(item, Pattern):
                est = _pattern_estimate(store, item)
                index = store.plan_index(_substitute(item, {}) or TriplePattern())
                lines.append(
                    f"{pad}scan {index.upper()} ({term_text(item.subject)} "
                    f"{term_text(item.predicate)} {term_text(item.object)}) ~{est} rows"
                )
            elif isinstance(item, OptionalGroup):
                lines.append(f"{pad}left join (OPTIONAL)")
                walk(list(item.items), depth + 1)
            elif isinstance(item, Values):
                lines.append(f"{pad}join VALUES ?{item.var.name} ({len(item.terms)} terms)")
            elif isinstance(item, Bind):
                lines.append(f"{pad}bind ?{item.var.name}")
            elif isinstance(item, SubSelect):
                lines.append(f"{pad}subquery")
                walk_plan(item.plan, depth + 1)

    def walk_plan(p: QueryPlan, depth: int) -> None:
        pad = "  " * depth
        walk(p.where, depth)
        if p.group_by:
            lines.append(f"{pad}group by {', '.join('?' + v.name for v in p.group_by)}")
        if any(_has_aggregate(i.expr) for i in p.select):
            lines.append(f"{pad}aggregate {', '.join(p.columns)}")
        if p.distinct:
            lines.append(f"{pad}distinct")
        if p.order_by:
            lines.append(f"{pad}order by {len(p.order_by)} key(s)")
        if p.limit is not None:
            lines.append(f"{pad}limit {p.limit}")

    walk_plan(plan, 0)
    return "\n".join(lines)
