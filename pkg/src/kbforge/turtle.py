"""Turtle serialization and parsing for the label-addressed triple model.

The dialect is deliberately narrow: entities are prefixed names under the
entity namespace, predicates under the property namespace, literals are
plain quoted strings. Local names use the package's percent-encoding, so
they may start with digits or contain '~' (which standard prefixed names
forbid); leading and trailing dots are escaped as %2E to keep statements
unambiguous. Output is grouped by subject with predicates and objects
sorted, so serialization is byte-deterministic.
"""

from __future__ import annotations

import re
from pathlib import Path

from .model import (
    DEFAULT_NAMESPACES,
    ENTITY,
    LITERAL,
    Namespaces,
    decode_entity_iri,
    encode_entity_iri,
)
from .store import TripleStore

TURTLE_HEADER = "# kbforge turtle v1"

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f", "'": "'"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, token: str = ""):
        detail = f"line {line}, column {col}: {message}"
        if token:
            detail += f" (at {token!r})"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.token = token


def escape_literal(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _local_name(label: str) -> str:
    """Entity/property local name; '.' may not start or end a prefixed name."""
    enc = encode_entity_iri(label)
    while enc.startswith("."):
        enc = "%2E" + enc[1:]
    while enc.endswith("."):
        enc = enc[:-1] + "%2E"
    return enc


def serialize_turtle(
    store: TripleStore,
    namespaces: Namespaces = DEFAULT_NAMESPACES,
    entity_prefix: str = "gptkb",
    property_prefix: str = "gptkbp",
) -> str:
    groups: dict[str, dict[str, list[tuple[int, str]]]] = {}
    for t in store.iter_triples():
        rank = 0 if t.object.kind == ENTITY else 1
        groups.setdefault(t.subject.label, {}).setdefault(t.predicate, []).append(
            (rank, t.object.text)
        )

    def render_object(rank: int, text: str) -> str:
        if rank == 0:
            return f"{entity_prefix}:{_local_name(text)}"
        return f'"{escape_literal(text)}"'

    lines = [
        TURTLE_HEADER,
        f"@prefix {entity_prefix}: <{namespaces.entity_prefix}> .",
        f"@prefix {property_prefix}: <{namespaces.property_prefix}> .",
        "",
    ]
    for subject in sorted(groups):
        parts = []
        for predicate in sorted(groups[subject]):
            objects = " , ".join(render_object(r, o) for r, o in sorted(set(groups[subject][predicate])))
            parts.append(f"{property_prefix}:{_local_name(predicate)} {objects}")
        body = " ;\n    ".join(parts)
        lines.append(f"{entity_prefix}:{_local_name(subject)} {body} .")
    return "\n".join(lines) + "\n"


def write_turtle(store: TripleStore, path: str | Path, namespaces: Namespaces = DEFAULT_NAMESPACES) -> None:
    Path(path).write_text(serialize_turtle(store, namespaces), encoding="utf-8")


# ----------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<prefix_kw>@prefix\b|PREFIX\b)
    | (?P<pname>(?:[A-Za-z][A-Za-z0-9_]*)?:(?:[A-Za-z0-9_~%\-](?:[A-Za-z0-9_~%.\-]*[A-Za-z0-9_~%\-])?)?)
    | (?P<iriref><[^<>"{}|^`\\\x00-\x20]*>)
    | (?P<string>"(?:[^"\\\n\r]|\\.)*")
    | (?P<punct>[.;,])
    """,
    re.VERBOSE,
)


def _unescape_literal(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        code = raw[i + 1]
        if code in _UNESCAPES:
            out.append(_UNESCAPES[code])
            i += 2
        elif code in ("u", "U"):
            width = 4 if code == "u" else 8
            hexpart = raw[i + 2 : i + 2 + width]
            if len(hexpart) < width:
                raise ParseError("truncated unicode escape", line, col, raw)
            try:
                out.append(chr(int(hexpart, 16)))
            except ValueError:
                raise ParseError("invalid unicode escape", line, col, raw) from None
            i += 2 + width
        else:
            raise ParseError(f"unknown escape \\{code}", line, col, raw)
    return "".join(out)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int, int]] = []  # (kind, value, line, col)
        line, line_start = 1, 0
        pos = 0
        for match in _TOKEN.finditer(text):
            if match.start() != pos:
                bad_line, bad_col = self._locate(text, pos)
                raise ParseError("unexpected character", bad_line, bad_col, text[pos])
            pos = match.end()
            kind = match.lastgroup
            value = match.group()
            newlines = value.count("\n")
            if kind in ("ws", "comment"):
                if newlines:
                    line += newlines
                    line_start = match.start() + value.rfind("\n") + 1
                continue
            self.items.append((kind, value, line, match.start() - line_start + 1))
        if pos != len(text):
            bad_line, bad_col = self._locate(text, pos)
            raise ParseError("unexpected character", bad_line, bad_col, text[pos])
        self.items.append(("eof", "", line, len(text) - line_start + 1))
        self.i = 0

    @staticmethod
    def _locate(text: str, pos: int) -> tuple[int, int]:
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def peek(self) -> tuple[str, str, int, int]:
        return self.items[self.i]

    def next(self) -> tuple[str, str, int, int]:
        item = self.items[self.i]
        if item[0] != "eof":
            self.i += 1
        return item

    def expect(self, kind: str, what: str) -> tuple[str, str, int, int]:
        item = self.next()
        if item[0] != kind:
            raise ParseError(f"expected {what}", item[2], item[3], item[1])
        return item


def parse_turtle(text: str, namespaces: Namespaces = DEFAULT_NAMESPACES) -> TripleStore:
    tokens = _Tokens(text)
    prefixes: dict[str, str] = {}
    rows: list[tuple[str, str, str, str]] = []

    def resolve(value: str, line: int, col: int) -> str:
        if value.startswith("<"):
            return value[1:-1]
        prefix, local = value.split(":", 1)
        if prefix not in prefixes:
            raise ParseError(f"undeclared prefix {prefix!r}", line, col, value)
        return prefixes[prefix] + local

    def entity_label(iri: str, line: int, col: int, token: str) -> str:
        if not iri.startswith(namespaces.entity_prefix):
            raise ParseError("IRI outside the entity namespace", line, col, token)
        try:
            return decode_entity_iri(iri[len(namespaces.entity_prefix) :])
        except (ValueError, UnicodeDecodeError) as exc:
            raise ParseError(f"undecodable entity name: {exc}", line, col, token) from None

    def predicate_label(iri: str, line: int, col: int, token: str) -> str:
        if not iri.startswith(namespaces.property_prefix):
            raise ParseError("IRI outside the property namespace", line, col, token)
        try:
            return decode_entity_iri(iri[len(namespaces.property_prefix) :])
        except (ValueError, UnicodeDecodeError) as exc:
            raise ParseError(f"undecodable property name: {exc}", line, col, token) from None

    while True:
        kind, value, line, col = tokens.peek()
        if kind == "eof":
            break
        if kind == "prefix_kw":
            tokens.next()
            pk, pv, pl, pc = tokens.expect("pname", "prefix name")
            if not pv.endswith(":"):
                raise ParseError("prefix declaration must end with ':'", pl, pc, pv)
            ik, iv, _, _ = tokens.expect("iriref", "IRI")
            prefixes[pv[:-1]] = iv[1:-1]
            if value == "@prefix":
                tokens.expect("punct", "'.'")
            elif tokens.peek()[0] == "punct" and tokens.peek()[1] == ".":
                tokens.next()
            continue
        if kind not in ("pname", "iriref"):
            raise ParseError("expected a subject", line, col, value)
        tokens.next()
        subject = entity_label(resolve(value, line, col), line, col, value)
        while True:  # predicate-object groups separated by ';'
            vk, vv, vl, vc = tokens.next()
            if vk not in ("pname", "iriref"):
                raise ParseError("expected a predicate", vl, vc, vv)
            predicate = predicate_label(resolve(vv, vl, vc), vl, vc, vv)
            while True:  # objects separated by ','
                ok, ov, ol, oc = tokens.next()
                if ok == "string":
                    rows.append((subject, predicate, LITERAL, _unescape_literal(ov[1:-1], ol, oc)))
                elif ok in ("pname", "iriref"):
                    rows.append((subject, predicate, ENTITY, entity_label(resolve(ov, ol, oc), ol, oc, ov)))
                else:
                    raise ParseError("expected an object", ol, oc, ov)
                nk, nv, nl, nc = tokens.next()
                if nk == "punct" and nv == ",":
                    continue
                break
            if nk == "punct" and nv == ";":
                # tolerate a dangling ';' before the closing dot
                if tokens.peek()[0] == "punct" and tokens.peek()[1] == ".":
                    nk, nv, nl, nc = tokens.next()
                    break
                continue
            break
        if not (nk == "punct" and nv == "."):
            raise ParseError("expected '.' at end of statement", nl, nc, nv)

    store = TripleStore()
    store.bulk_load_rows(rows)
    return store


def parse_turtle_file(path: str | Path, namespaces: Namespaces = DEFAULT_NAMESPACES) -> TripleStore:
    return parse_turtle(Path(path).read_text(encoding="utf-8"), namespaces)
