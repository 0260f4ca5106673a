"""Core domain vocabulary: labels, entities, triples and the IRI scheme.

Entities are identified by their label (no opaque integer IDs); every
external format addresses them through the URL-safe encoded form produced
by :func:`encode_entity_iri`.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

ENTITY_PREFIX = "https://gptkb.org/entity/"
PROPERTY_PREFIX = "https://gptkb.org/prop/"

# Meta-relations materialized after the crawl; excluded from content statistics.
META_PREDICATES = frozenset({"bfsLayer", "bfsParent"})

_SAFE_CHARS = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789.~-"
)


class EmptyLabel(ValueError):
    """A label normalized to the empty string."""


def normalize_label(raw: str) -> str:
    """Normal form used for all labels: NFC, single spaces, stripped.

    Raises EmptyLabel when nothing is left after normalization.
    """
    text = " ".join(unicodedata.normalize("NFC", raw).split())
    if not text:
        raise EmptyLabel(f"label is empty after normalization: {raw!r}")
    return text


def encode_entity_iri(label: str) -> str:
    """Encode a normalized label into its URL-safe local IRI form.

    Spaces become underscores; everything outside [A-Za-z0-9_.~-] is
    percent-encoded as UTF-8 octets. A literal underscore is itself
    percent-encoded (%5F) so the encoding stays injective.
    """
    out: list[str] = []
    for ch in label:
        if ch == " ":
            out.append("_")
        elif ch in _SAFE_CHARS:
            out.append(ch)
        else:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
    return "".join(out)


def decode_entity_iri(encoded: str) -> str:
    """Inverse of :func:`encode_entity_iri`.

    Underscores are restored to spaces before percent-decoding, so literal
    underscores (stored as %5F) survive the round trip.
    """
    text = encoded.replace("_", " ")
    out = bytearray()
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "%":
            pair = text[i + 1 : i + 3]
            if len(pair) != 2 or not all(c in "0123456789abcdefABCDEF" for c in pair):
                raise ValueError(f"invalid percent escape in {encoded!r}")
            out.append(int(pair, 16))
            i += 3
        else:
            out.extend(ch.encode("utf-8"))
            i += 1
    return out.decode("utf-8")


@dataclass(frozen=True, order=True)
class EntityId:
    """An entity, identified by its normalized label."""

    label: str

    def __post_init__(self) -> None:
        if not self.label or self.label != self.label.strip():
            raise ValueError(f"entity label not normalized: {self.label!r}")

    @property
    def iri_local(self) -> str:
        return encode_entity_iri(self.label)

    @classmethod
    def of(cls, raw: str) -> "EntityId":
        return cls(normalize_label(raw))


ENTITY = "entity"
LITERAL = "literal"


@dataclass(frozen=True, order=True)
class TermValue:
    """A triple object: either an entity reference or a plain literal."""

    kind: str
    text: str

    def __post_init__(self) -> None:
        if self.kind not in (ENTITY, LITERAL):
            raise ValueError(f"unknown term kind: {self.kind!r}")

    @classmethod
    def entity(cls, label: str) -> "TermValue":
        return cls(ENTITY, normalize_label(label))

    @classmethod
    def literal(cls, text: str) -> "TermValue":
        return cls(LITERAL, text)

    @property
    def is_entity(self) -> bool:
        return self.kind == ENTITY

    def as_entity(self) -> EntityId:
        if not self.is_entity:
            raise ValueError(f"not an entity term: {self}")
        return EntityId(self.text)


@dataclass(frozen=True, order=True)
class Triple:
    """One (subject, predicate, object) statement."""

    subject: EntityId
    predicate: str
    object: TermValue

    def __post_init__(self) -> None:
        if not self.predicate.strip():
            raise ValueError("predicate is empty")

    @property
    def is_meta(self) -> bool:
        return self.predicate in META_PREDICATES

    def key(self) -> tuple[str, str, str, str]:
        return (self.subject.label, self.predicate, self.object.kind, self.object.text)


def triple(subject: str, predicate: str, obj: TermValue) -> Triple:
    """Convenience constructor normalizing subject and predicate."""
    return Triple(EntityId.of(subject), normalize_label(predicate), obj)


@dataclass(frozen=True)
class Namespaces:
    """IRI bases for entities and properties, as used in Turtle and SPARQL."""

    entity_prefix: str = ENTITY_PREFIX
    property_prefix: str = PROPERTY_PREFIX

    def __post_init__(self) -> None:
        for base in (self.entity_prefix, self.property_prefix):
            if not base.endswith("/") or "://" not in base:
                raise ValueError(f"namespace must be an absolute IRI ending in '/': {base!r}")

    def entity_iri(self, entity: EntityId) -> str:
        return self.entity_prefix + entity.iri_local

    def property_iri(self, predicate: str) -> str:
        return self.property_prefix + encode_entity_iri(predicate)


DEFAULT_NAMESPACES = Namespaces()
