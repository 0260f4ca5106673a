"""Quality evaluation: sample triples, check them against a document
search backend with a judge, and aggregate precision statistics.

Two modes exist and never mix in one report: triple precision labels a
full statement True / Plausible / False; subject precision labels the
subject entity Verifiable / Plausible / Unverifiable. The production
judge is a remote oracle; tests and offline runs use the deterministic
rule-based judge over a local corpus (substring entailment).
"""

from __future__ import annotations

import csv
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

import httpx

from .model import Triple
from .store import TripleStore

TRIPLE_LABELS = ("True", "Plausible", "False")
SUBJECT_LABELS = ("Verifiable", "Plausible", "Unverifiable")
TRIPLE_MODE = "triple"
SUBJECT_MODE = "subject"


class SampleTooLarge(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class BackendUnreachable(RuntimeError):
    pass


@dataclass
class Verdict:
    triple: Triple
    label: str
    evidence: list[tuple[str, str]]  # (document id, snippet)
    judge: str  # "automated" | "manual-import"
    mode: str  # "triple" | "subject"


@dataclass
class PrecisionReport:
    mode: str
    sample_size: int
    counts: dict[str, int]
    fractions: dict[str, float]
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "sample_size": self.sample_size,
            "counts": self.counts,
            "fractions": self.fractions,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ----------------------------------------------------------------------
# search backends


class LocalCorpus:
    """Directory (or in-memory dict) of documents, ranked by term overlap."""

    def __init__(self, documents: dict[str, str]):
        self.documents = dict(sorted(documents.items()))

    @classmethod
    def from_dir(cls, path: str | Path) -> "LocalCorpus":
        docs = {}
        for file in sorted(Path(path).iterdir()):
            if file.is_file():
                docs[file.name] = file.read_text(encoding="utf-8")
        return cls(docs)

    def query(self, text: str, k: int = 5) -> list[tuple[str, str]]:
        tokens = {t for t in text.lower().split() if t}
        scored = []
        for doc_id, body in self.documents.items():
            lowered = body.lower()
            score = sum(1 for t in tokens if t in lowered)
            if score:
                scored.append((-score, doc_id, body))
        scored.sort()
        return [(doc_id, body) for _, doc_id, body in scored[:k]]


class HttpSearchBackend:
    """POSTs {query, k} and expects {documents: [{id, text}, ...]}."""

    def __init__(self, endpoint: str, http: httpx.Client | None = None, timeout: float = 30.0):
        self.endpoint = endpoint
        self._http = http or httpx.Client(timeout=timeout)

    def query(self, text: str, k: int = 5) -> list[tuple[str, str]]:
        try:
            response = self._http.post(self.endpoint, json={"query": text, "k": k})
            response.raise_for_status()
            docs = response.json()["documents"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise BackendUnreachable(f"search backend failed: {exc}") from None
        return [(d["id"], d["text"]) for d in docs[:k]]


# ----------------------------------------------------------------------
# judges

_CAMEL = re.compile(r"([a-z0-9])([A-Z])")


def predicate_words(predicate: str) -> list[str]:
    spaced = _CAMEL.sub(r"\1 \2", predicate).replace("_", " ")
    return [w for w in spaced.lower().split() if w]


def search_text(triple: Triple, mode: str = TRIPLE_MODE) -> str:
    if mode == SUBJECT_MODE:
        return triple.subject.label
    return f"{triple.subject.label} {' '.join(predicate_words(triple.predicate))} {triple.object.text}"


class RuleBasedJudge:
    """Deterministic substring entailment over retrieved documents.

    Triple mode: a line containing subject, object, and every predicate
    word entails the triple (True); subject and object in the same
    document is Plausible; anything else is False. Subject mode checks
    only the subject surface form.
    """

    def __init__(self, mode: str = TRIPLE_MODE):
        if mode not in (TRIPLE_MODE, SUBJECT_MODE):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode

    def judge(self, triple: Triple, documents: list[tuple[str, str]]) -> tuple[str, list[tuple[str, str]]]:
        if self.mode == SUBJECT_MODE:
            return self._judge_subject(triple, documents)
        return self._judge_triple(triple, documents)

    def _judge_triple(self, triple, documents):
        subject = triple.subject.label.lower()
        obj = triple.object.text.lower()
        words = predicate_words(triple.predicate)
        plausible: list[tuple[str, str]] = []
        for doc_id, body in documents:
            lowered = body.lower()
            for line, line_lower in zip(body.splitlines(), lowered.splitlines()):
                if subject in line_lower and obj in line_lower and all(w in line_lower for w in words):
                    return ("True", [(doc_id, line.strip())])
            if not plausible and subject in lowered and obj in lowered:
                snippet = next(
                    (line.strip() for line in body.splitlines() if subject in line.lower()), ""
                )
                plausible.append((doc_id, snippet))
        if plausible:
            return ("Plausible", plausible)
        return ("False", [])

    def _judge_subject(self, triple, documents):
        subject = triple.subject.label.lower()
        tokens = subject.split()
        partial: list[tuple[str, str]] = []
        for doc_id, body in documents:
            lowered = body.lower()
            if subject in lowered:
                snippet = next(
                    (line.strip() for line in body.splitlines() if subject in line.lower()), ""
                )
                return ("Verifiable", [(doc_id, snippet)])
            if not partial and all(t in lowered for t in tokens):
                partial.append((doc_id, ""))
        if partial:
            return ("Plausible", partial)
        return ("Unverifiable", [])


# ----------------------------------------------------------------------
# pipeline


def sample_triples(
    store: TripleStore, n: int, seed: int, exclude_meta: bool = True
) -> list[Triple]:
    """Uniform sample without replacement, reproducible from the seed."""
    population = [t for t in store.iter_triples() if not (exclude_meta and t.is_meta)]
    if n > len(population):
        raise SampleTooLarge(f"asked for {n} of {len(population)} triples")
    return random.Random(seed).sample(population, n)


def verify_triple(triple: Triple, backend, judge, k: int = 5) -> Verdict:
    documents = backend.query(search_text(triple, getattr(judge, "mode", TRIPLE_MODE)), k)
    label, evidence = judge.judge(triple, documents)
    return Verdict(
        triple=triple,
        label=label,
        evidence=evidence,
        judge="automated",
        mode=getattr(judge, "mode", TRIPLE_MODE),
    )


def verify_batch(
    triples: list[Triple], backend, judge, k: int = 5
) -> tuple[list[Verdict], list[tuple[Triple, str]]]:
    """Verify a batch; unreachable-backend triples are deferred, not counted."""
    verdicts: list[Verdict] = []
    deferred: list[tuple[Triple, str]] = []
    for triple in triples:
        try:
            verdicts.append(verify_triple(triple, backend, judge, k))
        except BackendUnreachable as exc:
            deferred.append((triple, str(exc)))
    return verdicts, deferred


def aggregate_precision(verdicts: list[Verdict], seed: int | None = None) -> PrecisionReport:
    if not verdicts:
        raise EmptyInput("no verdicts to aggregate")
    modes = {v.mode for v in verdicts}
    if len(modes) > 1:
        raise ValueError(f"cannot mix verdict modes in one report: {sorted(modes)}")
    mode = modes.pop()
    labels = TRIPLE_LABELS if mode == TRIPLE_MODE else SUBJECT_LABELS
    unknown = {v.label for v in verdicts} - set(labels)
    if unknown:
        raise ValueError(f"unknown labels for {mode} precision: {sorted(unknown)}")
    counts = {label: 0 for label in labels}
    for v in verdicts:
        counts[v.label] += 1
    total = len(verdicts)
    fractions = {label: counts[label] / total for label in labels}
    return PrecisionReport(
        mode=mode, sample_size=total, counts=counts, fractions=fractions, seed=seed
    )


def agreement_table(automated: PrecisionReport, manual: PrecisionReport) -> dict:
    """Side-by-side fractions for the automated-vs-manual comparison."""
    if automated.mode != manual.mode:
        raise ValueError("reports use different precision modes")
    labels = TRIPLE_LABELS if automated.mode == TRIPLE_MODE else SUBJECT_LABELS
    return {
        "mode": automated.mode,
        "labels": list(labels),
        "automated": [automated.fractions[label] for label in labels],
        "manual": [manual.fractions[label] for label in labels],
    }


def read_manual_csv(path: str | Path, mode: str = TRIPLE_MODE) -> list[Verdict]:
    """Import annotator labels from columns s,p,o_kind,o,label,annotator."""
    from .model import EntityId, TermValue

    out: list[Verdict] = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            triple = Triple(EntityId(row["s"]), row["p"], TermValue(row["o_kind"], row["o"]))
            out.append(Verdict(triple=triple, label=row["label"], evidence=[], judge="manual-import", mode=mode))
    return out
