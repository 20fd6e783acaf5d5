"""Semantic rule evaluation.

Handles:
- Per-leaf concept evaluation: direct presence in the document model
  (with ontology subsumption), else relatedness above the leaf's threshold
- Expression evaluation over the per-leaf verdicts
- Exact-match evaluation (relatedness expansion off) for GP fitness and
  the plain boolean baseline
- Verdict records for ``filter --explain``
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Mapping

from wikisr.docmodel import DocumentModel
from wikisr.linkgraph import LinkGraph
from wikisr.ontology import Ontology, descendants
from wikisr.query import ONTO, ConceptRef, Query, concepts_of, fold
from wikisr.relatedness import RelatednessCache, doc_rel_senses, ontology_senses

logger = logging.getLogger(__name__)

DEFAULT_C1 = 0.90
DEFAULT_C2 = 0.75

DIRECT = "direct"
RELATED = "related"
ABSENT = "absent"


@dataclass(frozen=True)
class SemanticRule:
    """A boolean query plus the named-entity (c1) and general (c2) thresholds."""

    query: Query
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2

    def __post_init__(self) -> None:
        if not 0.0 <= self.c2 <= self.c1 <= 1.0:
            raise ValueError(f"thresholds must satisfy 0 <= c2 <= c1 <= 1, got c1={self.c1}, c2={self.c2}")

    def threshold_for(self, ref: ConceptRef) -> float:
        return self.c1 if ref.is_named_entity else self.c2


@dataclass(frozen=True)
class LeafEvidence:
    """Threshold-independent facts about one leaf in one document."""

    direct: bool
    score: float = 0.0
    witness: str | None = None


@dataclass(frozen=True)
class ConceptVerdict:
    concept: ConceptRef
    value: int
    reason: str
    score: float = 0.0
    witness: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "concept": self.concept.surface,
            "value": self.value,
            "reason": self.reason,
            "score": round(self.score, 6),
            "witness": self.witness,
        }


@dataclass(frozen=True)
class Evaluation:
    match: int
    verdicts: tuple[ConceptVerdict, ...]

    def to_record(self, doc_id: str) -> dict[str, Any]:
        return {
            "doc_id": doc_id,
            "match": self.match,
            "leaves": [v.to_dict() for v in self.verdicts],
        }

    def to_json(self, doc_id: str) -> str:
        return json.dumps(self.to_record(doc_id), sort_keys=True, ensure_ascii=False)


def is_direct(o: Ontology | None, ref: ConceptRef, m: DocumentModel, subsumption: bool = True) -> bool:
    if ref.kind != ONTO:
        return ref.key in m.wiki_ne or ref.key in m.wiki_general
    if ref.key in m.onto:
        return True
    if subsumption and o is not None and ref.key in o:
        return not descendants(o, ref.key).isdisjoint(m.onto)  # type: ignore[arg-type]
    return False


def leaf_evidence(
    g: LinkGraph,
    o: Ontology | None,
    ref: ConceptRef,
    m: DocumentModel,
    *,
    subsumption: bool = True,
    exact: bool = False,
    cache: RelatednessCache | None = None,
) -> LeafEvidence:
    if is_direct(o, ref, m, subsumption):
        return LeafEvidence(direct=True, score=1.0)
    if exact:
        return LeafEvidence(direct=False)
    if ref.kind == ONTO:
        senses = ontology_senses(g, o, ref.key, cache) if o is not None else frozenset()  # type: ignore[arg-type]
    else:
        senses = frozenset({ref.key})  # type: ignore[arg-type]
    value, witness = doc_rel_senses(g, o, senses, m, cache)
    return LeafEvidence(direct=False, score=value, witness=witness)


def decide(ref: ConceptRef, evidence: LeafEvidence, threshold: float) -> ConceptVerdict:
    """Presence wins; otherwise relatedness must strictly exceed the threshold."""
    if evidence.direct:
        return ConceptVerdict(ref, 1, DIRECT, 1.0, None)
    if evidence.score > threshold:
        return ConceptVerdict(ref, 1, RELATED, evidence.score, evidence.witness)
    return ConceptVerdict(ref, 0, ABSENT, evidence.score, evidence.witness)


def collect_evidence(
    g: LinkGraph,
    o: Ontology | None,
    q: Query,
    m: DocumentModel,
    *,
    subsumption: bool = True,
    exact: bool = False,
    cache: RelatednessCache | None = None,
) -> dict[ConceptRef, LeafEvidence]:
    return {
        ref: leaf_evidence(g, o, ref, m, subsumption=subsumption, exact=exact, cache=cache)
        for ref in sorted(concepts_of(q))
    }


def evaluate_evidence(
    q: Query, evidence: Mapping[ConceptRef, LeafEvidence], c1: float, c2: float
) -> Evaluation:
    """Evaluate ``q`` from precomputed evidence; lets threshold sweeps skip relatedness work."""
    verdicts = {
        ref: decide(ref, ev, c1 if ref.is_named_entity else c2) for ref, ev in evidence.items()
    }
    match = fold(
        q,
        lambda ref: bool(verdicts[ref].value),
        lambda x: not x,
        all,
        any,
    )
    return Evaluation(int(match), tuple(verdicts[ref] for ref in sorted(verdicts)))


def concept_eval(
    g: LinkGraph,
    o: Ontology | None,
    r: SemanticRule,
    v: ConceptRef,
    m: DocumentModel,
    *,
    subsumption: bool = True,
    cache: RelatednessCache | None = None,
) -> ConceptVerdict:
    evidence = leaf_evidence(g, o, v, m, subsumption=subsumption, cache=cache)
    return decide(v, evidence, r.threshold_for(v))


def evaluate(
    g: LinkGraph,
    o: Ontology | None,
    r: SemanticRule,
    m: DocumentModel,
    *,
    subsumption: bool = True,
    cache: RelatednessCache | None = None,
) -> Evaluation:
    evidence = collect_evidence(g, o, r.query, m, subsumption=subsumption, cache=cache)
    result = evaluate_evidence(r.query, evidence, r.c1, r.c2)
    logger.debug("Evaluated %r: match=%d", m.doc_id, result.match)
    return result


def evaluate_exact(
    o: Ontology | None, q: Query, m: DocumentModel, *, subsumption: bool = True
) -> Evaluation:
    """Plain boolean evaluation: a leaf is true only when directly present."""
    verdicts = {
        ref: (
            ConceptVerdict(ref, 1, DIRECT, 1.0)
            if is_direct(o, ref, m, subsumption)
            else ConceptVerdict(ref, 0, ABSENT)
        )
        for ref in concepts_of(q)
    }
    match = fold(q, lambda ref: bool(verdicts[ref].value), lambda x: not x, all, any)
    return Evaluation(int(match), tuple(verdicts[ref] for ref in sorted(verdicts)))
