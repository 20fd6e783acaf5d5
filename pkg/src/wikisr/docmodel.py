"""Three-part document model: Wikipedia concepts, ontology concepts, bag of words.

Wikipedia concepts are split into named entities (a wikified span overlaps
a recognized entity span) and general concepts (the remainder).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy import sparse

from wikisr.errors import UnknownConceptError
from wikisr.linkgraph import ConceptId, LinkGraph
from wikisr.ner import Gazetteer, recognize_entities
from wikisr.ontology import Ontology, profile
from wikisr.relatedness import RelatednessCache
from wikisr.text import bow_terms
from wikisr.wikifier import WikifyConfig, link_mentions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DocumentModel:
    wiki_ne: frozenset[ConceptId] = frozenset()
    wiki_general: frozenset[ConceptId] = frozenset()
    onto: frozenset[str] = frozenset()
    bow: frozenset[str] = frozenset()
    doc_id: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.wiki_ne & self.wiki_general:
            raise ValueError("wiki_ne and wiki_general must be disjoint")

    @property
    def wiki(self) -> frozenset[ConceptId]:
        return self.wiki_ne | self.wiki_general

    def is_empty(self) -> bool:
        return not (self.wiki_ne or self.wiki_general or self.onto or self.bow)

    def to_record(self) -> dict[str, Any]:
        return {
            "doc_id": self.doc_id,
            "wiki_ne": sorted(self.wiki_ne),
            "wiki_general": sorted(self.wiki_general),
            "onto": sorted(self.onto),
            "bow": sorted(self.bow),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> DocumentModel:
        return cls(
            wiki_ne=frozenset(int(x) for x in record.get("wiki_ne", ())),
            wiki_general=frozenset(int(x) for x in record.get("wiki_general", ())),
            onto=frozenset(record.get("onto", ())),
            bow=frozenset(record.get("bow", ())),
            doc_id=str(record.get("doc_id", "")),
        )


def build_model(
    g: LinkGraph,
    o: Ontology,
    gz: Gazetteer,
    cfg: WikifyConfig,
    d: str,
    *,
    stopwords: frozenset[str] = frozenset(),
    doc_id: str = "",
    cache: RelatednessCache | None = None,
) -> DocumentModel:
    mentions = link_mentions(g, cfg, d, cache)
    entity_spans = [e.span for e in recognize_entities(gz, d)]

    named: set[ConceptId] = set()
    for mention in mentions:
        if any(mention.span.overlaps(span) for span in entity_spans):
            named.add(mention.concept)
    wikified = {m.concept for m in mentions}

    model = DocumentModel(
        wiki_ne=frozenset(named),
        wiki_general=frozenset(wikified - named),
        onto=profile(o, d),
        bow=bow_terms(d, stopwords),
        doc_id=doc_id,
    )
    logger.debug(
        "Modelled %r: %d NE, %d general, %d onto, %d words",
        doc_id, len(model.wiki_ne), len(model.wiki_general), len(model.onto), len(model.bow),
    )
    return model


class Vocabulary:
    """Joint coordinate index over articles, ontology concepts and BOW terms.

    Coordinates are assigned in blocks: articles by id, then ontology
    concepts by name, then terms alphabetically.
    """

    def __init__(
        self,
        concepts: Iterable[ConceptId],
        onto_concepts: Iterable[str],
        terms: Iterable[str],
    ) -> None:
        self._wiki = {c: i for i, c in enumerate(sorted(set(concepts)))}
        offset = len(self._wiki)
        self._onto = {c: offset + i for i, c in enumerate(sorted(set(onto_concepts)))}
        offset += len(self._onto)
        self._terms = {t: offset + i for i, t in enumerate(sorted(set(terms)))}
        self._members: list[tuple[str, Any]] = (
            [("wiki", c) for c in self._wiki]
            + [("onto", c) for c in self._onto]
            + [("bow", t) for t in self._terms]
        )

    @classmethod
    def from_resources(cls, g: LinkGraph, o: Ontology, terms: Iterable[str]) -> Vocabulary:
        return cls(g.titles.keys(), o.concepts, terms)

    @property
    def dimension(self) -> int:
        return len(self._members)

    def coordinates(self, m: DocumentModel) -> list[int]:
        coords: list[int] = []
        for table, members in (
            (self._wiki, m.wiki_ne | m.wiki_general),
            (self._onto, m.onto),
            (self._terms, m.bow),
        ):
            for member in members:
                try:
                    coords.append(table[member])
                except KeyError:
                    raise UnknownConceptError(member) from None
        return sorted(coords)

    def decode(self, vector: sparse.spmatrix | sparse.sparray) -> tuple[frozenset, frozenset, frozenset]:
        """Nonzero coordinates back to ``(wiki concepts, onto concepts, terms)``."""
        _, cols = vector.nonzero()
        parts: dict[str, set] = {"wiki": set(), "onto": set(), "bow": set()}
        for col in cols:
            kind, member = self._members[int(col)]
            parts[kind].add(member)
        return frozenset(parts["wiki"]), frozenset(parts["onto"]), frozenset(parts["bow"])


def to_sparse_vector(m: DocumentModel, vocab: Vocabulary) -> sparse.csr_matrix:
    """1 x N indicator row vector of the model's members."""
    cols = np.asarray(vocab.coordinates(m), dtype=np.int64)
    data = np.ones(cols.size, dtype=np.int8)
    rows = np.zeros(cols.size, dtype=np.int64)
    return sparse.csr_matrix((data, (rows, cols)), shape=(1, vocab.dimension))
