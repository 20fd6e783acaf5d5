"""Link-structure relatedness: concept-concept, term-term and document-term.

All three measures are pure functions of an immutable graph. The optional
:class:`RelatednessCache` memoizes pair values and sense lookups; results
are identical with or without it.
"""

from __future__ import annotations

import logging
import math
import threading
from typing import TYPE_CHECKING, Iterator, NamedTuple

import numpy as np

from wikisr.linkgraph import ConceptId, LinkGraph, sense_ids
from wikisr.ontology import Ontology

if TYPE_CHECKING:
    from wikisr.docmodel import DocumentModel

logger = logging.getLogger(__name__)


class Witnessed(NamedTuple):
    """A relatedness value with the member that attained it (None when 0)."""

    value: float
    witness: str | None


def relatedness_from_inlinks(a: np.ndarray, b: np.ndarray, total: int) -> float:
    """``1 - ngd`` over two sorted inlink arrays, clamped to [0, 1]."""
    size_a, size_b = a.size, b.size
    if size_a == 0 or size_b == 0:
        return 0.0
    common = np.intersect1d(a, b, assume_unique=True).size
    if common == 0:
        return 0.0
    small, large = min(size_a, size_b), max(size_a, size_b)
    if small >= total:
        return 1.0 if np.array_equal(a, b) else 0.0
    ngd = (math.log(large) - math.log(common)) / (math.log(total) - math.log(small))
    return min(1.0, max(0.0, 1.0 - ngd))


def link_rel(g: LinkGraph, w1: ConceptId, w2: ConceptId) -> float:
    return relatedness_from_inlinks(g.inlink_array(w1), g.inlink_array(w2), g.total_articles)


class RelatednessCache:
    """Thread-safe memo of link_rel pairs and sense lookups for one graph."""

    def __init__(self, g: LinkGraph) -> None:
        self.graph = g
        self._pairs: dict[tuple[ConceptId, ConceptId], float] = {}
        self._senses: dict[str, frozenset[ConceptId]] = {}
        self._lock = threading.Lock()

    def link_rel(self, w1: ConceptId, w2: ConceptId) -> float:
        key = (w1, w2) if w1 <= w2 else (w2, w1)
        with self._lock:
            hit = self._pairs.get(key)
        if hit is not None:
            return hit
        value = link_rel(self.graph, *key)
        with self._lock:
            self._pairs[key] = value
        return value

    def sense_ids(self, term: str) -> frozenset[ConceptId]:
        with self._lock:
            hit = self._senses.get(term)
        if hit is not None:
            return hit
        value = sense_ids(self.graph, term)
        with self._lock:
            self._senses[term] = value
        return value

    def __len__(self) -> int:
        with self._lock:
            return len(self._pairs)


def _pair_fn(g: LinkGraph, cache: RelatednessCache | None):
    if cache is not None:
        if cache.graph is not g:
            raise ValueError("cache was built for a different graph")
        return cache.link_rel
    return lambda a, b: link_rel(g, a, b)


def _senses_fn(g: LinkGraph, cache: RelatednessCache | None):
    return cache.sense_ids if cache is not None else (lambda s: sense_ids(g, s))


def max_sense_rel(
    g: LinkGraph,
    left: frozenset[ConceptId],
    right: frozenset[ConceptId],
    cache: RelatednessCache | None = None,
) -> float:
    """Maximum link_rel over all sense pairs; 0 if either side is empty."""
    pair = _pair_fn(g, cache)
    best = 0.0
    for a in left:
        for b in right:
            value = pair(a, b)
            if value > best:
                best = value
    return best


def term_rel(g: LinkGraph, s1: str, s2: str) -> float:
    return max_sense_rel(g, sense_ids(g, s1), sense_ids(g, s2))


def term_rel_witness(
    g: LinkGraph, s1: str, s2: str
) -> tuple[float, ConceptId | None, ConceptId | None]:
    """term_rel plus the sense pair attaining it (lowest ids on ties)."""
    best: tuple[float, ConceptId | None, ConceptId | None] = (0.0, None, None)
    for a in sorted(sense_ids(g, s1)):
        for b in sorted(sense_ids(g, s2)):
            value = link_rel(g, a, b)
            if value > best[0]:
                best = (value, a, b)
    return best


def ontology_senses(
    g: LinkGraph,
    o: Ontology,
    name: str,
    cache: RelatednessCache | None = None,
) -> frozenset[ConceptId]:
    """Senses of an ontology concept: its hasWikiPage title, else its labels as n-grams."""
    lookup = _senses_fn(g, cache)
    page = o.wiki_pages.get(name)
    if page is not None:
        return lookup(page)
    return frozenset().union(*(lookup(label) for label in sorted(o.labels.get(name, ()))))


def model_members(
    g: LinkGraph,
    o: Ontology | None,
    m: DocumentModel,
    cache: RelatednessCache | None = None,
) -> Iterator[tuple[str, frozenset[ConceptId]]]:
    """Members of the document model as ``(label, senses)`` pairs.

    Wikipedia concepts are their own sense. Ontology concepts go through
    their hasWikiPage title, or through their labels as plain n-grams when
    no page is attached. BOW words use their term senses.
    """
    lookup = _senses_fn(g, cache)
    for concept in sorted(m.wiki_ne | m.wiki_general):
        yield g.title_of(concept), frozenset({concept})
    if o is not None:
        for name in sorted(m.onto):
            yield name, ontology_senses(g, o, name, cache)
    for word in sorted(m.bow):
        yield word, lookup(word)


def doc_rel_senses(
    g: LinkGraph,
    o: Ontology | None,
    term_senses: frozenset[ConceptId],
    m: DocumentModel,
    cache: RelatednessCache | None = None,
) -> Witnessed:
    """Max relatedness between a sense set and any member of the model."""
    if not term_senses:
        return Witnessed(0.0, None)
    best = Witnessed(0.0, None)
    for label, ids in model_members(g, o, m, cache):
        value = max_sense_rel(g, term_senses, ids, cache)
        if value > best.value:
            best = Witnessed(value, label)
            if value >= 1.0:
                break
    return best


def doc_rel(g: LinkGraph, o: Ontology | None, s: str, m: DocumentModel) -> float:
    return doc_rel_senses(g, o, sense_ids(g, s), m).value
