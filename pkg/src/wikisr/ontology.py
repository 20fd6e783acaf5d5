"""Business-term ontology stored as fact triplets, and the ontology profiler.

The triple store keeps ``fact_id -> (subject, relation, object)`` and indexes
four relations: ``subClassOf``, ``hasWikiPage``, ``label`` and ``type``.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import networkx as nx

from wikisr.errors import (
    DuplicateFactError,
    MalformedLineError,
    SubclassCycleError,
    UnknownConceptError,
)
from wikisr.text import camel_words, join_tokens, tokenize

logger = logging.getLogger(__name__)

SUBCLASS_OF = "subClassOf"
HAS_WIKI_PAGE = "hasWikiPage"
LABEL = "label"
TYPE = "type"
RELATIONS = frozenset({SUBCLASS_OF, HAS_WIKI_PAGE, LABEL, TYPE})


@dataclass(frozen=True)
class Fact:
    subject: str
    relation: str
    object: str


@dataclass(frozen=True, eq=False)
class Ontology:
    facts: Mapping[str, Fact]
    concepts: frozenset[str]
    labels: Mapping[str, frozenset[str]]
    wiki_pages: Mapping[str, str]
    # Edges run child -> parent.
    hierarchy: nx.DiGraph
    label_index: Mapping[str, frozenset[str]]
    max_label_tokens: int = 1

    def __contains__(self, concept: object) -> bool:
        return concept in self.concepts

    def parents(self, concept: str) -> frozenset[str]:
        self._require(concept)
        return frozenset(self.hierarchy.successors(concept))

    def depth(self) -> int:
        return nx.dag_longest_path_length(self.hierarchy) if self.hierarchy.number_of_edges() else 0

    def _require(self, concept: str) -> None:
        if concept not in self.concepts:
            raise UnknownConceptError(concept)


def build_ontology(facts: Iterable[tuple[str, str, str, str]]) -> Ontology:
    """Index ``(fact_id, subject, relation, object)`` records."""
    fact_map: dict[str, Fact] = {}
    concepts: set[str] = set()
    explicit_labels: dict[str, set[str]] = defaultdict(set)
    wiki_pages: dict[str, str] = {}
    hierarchy = nx.DiGraph()

    for fact_id, subject, relation, obj in facts:
        if fact_id in fact_map:
            raise DuplicateFactError(fact_id)
        if relation not in RELATIONS:
            raise ValueError(f"unsupported relation {relation!r} in fact {fact_id!r}")
        fact_map[fact_id] = Fact(subject, relation, obj)
        concepts.add(subject)
        if relation == SUBCLASS_OF:
            concepts.add(obj)
            hierarchy.add_edge(subject, obj)
        elif relation == HAS_WIKI_PAGE:
            if not obj.strip():
                raise ValueError(f"empty hasWikiPage title in fact {fact_id!r}")
            wiki_pages[subject] = obj
        elif relation == LABEL:
            explicit_labels[subject].add(obj.lower())

    hierarchy.add_nodes_from(concepts)
    if not nx.is_directed_acyclic_graph(hierarchy):
        cycle = [u for u, _ in nx.find_cycle(hierarchy)]
        raise SubclassCycleError(cycle + cycle[:1])

    labels = {c: frozenset({camel_words(c), *explicit_labels.get(c, ())}) for c in concepts}
    index: dict[str, set[str]] = defaultdict(set)
    for concept, surfaces in labels.items():
        for surface in surfaces:
            index[join_tokens(tokenize(surface))].add(concept)
    longest = max((len(key.split()) for key in index), default=1)

    return Ontology(
        facts=MappingProxyType(fact_map),
        concepts=frozenset(concepts),
        labels=MappingProxyType(labels),
        wiki_pages=MappingProxyType(wiki_pages),
        hierarchy=nx.freeze(hierarchy),
        label_index=MappingProxyType({k: frozenset(v) for k, v in index.items()}),
        max_label_tokens=max(longest, 1),
    )


def load_ontology(path: str | Path) -> Ontology:
    """Load ``fact_id<TAB>subject<TAB>relation<TAB>object`` rows."""
    path = Path(path)
    rows: list[tuple[str, str, str, str]] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4 or not all(field.strip() for field in fields):
                raise MalformedLineError(path, line_no, "expected 4 non-empty fields")
            if fields[2] not in RELATIONS:
                raise MalformedLineError(path, line_no, f"unsupported relation {fields[2]!r}")
            if fields[0] in seen:
                raise DuplicateFactError(fields[0])
            seen.add(fields[0])
            rows.append((fields[0], fields[1], fields[2], fields[3]))

    ontology = build_ontology(rows)
    logger.info(
        "Loaded ontology: %d facts, %d concepts, depth %d",
        len(ontology.facts), len(ontology.concepts), ontology.depth(),
    )
    return ontology


def empty_ontology() -> Ontology:
    return build_ontology(())


def profile(o: Ontology, d: str) -> frozenset[str]:
    """Concepts whose label occurs in ``d`` (case-insensitive, longest match)."""
    tokens = tokenize(d.lower())
    found: set[str] = set()
    i = 0
    while i < len(tokens):
        for n in range(min(o.max_label_tokens, len(tokens) - i), 0, -1):
            hit = o.label_index.get(join_tokens(tokens[i : i + n]))
            if hit:
                found.update(hit)
                i += n
                break
        else:
            i += 1
    return frozenset(found)


def descendants(o: Ontology, c: str) -> frozenset[str]:
    """Every concept with a subClassOf path to ``c``, excluding ``c``."""
    o._require(c)
    return frozenset(nx.ancestors(o.hierarchy, c))


def wiki_page_of(o: Ontology, c: str) -> str | None:
    o._require(c)
    return o.wiki_pages.get(c)
