"""Wikipedia link graph: articles, redirects, anchor statistics and inlink sets.

Handles:
- Loading the four TSV tables (pages, redirects, anchors, links) with
  line-numbered validation
- Sense lookup for a surface term (title, redirect or anchor)
- Inlink sets stored as sorted read-only arrays for merge intersection
- Longest-match candidate spotting over tokenized text
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from wikisr.errors import (
    DanglingReferenceError,
    DuplicateTitleError,
    EmptyGraphError,
    MalformedLineError,
    UnknownConceptError,
)
from wikisr.text import Span, join_tokens, span_of, tokenize

logger = logging.getLogger(__name__)

ConceptId = int

DEFAULT_MAX_NGRAM = 5

PAGES_FILE = "pages.tsv"
REDIRECTS_FILE = "redirects.tsv"
ANCHORS_FILE = "anchors.tsv"
LINKS_FILE = "links.tsv"

_EMPTY = np.empty(0, dtype=np.int64)
_EMPTY.setflags(write=False)


@dataclass(frozen=True)
class Sense:
    """One article a surface may refer to, with its anchor commonness."""

    concept: ConceptId
    commonness: float


@dataclass(frozen=True)
class AnchorRow:
    surface: str
    target: ConceptId
    count: int
    occurrences: int | None = None


class Candidate(NamedTuple):
    """A spotted n-gram: its span in the text and the normalized lookup surface."""

    span: Span
    surface: str


@dataclass(frozen=True, eq=False)
class LinkGraph:
    """Immutable store of the Wikipedia instantiation.

    ``anchors`` and ``anchor_occurrences`` are keyed by lowercased surface;
    titles and redirects keep their case.
    ``token_forms`` maps the space-joined token form of a punctuated surface
    such as ``Java (island)`` back to the surface itself.
    """

    titles: Mapping[ConceptId, str]
    articles: Mapping[str, ConceptId]
    redirects: Mapping[str, ConceptId]
    anchors: Mapping[str, tuple[tuple[ConceptId, int], ...]]
    anchor_occurrences: Mapping[str, int]
    inlink_arrays: Mapping[ConceptId, np.ndarray]
    max_surface_tokens: int = 1
    token_forms: Mapping[str, str] = MappingProxyType({})

    @property
    def total_articles(self) -> int:
        return len(self.titles)

    def __contains__(self, concept: object) -> bool:
        return concept in self.titles

    def title_of(self, concept: ConceptId) -> str:
        try:
            return self.titles[concept]
        except KeyError:
            raise UnknownConceptError(concept) from None

    def inlink_array(self, concept: ConceptId) -> np.ndarray:
        if concept not in self.titles:
            raise UnknownConceptError(concept)
        return self.inlink_arrays.get(concept, _EMPTY)

    def is_known_surface(self, surface: str) -> bool:
        return (
            surface in self.articles
            or surface in self.redirects
            or surface.lower() in self.anchors
        )

    def surface_for(self, joined: str) -> str | None:
        """The known surface whose tokens join to ``joined``, if any."""
        if self.is_known_surface(joined):
            return joined
        return self.token_forms.get(joined) or self.token_forms.get(joined.lower())

    def concept_ids(self) -> list[ConceptId]:
        return sorted(self.titles)


def _read_rows(path: Path, width: tuple[int, ...]) -> Iterable[tuple[int, list[str]]]:
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) not in width:
                raise MalformedLineError(
                    path, line_no, f"expected {' or '.join(map(str, width))} fields, got {len(fields)}"
                )
            yield line_no, fields


def _parse_int(path: Path, line_no: int, value: str, what: str, minimum: int = 0) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise MalformedLineError(path, line_no, f"{what} is not an integer: {value!r}") from None
    if parsed < minimum:
        raise MalformedLineError(path, line_no, f"{what} must be >= {minimum}, got {parsed}")
    return parsed


def build_graph(
    pages: Iterable[tuple[ConceptId, str]],
    redirects: Iterable[tuple[str, ConceptId]] = (),
    anchors: Iterable[AnchorRow] = (),
    links: Iterable[tuple[ConceptId, ConceptId]] = (),
) -> LinkGraph:
    """Index in-memory records into a :class:`LinkGraph`, enforcing its invariants."""
    titles: dict[ConceptId, str] = {}
    articles: dict[str, ConceptId] = {}
    for concept, title in pages:
        if concept < 0:
            raise ValueError(f"concept ids must be non-negative, got {concept}")
        if concept in titles:
            raise ValueError(f"duplicate article id {concept}")
        if title in articles:
            raise DuplicateTitleError(title)
        titles[concept] = title
        articles[title] = concept
    if not titles:
        raise EmptyGraphError()

    redirect_map: dict[str, ConceptId] = {}
    for surface, target in redirects:
        if target not in titles:
            raise DanglingReferenceError(target, "redirects")
        redirect_map[surface] = target

    counts: dict[str, dict[ConceptId, int]] = defaultdict(lambda: defaultdict(int))
    occurrences: dict[str, int] = {}
    for row in anchors:
        if row.target not in titles:
            raise DanglingReferenceError(row.target, "anchors")
        if row.count < 1:
            raise ValueError(f"anchor count must be >= 1 for {row.surface!r}")
        key = row.surface.lower()
        counts[key][row.target] += row.count
        if row.occurrences is not None:
            occurrences[key] = max(occurrences.get(key, 0), row.occurrences)
    anchor_map = {
        key: tuple(sorted(per_target.items())) for key, per_target in counts.items()
    }

    sources: dict[ConceptId, set[ConceptId]] = defaultdict(set)
    for source, target in links:
        if source not in titles:
            raise DanglingReferenceError(source, "links")
        if target not in titles:
            raise DanglingReferenceError(target, "links")
        sources[target].add(source)
    inlink_arrays: dict[ConceptId, np.ndarray] = {}
    for target, linked_from in sources.items():
        arr = np.array(sorted(linked_from), dtype=np.int64)
        arr.setflags(write=False)
        inlink_arrays[target] = arr

    surfaces = [*articles, *redirect_map, *anchor_map]
    longest = max((len(tokenize(s)) for s in surfaces), default=1)
    token_forms: dict[str, str] = {}
    for surface in surfaces:
        joined = join_tokens(tokenize(surface))
        if joined and joined != surface:
            token_forms.setdefault(joined, surface)

    return LinkGraph(
        titles=MappingProxyType(titles),
        articles=MappingProxyType(articles),
        redirects=MappingProxyType(redirect_map),
        anchors=MappingProxyType(anchor_map),
        anchor_occurrences=MappingProxyType(occurrences),
        inlink_arrays=MappingProxyType(inlink_arrays),
        max_surface_tokens=max(longest, 1),
        token_forms=MappingProxyType(token_forms),
    )


def _optional_table(path: str | Path | None) -> Path | None:
    if path is None:
        return None
    path = Path(path)
    if not path.exists():
        logger.warning("Table %s not found; loading it as empty", path)
        return None
    return path


def load_graph(
    pages_path: str | Path,
    redirects_path: str | Path | None = None,
    anchors_path: str | Path | None = None,
    links_path: str | Path | None = None,
) -> LinkGraph:
    """Load the four TSV tables. A missing redirects, anchors or links table loads as empty with a warning."""
    pages_path = Path(pages_path)

    pages: list[tuple[ConceptId, str]] = []
    seen_titles: set[str] = set()
    known: set[ConceptId] = set()
    for line_no, (raw_id, title) in _read_rows(pages_path, (2,)):
        if not title:
            raise MalformedLineError(pages_path, line_no, "empty title")
        if title in seen_titles:
            raise DuplicateTitleError(title)
        seen_titles.add(title)
        concept = _parse_int(pages_path, line_no, raw_id, "id")
        if concept in known:
            raise MalformedLineError(pages_path, line_no, f"duplicate article id {concept}")
        known.add(concept)
        pages.append((concept, title))
    if not pages:
        raise EmptyGraphError()

    def checked(path: Path, line_no: int, raw: str, what: str) -> ConceptId:
        concept = _parse_int(path, line_no, raw, what)
        if concept not in known:
            raise DanglingReferenceError(concept, f"{path.name}:{line_no}")
        return concept

    redirects: list[tuple[str, ConceptId]] = []
    path = _optional_table(redirects_path)
    if path is not None:
        for line_no, (surface, raw_target) in _read_rows(path, (2,)):
            redirects.append((surface, checked(path, line_no, raw_target, "target_id")))

    anchors: list[AnchorRow] = []
    path = _optional_table(anchors_path)
    if path is not None:
        for line_no, fields in _read_rows(path, (3, 4)):
            occurrences = (
                _parse_int(path, line_no, fields[3], "occurrences") if len(fields) == 4 else None
            )
            anchors.append(
                AnchorRow(
                    surface=fields[0],
                    target=checked(path, line_no, fields[1], "target_id"),
                    count=_parse_int(path, line_no, fields[2], "count", minimum=1),
                    occurrences=occurrences,
                )
            )

    links: list[tuple[ConceptId, ConceptId]] = []
    path = _optional_table(links_path)
    if path is not None:
        for line_no, (raw_source, raw_target) in _read_rows(path, (2,)):
            links.append(
                (checked(path, line_no, raw_source, "source_id"),
                 checked(path, line_no, raw_target, "target_id"))
            )

    graph = build_graph(pages, redirects, anchors, links)
    logger.info(
        "Loaded link graph: %d articles, %d redirects, %d anchor surfaces, %d links",
        graph.total_articles, len(graph.redirects), len(graph.anchors), len(links),
    )
    return graph


def load_graph_dir(graph_dir: str | Path) -> LinkGraph:
    graph_dir = Path(graph_dir)
    return load_graph(
        graph_dir / PAGES_FILE,
        graph_dir / REDIRECTS_FILE,
        graph_dir / ANCHORS_FILE,
        graph_dir / LINKS_FILE,
    )


def senses(g: LinkGraph, s: str) -> frozenset[Sense]:
    """Every article for which ``s`` is a title, redirect or anchor.

    Commonness comes from anchor counts; title/redirect senses that never
    appear as the anchor's target get 0. A surface with no anchor rows
    splits commonness evenly over its title/redirect senses.
    """
    rows = g.anchors.get(s.lower(), ())
    direct = {c for c in (g.articles.get(s), g.redirects.get(s)) if c is not None}

    if rows:
        total = sum(count for _, count in rows)
        found = {concept: count / total for concept, count in rows}
        for concept in direct:
            found.setdefault(concept, 0.0)
    elif direct:
        share = 1.0 / len(direct)
        found = {concept: share for concept in direct}
    else:
        return frozenset()
    return frozenset(Sense(concept, value) for concept, value in found.items())


def sense_ids(g: LinkGraph, s: str) -> frozenset[ConceptId]:
    return frozenset(sense.concept for sense in senses(g, s))


def inlinks(g: LinkGraph, w: ConceptId) -> frozenset[ConceptId]:
    return frozenset(int(x) for x in g.inlink_array(w))


def link_probability(g: LinkGraph, surface: str) -> float:
    """Share of a surface's occurrences that are linked.

    0 for surfaces never used as an anchor; 1 when the anchors table has no
    plain-text occurrence column for the surface.
    """
    key = surface.lower()
    rows = g.anchors.get(key)
    if not rows:
        return 0.0
    linked = sum(count for _, count in rows)
    unlinked = g.anchor_occurrences.get(key)
    if unlinked is None:
        return 1.0
    return linked / (linked + unlinked)


def anchor_candidates(
    g: LinkGraph, text: str, max_ngram: int = DEFAULT_MAX_NGRAM
) -> list[Candidate]:
    """Spot known surfaces, longest match first, left to right, without overlap."""
    if max_ngram < 1:
        raise ValueError(f"max_ngram must be >= 1, got {max_ngram}")
    tokens = tokenize(text)
    limit = min(max_ngram, g.max_surface_tokens)
    found: list[Candidate] = []
    i = 0
    while i < len(tokens):
        for n in range(min(limit, len(tokens) - i), 0, -1):
            window = tokens[i : i + n]
            surface = g.surface_for(join_tokens(window))
            if surface is not None:
                start = window[0].start
                if text.startswith(surface, start):
                    span = Span(start, start + len(surface), surface)
                else:
                    span = span_of(text, window)
                found.append(Candidate(span, surface))
                logger.debug("Candidate %r at %d", surface, window[0].start)
                i += n
                break
        else:
            i += 1
    return found
