"""Named-entity recognition from a gazetteer plus a capitalization heuristic."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from wikisr.errors import MalformedLineError
from wikisr.text import Span, Token, is_sentence_start, join_tokens, span_of, tokenize

logger = logging.getLogger(__name__)

ENTITY_CLASSES = frozenset({"person", "organization", "location", "other"})


@dataclass(frozen=True, eq=False)
class Gazetteer:
    """Surface -> entity class. Matching is case-sensitive."""

    entries: Mapping[str, str]
    max_tokens: int = 1

    def __contains__(self, surface: object) -> bool:
        return surface in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def label_of(self, surface: str) -> str | None:
        return self.entries.get(surface)

    def with_entry(self, surface: str, label: str) -> Gazetteer:
        return make_gazetteer({**self.entries, surface: label})


@dataclass(frozen=True)
class Entity:
    span: Span
    label: str
    source: str  # gazetteer | heuristic


def make_gazetteer(entries: Mapping[str, str]) -> Gazetteer:
    normalized: dict[str, str] = {}
    for surface, label in entries.items():
        if label not in ENTITY_CLASSES:
            raise ValueError(f"unknown entity class {label!r} for {surface!r}")
        key = join_tokens(tokenize(surface))
        if not key:
            raise ValueError(f"gazetteer surface has no tokens: {surface!r}")
        normalized[key] = label
    longest = max((len(key.split(" ")) for key in normalized), default=1)
    return Gazetteer(entries=MappingProxyType(normalized), max_tokens=longest)


def load_gazetteer(path: str | Path) -> Gazetteer:
    """Load ``surface<TAB>class`` rows."""
    path = Path(path)
    entries: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise MalformedLineError(path, line_no, f"expected 2 fields, got {len(fields)}")
            surface, label = fields[0].strip(), fields[1].strip()
            if label not in ENTITY_CLASSES:
                raise MalformedLineError(path, line_no, f"unknown entity class {label!r}")
            if surface in entries:
                raise MalformedLineError(path, line_no, f"duplicate surface {surface!r}")
            entries[surface] = label
    if not entries:
        raise MalformedLineError(path, 0, "gazetteer is empty")
    gazetteer = make_gazetteer(entries)
    logger.info("Loaded gazetteer: %d entries", len(gazetteer))
    return gazetteer


def _gazetteer_matches(gz: Gazetteer, text: str, tokens: list[Token]) -> list[Entity]:
    found = []
    for i in range(len(tokens)):
        for n in range(1, min(gz.max_tokens, len(tokens) - i) + 1):
            window = tokens[i : i + n]
            label = gz.entries.get(join_tokens(window))
            if label is not None:
                found.append(Entity(span_of(text, window), label, "gazetteer"))
    return found


def _capitalized_runs(text: str, tokens: list[Token]) -> list[Entity]:
    """Runs of >= 2 capitalized tokens; a sentence-initial token is not evidence."""
    found = []
    run: list[Token] = []

    def flush() -> None:
        body = run[1:] if run and is_sentence_start(text, run[0]) else run
        if len(body) >= 2:
            found.append(Entity(span_of(text, body), "other", "heuristic"))

    for token in tokens:
        capitalized = token.text[:1].isupper()
        adjacent = bool(run) and not text[run[-1].end : token.start].strip()
        if capitalized and (adjacent or not run):
            run.append(token)
            continue
        flush()
        run = [token] if capitalized else []
    flush()
    return found


def recognize_entities(gz: Gazetteer, d: str) -> list[Entity]:
    """Maximal entity spans, ordered by position."""
    tokens = tokenize(d)
    matches = _gazetteer_matches(gz, d, tokens) + _capitalized_runs(d, tokens)
    maximal = [
        e for e in matches
        if not any(
            o.span.start <= e.span.start and e.span.end <= o.span.end
            and (o.span.start, o.span.end) != (e.span.start, e.span.end)
            for o in matches
        )
    ]
    unique: dict[tuple[int, int], Entity] = {}
    for entity in sorted(maximal, key=lambda e: (e.span.start, e.span.end, e.source)):
        unique.setdefault((entity.span.start, entity.span.end), entity)
    return list(unique.values())


def recognize(gz: Gazetteer, d: str) -> frozenset[str]:
    return frozenset(e.span.surface for e in recognize_entities(gz, d))
