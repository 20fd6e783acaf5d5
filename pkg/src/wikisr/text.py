"""Tokenization helpers shared by wikification, NER and ontology profiling."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import NamedTuple

# Dotted abbreviations first so "U.S." stays one token.
_TOKEN_RE = re.compile(r"(?:[A-Za-z]\.){2,}|\w+(?:[-'&]\w+)*")
_BOW_SPLIT_RE = re.compile(r"[^0-9a-z]+")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_SENTENCE_END = ".!?"


class Token(NamedTuple):
    text: str
    start: int
    end: int


class Span(NamedTuple):
    """Half-open character span ``[start, end)`` with its surface text."""

    start: int
    end: int
    surface: str

    def overlaps(self, other: Span) -> bool:
        return self.start < other.end and other.start < self.end


def tokenize(text: str) -> list[Token]:
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def is_sentence_start(text: str, token: Token) -> bool:
    """True if ``token`` opens the document or follows ``.``, ``!`` or ``?``."""
    prefix = text[: token.start].rstrip()
    return not prefix or prefix[-1] in _SENTENCE_END


def join_tokens(tokens: list[Token] | tuple[Token, ...]) -> str:
    return " ".join(t.text for t in tokens)


def span_of(text: str, tokens: list[Token] | tuple[Token, ...]) -> Span:
    start, end = tokens[0].start, tokens[-1].end
    return Span(start, end, text[start:end])


def bow_terms(text: str, stopwords: frozenset[str]) -> frozenset[str]:
    return frozenset(
        t for t in _BOW_SPLIT_RE.split(text.lower()) if len(t) >= 2 and t not in stopwords
    )


def camel_words(name: str) -> str:
    """``"PutOption"`` -> ``"put option"``."""
    return _CAMEL_RE.sub(" ", name).lower()


def compact_name(title: str) -> str:
    """Display name for a title: ``"Trade secret"`` -> ``"TradeSecret"``."""
    words = re.findall(r"[0-9A-Za-z]+", title)
    return "".join(w[:1].upper() + w[1:] for w in words)


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    if path is None:
        raw = resources.files("wikisr.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower() for line in raw.splitlines() if line.strip() and not line.startswith("#")
    )
