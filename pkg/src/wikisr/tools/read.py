"""Tier 1: Read tools: lookups over the loaded resources, no side effects.

Tools:
- wikisr.senses       [READ] Senses of a surface term with commonness
- wikisr.relatedness  [READ] Term relatedness with the witnessing sense pair
- wikisr.wikify       [READ] Concepts a text links to
- wikisr.profile      [READ] Three-part document model of a text
"""

from __future__ import annotations

import asyncio
import logging

from wikisr.envelope import build_envelope, error_envelope
from wikisr.errors import WikiSRError
from wikisr.linkgraph import senses
from wikisr.relatedness import term_rel_witness
from wikisr.resources import resources_from_env
from wikisr.wikifier import link_mentions

logger = logging.getLogger(__name__)


def _senses(term: str) -> str:
    g = resources_from_env().graph
    found = sorted(senses(g, term), key=lambda s: (-s.commonness, s.concept))
    items = [
        {"concept": s.concept, "title": g.title_of(s.concept), "commonness": round(s.commonness, 6)}
        for s in found
    ]
    return build_envelope(
        summary=f"{len(items)} sense(s) for {term!r}",
        data={"term": term, "senses": items},
    )


async def wikisr_senses(term: str) -> str:
    """[READ] List the articles a surface term may refer to, most common first."""
    try:
        return await asyncio.to_thread(_senses, term)
    except WikiSRError as exc:
        return error_envelope(f"Sense lookup failed: {exc}", error=type(exc).__name__)


def _relatedness(a: str, b: str) -> str:
    g = resources_from_env().graph
    value, left, right = term_rel_witness(g, a, b)
    witness = None if left is None or right is None else [g.title_of(left), g.title_of(right)]
    return build_envelope(
        summary=f"relatedness({a!r}, {b!r}) = {value:.4f}",
        data={"a": a, "b": b, "relatedness": value, "witness": witness},
    )


async def wikisr_relatedness(a: str, b: str) -> str:
    """[READ] Link-structure relatedness of two terms in [0, 1]."""
    try:
        return await asyncio.to_thread(_relatedness, a, b)
    except WikiSRError as exc:
        return error_envelope(f"Relatedness failed: {exc}", error=type(exc).__name__)


def _wikify(text: str) -> str:
    res = resources_from_env()
    mentions = link_mentions(res.graph, res.settings.wikify, text, res.cache)
    items = [
        {
            "concept": m.concept,
            "title": res.graph.title_of(m.concept),
            "surface": m.surface,
            "start": m.span.start,
            "end": m.span.end,
            "score": round(m.score, 6),
        }
        for m in sorted(mentions, key=lambda m: (m.span.start, m.concept))
    ]
    concepts = sorted({m.concept for m in mentions})
    return build_envelope(
        summary=f"Linked {len(concepts)} concept(s) from {len(mentions)} mention(s)",
        data={"concepts": concepts, "mentions": items},
    )


async def wikisr_wikify(text: str) -> str:
    """[READ] Detect and disambiguate the Wikipedia articles a text links to."""
    try:
        return await asyncio.to_thread(_wikify, text)
    except WikiSRError as exc:
        return error_envelope(f"Wikify failed: {exc}", error=type(exc).__name__)


def _profile(text: str, doc_id: str) -> str:
    model = resources_from_env().model(text, doc_id)
    record = model.to_record()
    return build_envelope(
        summary=(
            f"{len(model.wiki_ne)} named entities, {len(model.wiki_general)} general concepts, "
            f"{len(model.onto)} ontology concepts, {len(model.bow)} words"
        ),
        data={"model": record},
    )


async def wikisr_profile(text: str, doc_id: str = "") -> str:
    """[READ] Build the document model (NE, general, ontology, bag of words) of a text."""
    try:
        return await asyncio.to_thread(_profile, text, doc_id)
    except WikiSRError as exc:
        return error_envelope(f"Profile failed: {exc}", error=type(exc).__name__)
