"""Wikification: detect and disambiguate the articles a document links to.

Pipeline per document:
1. Spot candidate n-grams against titles, redirects and anchors
2. Drop anchor surfaces whose link probability is below the configured minimum
3. Resolve ambiguous surfaces by commonness blended with mean relatedness
   to the senses of unambiguous surfaces in the same document
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from wikisr.linkgraph import (
    DEFAULT_MAX_NGRAM,
    ConceptId,
    LinkGraph,
    anchor_candidates,
    link_probability,
    senses,
)
from wikisr.relatedness import RelatednessCache, link_rel
from wikisr.text import Span

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WikifyConfig:
    max_ngram: int = DEFAULT_MAX_NGRAM
    link_probability_min: float = 0.05
    commonness_weight: float = 0.5

    def __post_init__(self) -> None:
        if self.max_ngram < 1:
            raise ValueError(f"max_ngram must be >= 1, got {self.max_ngram}")
        if not 0.0 <= self.link_probability_min <= 1.0:
            raise ValueError(f"link_probability_min must be in [0, 1], got {self.link_probability_min}")
        if not 0.0 <= self.commonness_weight <= 1.0:
            raise ValueError(f"commonness_weight must be in [0, 1], got {self.commonness_weight}")


@dataclass(frozen=True)
class Mention:
    """A span of the document linked to one article."""

    span: Span
    surface: str
    concept: ConceptId
    score: float
    ambiguous: bool = False


def candidate_link_probability(g: LinkGraph, surface: str) -> float:
    """Link probability for anchor surfaces; exact titles and redirects pass with 1."""
    if surface.lower() in g.anchors:
        return link_probability(g, surface)
    return 1.0


def link_mentions(
    g: LinkGraph,
    cfg: WikifyConfig,
    d: str,
    cache: RelatednessCache | None = None,
) -> list[Mention]:
    pair = cache.link_rel if cache is not None else (lambda a, b: link_rel(g, a, b))

    candidates = [(c, senses(g, c.surface)) for c in anchor_candidates(g, d, cfg.max_ngram)]
    # Context: unambiguous candidates, before the link-probability filter.
    context = sorted({next(iter(s)).concept for _, s in candidates if len(s) == 1})
    alpha = cfg.commonness_weight

    spotted = []
    for candidate, options in candidates:
        probability = candidate_link_probability(g, candidate.surface)
        if probability < cfg.link_probability_min:
            logger.debug("Dropped %r (link probability %.4f)", candidate.surface, probability)
            continue
        spotted.append((candidate, options))

    mentions: list[Mention] = []
    for candidate, options in spotted:
        if len(options) == 1:
            only = next(iter(options))
            mentions.append(Mention(candidate.span, candidate.surface, only.concept, 1.0))
            continue
        scored = []
        for sense in options:
            if context:
                mean = sum(pair(sense.concept, c) for c in context) / len(context)
                score = alpha * sense.commonness + (1.0 - alpha) * mean
            else:
                score = sense.commonness
            scored.append((-score, sense.concept))
        neg_score, chosen = min(scored)
        logger.debug("Resolved %r -> %d (score %.4f)", candidate.surface, chosen, -neg_score)
        mentions.append(
            Mention(candidate.span, candidate.surface, chosen, -neg_score, ambiguous=True)
        )
    return mentions


def wikify(g: LinkGraph, cfg: WikifyConfig, d: str) -> frozenset[ConceptId]:
    return frozenset(m.concept for m in link_mentions(g, cfg, d))
