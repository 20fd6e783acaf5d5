"""FastMCP server for wikisr tools.

Entry point: `wikisr-mcp` (stdio transport)
"""

from __future__ import annotations

import logging
import sys

from mcp.server.fastmcp import FastMCP

from wikisr import __version__
from wikisr.errors import WikiSRError
from wikisr.resources import resources_from_env
from wikisr.tools.analyze import wikisr_build_rule, wikisr_filter
from wikisr.tools.read import wikisr_profile, wikisr_relatedness, wikisr_senses, wikisr_wikify

logger = logging.getLogger(__name__)


def _create_mcp_server() -> FastMCP:
    """Create FastMCP server across SDK versions.

    Newer `mcp` SDK builds removed the `version` kwarg from FastMCP.__init__.
    """
    try:
        return FastMCP("wikisr", version=__version__)
    except TypeError as exc:
        if "version" not in str(exc):
            raise
        logger.info("FastMCP does not accept 'version'; starting without it")
        return FastMCP("wikisr")


mcp = _create_mcp_server()

# ──────────────────────────────────────────────
# Tier 1: Read
# ──────────────────────────────────────────────

@mcp.tool(name="wikisr.senses")
async def tool_senses(term: str) -> str:
    """[READ] List the Wikipedia articles a surface term may refer to.
    Each sense carries its commonness (share of anchor links pointing to it).

    Args:
        term: Surface text (title, redirect or anchor), e.g. "Java".
    """
    return await wikisr_senses(term)


@mcp.tool(name="wikisr.relatedness")
async def tool_relatedness(a: str, b: str) -> str:
    """[READ] Link-structure relatedness of two terms, in [0, 1].
    Returns the value and the pair of senses that attains it.

    Args:
        a: First term.
        b: Second term.
    """
    return await wikisr_relatedness(a, b)


@mcp.tool(name="wikisr.wikify")
async def tool_wikify(text: str) -> str:
    """[READ] Detect and disambiguate the Wikipedia articles a text links to.

    Args:
        text: Document text.
    """
    return await wikisr_wikify(text)


@mcp.tool(name="wikisr.profile")
async def tool_profile(text: str, doc_id: str = "") -> str:
    """[READ] Build the document model of a text: named entities, general
    concepts, ontology concepts and bag of words.

    Args:
        text: Document text.
        doc_id: Optional identifier echoed in the model record.
    """
    return await wikisr_profile(text, doc_id)


# ──────────────────────────────────────────────
# Tier 2: Analyze
# ──────────────────────────────────────────────

@mcp.tool(name="wikisr.filter")
async def tool_filter(
    rule: str,
    corpus_path: str,
    c1: float | None = None,
    c2: float | None = None,
    named_entities: list[str] | None = None,
    exact: bool = False,
) -> str:
    """[ANALYZE] Apply a semantic rule to every document of a corpus.jsonl.
    Verdicts are inlined up to 64 KB, otherwise returned as a file artifact.

    Args:
        rule: Query text, e.g. '"UnitedStates" AND ("Fraud" OR "Espionage")'.
        corpus_path: Path to corpus.jsonl ({"id", "text"} per line).
        c1: Named-entity threshold (default from settings).
        c2: General threshold (default from settings).
        named_entities: Leaf names to treat as named entities.
        exact: Plain boolean evaluation without relatedness expansion.
    """
    return await wikisr_filter(rule, corpus_path, c1, c2, named_entities, exact)


@mcp.tool(name="wikisr.build_rule")
async def tool_build_rule(
    topic: str,
    judgments: dict[str, bool],
    corpus_path: str,
    seed: int,
) -> str:
    """[ANALYZE] Learn a semantic rule for a topic from judged example documents.
    Returns the rule, tuned thresholds and a rule_hash.

    Args:
        topic: Topic statement text.
        judgments: doc_id -> relevant flag for training documents.
        corpus_path: Path to corpus.jsonl holding those documents.
        seed: GP random seed.
    """
    return await wikisr_build_rule(topic, judgments, corpus_path, seed)


# ──────────────────────────────────────────────
# Server entry point
# ──────────────────────────────────────────────

def main() -> None:
    """CLI entry point for wikisr-mcp."""
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        stream=sys.stderr,  # MCP uses stdout for protocol; logs go to stderr
    )

    try:
        res = resources_from_env()
        logger.info("Starting wikisr-mcp v%s (%d articles)", __version__, res.graph.total_articles)
    except WikiSRError as exc:
        logger.error("Startup failed: %s", exc)
        print(str(exc), file=sys.stderr)
        sys.exit(1)

    mcp.run(transport="stdio")


if __name__ == "__main__":
    main()
