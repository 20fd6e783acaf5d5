"""Tier 2: Analyze tools: rule filtering and rule learning over corpora.

Tools:
- wikisr.filter      [ANALYZE] Apply a semantic rule to a corpus.jsonl
- wikisr.build_rule  [ANALYZE] Learn a rule and thresholds for one topic
"""

from __future__ import annotations

import asyncio
import json
import logging
from typing import Any

from wikisr.artifacts import cleanup_run_dir, create_temp_dir, file_artifact, should_inline
from wikisr.builder import TrainingSet
from wikisr.envelope import EnvelopeWarning, build_envelope, error_envelope
from wikisr.errors import WikiSRError
from wikisr.evaluator import SemanticRule, evaluate, evaluate_exact
from wikisr.harness import Judgments, learn_rule, load_corpus, read_topic_statement
from wikisr.query import parse_query, serialize_query
from wikisr.resources import resources_from_env

logger = logging.getLogger(__name__)

VERDICTS_FILE = "verdicts.jsonl"


def _filter(
    rule: str,
    corpus_path: str,
    c1: float | None,
    c2: float | None,
    named_entities: list[str] | None,
    exact: bool,
) -> str:
    res = resources_from_env()
    vocab = res.vocabulary().with_named_entities(named_entities or ())
    semantic = SemanticRule(
        parse_query(rule, vocab),
        res.settings.c1 if c1 is None else c1,
        res.settings.c2 if c2 is None else c2,
    )
    corpus = load_corpus(corpus_path)

    run_dir = create_temp_dir()
    verdicts_path = run_dir / VERDICTS_FILE
    matches = 0
    empty: list[str] = []
    try:
        with verdicts_path.open("w", encoding="utf-8") as out:
            for doc_id, text in corpus.items():
                m = res.model(text, doc_id)
                if m.is_empty():
                    empty.append(doc_id)
                if exact:
                    result = evaluate_exact(res.ontology, semantic.query, m, subsumption=res.settings.subsumption)
                else:
                    result = evaluate(
                        res.graph, res.ontology, semantic, m,
                        subsumption=res.settings.subsumption, cache=res.cache,
                    )
                matches += result.match
                out.write(result.to_json(doc_id) + "\n")
    except Exception:
        cleanup_run_dir(run_dir)
        raise

    data: dict[str, Any] = {
        "rule": serialize_query(semantic.query),
        "c1": semantic.c1,
        "c2": semantic.c2,
        "exact": exact,
        "documents": len(corpus),
        "matches": matches,
    }
    artifact = None
    if should_inline(verdicts_path):
        data["verdicts"] = [
            json.loads(line) for line in verdicts_path.read_text(encoding="utf-8").splitlines()
        ]
        cleanup_run_dir(run_dir)
    else:
        artifact = file_artifact(verdicts_path)
    warnings = []
    if empty:
        warnings.append(EnvelopeWarning(
            code="EMPTY_MODEL",
            message=f"{len(empty)} document(s) have no concepts or words: {', '.join(empty[:5])}",
        ))
    return build_envelope(
        summary=f"{matches} of {len(corpus)} documents match",
        data=data,
        impact="analyze",
        artifact=artifact,
        warnings=warnings,
    )


async def wikisr_filter(
    rule: str,
    corpus_path: str,
    c1: float | None = None,
    c2: float | None = None,
    named_entities: list[str] | None = None,
    exact: bool = False,
) -> str:
    """[ANALYZE] Evaluate a semantic rule against every document of a corpus.jsonl.

    Returns per-document verdicts inline, or an artifact path when large.
    """
    try:
        return await asyncio.to_thread(_filter, rule, corpus_path, c1, c2, named_entities, exact)
    except (WikiSRError, ValueError, OSError) as exc:
        return error_envelope(f"Filter failed: {exc}", impact="analyze", error=type(exc).__name__)


def _build_rule(topic: str, judgments: dict[str, bool], corpus_path: str, seed: int) -> str:
    res = resources_from_env()
    statement = read_topic_statement(topic)
    corpus = load_corpus(corpus_path)
    judged = Judgments("mcp", judgments)
    missing = sorted(set(judged.entries) - set(corpus))
    if missing:
        return error_envelope(
            f"Judged documents missing from corpus: {', '.join(missing[:5])}", impact="analyze"
        )
    train = TrainingSet(
        tuple(res.model(corpus[d], d) for d in judged.positives()),
        tuple(res.model(corpus[d], d) for d in judged.negatives()),
    )
    learned = learn_rule(res, statement, train, seed)
    data = {
        **learned.identity(),
        "rule_hash": learned.rule_hash,
        "train_f": learned.train_f,
        "terminals": list(learned.terminals),
    }
    return build_envelope(
        summary=f"Learned rule with training F {learned.train_f:.4f}",
        data=data,
        impact="analyze",
    )


async def wikisr_build_rule(
    topic: str,
    judgments: dict[str, bool],
    corpus_path: str,
    seed: int,
) -> str:
    """[ANALYZE] Learn a semantic rule for a topic statement from judged examples.

    Args:
        topic: Topic statement text (optionally with <title>/<desc>/<narr> sections).
        judgments: doc_id -> relevant flag for the training documents.
        corpus_path: corpus.jsonl holding the judged documents.
        seed: GP random seed.
    """
    try:
        return await asyncio.to_thread(_build_rule, topic, judgments, corpus_path, seed)
    except (WikiSRError, ValueError, OSError) as exc:
        return error_envelope(f"Rule building failed: {exc}", impact="analyze", error=type(exc).__name__)
