"""Batch command-line surface.

Entry point: `wikisr <command>`

Commands:
- ingest                    validate and index resources
- wikify <doc>              print the concepts a document links to
- relatedness <a> <b>       print term relatedness
- profile <doc>             print the document model as JSONL
- build-rule <topic> <train>  learn a rule and thresholds for one topic
- filter <rule> <corpus>    print match bits (or verdict JSONL with --explain)
- evaluate <suite-dir>      full harness run, writes report.json

Exit status: 0 on success, 1 on usage errors, 2 on data errors. Failures
write one JSON line ``{"error": ..., "message": ...}`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from wikisr import __version__
from wikisr.builder import TrainingSet
from wikisr.config import Settings, load_settings
from wikisr.errors import DataError, UsageError, WikiSRError
from wikisr.evaluator import SemanticRule, evaluate, evaluate_exact
from wikisr.harness import (
    learn_rule,
    load_corpus,
    load_judgments,
    read_topic_statement,
    run_suite,
    write_report,
)
from wikisr.linkgraph import senses
from wikisr.query import parse_query
from wikisr.relatedness import term_rel_witness
from wikisr.resources import (
    ENV_CONFIG,
    ENV_GAZETTEER,
    ENV_GRAPH_DIR,
    ENV_ONTOLOGY,
    ENV_STOPWORDS,
    Resources,
    load_resources,
)
from wikisr.wikifier import link_mentions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

REPORT_FILE = "report.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().strip()}")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph-dir", default=os.environ.get(ENV_GRAPH_DIR), help="directory with pages/redirects/anchors/links TSV tables")
    common.add_argument("--ontology", default=os.environ.get(ENV_ONTOLOGY), help="ontology triples TSV")
    common.add_argument("--gazetteer", default=os.environ.get(ENV_GAZETTEER), help="gazetteer TSV (surface, class)")
    common.add_argument("--stopwords", default=os.environ.get(ENV_STOPWORDS), help="stopword list (default: bundled)")
    common.add_argument("--config", default=os.environ.get(ENV_CONFIG), help="key=value settings file")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="wikisr", description="Wikipedia-relatedness semantic rules for document filtering.")
    parser.add_argument("--version", action="version", version=f"wikisr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("ingest", parents=[common], help="validate and index resources")

    p = sub.add_parser("wikify", parents=[common], help="print the concepts a document links to")
    p.add_argument("doc", help="document text file ('-' for stdin)")

    p = sub.add_parser("relatedness", parents=[common], help="print term relatedness")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--explain", action="store_true", help="print the witnessing sense pair as JSON")

    p = sub.add_parser("profile", parents=[common], help="print the document model as JSONL")
    p.add_argument("doc", help="document text file ('-' for stdin)")

    p = sub.add_parser("build-rule", parents=[common], help="learn a rule and thresholds for one topic")
    p.add_argument("topic", help="topic statement file; its stem is the topic id")
    p.add_argument("train", help="training judgments TSV")
    p.add_argument("--corpus", required=True, help="corpus.jsonl holding the judged documents")
    p.add_argument("--seed", type=int, help="GP random seed")
    p.add_argument("--out", help="write the rule JSON here instead of stdout")

    p = sub.add_parser("filter", parents=[common], help="apply a rule to a corpus")
    p.add_argument("rule", help="rule JSON from build-rule, or a query text file")
    p.add_argument("corpus", help="corpus.jsonl")
    p.add_argument("--explain", action="store_true", help="emit verdict JSONL")
    p.add_argument("--exact", action="store_true", help="plain boolean evaluation, no relatedness expansion")
    p.add_argument("--out", help="write results here instead of stdout")

    p = sub.add_parser("evaluate", parents=[common], help="run a topic suite and write report.json")
    p.add_argument("suite", help="suite directory (corpus.jsonl, train.tsv, test.tsv, topics/)")
    p.add_argument("--seed", type=int, help="base GP random seed")
    p.add_argument("--jobs", type=int, default=1, help="topics run in parallel (default 1)")
    p.add_argument("--out", default=".", help="output directory for report.json")
    return parser


def _settings(args: argparse.Namespace) -> Settings:
    settings = load_settings(args.config) if args.config else Settings()
    return settings.with_overrides(rng_seed=getattr(args, "seed", None))


def _resources(args: argparse.Namespace) -> Resources:
    if not args.graph_dir:
        raise UsageError(f"--graph-dir is required (or set {ENV_GRAPH_DIR})")
    return load_resources(args.graph_dir, args.ontology, args.gazetteer, args.stopwords, _settings(args))


def _read_doc(path: str) -> tuple[str, str]:
    if path == "-":
        return "stdin", sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise DataError(f"document not found: {p}")
    return p.stem, p.read_text(encoding="utf-8")


def _writer(out: str | None) -> TextIO:
    if out is None:
        return sys.stdout
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    return open(out, "w", encoding="utf-8")


# --- commands ------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    res = _resources(args)
    g, o = res.graph, res.ontology
    summary = {
        "articles": g.total_articles,
        "redirects": len(g.redirects),
        "anchor_surfaces": len(g.anchors),
        "links": sum(a.size for a in g.inlink_arrays.values()),
        "ontology_facts": len(o.facts),
        "ontology_concepts": len(o.concepts),
        "ontology_depth": o.depth(),
        "gazetteer_entries": len(res.gazetteer),
        "vocabulary": len(res.vocabulary()),
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_wikify(args: argparse.Namespace) -> int:
    res = _resources(args)
    _, text = _read_doc(args.doc)
    concepts = {m.concept for m in link_mentions(res.graph, res.settings.wikify, text, res.cache)}
    for concept in sorted(concepts):
        print(f"{concept}\t{res.graph.title_of(concept)}")
    return EXIT_OK


def cmd_relatedness(args: argparse.Namespace) -> int:
    res = _resources(args)
    value, left, right = term_rel_witness(res.graph, args.a, args.b)
    if args.explain:
        g = res.graph
        print(json.dumps({
            "a": args.a,
            "b": args.b,
            "relatedness": round(value, 6),
            "senses_a": sorted([s.concept, round(s.commonness, 6)] for s in senses(g, args.a)),
            "senses_b": sorted([s.concept, round(s.commonness, 6)] for s in senses(g, args.b)),
            "witness": None if left is None else [g.title_of(left), g.title_of(right)],  # type: ignore[arg-type]
        }, sort_keys=True))
    else:
        print(f"{value:.4f}")
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    res = _resources(args)
    doc_id, text = _read_doc(args.doc)
    print(res.model(text, doc_id).to_json())
    return EXIT_OK


def cmd_build_rule(args: argparse.Namespace) -> int:
    res = _resources(args)
    topic_path = Path(args.topic)
    if not topic_path.is_file():
        raise DataError(f"topic statement not found: {topic_path}")
    topic_id = topic_path.stem
    statement = read_topic_statement(topic_path.read_text(encoding="utf-8"))
    judged = load_judgments(args.train).get(topic_id)
    if judged is None:
        raise DataError(f"no training judgments for topic {topic_id!r}")
    corpus = load_corpus(args.corpus)
    missing = sorted(set(judged.entries) - set(corpus))
    if missing:
        raise DataError(f"judged documents missing from corpus: {missing[:5]}")

    train = TrainingSet(
        tuple(res.model(corpus[d], d) for d in judged.positives()),
        tuple(res.model(corpus[d], d) for d in judged.negatives()),
    )
    learned = learn_rule(res, statement, train)
    record = {
        "topic_id": topic_id,
        **learned.identity(),
        "train_f": round(learned.train_f, 6),
        "seed": learned.seed,
        "rule_hash": learned.rule_hash,
    }
    out = _writer(args.out)
    try:
        out.write(json.dumps(record, sort_keys=True) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def load_rule(path: str | Path, res: Resources) -> SemanticRule:
    """A rule from build-rule JSON, or a bare query with the configured thresholds."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"rule file not found: {path}")
    raw = path.read_text(encoding="utf-8").strip()
    vocab = res.vocabulary()
    if raw.startswith("{"):
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid rule JSON: {exc.msg}") from None
        if not isinstance(record, dict) or not isinstance(record.get("rule"), str):
            raise DataError(f"{path}: rule JSON needs a \"rule\" string")
        vocab = vocab.with_named_entities(record.get("named_entities", ()))
        query = parse_query(record["rule"], vocab)
        return SemanticRule(query, float(record.get("c1", res.settings.c1)), float(record.get("c2", res.settings.c2)))
    return SemanticRule(parse_query(raw, vocab), res.settings.c1, res.settings.c2)


def cmd_filter(args: argparse.Namespace) -> int:
    res = _resources(args)
    rule = load_rule(args.rule, res)
    corpus = load_corpus(args.corpus)
    subsumption = res.settings.subsumption
    out = _writer(args.out)
    try:
        for doc_id, text in corpus.items():
            m = res.model(text, doc_id)
            if args.exact:
                result = evaluate_exact(res.ontology, rule.query, m, subsumption=subsumption)
            else:
                result = evaluate(res.graph, res.ontology, rule, m, subsumption=subsumption, cache=res.cache)
            if args.explain:
                out.write(result.to_json(doc_id) + "\n")
            else:
                out.write(f"{doc_id}\t{result.match}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    res = _resources(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    seed = res.settings.rng_seed
    if seed is None:
        raise UsageError("a GP seed is required (--seed or gp.rng_seed)")
    result = run_suite(args.suite, res, seed=seed, jobs=args.jobs)
    path = write_report(Path(args.out) / REPORT_FILE, result)
    print(str(path))
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "wikify": cmd_wikify,
    "relatedness": cmd_relatedness,
    "profile": cmd_profile,
    "build-rule": cmd_build_rule,
    "filter": cmd_filter,
    "evaluate": cmd_evaluate,
}


def _emit_error(exc: BaseException) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)


def dispatch(argv: Sequence[str]) -> int:
    try:
        args = build_parser().parse_args(list(argv))
        logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.WARNING)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    except (WikiSRError, ValueError, OSError) as exc:
        logger.debug("Command failed", exc_info=True)
        _emit_error(exc)
        return EXIT_DATA


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entry point for wikisr."""
    logging.basicConfig(
        level=logging.WARNING,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        stream=sys.stderr,  # stdout carries data
    )
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
