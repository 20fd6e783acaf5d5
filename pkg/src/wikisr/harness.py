"""Experiment orchestration: per-topic training, test evaluation and reports.

Handles:
- Judgments, corpus and topic-statement loading
- Threshold tuning by grid search over (c1, c2)
- The per-topic pipeline: terminals, GP rule, thresholds, test metrics
- Macro-averaged panels (all topics, tr <= 5, tr > 5)
- Suite runs over a directory with topic-level parallelism
- report.json with benchmark reference rows and a fingerprint
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources as package_data
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from wikisr.builder import TrainingSet, run_gp, terminal_set
from wikisr.docmodel import DocumentModel
from wikisr.envelope import compute_digest
from wikisr.errors import DataError, EmptyAggregateError, EmptyTerminalSetError, MalformedLineError
from wikisr.evaluator import SemanticRule, collect_evidence, evaluate, evaluate_evidence
from wikisr.linkgraph import LinkGraph
from wikisr.ontology import Ontology
from wikisr.query import Query, concepts_of, serialize_query
from wikisr.relatedness import RelatednessCache
from wikisr.resources import Resources

logger = logging.getLogger(__name__)

CORPUS_FILE = "corpus.jsonl"
TRAIN_FILE = "train.tsv"
TEST_FILE = "test.tsv"
TOPICS_DIR = "topics"

TR_SPLIT = 5.0


# --- inputs --------------------------------------------------------------


@dataclass(frozen=True)
class Judgments:
    topic_id: str
    entries: Mapping[str, bool]

    def positives(self) -> list[str]:
        return sorted(d for d, relevant in self.entries.items() if relevant)

    def negatives(self) -> list[str]:
        return sorted(d for d, relevant in self.entries.items() if not relevant)

    @property
    def ratio(self) -> float:
        positives = len(self.positives())
        return len(self.negatives()) / positives if positives else 0.0


def load_judgments(path: str | Path) -> dict[str, Judgments]:
    """Read ``topic_id<TAB>doc_id<TAB>{0|1}`` rows, grouped by topic."""
    path = Path(path)
    grouped: dict[str, dict[str, bool]] = {}
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3 or fields[2] not in ("0", "1"):
                raise MalformedLineError(path, line_no, "expected topic_id, doc_id, 0|1")
            topic_id, doc_id, label = fields
            entries = grouped.setdefault(topic_id, {})
            if doc_id in entries:
                raise MalformedLineError(path, line_no, f"duplicate judgment for {doc_id!r} in topic {topic_id!r}")
            entries[doc_id] = label == "1"
    return {t: Judgments(t, entries) for t, entries in grouped.items()}


def load_corpus(path: str | Path) -> dict[str, str]:
    """Read ``{"id": ..., "text": ...}`` lines into an id -> text map."""
    path = Path(path)
    corpus: dict[str, str] = {}
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(path, line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(record, dict) or not isinstance(record.get("id"), str) or not isinstance(record.get("text"), str):
                raise MalformedLineError(path, line_no, "expected an object with string id and text")
            if record["id"] in corpus:
                raise MalformedLineError(path, line_no, f"duplicate document id {record['id']!r}")
            corpus[record["id"]] = record["text"]
    logger.info("Loaded corpus %s: %d documents", path, len(corpus))
    return corpus


_SECTION_RE = re.compile(r"<(title|desc|narr)>(.*?)(?=<[/a-z]|\Z)", re.IGNORECASE | re.DOTALL)
_LABEL_RE = re.compile(r"^\s*(?:description|narrative)\s*:\s*", re.IGNORECASE)


def read_topic_statement(text: str) -> str:
    """Concatenate the title, description and narrative of a topic statement.

    Text without section tags is used as a whole.
    """
    sections = [_LABEL_RE.sub("", body) for _, body in _SECTION_RE.findall(text)]
    if not sections:
        sections = [text]
    return "\n".join(" ".join(s.split()) for s in sections if s.strip())


# --- metrics -------------------------------------------------------------


@dataclass(frozen=True)
class MetricReport:
    f_score: float
    accuracy: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    tn: int
    tr: float = 0.0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int, tr: float = 0.0) -> MetricReport:
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        total = tp + fp + fn + tn
        accuracy = (tp + tn) / total if total else 0.0
        return cls(f, accuracy, precision, recall, tp, fp, fn, tn, tr)

    @classmethod
    def from_predictions(
        cls, predicted: Sequence[bool], relevant: Sequence[bool], tr: float = 0.0
    ) -> MetricReport:
        pairs = list(zip(predicted, relevant))
        return cls.from_counts(
            tp=sum(1 for p, r in pairs if p and r),
            fp=sum(1 for p, r in pairs if p and not r),
            fn=sum(1 for p, r in pairs if not p and r),
            tn=sum(1 for p, r in pairs if not p and not r),
            tr=tr,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "f_score": round(self.f_score, 6),
            "accuracy": round(self.accuracy, 6),
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "tr": round(self.tr, 6),
        }


# --- threshold tuning ----------------------------------------------------


@dataclass(frozen=True)
class ThresholdChoice:
    c1: float
    c2: float
    f_score: float
    cells: int


def grid_values(step: float) -> list[float]:
    """``0, step, ..., 1``; ``step`` must divide 1."""
    if not 0.0 < step < 1.0:
        raise ValueError(f"grid_step must be in (0, 1), got {step}")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid_step must divide 1 evenly, got {step}")
    return [i / n for i in range(n + 1)]


def tune_thresholds(
    g: LinkGraph,
    o: Ontology | None,
    rule: Query,
    train: TrainingSet,
    grid_step: float = 0.05,
    *,
    subsumption: bool = True,
    cache: RelatednessCache | None = None,
) -> ThresholdChoice:
    """Training-F maximizing (c1, c2) with c2 <= c1; ties go to the strictest pair."""
    docs = train.documents()
    labels = [True] * len(train.positives) + [False] * len(train.negatives)
    evidence = [collect_evidence(g, o, rule, m, subsumption=subsumption, cache=cache) for m in docs]
    grid = grid_values(grid_step)

    best: tuple[float, float, float] | None = None
    cells = 0
    for i, c2 in enumerate(grid):
        for c1 in grid[i:]:
            cells += 1
            predicted = [bool(evaluate_evidence(rule, ev, c1, c2).match) for ev in evidence]
            f = MetricReport.from_predictions(predicted, labels).f_score
            if best is None or (f, c1, c2) > best:
                best = (f, c1, c2)
    assert best is not None
    f, c1, c2 = best
    logger.debug("Tuned thresholds c1=%.2f c2=%.2f (training F %.4f, %d cells)", c1, c2, f, cells)
    return ThresholdChoice(c1, c2, f, cells)


# --- per-topic pipeline --------------------------------------------------


@dataclass(frozen=True)
class LearnedRule:
    """A tuned rule with the seed, training F and terminals it came from."""

    rule: SemanticRule
    train_f: float
    seed: int
    terminals: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return serialize_query(self.rule.query)

    @property
    def named_entities(self) -> tuple[str, ...]:
        return tuple(sorted(r.surface for r in concepts_of(self.rule.query) if r.is_named_entity))

    def identity(self) -> dict[str, Any]:
        return {
            "rule": self.text,
            "named_entities": list(self.named_entities),
            "c1": self.rule.c1,
            "c2": self.rule.c2,
        }

    @property
    def rule_hash(self) -> str:
        return compute_digest(self.identity())


def learn_rule(res: Resources, statement: str, train: TrainingSet, seed: int | None = None) -> LearnedRule:
    """Terminals from ``statement``, a GP rule over ``train``, then tuned thresholds.

    ``seed`` falls back to the configured ``gp.rng_seed``.
    """
    settings = res.settings
    gp = settings.gp_config(seed)
    terminals = terminal_set(
        res.graph, res.ontology, res.gazetteer, settings.wikify, statement,
        vocab=res.vocabulary(), stopwords=res.stopwords, cache=res.cache,
    )
    built = run_gp(terminals, train, gp, res.ontology, subsumption=settings.subsumption)
    choice = tune_thresholds(
        res.graph, res.ontology, built.rule, train, settings.grid_step,
        subsumption=settings.subsumption, cache=res.cache,
    )
    return LearnedRule(
        SemanticRule(built.rule, choice.c1, choice.c2),
        built.fitness,
        gp.rng_seed,
        tuple(sorted(r.surface for r in terminals)),
    )


@dataclass(frozen=True)
class TopicRun:
    topic_id: str
    status: str
    rule: str = ""
    named_entities: tuple[str, ...] = ()
    c1: float | None = None
    c2: float | None = None
    train_f: float | None = None
    tr: float = 0.0
    report: MetricReport | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "topic_id": self.topic_id,
            "status": self.status,
            "rule": self.rule,
            "named_entities": list(self.named_entities),
            "c1": self.c1,
            "c2": self.c2,
            "train_f": None if self.train_f is None else round(self.train_f, 6),
            "tr": round(self.tr, 6),
            "report": self.report.to_dict() if self.report else None,
            "reason": self.reason,
        }


def _pick(models: Mapping[str, DocumentModel], topic_id: str, ids: Iterable[str]) -> tuple[DocumentModel, ...]:
    try:
        return tuple(models[d] for d in ids)
    except KeyError as exc:
        raise DataError(f"topic {topic_id!r} judges unknown document {exc.args[0]!r}") from None


def _training_set(models: Mapping[str, DocumentModel], judged: Judgments) -> TrainingSet:
    return TrainingSet(
        _pick(models, judged.topic_id, judged.positives()),
        _pick(models, judged.topic_id, judged.negatives()),
    )


def run_topic(
    res: Resources,
    topic_id: str,
    statement: str,
    models: Mapping[str, DocumentModel],
    train: Judgments,
    test: Judgments,
    seed: int,
) -> TopicRun:
    try:
        training = _training_set(models, train)
        learned = learn_rule(res, statement, training, seed)
    except (EmptyTerminalSetError, ValueError) as exc:
        logger.warning("Topic %s failed: %s", topic_id, exc)
        return TopicRun(topic_id, "failed", tr=train.ratio, reason=str(exc))

    test_ids = sorted(test.entries)
    predicted = [
        bool(evaluate(
            res.graph, res.ontology, learned.rule, m,
            subsumption=res.settings.subsumption, cache=res.cache,
        ).match)
        for m in _pick(models, topic_id, test_ids)
    ]
    report = MetricReport.from_predictions(predicted, [test.entries[d] for d in test_ids], training.ratio)
    logger.info("Topic %s: test F %.4f with %s", topic_id, report.f_score, learned.text)
    return TopicRun(
        topic_id,
        "ok",
        rule=learned.text,
        named_entities=learned.named_entities,
        c1=learned.rule.c1,
        c2=learned.rule.c2,
        train_f=learned.train_f,
        tr=training.ratio,
        report=report,
    )


# --- aggregation ---------------------------------------------------------


@dataclass(frozen=True)
class PanelReport:
    topics: int
    f_score: float | None = None
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None

    @classmethod
    def from_reports(cls, reports: Sequence[MetricReport]) -> PanelReport:
        if not reports:
            return cls(0)

        def mean(values: Iterable[float]) -> float:
            return math.fsum(values) / len(reports)

        return cls(
            topics=len(reports),
            f_score=mean(r.f_score for r in reports),
            accuracy=mean(r.accuracy for r in reports),
            precision=mean(r.precision for r in reports),
            recall=mean(r.recall for r in reports),
        )

    def to_dict(self) -> dict[str, Any]:
        def fmt(value: float | None) -> float | None:
            return None if value is None else round(value, 6)

        return {
            "topics": self.topics,
            "f_score": fmt(self.f_score),
            "accuracy": fmt(self.accuracy),
            "precision": fmt(self.precision),
            "recall": fmt(self.recall),
        }


def aggregate(runs: Sequence[TopicRun]) -> dict[str, PanelReport]:
    """Macro averages: A over all topics, B over tr <= 5, C over tr > 5."""
    reports = [r.report for r in runs if r.ok and r.report is not None]
    if not reports:
        raise EmptyAggregateError()
    return {
        "A": PanelReport.from_reports(reports),
        "B": PanelReport.from_reports([r for r in reports if r.tr <= TR_SPLIT]),
        "C": PanelReport.from_reports([r for r in reports if r.tr > TR_SPLIT]),
    }


# --- suites --------------------------------------------------------------


@dataclass(frozen=True)
class SuiteResult:
    runs: tuple[TopicRun, ...]
    panels: Mapping[str, PanelReport]


def topic_seed(seed: int, topic_id: str) -> int:
    return seed + zlib.crc32(topic_id.encode("utf-8"))


def run_suite(suite_dir: str | Path, res: Resources, *, seed: int, jobs: int = 1) -> SuiteResult:
    suite_dir = Path(suite_dir)
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    corpus = load_corpus(suite_dir / CORPUS_FILE)
    train = load_judgments(suite_dir / TRAIN_FILE)
    test = load_judgments(suite_dir / TEST_FILE)
    topic_files = sorted((suite_dir / TOPICS_DIR).glob("*.txt"))
    if not topic_files:
        raise DataError(f"no topic statements under {suite_dir / TOPICS_DIR}")
    res.settings.gp_config(seed)  # validates GP parameters before any topic runs

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        doc_ids = sorted(corpus)
        models = dict(zip(doc_ids, pool.map(lambda d: res.model(corpus[d], d), doc_ids)))

        def run_one(path: Path) -> TopicRun:
            topic_id = path.stem
            statement = read_topic_statement(path.read_text(encoding="utf-8"))
            return run_topic(
                res,
                topic_id,
                statement,
                models,
                train.get(topic_id, Judgments(topic_id, {})),
                test.get(topic_id, Judgments(topic_id, {})),
                topic_seed(seed, topic_id),
            )

        runs = tuple(pool.map(run_one, topic_files))

    failed = sum(1 for r in runs if not r.ok)
    logger.info("Suite %s: %d topics, %d failed", suite_dir, len(runs), failed)
    return SuiteResult(runs, aggregate(runs))


def load_reference() -> list[dict[str, Any]]:
    """Published benchmark rows shipped as package data."""
    raw = package_data.files("wikisr.data").joinpath("reference_results.csv").read_text(encoding="utf-8")
    rows = []
    for row in csv.DictReader(io.StringIO(raw)):
        rows.append({
            "panel": row["panel"],
            "model": row["model"],
            "profile": row["profile"],
            **{k: float(row[k]) for k in ("f_score", "accuracy", "precision", "recall")},
        })
    return rows


def report_payload(result: SuiteResult) -> dict[str, Any]:
    body = {
        "panels": {name: panel.to_dict() for name, panel in sorted(result.panels.items())},
        "topics": [run.to_dict() for run in result.runs],
    }
    return {**body, "reference": load_reference(), "fingerprint": compute_digest(body)}


def write_report(path: str | Path, result: SuiteResult) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report_payload(result), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    path.write_text(text, encoding="utf-8")
    logger.info("Wrote report %s", path)
    return path
