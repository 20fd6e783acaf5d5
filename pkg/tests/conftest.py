"""Test fixtures for wikisr.

G1 is a 16-article toy graph under ``fixtures/g1`` whose relatedness values
are small enough to check by hand, e.g. link_rel(Java (programming
language), Programming tool) = 0.5.
"""

from __future__ import annotations

import json
from itertools import product
from pathlib import Path

import pytest

from wikisr.config import Settings
from wikisr.docmodel import DocumentModel
from wikisr.linkgraph import LinkGraph, load_graph_dir
from wikisr.ner import Gazetteer, load_gazetteer
from wikisr.ontology import Ontology, load_ontology
from wikisr.query import ConceptVocabulary
from wikisr.resources import Resources, load_resources, reset_resources

FIXTURES = Path(__file__).parent / "fixtures"
G1_DIR = FIXTURES / "g1"
TRIPLES = FIXTURES / "triples.tsv"
GAZETTEER = FIXTURES / "gazetteer.tsv"

# G1 article ids
US, ESPIONAGE, FRAUD, LEGISLATION, REGULATION = 0, 1, 2, 3, 4
TELEMARKETING, TRADE_SECRET, CHINA, LAWYER = 5, 6, 7, 8
JAVA_ISLAND, JAVA_LANG, PROGRAMMING_TOOL = 9, 10, 11
GOLDMAN, INVESTMENT_BANKING, PUT_OPTION, CALL_OPTION = 12, 13, 14, 15

TOPIC_STATEMENT = (
    "<title> Espionage and fraud in the U.S.\n"
    "<desc> Description:\nReports of espionage or fraud against companies in the U.S.\n"
    "<narr> Narrative:\nRelevant documents discuss fraudulent schemes and new "
    "legislation or regulation aimed at such abuses.\n"
)

EXAMPLE_DOC = "A lawyer said China obtained the trade secret."

SMALL_GP = {"population_size": 40, "generations": 15}


@pytest.fixture(autouse=True)
def _fresh_resources():
    """Drop the process-wide resource bundle between tests."""
    reset_resources()
    yield
    reset_resources()


@pytest.fixture(scope="session")
def g1() -> LinkGraph:
    return load_graph_dir(G1_DIR)


@pytest.fixture(scope="session")
def ontology() -> Ontology:
    return load_ontology(TRIPLES)


@pytest.fixture(scope="session")
def gazetteer() -> Gazetteer:
    return load_gazetteer(GAZETTEER)


@pytest.fixture(scope="session")
def resources() -> Resources:
    return load_resources(G1_DIR, TRIPLES, GAZETTEER)


@pytest.fixture(scope="session")
def vocab(resources: Resources) -> ConceptVocabulary:
    return resources.vocabulary()


@pytest.fixture
def g1_env(monkeypatch):
    """Point the WIKISR_* variables at the G1 fixtures."""
    monkeypatch.setenv("WIKISR_GRAPH_DIR", str(G1_DIR))
    monkeypatch.setenv("WIKISR_ONTOLOGY", str(TRIPLES))
    monkeypatch.setenv("WIKISR_GAZETTEER", str(GAZETTEER))
    monkeypatch.delenv("WIKISR_STOPWORDS", raising=False)
    monkeypatch.delenv("WIKISR_CONFIG", raising=False)


def general(*concepts: int, doc_id: str = "") -> DocumentModel:
    """A model holding only general Wikipedia concepts."""
    return DocumentModel(wiki_general=frozenset(concepts), doc_id=doc_id)


def write_jsonl(path: Path, records: list[dict]) -> Path:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


# --- planted corpora -----------------------------------------------------

PLANTED_CONCEPTS = (US, ESPIONAGE, FRAUD, LEGISLATION, REGULATION)


def planted_label(bits: tuple[int, ...]) -> bool:
    """UnitedStates AND Espionage AND (Fraud OR Legislation OR Regulation)."""
    us, esp, fraud, leg, reg = bits
    return bool(us and esp and (fraud or leg or reg))


def planted_models(n_pos: int = 40, n_neg: int = 160) -> tuple[list[DocumentModel], list[DocumentModel]]:
    """Every presence pattern over the five planted concepts, cycled to the requested sizes."""
    patterns = list(product((0, 1), repeat=len(PLANTED_CONCEPTS)))
    pos_patterns = [p for p in patterns if planted_label(p)]
    neg_patterns = [p for p in patterns if not planted_label(p)]

    def model(bits: tuple[int, ...], doc_id: str) -> DocumentModel:
        present = frozenset(c for c, bit in zip(PLANTED_CONCEPTS, bits) if bit)
        return general(*present, doc_id=doc_id)

    positives = [model(pos_patterns[i % len(pos_patterns)], f"p{i:03d}") for i in range(n_pos)]
    negatives = [model(neg_patterns[i % len(neg_patterns)], f"n{i:03d}") for i in range(n_neg)]
    return positives, negatives


# --- suites --------------------------------------------------------------

_PHRASES = {
    US: "the U.S.",
    ESPIONAGE: "espionage",
    FRAUD: "fraud",
    LEGISLATION: "legislation",
    REGULATION: "regulation",
}

# topic id -> (statement, relevance over the five planted concept bits)
SUITE_TOPICS = {
    "t01": ("Espionage in the U.S.", lambda us, esp, fr, leg, reg: us and esp),
    "t02": ("Fraud and legislation", lambda us, esp, fr, leg, reg: fr and leg),
    "t03": ("Fraud, espionage and regulation", lambda us, esp, fr, leg, reg: fr and esp and reg),
    "t04": ("Regulation in the U.S.", lambda us, esp, fr, leg, reg: reg and us),
    "t05": ("Espionage or fraud", lambda us, esp, fr, leg, reg: esp or fr),
    "t06": ("Legislation without fraud", lambda us, esp, fr, leg, reg: leg and not fr),
    "t07": ("Espionage, fraud and legislation in the U.S.", lambda us, esp, fr, leg, reg: us and esp and fr and leg),
    "t08": ("Regulation or legislation", lambda us, esp, fr, leg, reg: reg or leg),
    "t09": ("Fraud in the U.S.", lambda us, esp, fr, leg, reg: us and fr),
    "t10": ("Espionage and regulation", lambda us, esp, fr, leg, reg: esp and reg),
}


def suite_text(bits: tuple[int, ...]) -> str:
    words = [_PHRASES[c] for c, bit in zip(PLANTED_CONCEPTS, bits) if bit]
    if not words:
        return "Officials discussed nothing today."
    return "Officials discussed " + " and ".join(words) + " today."


def write_suite(root: Path, topics: dict | None = None) -> Path:
    """Synthetic suite: two documents per presence pattern, one for training, one for testing."""
    topics = SUITE_TOPICS if topics is None else topics
    root.mkdir(parents=True, exist_ok=True)
    (root / "topics").mkdir(exist_ok=True)
    patterns = list(product((0, 1), repeat=len(PLANTED_CONCEPTS)))

    corpus, train_rows, test_rows = [], [], []
    for i, bits in enumerate(patterns):
        for split, rows in (("a", train_rows), ("b", test_rows)):
            doc_id = f"d{i:02d}{split}"
            corpus.append({"id": doc_id, "text": suite_text(bits)})
            for topic_id, (_, relevant) in topics.items():
                rows.append(f"{topic_id}\t{doc_id}\t{int(bool(relevant(*bits)))}\n")

    write_jsonl(root / "corpus.jsonl", corpus)
    (root / "train.tsv").write_text("".join(train_rows), encoding="utf-8")
    (root / "test.tsv").write_text("".join(test_rows), encoding="utf-8")
    for topic_id, (statement, _) in topics.items():
        (root / "topics" / f"{topic_id}.txt").write_text(f"<title> {statement}\n", encoding="utf-8")
    return root


@pytest.fixture
def suite_resources() -> Resources:
    settings = Settings(gp_params=SMALL_GP, rng_seed=7)
    return load_resources(G1_DIR, TRIPLES, GAZETTEER, settings=settings)
