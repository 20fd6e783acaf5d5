"""Tests for Tier 2 analyze tools: filtering and rule learning."""

from __future__ import annotations

import json
from pathlib import Path
from unittest.mock import patch

import pytest

from conftest import EXAMPLE_DOC, SUITE_TOPICS, write_jsonl, write_suite
from wikisr.cli import EXIT_OK, dispatch
from wikisr.envelope import compute_digest
from wikisr.harness import load_judgments
from wikisr.tools.analyze import wikisr_build_rule, wikisr_filter

TOPIC_RULE = '"UnitedStates" AND "Espionage" AND ("Legislation" OR "Fraud" OR "Regulation")'


@pytest.fixture
def corpus(tmp_path: Path) -> Path:
    return write_jsonl(tmp_path / "corpus.jsonl", [
        {"id": "ex", "text": EXAMPLE_DOC},
        {"id": "hit", "text": "Espionage and fraud in the U.S. drew new legislation."},
    ])


@pytest.fixture
def artifact_dir(tmp_path: Path, monkeypatch) -> Path:
    root = tmp_path / "artifacts"
    monkeypatch.setenv("WIKISR_ARTIFACT_DIR", str(root))
    monkeypatch.delenv("WIKISR_KEEP_FILES", raising=False)
    return root


class TestFilter:
    @pytest.mark.asyncio
    async def test_inline_verdicts(self, g1_env, corpus, artifact_dir):
        parsed = json.loads(await wikisr_filter(TOPIC_RULE, str(corpus)))

        assert parsed["ok"] is True
        assert parsed["impact"] == "analyze"
        assert parsed["data"]["matches"] == 1
        assert [v["match"] for v in parsed["data"]["verdicts"]] == [0, 1]
        assert "artifact" not in parsed
        assert "warnings" not in parsed
        # Inlined runs leave nothing behind.
        assert list(artifact_dir.iterdir()) == []

    @pytest.mark.asyncio
    async def test_thresholds_and_named_entities(self, g1_env, tmp_path, artifact_dir):
        # Fraud scores 0.5 against a document that only mentions the U.S.
        us_only = write_jsonl(tmp_path / "us.jsonl", [{"id": "us", "text": "Officials met in the U.S. today."}])
        general = json.loads(await wikisr_filter('"Fraud"', str(us_only), c1=0.9, c2=0.4))
        named = json.loads(await wikisr_filter('"Fraud"', str(us_only), c1=0.9, c2=0.4, named_entities=["Fraud"]))
        assert (general["data"]["c1"], general["data"]["c2"]) == (0.9, 0.4)
        assert general["data"]["matches"] == 1
        assert named["data"]["matches"] == 0

    @pytest.mark.asyncio
    async def test_empty_documents_warned(self, g1_env, tmp_path, artifact_dir):
        corpus = write_jsonl(tmp_path / "blank.jsonl", [
            {"id": "blank", "text": ""},
            {"id": "ex", "text": EXAMPLE_DOC},
        ])
        parsed = json.loads(await wikisr_filter('"Fraud"', str(corpus)))
        assert parsed["ok"] is True
        assert [w["code"] for w in parsed["warnings"]] == ["EMPTY_MODEL"]
        assert "blank" in parsed["warnings"][0]["message"]

    @pytest.mark.asyncio
    async def test_exact(self, g1_env, corpus, artifact_dir):
        parsed = json.loads(await wikisr_filter('"Espionage"', str(corpus), exact=True))
        assert parsed["data"]["exact"] is True
        assert parsed["data"]["matches"] == 1

    @pytest.mark.asyncio
    async def test_large_output_becomes_artifact(self, g1_env, corpus, artifact_dir):
        with patch("wikisr.tools.analyze.should_inline", return_value=False):
            parsed = json.loads(await wikisr_filter(TOPIC_RULE, str(corpus)))
        artifact = parsed["artifact"]
        assert artifact["row_count"] == 2
        assert Path(artifact["path"]).exists()
        assert "verdicts" not in parsed["data"]

    @pytest.mark.asyncio
    async def test_bad_rule(self, g1_env, corpus, artifact_dir):
        parsed = json.loads(await wikisr_filter('"Fraud" OR', str(corpus)))
        assert parsed["ok"] is False
        assert parsed["data"]["error"] == "QuerySyntaxError"

    @pytest.mark.asyncio
    async def test_missing_corpus(self, g1_env, tmp_path, artifact_dir):
        parsed = json.loads(await wikisr_filter('"Fraud"', str(tmp_path / "none.jsonl")))
        assert parsed["ok"] is False


class TestBuildRule:
    @pytest.fixture
    def suite(self, tmp_path: Path) -> Path:
        return write_suite(tmp_path / "suite", {"t01": SUITE_TOPICS["t01"]})

    @pytest.mark.asyncio
    async def test_rule_hash(self, g1_env, suite, monkeypatch):
        monkeypatch.setenv("WIKISR_CONFIG", str(_small_config(suite)))
        judged = load_judgments(suite / "train.tsv")["t01"].entries
        parsed = json.loads(await wikisr_build_rule("Espionage in the U.S.", dict(judged), str(suite / "corpus.jsonl"), 5))

        assert parsed["ok"] is True
        assert parsed["impact"] == "analyze"
        data = parsed["data"]
        expected = compute_digest({k: data[k] for k in ("rule", "named_entities", "c1", "c2")})
        assert data["rule_hash"] == expected
        assert set(data["terminals"]) == {"UnitedStates", "Espionage"}

    @pytest.mark.asyncio
    async def test_same_rule_as_cli(self, g1_env, suite, monkeypatch, capsys):
        monkeypatch.setenv("WIKISR_CONFIG", str(_small_config(suite)))
        topic = suite / "topics" / "t01.txt"
        judged = load_judgments(suite / "train.tsv")["t01"].entries
        parsed = json.loads(await wikisr_build_rule(
            topic.read_text(encoding="utf-8"), dict(judged), str(suite / "corpus.jsonl"), 5
        ))
        code = dispatch([
            "build-rule", "--seed", "5", "--corpus", str(suite / "corpus.jsonl"), str(topic), str(suite / "train.tsv"),
        ])
        assert code == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        for key in ("rule", "named_entities", "c1", "c2", "rule_hash"):
            assert record[key] == parsed["data"][key]

    @pytest.mark.asyncio
    async def test_unknown_documents(self, g1_env, suite):
        parsed = json.loads(await wikisr_build_rule("Espionage", {"nope": True}, str(suite / "corpus.jsonl"), 5))
        assert parsed["ok"] is False
        assert "nope" in parsed["summary"]

    @pytest.mark.asyncio
    async def test_no_positives(self, g1_env, suite):
        parsed = json.loads(await wikisr_build_rule("Espionage", {"d00a": False}, str(suite / "corpus.jsonl"), 5))
        assert parsed["ok"] is False

    @pytest.mark.asyncio
    async def test_empty_terminal_set(self, g1_env, suite):
        parsed = json.loads(await wikisr_build_rule("Nothing relevant.", {"d31a": True}, str(suite / "corpus.jsonl"), 5))
        assert parsed["ok"] is False
        assert parsed["data"]["error"] == "EmptyTerminalSetError"


def _small_config(suite: Path) -> Path:
    path = suite / "wikisr.conf"
    path.write_text("gp.population_size = 30\ngp.generations = 8\n", encoding="utf-8")
    return path
