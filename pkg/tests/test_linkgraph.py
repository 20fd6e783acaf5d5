"""Tests for linkgraph.py: loading, sense lookup and candidate spotting."""

from __future__ import annotations

import logging

import pytest

from conftest import CHINA, JAVA_ISLAND, JAVA_LANG, TRADE_SECRET, US
from wikisr.errors import (
    DanglingReferenceError,
    DuplicateTitleError,
    EmptyGraphError,
    MalformedLineError,
    UnknownConceptError,
)
from wikisr.linkgraph import (
    AnchorRow,
    anchor_candidates,
    build_graph,
    inlinks,
    link_probability,
    load_graph,
    sense_ids,
    senses,
)


def _write(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


class TestLoad:
    def test_g1_sizes(self, g1):
        assert g1.total_articles == 16
        assert g1.redirects["U.S."] == US
        assert g1.title_of(JAVA_LANG) == "Java (programming language)"

    def test_inlinks(self, g1):
        assert inlinks(g1, US) == frozenset({5, 6, 10, 15})
        assert inlinks(g1, 15) == frozenset()

    def test_inlink_arrays_are_sorted_and_read_only(self, g1):
        arr = g1.inlink_array(JAVA_ISLAND)
        assert list(arr) == sorted(arr)
        assert not arr.flags.writeable

    def test_unknown_concept(self, g1):
        with pytest.raises(UnknownConceptError):
            g1.inlink_array(99)

    def test_malformed_line_reports_position(self, tmp_path):
        pages = _write(tmp_path / "pages.tsv", ["0\tAlpha", "1 Beta"])
        with pytest.raises(MalformedLineError) as exc:
            load_graph(pages)
        assert exc.value.line_no == 2
        assert "pages.tsv:2" in str(exc.value)

    def test_non_integer_id(self, tmp_path):
        pages = _write(tmp_path / "pages.tsv", ["zero\tAlpha"])
        with pytest.raises(MalformedLineError):
            load_graph(pages)

    def test_duplicate_title(self, tmp_path):
        pages = _write(tmp_path / "pages.tsv", ["0\tAlpha", "1\tAlpha"])
        with pytest.raises(DuplicateTitleError):
            load_graph(pages)

    def test_dangling_link(self, tmp_path):
        pages = _write(tmp_path / "pages.tsv", ["0\tAlpha", "1\tBeta"])
        links = _write(tmp_path / "links.tsv", ["0\t7"])
        with pytest.raises(DanglingReferenceError):
            load_graph(pages, links_path=links)

    def test_dangling_redirect(self, tmp_path):
        pages = _write(tmp_path / "pages.tsv", ["0\tAlpha"])
        redirects = _write(tmp_path / "redirects.tsv", ["A\t3"])
        with pytest.raises(DanglingReferenceError):
            load_graph(pages, redirects_path=redirects)

    def test_empty_graph(self, tmp_path):
        pages = _write(tmp_path / "pages.tsv", [])
        with pytest.raises(EmptyGraphError):
            load_graph(pages)

    def test_missing_optional_tables(self, tmp_path, caplog):
        pages = _write(tmp_path / "pages.tsv", ["0\tAlpha"])
        missing = tmp_path / "none.tsv"
        with caplog.at_level(logging.WARNING, logger="wikisr.linkgraph"):
            g = load_graph(pages, missing, missing, missing)
        assert g.total_articles == 1
        assert inlinks(g, 0) == frozenset()
        warned = [r for r in caplog.records if r.levelno == logging.WARNING]
        assert len(warned) == 3
        assert all(str(missing) in r.getMessage() for r in warned)

    def test_omitted_tables_are_not_warned(self, tmp_path, caplog):
        pages = _write(tmp_path / "pages.tsv", ["0\tAlpha"])
        with caplog.at_level(logging.WARNING, logger="wikisr.linkgraph"):
            load_graph(pages)
        assert not caplog.records

    def test_build_graph_rejects_zero_count(self):
        with pytest.raises(ValueError):
            build_graph([(0, "Alpha")], anchors=[AnchorRow("alpha", 0, 0)])


class TestSenses:
    def test_ambiguous_anchor_commonness(self, g1):
        found = {s.concept: s.commonness for s in senses(g1, "Java")}
        assert found == {JAVA_ISLAND: pytest.approx(0.2), JAVA_LANG: pytest.approx(0.8)}

    def test_anchor_lookup_is_case_insensitive(self, g1):
        assert sense_ids(g1, "CHINA") == frozenset({CHINA})

    def test_redirect(self, g1):
        assert sense_ids(g1, "U.S.") == frozenset({US})
        assert sense_ids(g1, "Trade secrets") == frozenset({TRADE_SECRET})

    def test_title_without_anchor_rows(self, g1):
        assert sense_ids(g1, "United States") == frozenset({US})

    def test_unknown_surface(self, g1):
        assert senses(g1, "Acme") == frozenset()


class TestLinkProbability:
    def test_with_plain_occurrences(self, g1):
        assert link_probability(g1, "tool") == pytest.approx(0.05)

    def test_without_plain_occurrences(self, g1):
        assert link_probability(g1, "fraud") == 1.0

    def test_not_an_anchor(self, g1):
        assert link_probability(g1, "United States") == 0.0


class TestCandidates:
    def test_longest_match_first(self, g1):
        found = anchor_candidates(g1, "Java is a popular programming tool.")
        assert [c.surface for c in found] == ["Java", "programming tool"]

    def test_spans(self, g1):
        text = "A lawyer said China obtained the trade secret."
        found = anchor_candidates(g1, text)
        assert [text[c.span.start:c.span.end] for c in found] == ["lawyer", "China", "trade secret"]

    def test_max_ngram_must_be_positive(self, g1):
        with pytest.raises(ValueError):
            anchor_candidates(g1, "fraud", max_ngram=0)

    def test_punctuated_title(self, g1):
        text = "Tourists visited Java (island) last year."
        found = anchor_candidates(g1, text)
        assert [c.surface for c in found] == ["Java (island)"]
        assert text[found[0].span.start:found[0].span.end] == "Java (island)"

    def test_token_forms_index(self, g1):
        assert g1.token_forms["Java island"] == "Java (island)"
        assert g1.token_forms["Java programming language"] == "Java (programming language)"
