"""Tests for relatedness.py: link_rel, term_rel and doc_rel."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    CHINA,
    ESPIONAGE,
    FRAUD,
    JAVA_ISLAND,
    JAVA_LANG,
    LAWYER,
    LEGISLATION,
    PROGRAMMING_TOOL,
    TRADE_SECRET,
    US,
    general,
)
from wikisr.docmodel import DocumentModel
from wikisr.linkgraph import build_graph, inlinks
from wikisr.relatedness import (
    RelatednessCache,
    doc_rel,
    doc_rel_senses,
    link_rel,
    ontology_senses,
    term_rel,
    term_rel_witness,
)

THREE_QUARTERS = 1 - math.log(4 / 3) / math.log(4)


def oracle(g, a: int, b: int) -> float:
    """Set-based restatement of 1 - normalized Google distance."""
    ia, ib = inlinks(g, a), inlinks(g, b)
    if not ia or not ib:
        return 0.0
    common = len(ia & ib)
    if common == 0:
        return 0.0
    small, large = min(len(ia), len(ib)), max(len(ia), len(ib))
    total = g.total_articles
    if small >= total:
        return 1.0 if ia == ib else 0.0
    ngd = (math.log(large) - math.log(common)) / (math.log(total) - math.log(small))
    return min(1.0, max(0.0, 1.0 - ngd))


@st.composite
def random_graphs(draw):
    n = draw(st.integers(min_value=2, max_value=12))
    links = draw(
        st.sets(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
            max_size=n * n,
        )
    )
    return build_graph([(i, f"Article {i}") for i in range(n)], links=sorted(links))


class TestLinkRel:
    def test_hand_values(self, g1):
        assert link_rel(g1, JAVA_LANG, PROGRAMMING_TOOL) == pytest.approx(0.5)
        assert link_rel(g1, JAVA_ISLAND, PROGRAMMING_TOOL) == pytest.approx(1 - math.log(3) / math.log(4))
        assert link_rel(g1, ESPIONAGE, TRADE_SECRET) == pytest.approx(THREE_QUARTERS)
        assert link_rel(g1, LEGISLATION, LAWYER) == pytest.approx(THREE_QUARTERS)
        assert link_rel(g1, US, FRAUD) == pytest.approx(0.5)

    def test_no_shared_inlinks(self, g1):
        assert link_rel(g1, US, LAWYER) == 0.0

    def test_single_shared_inlink_is_clamped(self, g1):
        # |in(US) & in(Trade secret)| = 1 gives a distance of exactly 1.
        assert link_rel(g1, US, TRADE_SECRET) == pytest.approx(0.0, abs=1e-12)

    def test_no_inlinks(self, g1):
        assert link_rel(g1, 15, US) == 0.0

    def test_inlinks_covering_the_graph(self):
        g = build_graph([(0, "A"), (1, "B")], links=[(0, 0), (1, 0), (0, 1), (1, 1)])
        assert link_rel(g, 0, 1) == 1.0

    def test_matches_oracle_on_g1(self, g1):
        for a in g1.concept_ids():
            for b in g1.concept_ids():
                assert link_rel(g1, a, b) == oracle(g1, a, b)

    @settings(max_examples=100, deadline=None)
    @given(random_graphs())
    def test_random_graph_properties(self, g):
        for a in g.concept_ids():
            if inlinks(g, a):
                assert link_rel(g, a, a) == 1.0
            for b in g.concept_ids():
                value = link_rel(g, a, b)
                assert 0.0 <= value <= 1.0
                assert value == link_rel(g, b, a)
                assert value == oracle(g, a, b)


class TestCache:
    def test_same_values_as_uncached(self, g1):
        cache = RelatednessCache(g1)
        for a in g1.concept_ids():
            for b in g1.concept_ids():
                assert cache.link_rel(a, b) == link_rel(g1, a, b)

    def test_symmetric_pairs_share_an_entry(self, g1):
        cache = RelatednessCache(g1)
        cache.link_rel(US, FRAUD)
        cache.link_rel(FRAUD, US)
        assert len(cache) == 1

    def test_rejects_another_graph(self, g1):
        other = build_graph([(0, "A")])
        with pytest.raises(ValueError):
            doc_rel_senses(g1, None, frozenset({US}), general(FRAUD), RelatednessCache(other))


class TestTermRel:
    def test_ambiguous_term_takes_best_sense(self, g1):
        assert term_rel(g1, "Java", "Programming tool") == pytest.approx(0.5)

    def test_witness_pair(self, g1):
        value, left, right = term_rel_witness(g1, "Java", "programming tool")
        assert value == pytest.approx(0.5)
        assert (left, right) == (JAVA_LANG, PROGRAMMING_TOOL)

    def test_unknown_term(self, g1):
        assert term_rel(g1, "Acme", "fraud") == 0.0
        assert term_rel_witness(g1, "Acme", "fraud") == (0.0, None, None)


class TestDocRel:
    def test_best_member(self, g1):
        m = general(TRADE_SECRET, CHINA, LAWYER)
        assert doc_rel(g1, None, "Espionage", m) == pytest.approx(THREE_QUARTERS)
        assert doc_rel(g1, None, "United States", m) == 0.0

    def test_witness_is_member_title(self, g1):
        m = general(TRADE_SECRET, CHINA, LAWYER)
        found = doc_rel_senses(g1, None, frozenset({LEGISLATION}), m)
        assert found.witness == "Lawyer"

    def test_bag_of_words_members(self, g1):
        m = DocumentModel(bow=frozenset({"lawyer", "unrelated"}))
        assert doc_rel(g1, None, "Legislation", m) == pytest.approx(THREE_QUARTERS)

    def test_empty_model(self, g1):
        assert doc_rel(g1, None, "Fraud", DocumentModel()) == 0.0

    def test_ontology_member_goes_through_wiki_page(self, g1, ontology):
        m = DocumentModel(onto=frozenset({"PutOption"}))
        assert ontology_senses(g1, ontology, "PutOption") == frozenset({14})
        assert doc_rel(g1, ontology, "Goldman Sachs", m) == pytest.approx(1 - math.log(3) / math.log(16))

    def test_ontology_concept_without_page_uses_labels(self, g1, ontology):
        # "option contract" is no surface in G1.
        assert ontology_senses(g1, ontology, "OptionContract") == frozenset()

    def test_no_senses(self, g1):
        assert doc_rel(g1, None, "Acme", general(FRAUD)) == 0.0

    def test_cached_matches_uncached(self, g1):
        cache = RelatednessCache(g1)
        m = general(TRADE_SECRET, CHINA, LAWYER)
        for term in ("Espionage", "Legislation", "Fraud", "Regulation", "China"):
            senses = frozenset({g1.articles[term]})
            assert doc_rel_senses(g1, None, senses, m, cache) == doc_rel_senses(g1, None, senses, m)
