"""Tests for query.py: parsing, canonical serialization, tree utilities."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import ESPIONAGE, FRAUD, US
from wikisr.errors import QuerySyntaxError, UnknownLeafError
from wikisr.query import (
    ONTO,
    WIKI,
    And,
    ConceptRef,
    ConceptVocabulary,
    Leaf,
    Not,
    Or,
    concepts_of,
    depth,
    iter_nodes,
    node_count,
    parse_query,
    replace_at,
    serialize_query,
    subtree_at,
)

PLANTED = '"UnitedStates" AND "Espionage" AND ("Fraud" OR "Legislation" OR "Regulation")'


def _leaves(vocab, *names):
    return [Leaf(vocab.resolve(n)) for n in names]


class TestVocabulary:
    def test_compact_names(self, vocab):
        assert vocab.resolve("UnitedStates").key == US
        assert vocab.resolve("JavaProgrammingLanguage").key == 10

    def test_loose_forms_resolve(self, vocab):
        assert vocab.resolve("United States").key == US
        assert vocab.resolve("unitedstates").key == US

    def test_ontology_prefix(self, vocab):
        ref = vocab.resolve("bto:PutOption")
        assert ref.kind == ONTO and ref.key == "PutOption"
        assert vocab.resolve("PutOption").kind == WIKI

    def test_unprefixed_ontology_fallback(self, vocab):
        assert vocab.resolve("OptionContract") == vocab.resolve("bto:OptionContract")

    def test_gazetteer_titles_are_named_entities(self, vocab):
        assert vocab.resolve("UnitedStates").is_named_entity
        assert vocab.resolve("China").is_named_entity
        assert not vocab.resolve("Fraud").is_named_entity

    def test_unknown_leaf(self, vocab):
        with pytest.raises(UnknownLeafError):
            vocab.resolve("Acme")
        with pytest.raises(UnknownLeafError):
            vocab.resolve("bto:Fraud")

    def test_collisions_get_ids(self):
        v = ConceptVocabulary.from_resources({1: "Trade secret", 2: "Trade Secret"})
        assert {r.name for r in v} == {"TradeSecret", "TradeSecret_2"}

    def test_with_named_entities(self, vocab):
        flagged = vocab.with_named_entities(["Fraud"])
        assert flagged.resolve("Fraud").is_named_entity
        assert flagged.resolve("UnitedStates").is_named_entity
        assert not vocab.resolve("Fraud").is_named_entity
        assert len(flagged) == len(vocab) == 19


class TestParse:
    def test_precedence(self, vocab):
        q = parse_query('"Fraud" OR "Espionage" AND NOT "UnitedStates"', vocab)
        fraud, esp, us = _leaves(vocab, "Fraud", "Espionage", "UnitedStates")
        assert q == Or((fraud, And((esp, Not(us)))))

    def test_planted_rule(self, vocab):
        q = parse_query(PLANTED, vocab)
        assert isinstance(q, And)
        assert {r.key for r in concepts_of(q)} == {US, ESPIONAGE, FRAUD, 3, 4}
        assert depth(q) == 2

    def test_keywords_case_insensitive(self, vocab):
        assert parse_query('"Fraud" and not "China"', vocab) == parse_query('"Fraud" AND NOT "China"', vocab)

    def test_escaped_quote(self):
        v = ConceptVocabulary([ConceptRef(WIKI, 'Say "Hi"', 0)])
        q = parse_query(r'"Say \"Hi\""', v)
        assert q == Leaf(ConceptRef(WIKI, 'Say "Hi"', 0))
        assert parse_query(serialize_query(q), v) == q

    @pytest.mark.parametrize("text", ['"Fraud" AND', '("Fraud"', 'Fraud', '"Fraud" "China"', ""])
    def test_syntax_errors(self, vocab, text):
        with pytest.raises(QuerySyntaxError):
            parse_query(text, vocab)

    def test_error_position(self, vocab):
        with pytest.raises(QuerySyntaxError) as exc:
            parse_query('"Fraud" AND )', vocab)
        assert exc.value.position > 0

    def test_unknown_concept(self, vocab):
        with pytest.raises(UnknownLeafError):
            parse_query('"Fraud" OR "Acme"', vocab)

    def test_depth_limit(self, vocab):
        text = "NOT " * 6 + '"Fraud"'
        with pytest.raises(QuerySyntaxError):
            parse_query(text, vocab)
        assert depth(parse_query(text, vocab, max_depth=6)) == 6


class TestSerialize:
    def test_canonical_form(self, vocab):
        q = parse_query(PLANTED, vocab)
        assert serialize_query(q) == PLANTED

    def test_not_is_parenthesized(self, vocab):
        q = parse_query('NOT "Fraud" AND "bto:PutOption"', vocab)
        assert serialize_query(q) == '(NOT "Fraud") AND "bto:PutOption"'

    def test_nested_not(self, vocab):
        q = parse_query('NOT ("Fraud" OR "China")', vocab)
        assert serialize_query(q) == '(NOT ("Fraud" OR "China"))'


class TestTreeUtilities:
    def test_iter_nodes_preorder(self, vocab):
        q = parse_query('"Fraud" AND NOT "China"', vocab)
        paths = [path for path, _ in iter_nodes(q)]
        assert paths == [(), (0,), (1,), (1, 0)]
        assert node_count(q) == 4

    def test_subtree_and_replace(self, vocab):
        q = parse_query('"Fraud" AND NOT "China"', vocab)
        china = subtree_at(q, (1, 0))
        assert china == Leaf(vocab.resolve("China"))
        swapped = replace_at(q, (1, 0), Leaf(vocab.resolve("Espionage")))
        assert serialize_query(swapped) == '"Fraud" AND (NOT "Espionage")'
        assert serialize_query(q) == '"Fraud" AND (NOT "China")'

    def test_replace_below_leaf(self, vocab):
        with pytest.raises(IndexError):
            replace_at(Leaf(vocab.resolve("China")), (0, 0), Leaf(vocab.resolve("Fraud")))

    def test_operators_need_two_children(self, vocab):
        with pytest.raises(ValueError):
            And((Leaf(vocab.resolve("Fraud")),))


def _queries(refs):
    leaves = st.sampled_from(refs).map(Leaf)
    return st.recursive(
        leaves,
        lambda children: st.one_of(
            children.map(Not),
            st.tuples(children, children).map(And),
            st.lists(children, min_size=2, max_size=3).map(lambda xs: Or(tuple(xs))),
        ),
        max_leaves=8,
    )


class TestRoundTrip:
    @settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(data=st.data())
    def test_parse_inverts_serialize(self, vocab, data):
        q = data.draw(_queries(sorted(vocab)))
        text = serialize_query(q)
        assert parse_query(text, vocab, max_depth=depth(q)) == q
        assert serialize_query(parse_query(text, vocab, max_depth=depth(q))) == text
