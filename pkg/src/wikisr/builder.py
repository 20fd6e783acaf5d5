"""Rule builder: genetic programming over boolean concept queries.

Handles:
- Terminal set from the wikified and profiled topic statement
- Exact-match F-score fitness over a labelled training set
- Seeded GP search (ramped half-and-half, tournament selection, subtree
  crossover, point/subtree mutation, elitism, truncation repair)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from wikisr.docmodel import DocumentModel, build_model
from wikisr.errors import EmptyTerminalSetError
from wikisr.evaluator import evaluate_exact, is_direct
from wikisr.linkgraph import LinkGraph
from wikisr.ner import Gazetteer
from wikisr.ontology import Ontology
from wikisr.query import (
    DEFAULT_MAX_DEPTH,
    ONTO,
    And,
    ConceptRef,
    ConceptVocabulary,
    Leaf,
    Not,
    Or,
    Query,
    concepts_of,
    depth,
    fold,
    iter_nodes,
    node_count,
    replace_at,
    serialize_query,
)
from wikisr.relatedness import RelatednessCache
from wikisr.wikifier import WikifyConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GPConfig:
    rng_seed: int
    population_size: int = 100
    generations: int = 50
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    max_depth: int = DEFAULT_MAX_DEPTH
    elitism: int = 1

    def __post_init__(self) -> None:
        for name in ("population_size", "tournament_size", "max_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError(f"elitism must be in [0, population_size], got {self.elitism}")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {getattr(self, name)}")


@dataclass(frozen=True)
class TrainingSet:
    positives: tuple[DocumentModel, ...]
    negatives: tuple[DocumentModel, ...] = ()

    def __post_init__(self) -> None:
        if not self.positives:
            raise ValueError("training set needs at least one positive example")
        pos_ids = {m.doc_id for m in self.positives if m.doc_id}
        shared = pos_ids & {m.doc_id for m in self.negatives if m.doc_id}
        if shared:
            raise ValueError(f"documents labelled both ways: {sorted(shared)}")

    @property
    def ratio(self) -> float:
        """Negatives per positive (the tr ratio)."""
        return len(self.negatives) / len(self.positives)

    def documents(self) -> list[DocumentModel]:
        return [*self.positives, *self.negatives]

    def labels(self) -> np.ndarray:
        return np.concatenate(
            [np.ones(len(self.positives), dtype=bool), np.zeros(len(self.negatives), dtype=bool)]
        )


@dataclass
class GPResult:
    rule: Query
    fitness: float
    # Best training F of each generation, the initial population first.
    history: list[float] = field(default_factory=list)


def terminal_set(
    g: LinkGraph,
    o: Ontology,
    gz: Gazetteer,
    cfg: WikifyConfig,
    t: str,
    *,
    vocab: ConceptVocabulary | None = None,
    stopwords: frozenset[str] = frozenset(),
    cache: RelatednessCache | None = None,
) -> frozenset[ConceptRef]:
    """Wikipedia and ontology concepts of the topic statement, NE flags fixed.

    A Wikipedia terminal is a named entity when it was recognized as one in
    the statement or its title is a gazetteer entry.
    """
    model = build_model(g, o, gz, cfg, t, stopwords=stopwords, cache=cache)
    if vocab is None:
        vocab = ConceptVocabulary.from_resources(g.titles, o.concepts)
    terminals: set[ConceptRef] = set()
    for concept in model.wiki:
        base = vocab.wiki_ref(concept)
        named = concept in model.wiki_ne or g.title_of(concept) in gz
        terminals.add(ConceptRef(base.kind, base.name, base.key, named))
    for name in model.onto:
        terminals.add(ConceptRef(ONTO, name, name, False))
    if not terminals:
        raise EmptyTerminalSetError()
    logger.info("Terminal set: %s", ", ".join(r.surface for r in sorted(terminals)))
    return frozenset(terminals)


def f_score(tp: int, fp: int, fn: int) -> float:
    if tp == 0:
        return 0.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def fitness(
    q: Query, train: TrainingSet, o: Ontology | None = None, *, subsumption: bool = True
) -> float:
    """Training F-score of exact-match evaluation."""
    tp = fp = fn = 0
    for m in train.positives:
        if evaluate_exact(o, q, m, subsumption=subsumption).match:
            tp += 1
        else:
            fn += 1
    for m in train.negatives:
        if evaluate_exact(o, q, m, subsumption=subsumption).match:
            fp += 1
    return f_score(tp, fp, fn)


class _FitnessTable:
    """Leaf presence as boolean columns so a tree evaluates over all documents at once."""

    def __init__(
        self,
        terminals: Sequence[ConceptRef],
        train: TrainingSet,
        o: Ontology | None,
        subsumption: bool,
    ) -> None:
        docs = train.documents()
        self.labels = train.labels()
        self.presence = {
            ref: np.fromiter(
                (is_direct(o, ref, m, subsumption) for m in docs), dtype=bool, count=len(docs)
            )
            for ref in terminals
        }
        self._memo: dict[str, float] = {}

    def score(self, q: Query, key: str) -> float:
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        predicted = fold(
            q,
            lambda ref: self.presence[ref],
            np.logical_not,
            lambda xs: np.logical_and.reduce(xs),
            lambda xs: np.logical_or.reduce(xs),
        )
        tp = int(np.count_nonzero(predicted & self.labels))
        fp = int(np.count_nonzero(predicted & ~self.labels))
        fn = int(np.count_nonzero(~predicted & self.labels))
        value = f_score(tp, fp, fn)
        self._memo[key] = value
        return value


@dataclass(frozen=True)
class _Scored:
    rule: Query
    text: str
    fitness: float
    size: int

    @property
    def rank(self) -> tuple[float, int, str]:
        return (-self.fitness, self.size, self.text)


class _Search:
    def __init__(self, terminals: Sequence[ConceptRef], gp: GPConfig, table: _FitnessTable) -> None:
        self.terminals = list(terminals)
        self.gp = gp
        self.table = table
        self.rng = np.random.default_rng(gp.rng_seed)

    def scored(self, q: Query) -> _Scored:
        text = serialize_query(q)
        return _Scored(q, text, self.table.score(q, text), node_count(q))

    def _terminal(self) -> Leaf:
        return Leaf(self.terminals[int(self.rng.integers(len(self.terminals)))])

    def grow(self, limit: int, full: bool) -> Query:
        if limit <= 0 or (not full and self.rng.random() < 0.5):
            return self._terminal()
        op = int(self.rng.integers(3))
        if op == 0:
            return Not(self.grow(limit - 1, full))
        children = (self.grow(limit - 1, full), self.grow(limit - 1, full))
        return And(children) if op == 1 else Or(children)

    def initial_population(self) -> list[Query]:
        population = []
        for i in range(self.gp.population_size):
            limit = 1 + (i // 2) % self.gp.max_depth
            population.append(self.grow(limit, full=i % 2 == 0))
        return population

    def tournament(self, population: list[_Scored]) -> _Scored:
        picks = self.rng.integers(len(population), size=self.gp.tournament_size)
        return min((population[int(i)] for i in picks), key=lambda s: s.rank)

    def _random_path(self, q: Query) -> tuple[int, ...]:
        paths = [path for path, _ in iter_nodes(q)]
        return paths[int(self.rng.integers(len(paths)))]

    def crossover(self, a: Query, b: Query) -> Query:
        donor = dict(iter_nodes(b))[self._random_path(b)]
        return replace_at(a, self._random_path(a), donor)

    def mutate(self, q: Query) -> Query:
        path = self._random_path(q)
        node = dict(iter_nodes(q))[path]
        if self.rng.random() < 0.5:
            if isinstance(node, Leaf):
                replacement: Query = self._terminal()
            elif isinstance(node, Not):
                replacement = node.child
            elif isinstance(node, And):
                replacement = Or(node.children)
            else:
                replacement = And(node.children)
        else:
            replacement = self.grow(2, full=False)
        return replace_at(q, path, replacement)

    def repair(self, q: Query) -> Query:
        return _truncate(q, self.gp.max_depth)


def _first_leaf(q: Query) -> Leaf:
    for _, node in iter_nodes(q):
        if isinstance(node, Leaf):
            return node
    raise AssertionError("query without leaves")


def _truncate(q: Query, budget: int) -> Query:
    """Cut every branch deeper than ``budget`` down to its leftmost leaf."""
    if isinstance(q, Leaf):
        return q
    if budget <= 0:
        return _first_leaf(q)
    if isinstance(q, Not):
        return Not(_truncate(q.child, budget - 1))
    children = tuple(_truncate(child, budget - 1) for child in q.children)
    return type(q)(children)


def run_gp(
    terminals: frozenset[ConceptRef],
    train: TrainingSet,
    gp: GPConfig,
    o: Ontology | None = None,
    *,
    subsumption: bool = True,
) -> GPResult:
    if not terminals:
        raise EmptyTerminalSetError()
    ordered = sorted(terminals)
    search = _Search(ordered, gp, _FitnessTable(ordered, train, o, subsumption))

    population = [search.scored(search.repair(q)) for q in search.initial_population()]
    best = min(population, key=lambda s: s.rank)
    history = [best.fitness]

    for generation in range(1, gp.generations + 1):
        ranked = sorted(population, key=lambda s: s.rank)
        offspring = ranked[: gp.elitism]
        while len(offspring) < gp.population_size:
            parent = search.tournament(population)
            child = parent.rule
            if search.rng.random() < gp.crossover_rate:
                child = search.crossover(child, search.tournament(population).rule)
            if search.rng.random() < gp.mutation_rate:
                child = search.mutate(child)
            offspring.append(search.scored(search.repair(child)))
        population = offspring
        leader = min(population, key=lambda s: s.rank)
        history.append(leader.fitness)
        if leader.rank < best.rank:
            best = leader
        logger.debug("Generation %d: best F %.4f, size %d", generation, leader.fitness, leader.size)

    if not concepts_of(best.rule) <= terminals or depth(best.rule) > gp.max_depth:
        raise AssertionError(f"builder produced an invalid rule: {best.text}")
    logger.info("Built rule %s (training F %.4f)", best.text, best.fitness)
    return GPResult(best.rule, best.fitness, history)


def build_rule(
    terminals: frozenset[ConceptRef],
    train: TrainingSet,
    gp: GPConfig,
    o: Ontology | None = None,
    *,
    subsumption: bool = True,
) -> Query:
    return run_gp(terminals, train, gp, o, subsumption=subsumption).rule
