"""Boolean concept queries: expression tree, parser and canonical serializer.

Concrete syntax::

    expr  := or
    or    := and ("OR" and)*
    and   := unary ("AND" unary)*
    unary := "NOT" unary | "(" expr ")" | STRING

Leaves are double-quoted concept names. Wikipedia concepts are written as
the compact form of their title (``"UnitedStates"``); ontology concepts
carry a ``bto:`` prefix (``"bto:PutOption"``). Keywords are case-insensitive.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, TypeVar, Union

import pyparsing as pp

from wikisr.errors import QuerySyntaxError, UnknownLeafError
from wikisr.text import compact_name

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 5
ONTOLOGY_PREFIX = "bto:"

WIKI = "wiki"
ONTO = "onto"

T = TypeVar("T")


@dataclass(frozen=True, order=True)
class ConceptRef:
    """A query leaf: one Wikipedia article or one ontology concept."""

    kind: str
    name: str
    key: int | str
    is_named_entity: bool = False

    @property
    def surface(self) -> str:
        return ONTOLOGY_PREFIX + self.name if self.kind == ONTO else self.name


@dataclass(frozen=True)
class Leaf:
    ref: ConceptRef


@dataclass(frozen=True)
class Not:
    child: Query


@dataclass(frozen=True)
class And:
    children: tuple[Query, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("AND needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple[Query, ...]

    def __post_init__(self) -> None:
        if len(self.children) < 2:
            raise ValueError("OR needs at least two children")


Query = Union[Leaf, Not, And, Or]
Path = tuple[int, ...]


class ConceptVocabulary:
    """Name resolution for query leaves over V (articles plus ontology concepts).

    Lookup order for an unprefixed name: exact compact name, case-insensitive
    compact name, then the ontology. ``bto:`` names resolve only against
    the ontology.
    """

    def __init__(self, refs: Iterable[ConceptRef]) -> None:
        self._wiki: dict[str, ConceptRef] = {}
        self._onto: dict[str, ConceptRef] = {}
        self._wiki_folded: dict[str, ConceptRef] = {}
        self._onto_folded: dict[str, ConceptRef] = {}
        self._by_id: dict[int, ConceptRef] = {}
        for ref in sorted(refs):
            exact, folded = (self._wiki, self._wiki_folded) if ref.kind == WIKI else (self._onto, self._onto_folded)
            if ref.name in exact:
                raise ValueError(f"duplicate {ref.kind} concept name {ref.name!r}")
            exact[ref.name] = ref
            folded.setdefault(ref.name.casefold(), ref)
            if ref.kind == WIKI:
                self._by_id[ref.key] = ref  # type: ignore[index]

    @classmethod
    def from_resources(
        cls,
        titles: dict[int, str] | Iterable[tuple[int, str]],
        onto_concepts: Iterable[str] = (),
        named_entities: Iterable[str] = (),
    ) -> ConceptVocabulary:
        """Build V from article titles and ontology concept names.

        ``named_entities`` holds article titles whose leaves get the NE flag.
        Compact-name collisions are disambiguated with the article id.
        """
        items = sorted(titles.items() if isinstance(titles, Mapping) else titles)
        ne = frozenset(named_entities)
        refs: list[ConceptRef] = []
        taken: set[str] = set()
        for concept, title in items:
            name = compact_name(title) or f"Article{concept}"
            if name in taken:
                name = f"{name}_{concept}"
            taken.add(name)
            refs.append(ConceptRef(WIKI, name, concept, title in ne))
        refs.extend(ConceptRef(ONTO, c, c) for c in sorted(onto_concepts))
        return cls(refs)

    def with_named_entities(self, names: Iterable[str]) -> ConceptVocabulary:
        """Copy with the NE flag set on the given leaf surfaces (and kept on existing ones)."""
        flagged = frozenset(names)
        return ConceptVocabulary(
            ConceptRef(r.kind, r.name, r.key, r.is_named_entity or r.surface in flagged)
            for r in self
        )

    def __iter__(self) -> Iterator[ConceptRef]:
        yield from self._wiki.values()
        yield from self._onto.values()

    def __len__(self) -> int:
        return len(self._wiki) + len(self._onto)

    def __contains__(self, ref: object) -> bool:
        if not isinstance(ref, ConceptRef):
            return False
        table = self._wiki if ref.kind == WIKI else self._onto
        return table.get(ref.name) == ref

    def wiki_ref(self, concept: int) -> ConceptRef:
        try:
            return self._by_id[concept]
        except KeyError:
            raise UnknownLeafError(str(concept)) from None

    def resolve(self, surface: str) -> ConceptRef:
        if surface.startswith(ONTOLOGY_PREFIX):
            name = surface[len(ONTOLOGY_PREFIX):]
            ref = self._onto.get(name) or self._onto_folded.get(name.casefold())
            if ref is None:
                raise UnknownLeafError(surface)
            return ref
        compact = compact_name(surface)
        for candidate in (
            self._wiki.get(surface),
            self._wiki.get(compact),
            self._wiki_folded.get(surface.casefold()),
            self._wiki_folded.get(compact.casefold()),
            self._onto.get(surface),
            self._onto_folded.get(surface.casefold()),
        ):
            if candidate is not None:
                return candidate
        raise UnknownLeafError(surface)


# --- parsing -------------------------------------------------------------


@dataclass(frozen=True)
class _Surface:
    text: str
    loc: int


@dataclass(frozen=True)
class _Op:
    op: str
    operands: tuple


def _build_grammar() -> pp.ParserElement:
    string = pp.QuotedString('"', esc_char="\\")
    string.set_parse_action(lambda s, loc, toks: _Surface(toks[0], loc))
    not_, and_, or_ = (pp.CaselessKeyword(k) for k in ("NOT", "AND", "OR"))
    return pp.infix_notation(
        string,
        [
            (not_, 1, pp.OpAssoc.RIGHT, lambda toks: _Op("NOT", (toks[0][1],))),
            (and_, 2, pp.OpAssoc.LEFT, lambda toks: _Op("AND", tuple(toks[0][0::2]))),
            (or_, 2, pp.OpAssoc.LEFT, lambda toks: _Op("OR", tuple(toks[0][0::2]))),
        ],
    )


_GRAMMAR = _build_grammar()
_GRAMMAR_LOCK = threading.Lock()


def _resolve(raw: object, vocab: ConceptVocabulary) -> Query:
    if isinstance(raw, _Surface):
        return Leaf(vocab.resolve(raw.text))
    assert isinstance(raw, _Op)
    if raw.op == "NOT":
        return Not(_resolve(raw.operands[0], vocab))
    children = tuple(_resolve(child, vocab) for child in raw.operands)
    return And(children) if raw.op == "AND" else Or(children)


def parse_query(text: str, vocab: ConceptVocabulary, max_depth: int = DEFAULT_MAX_DEPTH) -> Query:
    try:
        with _GRAMMAR_LOCK:
            result = _GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise QuerySyntaxError(exc.msg, exc.loc) from None
    q = _resolve(result[0], vocab)
    if depth(q) > max_depth:
        raise QuerySyntaxError(f"query depth {depth(q)} exceeds maximum {max_depth}", 0)
    return q


def _quote(surface: str) -> str:
    return '"' + surface.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_query(q: Query) -> str:
    """Canonical text; composite children are parenthesized, NOT always is."""
    if isinstance(q, Leaf):
        return _quote(q.ref.surface)
    if isinstance(q, Not):
        return f"(NOT {_serialize_operand(q.child)})"
    keyword = " AND " if isinstance(q, And) else " OR "
    return keyword.join(_serialize_operand(child) for child in q.children)


def _serialize_operand(q: Query) -> str:
    text = serialize_query(q)
    return f"({text})" if isinstance(q, (And, Or)) else text


# --- tree utilities ------------------------------------------------------


def fold(
    q: Query,
    leaf: Callable[[ConceptRef], T],
    negate: Callable[[T], T],
    conj: Callable[[list[T]], T],
    disj: Callable[[list[T]], T],
) -> T:
    """Bottom-up evaluation of ``q`` with caller-supplied connectives."""
    if isinstance(q, Leaf):
        return leaf(q.ref)
    if isinstance(q, Not):
        return negate(fold(q.child, leaf, negate, conj, disj))
    values = [fold(child, leaf, negate, conj, disj) for child in q.children]
    return conj(values) if isinstance(q, And) else disj(values)


def concepts_of(q: Query) -> frozenset[ConceptRef]:
    return frozenset(node.ref for _, node in iter_nodes(q) if isinstance(node, Leaf))


def depth(q: Query) -> int:
    if isinstance(q, Leaf):
        return 0
    if isinstance(q, Not):
        return 1 + depth(q.child)
    return 1 + max(depth(child) for child in q.children)


def node_count(q: Query) -> int:
    return sum(1 for _ in iter_nodes(q))


def iter_nodes(q: Query, path: Path = ()) -> Iterator[tuple[Path, Query]]:
    """Pre-order walk yielding ``(path, node)``; a path is a tuple of child indices."""
    yield path, q
    if isinstance(q, Not):
        yield from iter_nodes(q.child, path + (0,))
    elif isinstance(q, (And, Or)):
        for i, child in enumerate(q.children):
            yield from iter_nodes(child, path + (i,))


def subtree_at(q: Query, path: Path) -> Query:
    node = q
    for i in path:
        node = node.child if isinstance(node, Not) else node.children[i]  # type: ignore[union-attr]
    return node


def replace_at(q: Query, path: Path, new: Query) -> Query:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(q, Not):
        return Not(replace_at(q.child, rest, new))
    if isinstance(q, (And, Or)):
        children = list(q.children)
        children[head] = replace_at(children[head], rest, new)
        return type(q)(tuple(children))
    raise IndexError(f"path {path} descends below a leaf")
