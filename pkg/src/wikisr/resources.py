"""Loaded resource bundle shared by the CLI, the harness and the MCP server.

Handles:
- Loading graph, ontology, gazetteer and stopwords in one place
- Environment-driven resolution for the MCP server (cached per process)
- The query vocabulary V built from graph titles and ontology concepts
"""

from __future__ import annotations

import logging
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from wikisr.config import Settings, load_settings
from wikisr.docmodel import DocumentModel, build_model
from wikisr.errors import ResourceError
from wikisr.linkgraph import LinkGraph, load_graph_dir
from wikisr.ner import Gazetteer, load_gazetteer, make_gazetteer
from wikisr.ontology import Ontology, empty_ontology, load_ontology
from wikisr.query import ConceptVocabulary
from wikisr.relatedness import RelatednessCache
from wikisr.text import load_stopwords

logger = logging.getLogger(__name__)

ENV_GRAPH_DIR = "WIKISR_GRAPH_DIR"
ENV_ONTOLOGY = "WIKISR_ONTOLOGY"
ENV_GAZETTEER = "WIKISR_GAZETTEER"
ENV_STOPWORDS = "WIKISR_STOPWORDS"
ENV_CONFIG = "WIKISR_CONFIG"


@dataclass(frozen=True, eq=False)
class Resources:
    graph: LinkGraph
    ontology: Ontology
    gazetteer: Gazetteer
    stopwords: frozenset[str]
    settings: Settings = field(default_factory=Settings)
    cache: RelatednessCache = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cache", RelatednessCache(self.graph))
        object.__setattr__(self, "_vocab_lock", threading.Lock())
        object.__setattr__(self, "_vocab", None)

    def vocabulary(self) -> ConceptVocabulary:
        """V: every article plus every ontology concept; gazetteer titles are NE leaves."""
        with self._vocab_lock:  # type: ignore[attr-defined]
            if self._vocab is None:  # type: ignore[attr-defined]
                named = [t for t in self.graph.titles.values() if t in self.gazetteer]
                vocab = ConceptVocabulary.from_resources(self.graph.titles, self.ontology.concepts, named)
                object.__setattr__(self, "_vocab", vocab)
            return self._vocab  # type: ignore[attr-defined]

    def model(self, text: str, doc_id: str = "") -> DocumentModel:
        return build_model(
            self.graph,
            self.ontology,
            self.gazetteer,
            self.settings.wikify,
            text,
            stopwords=self.stopwords,
            doc_id=doc_id,
            cache=self.cache,
        )


def _require(path: str | Path, what: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise ResourceError(f"{what} not found: {path}")
    return path


def load_resources(
    graph_dir: str | Path,
    ontology_path: str | Path | None = None,
    gazetteer_path: str | Path | None = None,
    stopwords_path: str | Path | None = None,
    settings: Settings | None = None,
) -> Resources:
    """Load every resource; ontology and gazetteer are optional (empty when omitted)."""
    graph = load_graph_dir(_require(graph_dir, "graph directory"))
    ontology = load_ontology(_require(ontology_path, "ontology")) if ontology_path else empty_ontology()
    gazetteer = load_gazetteer(_require(gazetteer_path, "gazetteer")) if gazetteer_path else make_gazetteer({})
    stopwords = load_stopwords(_require(stopwords_path, "stopword list") if stopwords_path else None)
    return Resources(graph, ontology, gazetteer, stopwords, settings or Settings())


# Cache the bundle for the lifetime of the server process
_resources: Resources | None = None
_resources_lock = threading.Lock()


def resources_from_env() -> Resources:
    """Load (once) the bundle named by the WIKISR_* environment variables."""
    global _resources
    with _resources_lock:
        if _resources is not None:
            return _resources
        graph_dir = os.environ.get(ENV_GRAPH_DIR)
        if not graph_dir:
            raise ResourceError(f"{ENV_GRAPH_DIR} is not set")
        config = os.environ.get(ENV_CONFIG)
        _resources = load_resources(
            graph_dir,
            os.environ.get(ENV_ONTOLOGY) or None,
            os.environ.get(ENV_GAZETTEER) or None,
            os.environ.get(ENV_STOPWORDS) or None,
            load_settings(config) if config else None,
        )
        logger.debug("Resources loaded from environment (graph %s)", graph_dir)
        return _resources


def reset_resources() -> None:
    global _resources
    with _resources_lock:
        _resources = None
