"""Exception hierarchy shared by every wikisr module."""

from __future__ import annotations

from pathlib import Path


class WikiSRError(Exception):
    """Base class for all wikisr errors."""


class UsageError(WikiSRError):
    """Bad command-line usage."""


class DataError(WikiSRError):
    """Input data violates a format or an invariant."""


class ResourceError(DataError):
    """A required resource file is missing or unreadable."""


class MalformedLineError(DataError):
    def __init__(self, path: str | Path, line_no: int, reason: str) -> None:
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{self.path}:{line_no}: {reason}")


class DanglingReferenceError(DataError):
    def __init__(self, concept_id: int, where: str) -> None:
        self.concept_id = concept_id
        super().__init__(f"dangling reference to id {concept_id} in {where}")


class DuplicateTitleError(DataError):
    def __init__(self, title: str) -> None:
        self.title = title
        super().__init__(f"duplicate article title {title!r}")


class EmptyGraphError(DataError):
    def __init__(self) -> None:
        super().__init__("empty graph")


class UnknownConceptError(DataError, KeyError):
    def __init__(self, concept: object) -> None:
        self.concept = concept
        super().__init__(f"unknown concept {concept!r}")

    def __str__(self) -> str:
        return str(self.args[0])


class DuplicateFactError(DataError):
    def __init__(self, fact_id: str) -> None:
        self.fact_id = fact_id
        super().__init__(f"duplicate fact identifier {fact_id!r}")


class SubclassCycleError(DataError):
    def __init__(self, cycle: list[str]) -> None:
        self.cycle = cycle
        super().__init__("subClassOf cycle: " + " -> ".join(cycle))


class QuerySyntaxError(DataError):
    def __init__(self, message: str, position: int) -> None:
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnknownLeafError(DataError):
    def __init__(self, surface: str) -> None:
        self.surface = surface
        super().__init__(f"unknown concept in query: {surface!r}")


class EmptyTerminalSetError(DataError):
    def __init__(self) -> None:
        super().__init__("topic statement yields no concepts")


class EmptyAggregateError(DataError):
    def __init__(self) -> None:
        super().__init__("no successful topic runs to aggregate")
