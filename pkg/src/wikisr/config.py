"""Run settings: wikifier and GP parameters, tuning grid, thresholds.

Handles:
- Defaults for every tunable
- ``key=value`` config files (one per line, ``#`` comments)
- Layering of CLI overrides on top of a loaded file
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Any, Callable, Mapping

from wikisr.builder import GPConfig
from wikisr.errors import MalformedLineError, UsageError
from wikisr.evaluator import DEFAULT_C1, DEFAULT_C2
from wikisr.wikifier import WikifyConfig

logger = logging.getLogger(__name__)

DEFAULT_GRID_STEP = 0.05

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


_WIKIFY_KEYS: dict[str, Callable[[str], Any]] = {
    "max_ngram": int,
    "link_probability_min": float,
    "commonness_weight": float,
}
_GP_KEYS: dict[str, Callable[[str], Any]] = {
    "population_size": int,
    "generations": int,
    "tournament_size": int,
    "crossover_rate": float,
    "mutation_rate": float,
    "max_depth": int,
    "elitism": int,
    "rng_seed": int,
}
_TOP_KEYS: dict[str, Callable[[str], Any]] = {
    "grid_step": float,
    "subsumption": _parse_bool,
    "c1": float,
    "c2": float,
}


@dataclass(frozen=True)
class Settings:
    wikify: WikifyConfig = field(default_factory=WikifyConfig)
    gp_params: Mapping[str, Any] = field(default_factory=lambda: MappingProxyType({}))
    rng_seed: int | None = None
    grid_step: float = DEFAULT_GRID_STEP
    subsumption: bool = True
    c1: float = DEFAULT_C1
    c2: float = DEFAULT_C2

    def __post_init__(self) -> None:
        if not 0.0 < self.grid_step < 1.0:
            raise ValueError(f"grid_step must be in (0, 1), got {self.grid_step}")
        if not 0.0 <= self.c2 <= self.c1 <= 1.0:
            raise ValueError(f"thresholds must satisfy 0 <= c2 <= c1 <= 1, got c1={self.c1}, c2={self.c2}")
        unknown = set(self.gp_params) - (set(_GP_KEYS) - {"rng_seed"})
        if unknown:
            raise ValueError(f"unknown GP parameters: {sorted(unknown)}")

    def gp_config(self, seed: int | None = None) -> GPConfig:
        """GP parameters with ``seed`` taking precedence over the configured one."""
        effective = seed if seed is not None else self.rng_seed
        if effective is None:
            raise UsageError("a GP seed is required (--seed or gp.rng_seed)")
        return GPConfig(rng_seed=effective, **self.gp_params)

    def with_overrides(self, **changes: Any) -> Settings:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_settings(path: str | Path) -> Settings:
    path = Path(path)
    wikify: dict[str, Any] = {}
    gp: dict[str, Any] = {}
    top: dict[str, Any] = {}

    with path.open("r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not key:
                raise MalformedLineError(path, line_no, "expected key=value")
            section, _, name = key.rpartition(".")
            if section == "wikify" and name in _WIKIFY_KEYS:
                target, parser = wikify, _WIKIFY_KEYS[name]
            elif section in ("gp", "") and name in _GP_KEYS:
                target, parser = gp, _GP_KEYS[name]
            elif section == "" and name in _TOP_KEYS:
                target, parser = top, _TOP_KEYS[name]
            else:
                raise MalformedLineError(path, line_no, f"unknown key {key!r}")
            try:
                target[name] = parser(value)
            except ValueError as exc:
                raise MalformedLineError(path, line_no, f"bad value for {key}: {exc}") from None

    seed = gp.pop("rng_seed", None)
    try:
        settings = Settings(
            wikify=WikifyConfig(**wikify),
            gp_params=MappingProxyType(gp),
            rng_seed=seed,
            **top,
        )
        # GP values are otherwise only checked once a seed is known.
        GPConfig(rng_seed=0, **gp)
    except ValueError as exc:
        raise MalformedLineError(path, 0, str(exc)) from None
    logger.info("Loaded settings from %s", path)
    return settings
