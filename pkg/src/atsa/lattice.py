"""Totally ordered classification schemes and the domination check.

A scheme is a ladder of levels with contiguous ranks 0..N-1. Names and
aliases resolve case-insensitively to ranks; a server clearance ``s`` meets a
requirement ``r`` exactly when rank(s) >= rank(r). Compartments and
releasability markings are carried as scheme metadata for organizations that
use them, but are never consulted by any admission decision here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = [
    "BUILTIN_SCHEME_NAMES",
    "ClassificationLevel",
    "ClassificationScheme",
    "LevelNotFoundError",
    "SchemeError",
    "builtin_schemes",
    "get_builtin_scheme",
    "levels_up_to",
    "load_scheme",
    "serialize_scheme",
]


class SchemeError(ValueError):
    """A scheme definition violates the lattice rules."""


class LevelNotFoundError(SchemeError):
    """A level name does not resolve in the active scheme."""


@dataclass(frozen=True)
class ClassificationLevel:
    rank: int
    canonical_name: str
    aliases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "aliases", tuple(self.aliases))
        if not self.canonical_name:
            raise SchemeError("level name must be non-empty")
        if self.rank < 0:
            raise SchemeError(f"rank must be non-negative, got {self.rank}")


@dataclass(frozen=True)
class ClassificationScheme:
    """Validated level ladder. Construction rejects non-contiguous ranks and
    name or alias collisions (case-insensitive)."""

    name: str
    levels: tuple[ClassificationLevel, ...]
    compartments: tuple[str, ...] = ()
    markings: tuple[str, ...] = ()
    _ranks: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(sorted(self.levels, key=lambda l: l.rank)))
        object.__setattr__(self, "compartments", tuple(self.compartments))
        object.__setattr__(self, "markings", tuple(self.markings))
        if not self.name:
            raise SchemeError("scheme name must be non-empty")
        if not self.levels:
            raise SchemeError("scheme must define at least one level")
        ranks = [level.rank for level in self.levels]
        if ranks != list(range(len(ranks))):
            raise SchemeError(
                f"scheme {self.name!r}: ranks must be contiguous 0..{len(ranks) - 1}, got {sorted(set(ranks))}"
            )
        table: dict[str, int] = {}
        for level in self.levels:
            for name in (level.canonical_name, *level.aliases):
                key = name.casefold()
                if key in table:
                    raise SchemeError(f"scheme {self.name!r}: duplicate level name {name!r}")
                table[key] = level.rank
        object.__setattr__(self, "_ranks", table)

    def resolve(self, name: str) -> int | None:
        """Rank for a canonical name or alias, matched case-insensitively.
        Returns None when the name is not in the scheme."""
        if not isinstance(name, str):
            return None
        return self._ranks.get(name.casefold())

    def meets(self, server_level: str, required_level: str) -> bool:
        """Domination check: does ``server_level`` satisfy ``required_level``?
        Raises LevelNotFoundError when either side does not resolve."""
        server_rank = self.resolve(server_level)
        if server_rank is None:
            raise LevelNotFoundError(f"level {server_level!r} not in scheme {self.name!r}")
        required_rank = self.resolve(required_level)
        if required_rank is None:
            raise LevelNotFoundError(f"level {required_level!r} not in scheme {self.name!r}")
        return server_rank >= required_rank

    @property
    def top(self) -> str:
        """Canonical name of the highest level."""
        return self.levels[-1].canonical_name


_BUILTINS = {
    scheme.name: scheme
    for scheme in (
        ClassificationScheme(
            name="default",
            levels=(
                ClassificationLevel(0, "PUBLIC"),
                ClassificationLevel(1, "INTERNAL", ("CUI",)),
                ClassificationLevel(2, "CONFIDENTIAL"),
                ClassificationLevel(3, "RESTRICTED", ("SECRET",)),
                ClassificationLevel(4, "RESTRICTED-PLUS"),
                ClassificationLevel(5, "SCI"),
            ),
        ),
        ClassificationScheme(
            name="us-government",
            levels=(
                ClassificationLevel(0, "UNCLASSIFIED"),
                ClassificationLevel(1, "CUI"),
                ClassificationLevel(2, "CONFIDENTIAL"),
                ClassificationLevel(3, "SECRET"),
                ClassificationLevel(4, "TOP SECRET"),
                ClassificationLevel(5, "TS//SCI"),
            ),
            markings=("NOFORN",),
        ),
        ClassificationScheme(
            name="healthcare-hipaa",
            levels=(
                ClassificationLevel(0, "PUBLIC"),
                ClassificationLevel(1, "INTERNAL"),
                ClassificationLevel(2, "PHI"),
                ClassificationLevel(3, "SENSITIVE-PHI"),
                ClassificationLevel(4, "RESEARCH-EMBARGOED"),
            ),
            compartments=("MENTAL-HEALTH", "GENETICS"),
            markings=("BAA-COVERED",),
        ),
        ClassificationScheme(
            name="financial-services",
            levels=(
                ClassificationLevel(0, "PUBLIC"),
                ClassificationLevel(1, "INTERNAL"),
                ClassificationLevel(2, "CONFIDENTIAL"),
                ClassificationLevel(3, "MNPI"),
            ),
            compartments=("M_AND_A",),
        ),
        ClassificationScheme(
            name="generic-3-tier",
            levels=(
                ClassificationLevel(0, "LOW"),
                ClassificationLevel(1, "MEDIUM"),
                ClassificationLevel(2, "HIGH"),
            ),
        ),
    )
}

BUILTIN_SCHEME_NAMES = tuple(_BUILTINS)


def builtin_schemes() -> list[ClassificationScheme]:
    return list(_BUILTINS.values())


def get_builtin_scheme(name: str) -> ClassificationScheme:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise SchemeError(f"unknown builtin scheme {name!r}; known: {', '.join(_BUILTINS)}") from None


def levels_up_to(scheme: ClassificationScheme, name: str) -> tuple[str, ...]:
    """Canonical names of every level up to and including ``name``. Useful for
    materializing an 'approved up to X' signer policy as an explicit list."""
    ceiling = scheme.resolve(name)
    if ceiling is None:
        raise LevelNotFoundError(f"level {name!r} not in scheme {scheme.name!r}")
    return tuple(level.canonical_name for level in scheme.levels if level.rank <= ceiling)


def load_scheme(raw: bytes | str) -> ClassificationScheme:
    """Load a scheme from its JSON file form, applying full validation."""
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise SchemeError(f"scheme file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemeError("scheme file must be a JSON object")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        raise SchemeError("scheme 'name' must be a non-empty string")
    raw_levels = data.get("levels")
    if not isinstance(raw_levels, list) or not raw_levels:
        raise SchemeError("scheme 'levels' must be a non-empty array")
    levels = []
    for entry in raw_levels:
        if not isinstance(entry, dict):
            raise SchemeError("each level must be a JSON object")
        rank = entry.get("rank")
        if isinstance(rank, bool) or not isinstance(rank, int):
            raise SchemeError("level 'rank' must be an integer")
        canonical = entry.get("canonicalName")
        if not isinstance(canonical, str) or not canonical:
            raise SchemeError("level 'canonicalName' must be a non-empty string")
        aliases = entry.get("aliases", [])
        if not isinstance(aliases, list) or any(not isinstance(a, str) or not a for a in aliases):
            raise SchemeError("level 'aliases' must be an array of non-empty strings")
        levels.append(ClassificationLevel(rank, canonical, tuple(aliases)))
    compartments = _string_list(data, "compartments")
    markings = _string_list(data, "markings")
    return ClassificationScheme(
        name=name, levels=tuple(levels), compartments=compartments, markings=markings
    )


def _string_list(data: dict, key: str) -> tuple[str, ...]:
    value = data.get(key, [])
    if not isinstance(value, list) or any(not isinstance(m, str) for m in value):
        raise SchemeError(f"scheme {key!r} must be an array of strings")
    return tuple(value)


def serialize_scheme(scheme: ClassificationScheme, *, indent: int | None = 2) -> str:
    data = {
        "name": scheme.name,
        "levels": [
            {"rank": level.rank, "canonicalName": level.canonical_name, "aliases": list(level.aliases)}
            for level in scheme.levels
        ],
        "compartments": list(scheme.compartments),
        "markings": list(scheme.markings),
    }
    return json.dumps(data, indent=indent, ensure_ascii=False)
