# kgstroll/services/literals.py
# Literal features along predicate paths
# - Follows forward hops p1..p(k-1) over every matching branch, then collects
#   the literal objects of pk at each vertex reached
# - 0 values -> Missing, 1 -> Single, >= 2 -> Many (graph insertion order)
# - Numeric detection is lexical; datatype IRIs are ignored

from __future__ import annotations

import json
import math
import re
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Any

from loguru import logger

from kgstroll.core.errors import ConfigurationError
from kgstroll.parsers.terms import Direction, Term
from kgstroll.services.graph import BaseGraph

__all__ = [
    "LiteralPathError",
    "LiteralPath",
    "ResultKind",
    "LiteralResult",
    "LiteralTable",
    "literal_value",
    "extract_literals",
    "write_literal_table",
]

_NUMERIC = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")

LiteralValue = float | str


class LiteralPathError(ConfigurationError):
    """Empty path, or a path through a skipped predicate."""


@dataclass(frozen=True, slots=True)
class LiteralPath:
    predicates: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.predicates:
            raise LiteralPathError("literal path must name at least one predicate")

    @classmethod
    def parse(cls, text: str) -> LiteralPath:
        """`<iri>,<iri>,...`; angle brackets are optional."""
        return cls(tuple(p.strip().strip("<>") for p in text.split(",") if p.strip()))

    @property
    def name(self) -> str:
        return ".".join(self.predicates)


class ResultKind(StrEnum):
    MISSING = "missing"
    SINGLE = "single"
    MANY = "many"


@dataclass(frozen=True, slots=True)
class LiteralResult:
    values: tuple[LiteralValue, ...] = ()

    @property
    def kind(self) -> ResultKind:
        match len(self.values):
            case 0:
                return ResultKind.MISSING
            case 1:
                return ResultKind.SINGLE
            case _:
                return ResultKind.MANY

    def to_python(self) -> LiteralValue | list[LiteralValue]:
        """nan when missing, the value itself when single, a list otherwise."""
        match self.kind:
            case ResultKind.MISSING:
                return math.nan
            case ResultKind.SINGLE:
                return self.values[0]
            case _:
                return list(self.values)

    def to_json(self) -> LiteralValue | list[LiteralValue] | None:
        if self.kind is ResultKind.MISSING:
            return None
        return self.to_python()


def literal_value(term: Term) -> LiteralValue:
    """Float when the lexical form is a finite decimal/scientific number, else the string."""
    text = term.lexical
    if _NUMERIC.match(text):
        number = float(text)
        if math.isfinite(number):
            return number
    return text


@dataclass(frozen=True, slots=True)
class LiteralTable:
    """Seeds x paths matrix of results."""

    seeds: tuple[Term, ...]
    paths: tuple[LiteralPath, ...]
    rows: tuple[tuple[LiteralResult, ...], ...]

    def get(self, seed: Term, path: LiteralPath) -> LiteralResult:
        return self.rows[self.seeds.index(seed)][self.paths.index(path)]

    def to_json(self) -> dict[str, dict[str, Any]]:
        return {
            seed.token: {p.name: r.to_json() for p, r in zip(self.paths, row, strict=True)}
            for seed, row in zip(self.seeds, self.rows, strict=True)
        }


def _follow(graph: BaseGraph, seed: Term, path: LiteralPath) -> LiteralResult:
    frontier = [seed]
    for predicate in path.predicates[:-1]:
        if not frontier:
            break
        graph.prefetch(frontier, Direction.FORWARD)
        frontier = [
            hop.neighbor
            for vertex in frontier
            for hop in graph.get_hops(vertex, Direction.FORWARD)
            if hop.predicate.lexical == predicate
        ]
    last = path.predicates[-1]
    return LiteralResult(
        tuple(literal_value(lit) for vertex in frontier for lit in graph.get_literals(vertex, last))
    )


def extract_literals(
    graph: BaseGraph,
    seeds: Sequence[Term],
    paths: Sequence[LiteralPath],
    *,
    workers: int = 1,
) -> LiteralTable:
    """
    Literal values for every (seed, path) pair.

    Unreachable paths and unknown seeds yield Missing.

    Raises:
        LiteralPathError: no paths, or a path uses a skipped predicate
    """
    if not paths:
        raise LiteralPathError("at least one literal path is required")
    for path in paths:
        skipped = [p for p in path.predicates if p in graph.skip_predicates]
        if skipped:
            raise LiteralPathError(f"literal path {path.name} uses skipped predicate {skipped[0]}")

    def row(seed: Term) -> tuple[LiteralResult, ...]:
        return tuple(_follow(graph, seed, path) for path in paths)

    if workers <= 1:
        rows = [row(seed) for seed in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="literals") as pool:
            rows = list(pool.map(row, seeds))

    found = sum(1 for r in rows for cell in r if cell.kind is not ResultKind.MISSING)
    logger.info(
        f"event=literals_extracted entities={len(seeds)} paths={len(paths)} "
        f"found={found} missing={len(seeds) * len(paths) - found}"
    )
    return LiteralTable(tuple(seeds), tuple(paths), tuple(rows))


def write_literal_table(table: LiteralTable, path: Path) -> None:
    """JSON object: seed IRI -> {dot-joined path: null | value | [values]}."""
    path = Path(path)
    path.write_text(
        json.dumps(table.to_json(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    logger.info(f"event=literals_written path={path} rows={len(table.seeds)}")
