# kgstroll/services/graph.py
# Graph layer: what walkers, samplers and literal extraction traverse
# - KnowledgeGraph: immutable in-memory multigraph with forward/inverse
#   adjacency, skip-predicate filtering and a separate literal index
# - RemoteKnowledgeGraph: same query surface served hop-at-a-time by a
#   SparqlConnector (lazy; nothing is materialized)

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path

from loguru import logger

from kgstroll import parsers
from kgstroll.parsers.terms import Direction, Hop, Term, TermKind, Triple
from kgstroll.utils.sparql_client import SparqlConnector

__all__ = ["BaseGraph", "KnowledgeGraph", "RemoteKnowledgeGraph", "build"]


class BaseGraph(ABC):
    """
    Read-only hop and literal queries shared by local and remote graphs.

    No hop whose predicate is a skip predicate is ever returned, and
    literal objects never appear as hop neighbors.
    """

    is_remote: bool = False

    def __init__(self, skip_predicates: Iterable[str] = ()) -> None:
        self.skip_predicates: frozenset[str] = frozenset(skip_predicates)

    @abstractmethod
    def get_hops(self, vertex: Term, direction: Direction = Direction.FORWARD) -> list[Hop]:
        """Outgoing (forward) or incoming (reverse) walkable hops; [] if unknown."""

    @abstractmethod
    def get_literals(self, subject: Term, predicate: str) -> list[Term]:
        """Literal objects of (subject, predicate), in insertion order."""

    @abstractmethod
    def has_vertex(self, vertex: Term) -> bool:
        """Whether walks can start from this vertex."""

    def prefetch(self, vertices: Sequence[Term], direction: Direction) -> None:
        """Warm hop lookups for a walk frontier (no-op for local graphs)."""
        return None


# --------------------------------------------------------
# In-memory graph
# --------------------------------------------------------
class KnowledgeGraph(BaseGraph):
    """
    Indexed in-memory multigraph.

    Vertices are interned to dense integer ids; the public surface speaks
    Terms. Duplicate statements are kept. Hop sequences preserve insertion
    order.
    """

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        skip_predicates: Iterable[str] = (),
    ) -> None:
        super().__init__(skip_predicates)
        self._ids: dict[Term, int] = {}
        self._vertices: list[Term] = []
        forward: list[list[Hop]] = []
        inverse: list[list[Hop]] = []
        literals: dict[tuple[Term, str], list[Term]] = {}
        edges: list[tuple[int, Term, int]] = []
        skipped = 0

        def intern(term: Term) -> int:
            vid = self._ids.get(term)
            if vid is None:
                vid = len(self._vertices)
                self._ids[term] = vid
                self._vertices.append(term)
                forward.append([])
                inverse.append([])
            return vid

        for t in triples:
            sid = intern(t.subject)
            oid = None if t.object.is_literal else intern(t.object)
            if t.predicate.lexical in self.skip_predicates:
                skipped += 1
                continue
            if oid is None:
                literals.setdefault((t.subject, t.predicate.lexical), []).append(t.object)
                continue
            forward[sid].append(Hop(t.predicate, t.object))
            inverse[oid].append(Hop(t.predicate, t.subject))
            edges.append((sid, t.predicate, oid))

        self._forward: tuple[tuple[Hop, ...], ...] = tuple(map(tuple, forward))
        self._inverse: tuple[tuple[Hop, ...], ...] = tuple(map(tuple, inverse))
        self._literals = {k: tuple(v) for k, v in literals.items()}
        self._edges = tuple(edges)
        logger.debug(
            f"event=graph_built vertices={len(self._vertices)} edges={len(self._edges)} "
            f"literal_keys={len(self._literals)} skipped={skipped}"
        )

    # --------------------------------------------------------
    # Constructors
    # --------------------------------------------------------
    @classmethod
    def from_file(
        cls,
        path: Path,
        skip_predicates: Iterable[str] = (),
        *,
        lenient: bool = False,
    ) -> KnowledgeGraph:
        parser = parsers.get_parser("nt", lenient=lenient)
        triples = parser.parse_file(path)
        if parser.skipped:
            logger.warning(
                f"event=malformed_lines_skipped file={path} count={parser.skipped}"
            )
        return cls(triples, skip_predicates)

    # --------------------------------------------------------
    # Queries
    # --------------------------------------------------------
    def get_hops(self, vertex: Term, direction: Direction = Direction.FORWARD) -> list[Hop]:
        vid = self._ids.get(vertex)
        if vid is None:
            return []
        table = self._forward if direction is Direction.FORWARD else self._inverse
        return list(table[vid])

    def get_literals(self, subject: Term, predicate: str) -> list[Term]:
        return list(self._literals.get((subject, predicate), ()))

    def has_vertex(self, vertex: Term) -> bool:
        return vertex in self._ids

    def vertex_id(self, vertex: Term) -> int | None:
        return self._ids.get(vertex)

    @property
    def vertices(self) -> tuple[Term, ...]:
        """All IRI and blank-node vertices, in first-seen order."""
        return tuple(self._vertices)

    @property
    def num_vertices(self) -> int:
        return len(self._vertices)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def edges(self) -> Iterator[tuple[Term, Term, Term]]:
        """Walkable (subject, predicate, object) edges in insertion order."""
        for sid, predicate, oid in self._edges:
            yield self._vertices[sid], predicate, self._vertices[oid]

    def edge_ids(self) -> Iterator[tuple[int, Term, int]]:
        return iter(self._edges)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self._ids

    def __len__(self) -> int:
        return len(self._vertices)

    def __repr__(self) -> str:
        return (
            f"KnowledgeGraph(vertices={self.num_vertices}, edges={self.num_edges}, "
            f"skip_predicates={len(self.skip_predicates)})"
        )


def build(triples: Iterable[Triple], skip_predicates: Iterable[str] = ()) -> KnowledgeGraph:
    """Index a triple sequence; skipped predicates are left out of every index."""
    return KnowledgeGraph(triples, skip_predicates)


# --------------------------------------------------------
# Remote graph
# --------------------------------------------------------
class RemoteKnowledgeGraph(BaseGraph):
    """
    Graph facade over a SPARQL endpoint.

    Hops are requested lazily and cached by the connector; skip predicates
    and literal separation are applied client-side. Blank nodes are not
    addressable remotely and have no hops.
    """

    is_remote = True

    def __init__(
        self, connector: SparqlConnector, skip_predicates: Iterable[str] = ()
    ) -> None:
        super().__init__(skip_predicates)
        self.connector = connector

    def _walkable(self, hops: Iterable[Hop]) -> list[Hop]:
        return [
            h
            for h in hops
            if not h.neighbor.is_literal and h.predicate.lexical not in self.skip_predicates
        ]

    def get_hops(self, vertex: Term, direction: Direction = Direction.FORWARD) -> list[Hop]:
        if vertex.kind is not TermKind.IRI:
            return []
        return self._walkable(self.connector.fetch_hops(vertex, direction))

    def get_literals(self, subject: Term, predicate: str) -> list[Term]:
        if subject.kind is not TermKind.IRI or predicate in self.skip_predicates:
            return []
        return [
            h.neighbor
            for h in self.connector.fetch_hops(subject, Direction.FORWARD)
            if h.neighbor.is_literal and h.predicate.lexical == predicate
        ]

    def has_vertex(self, vertex: Term) -> bool:
        if vertex.kind is not TermKind.IRI:
            return False
        return bool(
            self.connector.fetch_hops(vertex, Direction.FORWARD)
            or self.connector.fetch_hops(vertex, Direction.REVERSE)
        )

    def prefetch(self, vertices: Sequence[Term], direction: Direction) -> None:
        iris = [v for v in dict.fromkeys(vertices) if v.kind is TermKind.IRI]
        missing = [v for v in iris if (v.lexical, direction) not in self.connector.cache]
        if missing:
            self.connector.fetch_hops_bundled(missing, direction)

    def __repr__(self) -> str:
        return f"RemoteKnowledgeGraph(endpoint={self.connector.endpoint!r})"
