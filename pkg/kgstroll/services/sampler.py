# kgstroll/services/sampler.py
# Edge-weight samplers: bias next-hop choice during walk extraction
# - Uniform, predicate frequency, object in-degree, (predicate, object)
#   frequency and PageRank-of-object weights, each optionally inverted
# - Weights belong to the graph-oriented edge (s, p, o) whatever the
#   traversal direction
# - Draws use cumulative-sum inversion over insertion-ordered hops

from __future__ import annotations

from abc import ABC, abstractmethod
from collections import Counter
from typing import Any

import numpy as np
import numpy.typing as npt
from loguru import logger
from scipy.sparse import csr_matrix

from kgstroll.core.errors import ConfigurationError, KgStrollError
from kgstroll.parsers.terms import Direction, Hop, Term
from kgstroll.services.graph import BaseGraph, KnowledgeGraph
from kgstroll.utils.random_source import RandomSource

__all__ = [
    "SamplerError",
    "SamplerNotFittedError",
    "Sampler",
    "UniformSampler",
    "PredFreqSampler",
    "ObjFreqSampler",
    "PredObjFreqSampler",
    "PageRankSampler",
    "get_sampler",
    "edge_of",
]

EdgeKey = tuple[Term, Term, Term]

PAGERANK_TOLERANCE = 1e-10
PAGERANK_MAX_ITER = 200


class SamplerError(ConfigurationError):
    """Invalid sampler parameters, or a graph the sampler cannot be fitted on."""


class SamplerNotFittedError(KgStrollError, LookupError):
    """Weight requested for an edge outside the fitted statistics."""


def edge_of(vertex: Term, hop: Hop, direction: Direction) -> EdgeKey:
    """Graph-oriented (s, p, o) edge behind a hop taken from `vertex`."""
    if direction is Direction.FORWARD:
        return vertex, hop.predicate, hop.neighbor
    return hop.neighbor, hop.predicate, vertex


class Sampler(ABC):
    """
    Weight allocation strategy.

    `fit` collects statistics from a graph and returns the sampler itself;
    a fitted sampler is read-only and can be shared by walker threads.
    """

    name: str = "sampler"
    needs_local_graph: bool = True

    def __init__(self, inverse: bool = False) -> None:
        self.inverse = inverse
        self.fitted = False

    def fit(self, graph: BaseGraph) -> Sampler:
        if self.needs_local_graph and not isinstance(graph, KnowledgeGraph):
            raise SamplerError(
                f"{self.name} sampler needs a local graph; materialize the endpoint first"
            )
        self._fit(graph)
        self.fitted = True
        logger.debug(f"event=sampler_fitted sampler={self!r}")
        return self

    @abstractmethod
    def _fit(self, graph: BaseGraph) -> None: ...

    @abstractmethod
    def _raw_weight(self, edge: EdgeKey) -> float: ...

    def weigh(self, edge: EdgeKey) -> float:
        """
        Positive weight of a (subject, predicate, object) edge.

        Raises:
            SamplerNotFittedError: sampler not fitted, or edge unknown to the
                fitted statistics
        """
        if not self.fitted:
            raise SamplerNotFittedError(f"{self.name} sampler is not fitted")
        w = self._raw_weight(edge)
        return 1.0 / (1.0 + w) if self.inverse else w

    def hop_weights(
        self, graph: BaseGraph, vertex: Term, direction: Direction
    ) -> tuple[list[Hop], npt.NDArray[np.float64]]:
        hops = graph.get_hops(vertex, direction)
        weights = np.fromiter(
            (self.weigh(edge_of(vertex, h, direction)) for h in hops),
            dtype=np.float64,
            count=len(hops),
        )
        return hops, weights

    def hop_probabilities(
        self, graph: BaseGraph, vertex: Term, direction: Direction = Direction.FORWARD
    ) -> tuple[list[Hop], npt.NDArray[np.float64]]:
        hops, weights = self.hop_weights(graph, vertex, direction)
        if not hops:
            return hops, weights
        return hops, weights / weights.sum()

    def sample_hop(
        self,
        graph: BaseGraph,
        vertex: Term,
        direction: Direction,
        rng: RandomSource,
    ) -> Hop | None:
        """One eligible hop drawn proportionally to its weight; None at dead ends."""
        hops, weights = self.hop_weights(graph, vertex, direction)
        if not hops:
            return None
        if len(hops) == 1:
            return hops[0]
        return hops[_invert(np.cumsum(weights), np.array([rng.random()]))[0]]

    def sample_hops(
        self,
        graph: BaseGraph,
        vertex: Term,
        direction: Direction,
        rng: RandomSource,
        size: int,
    ) -> list[Hop]:
        """`size` independent draws from the same distribution as `sample_hop`."""
        hops, weights = self.hop_weights(graph, vertex, direction)
        if not hops:
            return []
        picks = _invert(np.cumsum(weights), rng.randoms(size))
        return [hops[i] for i in picks]

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "inverse": self.inverse}

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "name")
        return f"{type(self).__name__}({params})"


def _invert(cumulative: npt.NDArray[np.float64], u: npt.NDArray[np.float64]) -> npt.NDArray[np.intp]:
    """Cumulative-sum inversion: index i with cum[i-1] <= u*total < cum[i]."""
    picks = np.searchsorted(cumulative, u * cumulative[-1], side="right")
    return np.minimum(picks, len(cumulative) - 1)


# --------------------------------------------------------
# Strategies
# --------------------------------------------------------
class UniformSampler(Sampler):
    name = "uniform"
    needs_local_graph = False

    def __init__(self, inverse: bool = False) -> None:
        super().__init__(inverse)
        self.empty = False

    def _fit(self, graph: BaseGraph) -> None:
        # remote graphs are never enumerated, so only a local one can be empty
        self.empty = isinstance(graph, KnowledgeGraph) and graph.num_edges == 0

    def _raw_weight(self, edge: EdgeKey) -> float:
        if self.empty:
            raise SamplerNotFittedError("uniform sampler was fitted on a graph without edges")
        return 1.0


class _CountingSampler(Sampler):
    """Weights looked up in a frequency table built from walkable edges."""

    def __init__(self, inverse: bool = False) -> None:
        super().__init__(inverse)
        self.counts: Counter[Any] = Counter()

    @abstractmethod
    def _key(self, edge: EdgeKey) -> Any: ...

    def _fit(self, graph: BaseGraph) -> None:
        assert isinstance(graph, KnowledgeGraph)  # nosec B101
        self.counts = Counter(self._key(edge) for edge in graph.edges())

    def _raw_weight(self, edge: EdgeKey) -> float:
        count = self.counts.get(self._key(edge))
        if count is None:
            raise SamplerNotFittedError(
                f"{self.name} sampler has no statistics for edge {edge[0]} {edge[1]} {edge[2]}"
            )
        return float(count)


class PredFreqSampler(_CountingSampler):
    """Weight = number of walkable edges carrying the predicate."""

    name = "predfreq"

    def _key(self, edge: EdgeKey) -> Any:
        return edge[1]


class ObjFreqSampler(_CountingSampler):
    """Weight = in-degree of the edge's object."""

    name = "objfreq"

    def _key(self, edge: EdgeKey) -> Any:
        return edge[2]


class PredObjFreqSampler(_CountingSampler):
    """Weight = number of walkable edges with the same (predicate, object)."""

    name = "predobjfreq"

    def _key(self, edge: EdgeKey) -> Any:
        return edge[1], edge[2]


class PageRankSampler(Sampler):
    """
    Weight = PageRank score of the edge's object.

    Power iteration on the skip-filtered walkable digraph with damping
    `alpha`, uniform teleport and dangling mass spread uniformly; stops when
    the L1 change drops below 1e-10 or after 200 iterations.
    """

    name = "pagerank"

    def __init__(self, alpha: float = 0.85, inverse: bool = False) -> None:
        if not 0.0 < alpha < 1.0:
            raise SamplerError(f"alpha must be in (0, 1), got {alpha}")
        super().__init__(inverse)
        self.alpha = alpha
        self.scores: dict[Term, float] = {}
        self.iterations = 0

    def _fit(self, graph: BaseGraph) -> None:
        assert isinstance(graph, KnowledgeGraph)  # nosec B101
        n = graph.num_vertices
        self.scores = {}
        if n == 0:
            return
        pairs = [(sid, oid) for sid, _, oid in graph.edge_ids()]
        src = np.fromiter((s for s, _ in pairs), dtype=np.intp, count=len(pairs))
        dst = np.fromiter((o for _, o in pairs), dtype=np.intp, count=len(pairs))
        out_degree = np.bincount(src, minlength=n).astype(np.float64)
        data = 1.0 / out_degree[src]
        # column-stochastic transition matrix; duplicate edges add up
        transition = csr_matrix((data, (dst, src)), shape=(n, n))
        dangling = out_degree == 0

        rank = np.full(n, 1.0 / n)
        for step in range(1, PAGERANK_MAX_ITER + 1):
            spread = rank[dangling].sum() / n
            new_rank = self.alpha * (transition @ rank + spread) + (1.0 - self.alpha) / n
            delta = np.abs(new_rank - rank).sum()
            rank = new_rank
            if delta < PAGERANK_TOLERANCE:
                break
        self.iterations = step
        rank /= rank.sum()
        vertices = graph.vertices
        self.scores = {vertices[i]: float(rank[i]) for i in range(n)}
        logger.debug(f"event=pagerank_converged iterations={step} delta={delta:.3e}")

    def _raw_weight(self, edge: EdgeKey) -> float:
        score = self.scores.get(edge[2])
        if score is None:
            raise SamplerNotFittedError(f"pagerank sampler has no score for {edge[2]}")
        return score

    def describe(self) -> dict[str, Any]:
        return {"name": self.name, "alpha": self.alpha, "inverse": self.inverse}


def get_sampler(name: str, **params: Any) -> Sampler:
    """
    Create an unfitted sampler by strategy name.

    Args:
        name: uniform | predfreq | objfreq | predobjfreq | pagerank
        params: `inverse` for every strategy, `alpha` for pagerank

    Raises:
        SamplerError: unknown strategy or parameter
    """
    try:
        match name.lower():
            case "uniform":
                return UniformSampler(**params)
            case "predfreq":
                return PredFreqSampler(**params)
            case "objfreq":
                return ObjFreqSampler(**params)
            case "predobjfreq":
                return PredObjFreqSampler(**params)
            case "pagerank":
                return PageRankSampler(**params)
            case _:
                raise SamplerError(
                    f"Unsupported sampler: {name}. "
                    "Supported: uniform, predfreq, objfreq, predobjfreq, pagerank"
                )
    except TypeError as e:
        raise SamplerError(f"invalid parameters for {name} sampler: {e}") from e
