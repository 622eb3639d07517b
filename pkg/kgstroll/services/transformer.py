# kgstroll/services/transformer.py
# Pipeline: samplers -> walkers -> corpus -> embedder -> literals
# - Strategies run sequentially, in declared order
# - Corpora are concatenated (corpus-level combination)
# - Optional canonical ordering sorts the merged corpus before training

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from loguru import logger

from kgstroll.core.errors import ConfigurationError
from kgstroll.parsers.terms import Term
from kgstroll.schema import PipelineConfig, SamplerConfig, WalkerConfig
from kgstroll.services.embedder import (
    EmbedderConfigError,
    EmbeddingModel,
    build_vocab,
    train,
)
from kgstroll.services.graph import BaseGraph
from kgstroll.services.literals import LiteralPath, LiteralTable, extract_literals
from kgstroll.services.sampler import Sampler, get_sampler
from kgstroll.services.walker import MissingEntity, Walk, WalkResult, extract_walks

__all__ = [
    "PipelineError",
    "CorpusStats",
    "FitResult",
    "EmbeddingTransformer",
    "build_sampler",
    "canonical_corpus_order",
]


class PipelineError(ConfigurationError):
    """Pipeline that cannot produce any embedding."""


@dataclass(frozen=True, slots=True)
class CorpusStats:
    walks_total: int
    walks_per_strategy: tuple[int, ...]
    distinct_tokens: int


@dataclass(slots=True)
class FitResult:
    embeddings: dict[Term, npt.NDArray[np.float32]]
    literals: LiteralTable | None
    corpus_stats: CorpusStats
    missing: list[MissingEntity] = field(default_factory=list)
    model: EmbeddingModel | None = None
    walks: list[Walk] = field(default_factory=list)


def build_sampler(cfg: SamplerConfig) -> Sampler:
    params: dict[str, object] = {"inverse": cfg.inverse}
    if cfg.name == "pagerank":
        params["alpha"] = cfg.alpha
    return get_sampler(cfg.name, **params)


def canonical_corpus_order(walks: Sequence[Walk]) -> list[Walk]:
    """Walks sorted lexicographically by token sequence."""
    return sorted(walks, key=lambda w: w.tokens)


def _describe(cfg: WalkerConfig) -> str:
    return cfg.strategy.value if cfg.sampler is None else f"{cfg.strategy.value}+{cfg.sampler.name}"


class EmbeddingTransformer:
    """
    Combines walkers, samplers and the embedder into one fit.

    Usage:
        transformer = EmbeddingTransformer(config)
        result = transformer.fit_transform(graph, seeds)
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.literal_paths = [LiteralPath(tuple(p)) for p in config.literal_paths]

    def extract_corpus(
        self, graph: BaseGraph, seeds: Sequence[Term]
    ) -> tuple[list[Walk], list[int], WalkResult]:
        """Fit samplers and run every strategy; returns (corpus, per-strategy counts, merged result)."""
        merged = WalkResult()
        per_strategy: list[int] = []
        for position, cfg in enumerate(self.config.walkers, start=1):
            sampler = build_sampler(cfg.sampler).fit(graph) if cfg.sampler else None
            result = extract_walks(graph, seeds, cfg, sampler, workers=self.config.workers)
            per_strategy.append(len(result.walks))
            merged.extend(result)
            logger.info(
                f"event=walks_extracted strategy={_describe(cfg)} position={position} "
                f"entities={len(seeds) - len(result.missing)} walks={len(result.walks)}"
            )
        corpus = merged.walks
        if self.config.canonical_order:
            corpus = canonical_corpus_order(corpus)
        return corpus, per_strategy, merged

    def fit_transform(self, graph: BaseGraph, seeds: Sequence[Term]) -> FitResult:
        """
        Raises:
            PipelineError: no seed entity exists in the graph
            EmbedderConfigError: corpus unusable for training (names the strategies)
        """
        if not seeds:
            raise PipelineError("no seed entities given")
        corpus, per_strategy, merged = self.extract_corpus(graph, seeds)

        missing_seeds = list(dict.fromkeys(m.entity for m in merged.missing))
        if len(missing_seeds) == len(set(seeds)):
            raise PipelineError(f"none of the {len(seeds)} seed entities exists in the graph")

        try:
            vocabulary = build_vocab(corpus, self.config.embedder.min_count)
            model = train(vocabulary, self.config.embedder)
        except EmbedderConfigError as e:
            strategies = ", ".join(_describe(c) for c in self.config.walkers)
            raise EmbedderConfigError(f"{e} (strategies: {strategies})") from e

        embeddings: dict[Term, npt.NDArray[np.float32]] = {}
        missing = [MissingEntity(s, "entity not found in graph") for s in missing_seeds]
        for seed in dict.fromkeys(seeds):
            if seed in missing_seeds:
                continue
            if merged.per_entity.get(seed, 0) == 0:
                missing.append(MissingEntity(seed, "no walks extracted"))
            elif seed.token not in model:
                missing.append(MissingEntity(seed, "below min_count"))
            else:
                embeddings[seed] = model.get_vector(seed.token)

        literals = None
        if self.literal_paths:
            literals = extract_literals(
                graph, seeds, self.literal_paths, workers=self.config.workers
            )

        stats = CorpusStats(
            walks_total=sum(per_strategy),
            walks_per_strategy=tuple(per_strategy),
            distinct_tokens=len({t for w in corpus for t in w.tokens}),
        )
        logger.info(
            f"event=fit_done walks={stats.walks_total} tokens={stats.distinct_tokens} "
            f"embeddings={len(embeddings)} missing={len(missing)}"
        )
        return FitResult(embeddings, literals, stats, missing, model, corpus)
