#!/usr/bin/env python3
"""
Unit tests for the embedding pipeline.
======================================

Covers:
- multi-strategy corpus concatenation and per-strategy counts
- depth-0 corpora, duplicated strategies, canonical ordering
- missing-entity reasons and pipeline errors
- literal extraction alongside the embeddings
"""

import numpy as np
import pytest

from kgstroll.schema import PipelineConfig
from kgstroll.services.embedder import EmbedderConfigError
from kgstroll.services.graph import KnowledgeGraph, RemoteKnowledgeGraph
from kgstroll.services.literals import LiteralPath, ResultKind
from kgstroll.services.transformer import (
    EmbeddingTransformer,
    PipelineError,
    canonical_corpus_order,
)
from kgstroll.services.walker import Walk, WalkerError
from kgstroll.testkit.generators import DL
from kgstroll.utils.sparql_client import SparqlConnector
from tests.helpers import iri, triple

FAST = {"dimension": 16, "window": 2, "negatives": 3, "epochs": 2, "seed": 3}


def pipeline(*walkers, embedder=None, **overrides):
    return PipelineConfig(walkers=list(walkers), embedder={**FAST, **(embedder or {})}, **overrides)


# ---------------------------------------------------------------
# Combined strategies
# ---------------------------------------------------------------
class TestFitTransform:
    def test_halk_plus_pagerank_random(self, mutag):
        """Two strategies → two corpus counts and a vector per molecule"""
        cfg = pipeline(
            "halk:depth=2,threshold=0.01",
            "random:depth=2,max=100,sampler=pagerank:alpha=0.85",
            embedder={"epochs": 10},
        )
        graph = KnowledgeGraph(mutag.triples)
        result = EmbeddingTransformer(cfg).fit_transform(graph, mutag.molecules)

        stats = result.corpus_stats
        assert len(stats.walks_per_strategy) == 2
        assert stats.walks_total == sum(stats.walks_per_strategy) == len(result.walks)
        assert all(n > 0 for n in stats.walks_per_strategy)
        assert set(result.embeddings) == set(mutag.molecules)
        for vector in result.embeddings.values():
            assert vector.shape == (16,)
            assert np.isfinite(vector).all()
        assert result.missing == []
        assert result.literals is None
        assert result.model is not None
        assert len(result.model.epoch_losses) == 10

    def test_depth_zero(self, mutag):
        """depth 0 → exactly one singleton walk per seed"""
        result = EmbeddingTransformer(pipeline("random:depth=0")).fit_transform(
            KnowledgeGraph(mutag.triples), mutag.molecules
        )
        assert result.corpus_stats.walks_total == len(mutag.molecules)
        assert all(len(w.tokens) == 1 for w in result.walks)
        assert set(result.embeddings) == set(mutag.molecules)

    def test_duplicate_strategy_doubles_corpus(self, star_graph):
        """Listing the same exhaustive walker twice doubles walks_total"""
        seeds = [iri("a"), iri("x")]
        single = EmbeddingTransformer(pipeline("random:depth=1")).fit_transform(star_graph, seeds)
        double = EmbeddingTransformer(pipeline("random:depth=1", "random:depth=1")).fit_transform(
            star_graph, seeds
        )
        assert double.corpus_stats.walks_total == 2 * single.corpus_stats.walks_total
        assert double.corpus_stats.walks_per_strategy == (
            single.corpus_stats.walks_total,
            single.corpus_stats.walks_total,
        )
        assert double.corpus_stats.distinct_tokens == single.corpus_stats.distinct_tokens

    def test_extract_corpus_order(self, star_graph):
        """Strategies contribute in declared order"""
        cfg = pipeline("random:depth=0", "random:depth=1")
        corpus, per_strategy, _ = EmbeddingTransformer(cfg).extract_corpus(star_graph, [iri("a")])
        assert per_strategy == [1, 3]
        assert corpus[0].tokens == (iri("a").token,)


# ---------------------------------------------------------------
# Canonical ordering
# ---------------------------------------------------------------
class TestCanonicalOrder:
    def test_sorted_by_tokens(self):
        """Walks sort lexicographically by token sequence"""
        walks = [Walk(("b",), iri("b")), Walk(("a", "p", "c"), iri("a")), Walk(("a",), iri("a"))]
        assert [w.tokens for w in canonical_corpus_order(walks)] == [("a",), ("a", "p", "c"), ("b",)]

    def test_seed_permutation_invariance(self, mutag):
        """With canonical ordering, permuting the seeds leaves every vector unchanged"""
        cfg = pipeline("random:depth=2", canonical_order=True)
        graph = KnowledgeGraph(mutag.triples)
        forward = EmbeddingTransformer(cfg).fit_transform(graph, mutag.molecules)
        backward = EmbeddingTransformer(cfg).fit_transform(graph, mutag.molecules[::-1])
        assert [w.tokens for w in forward.walks] == [w.tokens for w in backward.walks]
        for seed in mutag.molecules:
            assert np.array_equal(forward.embeddings[seed], backward.embeddings[seed])


# ---------------------------------------------------------------
# Missing entities and errors
# ---------------------------------------------------------------
class TestMissing:
    def test_unknown_seed_reported(self, star_graph):
        """A seed absent from the graph gets no vector and a reason"""
        result = EmbeddingTransformer(pipeline("random:depth=1")).fit_transform(
            star_graph, [iri("a"), iri("ghost")]
        )
        assert iri("a") in result.embeddings
        assert [(m.entity, m.reason) for m in result.missing] == [
            (iri("ghost"), "entity not found in graph")
        ]

    def test_below_min_count(self):
        """A seed whose token is filtered by min_count is reported as such"""
        graph = KnowledgeGraph(
            [triple("a", "p", "b"), triple("a", "p", "c"), triple("a", "p", "d"), triple("y", "r", "z")]
        )
        cfg = pipeline("random:depth=1", embedder={"min_count": 3})
        result = EmbeddingTransformer(cfg).fit_transform(graph, [iri("a"), iri("y")])
        assert set(result.embeddings) == {iri("a")}
        assert [(m.entity, m.reason) for m in result.missing] == [(iri("y"), "below min_count")]

    def test_all_seeds_missing(self, star_graph):
        """No seed in the graph → PipelineError"""
        with pytest.raises(PipelineError, match="none of the 2"):
            EmbeddingTransformer(pipeline("random:depth=1")).fit_transform(
                star_graph, [iri("ghost"), iri("phantom")]
            )

    def test_no_seeds(self, star_graph):
        """An empty seed list → PipelineError"""
        with pytest.raises(PipelineError):
            EmbeddingTransformer(pipeline("random:depth=1")).fit_transform(star_graph, [])

    def test_embedder_error_names_strategies(self, star_graph):
        """Vocabulary errors mention the strategies that built the corpus"""
        cfg = pipeline("random:depth=1,sampler=predfreq", embedder={"min_count": 50})
        with pytest.raises(EmbedderConfigError, match=r"strategies: random\+predfreq"):
            EmbeddingTransformer(cfg).fit_transform(star_graph, [iri("a")])

    def test_wl_needs_local_graph(self, stub_endpoint):
        """WL over an endpoint-backed graph is a configuration error"""
        server = stub_endpoint([triple("a", "p", "b")])
        with SparqlConnector(server.url) as conn:
            with pytest.raises(WalkerError, match="local graph"):
                EmbeddingTransformer(pipeline("wl:depth=1")).fit_transform(
                    RemoteKnowledgeGraph(conn), [iri("a")]
                )


# ---------------------------------------------------------------
# Literals
# ---------------------------------------------------------------
class TestLiterals:
    def test_literal_table_included(self, mutag):
        """Configured literal paths give one row per seed"""
        path = [f"{DL}hasAtom", f"{DL}charge"]
        cfg = pipeline("random:depth=1", literal_paths=[path])
        result = EmbeddingTransformer(cfg).fit_transform(KnowledgeGraph(mutag.triples), mutag.molecules)
        assert result.literals is not None
        kinds = [result.literals.get(m, LiteralPath(tuple(path))).kind for m in mutag.molecules]
        expected = {0: ResultKind.MISSING, 1: ResultKind.SINGLE}
        assert kinds == [expected.get(n, ResultKind.MANY) for n in mutag.atoms_per_molecule]
