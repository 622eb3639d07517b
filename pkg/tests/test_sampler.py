#!/usr/bin/env python3
"""
Unit tests for edge-weight samplers.
====================================

Covers:
- frequency weights (predicate, object in-degree, predicate+object) and inversion
- PageRank against the dense reference and as a fixed point
- draw frequencies follow the weights (binomial bound, chi-square)
- draws depend only on relative weights
- fitting / parameter errors and the remote-graph restriction
"""

import numpy as np
import pytest
from scipy import stats

from kgstroll.parsers.terms import Direction
from kgstroll.services.graph import KnowledgeGraph, RemoteKnowledgeGraph
from kgstroll.services.sampler import (
    ObjFreqSampler,
    PageRankSampler,
    PredFreqSampler,
    PredObjFreqSampler,
    SamplerError,
    SamplerNotFittedError,
    UniformSampler,
    edge_of,
    get_sampler,
)
from kgstroll.testkit.generators import RandomGraphSpec, random_triples
from kgstroll.testkit.oracles import oracle_pagerank
from kgstroll.utils.random_source import RandomSource
from kgstroll.utils.sparql_client import SparqlConnector
from tests.helpers import iri, oracle_edges, oracle_vertices, triple


@pytest.fixture
def freq_graph():
    """p is used three times, q once; `hub` has in-degree 4."""
    return KnowledgeGraph(
        [
            triple("a", "p", "b"),
            triple("x", "p", "y"),
            triple("z", "p", "hub"),
            triple("a", "q", "c"),
            triple("a", "r", "hub"),
            triple("b", "r", "hub"),
            triple("c", "r", "hub"),
        ]
    )


# ---------------------------------------------------------------
# Frequency weights
# ---------------------------------------------------------------
class TestFrequencyWeights:
    def test_predicate_frequency(self, freq_graph):
        """p occurs 3 times, q once"""
        sampler = PredFreqSampler().fit(freq_graph)
        assert sampler.weigh((iri("a"), iri("p"), iri("b"))) == 3.0
        assert sampler.weigh((iri("a"), iri("q"), iri("c"))) == 1.0

    def test_object_frequency(self, freq_graph):
        """hub has in-degree 4"""
        sampler = ObjFreqSampler().fit(freq_graph)
        assert sampler.weigh((iri("a"), iri("r"), iri("hub"))) == 4.0

    def test_object_frequency_inverse(self, freq_graph):
        """Inverted weight is 1 / (1 + w)"""
        sampler = ObjFreqSampler(inverse=True).fit(freq_graph)
        assert sampler.weigh((iri("a"), iri("r"), iri("hub"))) == pytest.approx(1 / 5)

    def test_predicate_object_frequency(self, freq_graph):
        """(r, hub) occurs 3 times, (p, hub) once"""
        sampler = PredObjFreqSampler().fit(freq_graph)
        assert sampler.weigh((iri("b"), iri("r"), iri("hub"))) == 3.0
        assert sampler.weigh((iri("z"), iri("p"), iri("hub"))) == 1.0

    def test_reverse_hops_use_graph_edge(self, freq_graph):
        """Walking hub's incoming edges weighs the (s, p, hub) edge"""
        sampler = ObjFreqSampler().fit(freq_graph)
        hops, weights = sampler.hop_weights(freq_graph, iri("hub"), Direction.REVERSE)
        assert len(hops) == 4
        assert weights.tolist() == [4.0] * 4
        assert edge_of(iri("hub"), hops[0], Direction.REVERSE)[2] == iri("hub")

    def test_probabilities_sum_to_one(self, freq_graph):
        """hop_probabilities normalizes the weights"""
        sampler = PredFreqSampler().fit(freq_graph)
        hops, probs = sampler.hop_probabilities(freq_graph, iri("a"))
        assert [h.predicate for h in hops] == [iri("p"), iri("q"), iri("r")]
        assert probs.tolist() == pytest.approx([3 / 7, 1 / 7, 3 / 7])

    def test_uniform(self, freq_graph):
        """Uniform weighs every edge 1"""
        sampler = UniformSampler().fit(freq_graph)
        _, probs = sampler.hop_probabilities(freq_graph, iri("a"))
        assert probs.tolist() == pytest.approx([1 / 3] * 3)

    def test_skipped_edges_not_counted(self):
        """Statistics come from walkable edges only"""
        graph = KnowledgeGraph(
            [triple("a", "p", "b"), triple("c", "p", "d"), triple("e", "s", "b")],
            skip_predicates=["http://example.org/s"],
        )
        sampler = ObjFreqSampler().fit(graph)
        assert sampler.weigh((iri("a"), iri("p"), iri("b"))) == 1.0


# ---------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------
def _oracle_for(triples):
    vertices = oracle_vertices(triples)
    edges = [(s, o) for s, _, o in oracle_edges(triples)]
    return dict(zip(vertices, oracle_pagerank(vertices, edges, alpha=0.85, iters=400), strict=True))


class TestPageRank:
    def test_cycle_is_uniform(self):
        """Directed 3-cycle → 1/3 each"""
        graph = KnowledgeGraph([triple("a", "p", "b"), triple("b", "p", "c"), triple("c", "p", "a")])
        sampler = PageRankSampler().fit(graph)
        for score in sampler.scores.values():
            assert score == pytest.approx(1 / 3, abs=1e-10)

    def test_chain_matches_reference(self):
        """a → b → c with a dangling sink"""
        triples = [triple("a", "p", "b"), triple("b", "p", "c")]
        sampler = PageRankSampler().fit(KnowledgeGraph(triples))
        expected = _oracle_for(triples)
        for vertex, score in sampler.scores.items():
            assert score == pytest.approx(expected[vertex.token], abs=1e-8)
        assert sampler.scores[iri("c")] > sampler.scores[iri("b")] > sampler.scores[iri("a")]

    @pytest.mark.parametrize("seed", [0, 11, 23])
    def test_random_graph_matches_reference(self, seed):
        """30-vertex random graphs agree with dense power iteration within 1e-8 L1"""
        triples = random_triples(RandomGraphSpec(vertices=30, edges=90, literal_fraction=0.1, seed=seed))
        sampler = PageRankSampler(alpha=0.85).fit(KnowledgeGraph(triples))
        expected = _oracle_for(triples)
        assert sum(sampler.scores.values()) == pytest.approx(1.0)
        assert {v.token for v in sampler.scores} == set(expected)
        assert sum(abs(score - expected[v.token]) for v, score in sampler.scores.items()) < 1e-8

    def test_fixed_point(self):
        """The returned scores satisfy the PageRank equation"""
        graph = KnowledgeGraph(random_triples(RandomGraphSpec(vertices=25, edges=50, seed=5)))
        alpha = 0.7
        sampler = PageRankSampler(alpha=alpha).fit(graph)
        n = graph.num_vertices
        rank = np.array([sampler.scores[v] for v in graph.vertices])
        out_degree = np.zeros(n)
        for s, _, _ in graph.edge_ids():
            out_degree[s] += 1
        incoming = np.zeros(n)
        for s, _, o in graph.edge_ids():
            incoming[o] += rank[s] / out_degree[s]
        dangling = rank[out_degree == 0].sum() / n
        assert np.allclose(alpha * (incoming + dangling) + (1 - alpha) / n, rank, atol=1e-9)
        assert sampler.iterations <= 200

    def test_weight_is_object_score(self):
        """Edge weight = score of the object; inverse = 1 / (1 + score)"""
        graph = KnowledgeGraph([triple("a", "p", "b"), triple("b", "p", "c")])
        plain = PageRankSampler().fit(graph)
        inverse = PageRankSampler(inverse=True).fit(graph)
        edge = (iri("a"), iri("p"), iri("b"))
        assert plain.weigh(edge) == plain.scores[iri("b")]
        assert inverse.weigh(edge) == pytest.approx(1 / (1 + plain.scores[iri("b")]))

    def test_empty_graph(self):
        """Fitting an empty graph yields no scores and no hops"""
        graph = KnowledgeGraph([])
        sampler = PageRankSampler().fit(graph)
        assert sampler.scores == {}
        assert sampler.sample_hop(graph, iri("a"), Direction.FORWARD, RandomSource(0)) is None

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
    def test_bad_alpha(self, alpha):
        """alpha outside (0, 1) is rejected"""
        with pytest.raises(SamplerError):
            PageRankSampler(alpha=alpha)


# ---------------------------------------------------------------
# Draws
# ---------------------------------------------------------------
class TestDraws:
    def test_three_to_one(self):
        """Weights 3:1 → the heavy hop ~75% of 100k draws"""
        graph = KnowledgeGraph(
            [triple("a", "p", "b"), triple("x", "p", "y"), triple("z", "p", "w"), triple("a", "q", "c")]
        )
        sampler = PredFreqSampler().fit(graph)
        hops = sampler.sample_hops(graph, iri("a"), Direction.FORWARD, RandomSource(7), 100_000)
        share = sum(h.predicate == iri("p") for h in hops) / len(hops)
        assert share == pytest.approx(0.75, abs=0.01)

    def test_chi_square(self, freq_graph):
        """Counts over three hops are consistent with 3:1:3"""
        sampler = PredFreqSampler().fit(freq_graph)
        hops, probs = sampler.hop_probabilities(freq_graph, iri("a"))
        draws = sampler.sample_hops(freq_graph, iri("a"), Direction.FORWARD, RandomSource(2024), 40_000)
        observed = [sum(d == h for d in draws) for h in hops]
        result = stats.chisquare(observed, f_exp=probs * len(draws))
        assert result.pvalue > 0.001

    @pytest.mark.slow
    @pytest.mark.parametrize("inverse", [False, True])
    @pytest.mark.parametrize("name", ["uniform", "predfreq", "objfreq", "predobjfreq", "pagerank"])
    def test_chi_square_every_strategy(self, name, inverse):
        """20 vertices with 3+ hops, 10^5 draws each: pooled chi-square passes at 0.001"""
        graph = KnowledgeGraph(
            random_triples(RandomGraphSpec(vertices=40, edges=400, predicate_alphabet=4, seed=17))
        )
        sampler = get_sampler(name, inverse=inverse).fit(graph)
        vertices = [v for v in graph.vertices if len(graph.get_hops(v)) >= 3][:20]
        assert len(vertices) == 20
        statistic, dof = 0.0, 0
        for i, vertex in enumerate(vertices):
            hops, probs = sampler.hop_probabilities(graph, vertex)
            draws = sampler.sample_hops(graph, vertex, Direction.FORWARD, RandomSource(2024, i), 100_000)
            position = {id(h): k for k, h in enumerate(hops)}
            observed = np.bincount([position[id(h)] for h in draws], minlength=len(hops))
            statistic += stats.chisquare(observed, f_exp=probs * len(draws)).statistic
            dof += len(hops) - 1
        assert stats.chi2.sf(statistic, dof) > 0.001

    def test_single_hop_draws(self, freq_graph):
        """sample_hop returns hops in proportion too"""
        sampler = PredFreqSampler().fit(freq_graph)
        rng = RandomSource(3)
        picks = [sampler.sample_hop(freq_graph, iri("a"), Direction.FORWARD, rng) for _ in range(8000)]
        share = sum(h.predicate == iri("r") for h in picks) / len(picks)
        assert share == pytest.approx(3 / 7, abs=0.03)

    def test_scaling_invariance(self, freq_graph):
        """Multiplying every weight by a constant changes no draw"""

        class Scaled(PredFreqSampler):
            def _raw_weight(self, edge):
                return 8.0 * super()._raw_weight(edge)

        base = PredFreqSampler().fit(freq_graph)
        scaled = Scaled().fit(freq_graph)
        a = base.sample_hops(freq_graph, iri("a"), Direction.FORWARD, RandomSource(99), 500)
        b = scaled.sample_hops(freq_graph, iri("a"), Direction.FORWARD, RandomSource(99), 500)
        assert a == b

    def test_dead_end(self, freq_graph):
        """No eligible hop → None / []"""
        sampler = UniformSampler().fit(freq_graph)
        assert sampler.sample_hop(freq_graph, iri("hub"), Direction.FORWARD, RandomSource(0)) is None
        assert sampler.sample_hops(freq_graph, iri("hub"), Direction.FORWARD, RandomSource(0), 5) == []


# ---------------------------------------------------------------
# Errors and factory
# ---------------------------------------------------------------
class TestErrors:
    def test_unfitted(self):
        """weigh before fit raises"""
        with pytest.raises(SamplerNotFittedError):
            PredFreqSampler().weigh((iri("a"), iri("p"), iri("b")))

    @pytest.mark.parametrize("name", ["uniform", "predfreq", "objfreq", "predobjfreq", "pagerank"])
    def test_empty_graph_has_no_weights(self, name):
        """Any strategy fitted on an empty graph rejects weight requests"""
        sampler = get_sampler(name).fit(KnowledgeGraph([]))
        with pytest.raises(SamplerNotFittedError):
            sampler.weigh((iri("a"), iri("p"), iri("b")))

    def test_unknown_edge(self, freq_graph):
        """Edges outside the fitted statistics raise"""
        sampler = PredFreqSampler().fit(freq_graph)
        with pytest.raises(SamplerNotFittedError):
            sampler.weigh((iri("a"), iri("unseen"), iri("b")))

    def test_factory(self):
        """Names map to strategies; parameters pass through"""
        assert isinstance(get_sampler("uniform"), UniformSampler)
        assert isinstance(get_sampler("PredFreq"), PredFreqSampler)
        pagerank = get_sampler("pagerank", alpha=0.5, inverse=True)
        assert isinstance(pagerank, PageRankSampler)
        assert (pagerank.alpha, pagerank.inverse) == (0.5, True)
        assert repr(pagerank) == "PageRankSampler(alpha=0.5, inverse=True)"

    def test_factory_unknown_name(self):
        """Unknown strategy → SamplerError"""
        with pytest.raises(SamplerError, match="Unsupported sampler"):
            get_sampler("degree")

    def test_factory_bad_parameter(self):
        """alpha is only valid for pagerank"""
        with pytest.raises(SamplerError):
            get_sampler("objfreq", alpha=0.5)

    def test_remote_graph(self):
        """Only the uniform sampler fits a remote graph"""
        with SparqlConnector("http://127.0.0.1:9/sparql") as conn:
            remote = RemoteKnowledgeGraph(conn)
            uniform = UniformSampler().fit(remote)
            assert uniform.weigh((iri("a"), iri("p"), iri("b"))) == 1.0
            for name in ("predfreq", "objfreq", "predobjfreq", "pagerank"):
                with pytest.raises(SamplerError, match="local graph"):
                    get_sampler(name).fit(remote)
