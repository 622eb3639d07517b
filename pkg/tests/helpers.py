"""Small builders shared by the test modules."""

from kgstroll.parsers.terms import Term, Triple
from kgstroll.testkit.generators import EX


def iri(name: str) -> Term:
    """Example-namespace IRI term."""
    return Term.iri(f"{EX}{name}")


def triple(s: str, p: str, o: str) -> Triple:
    return Triple(iri(s), iri(p), iri(o))


def plain_edges(graph):
    """Walkable edges of a KnowledgeGraph as (s, p, o) token strings."""
    return [(s.token, p.token, o.token) for s, p, o in graph.edges()]


def oracle_edges(triples, skip_predicates=()):
    """(s, p, o) token strings straight from the triples: no literals, no skipped predicates."""
    skip = set(skip_predicates)
    return [
        (t.subject.token, t.predicate.token, t.object.token)
        for t in triples
        if not t.object.is_literal and t.predicate.lexical not in skip
    ]


def oracle_vertices(triples):
    """Subject and non-literal object tokens in first-seen order."""
    seen = {}
    for t in triples:
        seen.setdefault(t.subject.token, None)
        if not t.object.is_literal:
            seen.setdefault(t.object.token, None)
    return list(seen)
