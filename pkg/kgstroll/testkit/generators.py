# kgstroll/testkit/generators.py
# Seeded test data
# - random_triples: random multigraph-free triple sets (RandomGraphSpec)
# - mutag_triples: molecules/atoms/bonds shaped like the MUTAG benchmark
# - cooccurrence_corpus: topic sentences with one planted token pair

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kgstroll.parsers.terms import XSD, Term, Triple

__all__ = [
    "EX",
    "DL",
    "RDF_TYPE",
    "RandomGraphSpec",
    "random_triples",
    "MutagGraph",
    "mutag_triples",
    "cooccurrence_corpus",
]

EX = "http://example.org/"
DL = "http://dl-learner.org/carcinogenesis#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"


@dataclass(frozen=True, slots=True)
class RandomGraphSpec:
    vertices: int
    edges: int
    predicate_alphabet: int = 3
    literal_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.vertices < 1 or self.predicate_alphabet < 1:
            raise ValueError("need at least one vertex and one predicate")
        if not 0.0 <= self.literal_fraction <= 1.0:
            raise ValueError("literal_fraction must be in [0, 1]")
        if self.edges > self.vertices**2 * self.predicate_alphabet:
            raise ValueError("more edges than distinct (s, p, o) combinations")


def random_triples(spec: RandomGraphSpec) -> list[Triple]:
    """Distinct (s, p, o) statements; a `literal_fraction` share get literal objects."""
    rng = np.random.default_rng(spec.seed)
    v, p = spec.vertices, spec.predicate_alphabet
    keys = rng.choice(v * v * p, size=spec.edges, replace=False)
    literal = rng.random(spec.edges) < spec.literal_fraction
    triples = []
    for key, is_literal in zip(keys.tolist(), literal.tolist(), strict=True):
        s, rest = divmod(key, v * p)
        pred, o = divmod(rest, v)
        obj = (
            Term.literal(f"{rng.normal():.4f}", datatype=f"{XSD}double")
            if is_literal
            else Term.iri(f"{EX}v{o}")
        )
        triples.append(Triple(Term.iri(f"{EX}v{s}"), Term.iri(f"{EX}p{pred}"), obj))
    return triples


@dataclass(frozen=True, slots=True)
class MutagGraph:
    triples: list[Triple]
    molecules: list[Term]
    atoms_per_molecule: list[int]


def mutag_triples(molecules: int = 12, seed: int = 0) -> MutagGraph:
    """
    Toy carcinogenesis graph.

    Molecule i has i % 4 atoms (so 0, 1 and several atoms all occur), a
    charge literal per atom, bonds between consecutive atoms, an rdf:type
    per atom and an isMutagenic boolean literal.
    """
    rng = np.random.default_rng(seed)
    has_atom, has_bond = Term.iri(f"{DL}hasAtom"), Term.iri(f"{DL}hasBond")
    in_bond, charge = Term.iri(f"{DL}inBond"), Term.iri(f"{DL}charge")
    mutagenic, rdf_type = Term.iri(f"{DL}isMutagenic"), Term.iri(RDF_TYPE)
    elements = [Term.iri(f"{DL}{name}") for name in ("Carbon", "Hydrogen", "Oxygen", "Nitrogen")]

    triples: list[Triple] = []
    seeds: list[Term] = []
    atom_counts: list[int] = []
    for i in range(molecules):
        mol = Term.iri(f"{DL}d{i}")
        seeds.append(mol)
        triples.append(Triple(mol, rdf_type, Term.iri(f"{DL}Compound")))
        flag = "true" if i % 2 else "false"
        triples.append(Triple(mol, mutagenic, Term.literal(flag, datatype=f"{XSD}boolean")))
        count = i % 4
        atom_counts.append(count)
        atoms = [Term.iri(f"{DL}d{i}_{j}") for j in range(count)]
        for atom in atoms:
            triples.append(Triple(mol, has_atom, atom))
            triples.append(Triple(atom, rdf_type, elements[int(rng.integers(len(elements)))]))
            value = f"{rng.uniform(-0.5, 0.5):.3f}"
            triples.append(Triple(atom, charge, Term.literal(value, datatype=f"{XSD}double")))
        for j in range(count - 1):
            bond = Term.iri(f"{DL}bond{i}_{j}")
            triples.append(Triple(mol, has_bond, bond))
            triples.append(Triple(bond, in_bond, atoms[j]))
            triples.append(Triple(bond, in_bond, atoms[j + 1]))
    return MutagGraph(triples, seeds, atom_counts)


def cooccurrence_corpus(
    sentences: int = 2000,
    topics: int = 40,
    topic_size: int = 5,
    length: int = 6,
    seed: int = 0,
) -> tuple[list[list[str]], tuple[str, str]]:
    """
    Sentences drawn from disjoint topic vocabularies.

    Every topic-0 sentence also carries the planted pair `x`, `y` side by
    side, so the two always co-occur within a window of 1.
    """
    rng = np.random.default_rng(seed)
    corpus: list[list[str]] = []
    for n in range(sentences):
        topic = n % topics
        words = [f"t{topic}w{int(k)}" for k in rng.integers(topic_size, size=length)]
        if topic == 0:
            at = int(rng.integers(length + 1))
            words[at:at] = ["x", "y"]
        corpus.append(words)
    order = rng.permutation(len(corpus))
    return [corpus[i] for i in order], ("x", "y")
