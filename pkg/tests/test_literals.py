#!/usr/bin/env python3
"""
Unit tests for literal extraction.
==================================

Covers:
- Single / Missing / Many results along predicate paths
- lexical numeric detection
- to_python / to_json conversions and the JSON table file
- path parsing and configuration errors
- remote graphs give the same table as local ones
"""

import json
import math

import pytest

from kgstroll.parsers.terms import XSD, Term, Triple
from kgstroll.services.graph import KnowledgeGraph, RemoteKnowledgeGraph
from kgstroll.services.literals import (
    LiteralPath,
    LiteralPathError,
    LiteralResult,
    ResultKind,
    extract_literals,
    literal_value,
    write_literal_table,
)
from kgstroll.testkit.generators import DL
from kgstroll.utils.sparql_client import SparqlConnector

HAS_ATOM = f"{DL}hasAtom"
CHARGE = f"{DL}charge"
CHARGE_PATH = LiteralPath((HAS_ATOM, CHARGE))


def dl(name):
    return Term.iri(f"{DL}{name}")


def charge(subject, value):
    return Triple(dl(subject), dl("charge"), Term.literal(value, datatype=f"{XSD}double"))


@pytest.fixture
def molecules():
    """m1: one atom; m2: no atoms; m3: two atoms."""
    return KnowledgeGraph(
        [
            Triple(dl("m1"), dl("hasAtom"), dl("a1")),
            charge("a1", "0.12"),
            Triple(dl("m2"), dl("label"), Term.literal("empty")),
            Triple(dl("m3"), dl("hasAtom"), dl("a3")),
            Triple(dl("m3"), dl("hasAtom"), dl("a4")),
            charge("a3", "0.1"),
            charge("a4", "0.2"),
        ]
    )


# ---------------------------------------------------------------
# Path following
# ---------------------------------------------------------------
class TestExtract:
    def test_single(self, molecules):
        """One atom with charge 0.12 → Single(0.12)"""
        table = extract_literals(molecules, [dl("m1")], [CHARGE_PATH])
        result = table.get(dl("m1"), CHARGE_PATH)
        assert result.kind is ResultKind.SINGLE
        assert result.to_python() == 0.12

    def test_missing(self, molecules):
        """No hasAtom hop → Missing"""
        result = extract_literals(molecules, [dl("m2")], [CHARGE_PATH]).get(dl("m2"), CHARGE_PATH)
        assert result.kind is ResultKind.MISSING
        assert math.isnan(result.to_python())
        assert result.to_json() is None

    def test_many(self, molecules):
        """Two atoms → Many([0.1, 0.2]) in insertion order"""
        result = extract_literals(molecules, [dl("m3")], [CHARGE_PATH]).get(dl("m3"), CHARGE_PATH)
        assert result.kind is ResultKind.MANY
        assert result.to_python() == [0.1, 0.2]

    def test_one_step_path(self, molecules):
        """A single predicate reads the seed's own literals"""
        path = LiteralPath((f"{DL}label",))
        assert extract_literals(molecules, [dl("m2")], [path]).get(dl("m2"), path).to_python() == "empty"

    def test_unknown_seed(self, molecules):
        """Seeds outside the graph are Missing, not errors"""
        result = extract_literals(molecules, [dl("zzz")], [CHARGE_PATH]).get(dl("zzz"), CHARGE_PATH)
        assert result.kind is ResultKind.MISSING

    def test_iri_objects_ignored(self):
        """The last predicate only collects literals"""
        graph = KnowledgeGraph([Triple(dl("m"), dl("charge"), dl("notALiteral"))])
        path = LiteralPath((CHARGE,))
        assert extract_literals(graph, [dl("m")], [path]).get(dl("m"), path).kind is ResultKind.MISSING

    def test_parallel_rows(self, molecules):
        """Worker count does not change the table"""
        seeds = [dl("m1"), dl("m2"), dl("m3")]
        assert extract_literals(molecules, seeds, [CHARGE_PATH], workers=3) == extract_literals(
            molecules, seeds, [CHARGE_PATH]
        )

    def test_remote_matches_local(self, stub_endpoint, mutag):
        """Endpoint-backed extraction equals the in-memory table"""
        server = stub_endpoint(mutag.triples)
        paths = [CHARGE_PATH, LiteralPath((f"{DL}isMutagenic",))]
        local = extract_literals(KnowledgeGraph(mutag.triples), mutag.molecules, paths)
        with SparqlConnector(server.url) as conn:
            remote = extract_literals(RemoteKnowledgeGraph(conn), mutag.molecules, paths, workers=2)
        assert remote == local
        assert local.get(mutag.molecules[0], CHARGE_PATH).kind is ResultKind.MISSING
        assert local.get(mutag.molecules[2], CHARGE_PATH).kind is ResultKind.MANY


# ---------------------------------------------------------------
# Values
# ---------------------------------------------------------------
class TestValues:
    @pytest.mark.parametrize(
        ("lexical", "expected"),
        [
            ("0.12", 0.12),
            ("-3", -3.0),
            ("+1e3", 1000.0),
            (".5", 0.5),
            ("7.", 7.0),
            ("true", "true"),
            ("NaN", "NaN"),
            ("inf", "inf"),
            ("1e999", "1e999"),
            ("0x1A", "0x1A"),
            ("12 apples", "12 apples"),
        ],
    )
    def test_numeric_detection(self, lexical, expected):
        """Finite decimal / scientific forms become floats"""
        assert literal_value(Term.literal(lexical)) == expected

    def test_datatype_ignored(self):
        """Detection is lexical: an xsd:string that looks numeric is numeric"""
        assert literal_value(Term.literal("42", datatype=f"{XSD}string")) == 42.0

    def test_json_forms(self):
        """Missing → null, Single → value, Many → list"""
        assert LiteralResult(()).to_json() is None
        assert LiteralResult((1.5,)).to_json() == 1.5
        assert LiteralResult(("a", 2.0)).to_json() == ["a", 2.0]


# ---------------------------------------------------------------
# Table output and errors
# ---------------------------------------------------------------
class TestTable:
    def test_json_file(self, molecules, tmp_path):
        """Rows keyed by seed IRI, columns by dot-joined path"""
        seeds = [dl("m1"), dl("m2"), dl("m3")]
        table = extract_literals(molecules, seeds, [CHARGE_PATH])
        out = tmp_path / "literals.json"
        write_literal_table(table, out)
        data = json.loads(out.read_text(encoding="utf-8"))
        column = f"{HAS_ATOM}.{CHARGE}"
        assert data == {
            f"{DL}m1": {column: 0.12},
            f"{DL}m2": {column: None},
            f"{DL}m3": {column: [0.1, 0.2]},
        }

    def test_parse_path(self):
        """Comma-separated IRIs, optional angle brackets"""
        path = LiteralPath.parse(f"<{HAS_ATOM}>, {CHARGE}")
        assert path == CHARGE_PATH
        assert path.name == f"{HAS_ATOM}.{CHARGE}"

    def test_empty_path(self):
        """A path needs at least one predicate"""
        with pytest.raises(LiteralPathError):
            LiteralPath.parse(" , ")

    def test_no_paths(self, molecules):
        """extract_literals needs at least one path"""
        with pytest.raises(LiteralPathError):
            extract_literals(molecules, [dl("m1")], [])

    def test_skipped_predicate(self):
        """Paths through skipped predicates are configuration errors"""
        graph = KnowledgeGraph([charge("a1", "0.3")], skip_predicates=[CHARGE])
        with pytest.raises(LiteralPathError, match="skipped predicate"):
            extract_literals(graph, [dl("a1")], [LiteralPath((CHARGE,))])

