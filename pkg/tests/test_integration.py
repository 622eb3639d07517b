#!/usr/bin/env python3
"""
Integration tests for kgstroll
==============================

Covers end-to-end command-line runs:
- the two-strategy MUTAG run (HALK + PageRank-biased random walks)
- endpoint-backed runs reproduce the file-backed corpus
- materialization for samplers that need the whole graph
- endpoint failures surface as input errors
"""

import json
import sys

import pytest
from loguru import logger

from kgstroll.main import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, run
from kgstroll.parsers.terms import serialize_ntriples
from kgstroll.testkit.generators import DL


@pytest.fixture(autouse=True)
def restore_logger():
    yield
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


class TestEndToEndIntegration:
    @pytest.fixture
    def temp_workspace(self, tmp_path, mutag, stub_endpoint):
        """MUTAG graph on disk and behind a stub endpoint, plus the seed list."""
        graph = tmp_path / "mutag.nt"
        graph.write_text(serialize_ntriples(mutag.triples), encoding="utf-8")
        entities = tmp_path / "entities.txt"
        entities.write_text("\n".join(m.lexical for m in mutag.molecules) + "\n", encoding="utf-8")
        server = stub_endpoint(mutag.triples)
        return {
            "root": tmp_path,
            "graph": graph,
            "entities": entities,
            "server": server,
            "mutag": mutag,
        }

    def _common(self, ws, tag, *walkers):
        args = ["--entities", str(ws["entities"]), "--out", str(ws["root"] / f"{tag}.vec")]
        args += ["--dump-corpus", str(ws["root"] / f"{tag}.walks"), "--workers", "1", "--seed", "5"]
        for spec in walkers:
            args += ["--walker", spec]
        return args

    def test_halk_and_pagerank_run(self, temp_workspace):
        """Two strategies, 100-dim vectors, literal table for every molecule"""
        ws = temp_workspace
        literals = ws["root"] / "literals.json"
        args = self._common(
            ws,
            "mutag",
            "halk:depth=2",
            "random:depth=2,max=100,sampler=pagerank:alpha=0.85",
        )
        args += ["--input", str(ws["graph"]), "--epochs", "10"]
        args += ["--literal-path", f"{DL}hasAtom,{DL}charge", "--literals-out", str(literals)]
        args += ["--skip-predicate", f"{DL}isMutagenic"]
        assert run(args) == EXIT_OK

        lines = (ws["root"] / "mutag.vec").read_text(encoding="utf-8").splitlines()
        vocab, dim = lines[0].split()
        assert dim == "100"
        assert int(vocab) == len(lines) - 1
        tokens = {line.split(" ", 1)[0] for line in lines[1:]}
        assert {m.lexical for m in ws["mutag"].molecules} <= tokens
        assert f"{DL}isMutagenic" not in tokens

        table = json.loads(literals.read_text(encoding="utf-8"))
        assert list(table) == [m.lexical for m in ws["mutag"].molecules]

    def test_endpoint_matches_file(self, temp_workspace):
        """Same walker over file and endpoint → identical corpus and vectors"""
        ws = temp_workspace
        walker = "random:depth=2,max=10,reverse=true"
        local = self._common(ws, "local", walker) + ["--input", str(ws["graph"])]
        remote = self._common(ws, "remote", walker) + ["--endpoint", ws["server"].url]
        assert run(local) == EXIT_OK
        assert run(remote) == EXIT_OK
        assert ws["server"].request_count > 0

        root = ws["root"]
        assert (root / "remote.walks").read_text() == (root / "local.walks").read_text()
        assert (root / "remote.vec").read_bytes() == (root / "local.vec").read_bytes()

    def test_url_input_is_endpoint(self, temp_workspace):
        """An http URL given to --input is queried as an endpoint"""
        ws = temp_workspace
        args = self._common(ws, "url", "random:depth=1") + ["--input", ws["server"].url]
        assert run(args) == EXIT_OK
        assert ws["server"].request_count > 0

    def test_pagerank_needs_materialize(self, temp_workspace):
        """Whole-graph samplers over an endpoint need --materialize"""
        ws = temp_workspace
        walker = "random:depth=2,max=10,sampler=pagerank:alpha=0.85"
        remote = self._common(ws, "remote", walker) + ["--endpoint", ws["server"].url]
        assert run(remote) == EXIT_CONFIG

        assert run(remote + ["--materialize"]) == EXIT_OK
        local = self._common(ws, "local", walker) + ["--input", str(ws["graph"])]
        assert run(local) == EXIT_OK
        root = ws["root"]
        assert (root / "remote.walks").read_text() == (root / "local.walks").read_text()

    def test_endpoint_failure(self, temp_workspace):
        """HTTP 503 from the endpoint → input error exit code"""
        ws = temp_workspace
        ws["server"].fail_with(503)
        args = self._common(ws, "down", "random:depth=1") + ["--endpoint", ws["server"].url]
        assert run(args) == EXIT_INPUT
