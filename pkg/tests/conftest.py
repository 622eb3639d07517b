import os
import shutil
import tempfile
import uuid
from pathlib import Path

import pytest

from kgstroll.parsers.terms import Term, Triple
from kgstroll.services.graph import KnowledgeGraph
from kgstroll.testkit.generators import mutag_triples
from kgstroll.testkit.stub_sparql import StubSparqlServer
from tests.helpers import iri, triple


def _select_base_dir():
    root = Path(__file__).resolve().parent.parent
    system_base = Path(tempfile.gettempdir()) / "kgstroll-pytest"
    local_base = root / "temp" / "pytest"

    for candidate in (system_base, local_base):
        try:
            candidate.mkdir(parents=True, exist_ok=True)
            marker = candidate / ".write_check"
            marker.write_text("ok")
            marker.unlink(missing_ok=True)
            return candidate
        except PermissionError:
            continue

    # Last resort: keep local_base even if the write check failed
    local_base.mkdir(parents=True, exist_ok=True)
    return local_base


def pytest_configure(config):
    """
    Force pytest/tempfile to use a workspace-local temp directory.
    This avoids PermissionError when the system temp directory is not writable.
    """
    base = _select_base_dir()

    os.environ["TMPDIR"] = str(base)
    os.environ["TEMP"] = str(base)
    os.environ["TMP"] = str(base)
    tempfile.tempdir = str(base)
    config.option.basetemp = str(base / "basetemp")


@pytest.fixture
def tmp_path():
    """
    Provide a writable temp directory under system temp when possible.
    Overrides pytest's default tmp_path fixture.
    """
    base = _select_base_dir() / "pytest_tmp"
    base.mkdir(parents=True, exist_ok=True)
    path = base / uuid.uuid4().hex
    path.mkdir(parents=True, exist_ok=True)
    try:
        yield path
    finally:
        shutil.rmtree(path, ignore_errors=True)


# ---------------------------------------------------------------
# Graph fixtures
# ---------------------------------------------------------------
@pytest.fixture
def capital_graph():
    """(Brussels, isCapitalOf, Belgium) plus a literal population."""
    return KnowledgeGraph(
        [
            triple("Brussels", "isCapitalOf", "Belgium"),
            Triple(iri("Brussels"), iri("population"), Term.literal("1200000")),
        ]
    )


@pytest.fixture
def star_graph():
    """a-p->b, a-q->c, x-p->a."""
    return KnowledgeGraph(
        [triple("a", "p", "b"), triple("a", "q", "c"), triple("x", "p", "a")]
    )


@pytest.fixture
def mutag():
    return mutag_triples(molecules=12, seed=7)


@pytest.fixture
def stub_endpoint():
    """Factory for running stub endpoints; all are shut down after the test."""
    servers = []

    def start(triples=()):
        server = StubSparqlServer(triples).start()
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()
