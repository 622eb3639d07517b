"""
stub_sparql.py
==============

In-process SPARQL endpoint for tests.

Serves `application/sparql-results+json` for exactly the SELECT shapes the
connector sends (single hop, bundled VALUES hop, all triples) over GET and
form-encoded POST. Anything else gets HTTP 400. Every request is counted,
and failures can be injected.

Usage:
    with StubSparqlServer(triples) as stub:
        connector = SparqlConnector(stub.url)
        ...
        assert stub.request_count == 1
"""

from __future__ import annotations

import re
import socket
import threading
import time
from collections.abc import Iterable
from typing import Any
from urllib.parse import parse_qs

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from kgstroll.parsers.terms import Term, TermKind, Triple

__all__ = ["StubSparqlServer", "create_app", "term_binding"]

SPARQL_JSON = "application/sparql-results+json"

_IRI = r"<([^<>\s]*)>"
_FORWARD = re.compile(rf"^SELECT \?p \?o WHERE \{{ {_IRI} \?p \?o \}}$")
_REVERSE = re.compile(rf"^SELECT \?p \?s WHERE \{{ \?s \?p {_IRI} \}}$")
_BUNDLED = re.compile(
    r"^SELECT \?s \?p \?o WHERE \{ VALUES \?(s|o) \{ ((?:<[^<>\s]*> ?)+)\} \?s \?p \?o \}$"
)
_ALL = re.compile(r"^SELECT \?s \?p \?o WHERE \{ \?s \?p \?o \}$")


def term_binding(term: Term) -> dict[str, str]:
    """SPARQL JSON results encoding of one term."""
    match term.kind:
        case TermKind.IRI:
            return {"type": "uri", "value": term.lexical}
        case TermKind.BLANK:
            return {"type": "bnode", "value": term.lexical}
        case _:
            binding = {"type": "literal", "value": term.lexical}
            if term.datatype is not None:
                binding["datatype"] = term.datatype
            if term.language is not None:
                binding["xml:lang"] = term.language
            return binding


class _State:
    def __init__(self, triples: Iterable[Triple]):
        self.triples = list(triples)
        self.lock = threading.Lock()
        self.request_count = 0
        self.queries: list[str] = []
        self.fail_status: int | None = None
        self.garbage_body = False

    def answer(self, query: str) -> dict[str, Any] | None:
        query = " ".join(query.split())
        if m := _FORWARD.match(query):
            rows = [
                {"p": term_binding(t.predicate), "o": term_binding(t.object)}
                for t in self.triples
                if t.subject.kind is TermKind.IRI and t.subject.lexical == m.group(1)
            ]
            return _results(["p", "o"], rows)
        if m := _REVERSE.match(query):
            rows = [
                {"p": term_binding(t.predicate), "s": term_binding(t.subject)}
                for t in self.triples
                if t.object.kind is TermKind.IRI and t.object.lexical == m.group(1)
            ]
            return _results(["p", "s"], rows)
        if m := _BUNDLED.match(query):
            key = m.group(1)
            wanted = set(re.findall(r"<([^<>\s]*)>", m.group(2)))
            rows = [
                _spo(t)
                for t in self.triples
                if (anchor := t.subject if key == "s" else t.object).kind is TermKind.IRI
                and anchor.lexical in wanted
            ]
            return _results(["s", "p", "o"], rows)
        if _ALL.match(query):
            return _results(["s", "p", "o"], [_spo(t) for t in self.triples])
        return None


def _spo(t: Triple) -> dict[str, dict[str, str]]:
    return {"s": term_binding(t.subject), "p": term_binding(t.predicate), "o": term_binding(t.object)}


def _results(variables: list[str], rows: list[dict[str, Any]]) -> dict[str, Any]:
    return {"head": {"vars": variables}, "results": {"bindings": rows}}


def create_app(state: _State) -> FastAPI:
    app = FastAPI(title="stub-sparql", docs_url=None, redoc_url=None, openapi_url=None)

    @app.api_route("/sparql", methods=["GET", "POST"])
    async def sparql(request: Request) -> Response:
        if request.method == "POST":
            form = parse_qs((await request.body()).decode("utf-8"))
            query = form.get("query", [""])[0]
        else:
            query = request.query_params.get("query", "")
        with state.lock:
            state.request_count += 1
            state.queries.append(query)
            fail_status, garbage = state.fail_status, state.garbage_body
        if fail_status is not None:
            return Response("unavailable", status_code=fail_status, media_type="text/plain")
        if garbage:
            return Response("<html>not json</html>", media_type=SPARQL_JSON)
        payload = state.answer(query)
        if payload is None:
            return Response(f"unsupported query shape: {query}", status_code=400)
        return JSONResponse(payload, media_type=SPARQL_JSON)

    return app


class StubSparqlServer:
    """uvicorn serving `create_app` on 127.0.0.1 with an OS-assigned port."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self._state = _State(triples)
        self._socket = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._socket.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._socket.bind(("127.0.0.1", 0))
        port = self._socket.getsockname()[1]
        self.url = f"http://127.0.0.1:{port}/sparql"
        config = uvicorn.Config(
            create_app(self._state), log_level="warning", lifespan="off", access_log=False
        )
        self._server = uvicorn.Server(config)
        self._thread = threading.Thread(
            target=self._server.run, kwargs={"sockets": [self._socket]}, daemon=True
        )

    # --------------------------------------------------------
    # Lifecycle
    # --------------------------------------------------------
    def start(self, timeout: float = 10.0) -> StubSparqlServer:
        self._thread.start()
        deadline = time.monotonic() + timeout
        while not self._server.started:
            if time.monotonic() > deadline or not self._thread.is_alive():
                raise RuntimeError("stub SPARQL server did not start")
            time.sleep(0.01)
        return self

    def close(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10.0)
        self._socket.close()

    def __enter__(self) -> StubSparqlServer:
        return self.start()

    def __exit__(self, *exc: object) -> None:
        self.close()

    # --------------------------------------------------------
    # Instrumentation
    # --------------------------------------------------------
    @property
    def request_count(self) -> int:
        with self._state.lock:
            return self._state.request_count

    @property
    def queries(self) -> list[str]:
        with self._state.lock:
            return list(self._state.queries)

    def reset_count(self) -> None:
        with self._state.lock:
            self._state.request_count = 0
            self._state.queries.clear()

    def fail_with(self, status: int | None) -> None:
        """Answer every request with this HTTP status (None restores normal answers)."""
        with self._state.lock:
            self._state.fail_status = status

    def send_garbage(self, enabled: bool = True) -> None:
        with self._state.lock:
            self._state.garbage_body = enabled
