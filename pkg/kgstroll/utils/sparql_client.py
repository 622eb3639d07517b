"""
sparql_client.py
================

Synchronous SPARQL 1.1 Protocol client that serves graph hops from a remote
endpoint.

Design principles
-----------------
- Single responsibility: turns (subject, direction) requests into hop lists;
  skip predicates and literal filtering belong to the graph layer.
- Caching: every hop result lands in a `ConnectorCache` keyed by
  (subject, direction); repeated requests never reach the endpoint while the
  entry is cached.
- Bundling: `fetch_hops_bundled` groups uncached subjects into VALUES queries
  of at most `bundle_size` subjects each.
- Thread safety: one `httpx.Client` is shared by all walker threads; counters
  are guarded by a lock.
- Clear error handling: `ConnectorError` carries the HTTP status code,
  `SparqlDecodeError` signals bindings that do not describe RDF terms.
"""

from __future__ import annotations

import json
import threading
from collections.abc import Sequence
from typing import Literal

import httpx
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from kgstroll.config import settings
from kgstroll.core.errors import InputError
from kgstroll.parsers.terms import Direction, Hop, Term, TermKind, Triple
from kgstroll.utils.lru_cache import ConnectorCache

__all__ = [
    "ConnectorError",
    "SparqlDecodeError",
    "SparqlResults",
    "SparqlConnector",
    "SPARQL_RESULTS_JSON",
]

SPARQL_RESULTS_JSON = "application/sparql-results+json"

HopKey = tuple[str, Direction]


# Error classes
class ConnectorError(InputError):
    """Endpoint failure: HTTP error status, transport failure or non-JSON body."""

    def __init__(self, message: str, status_code: int | None = None):
        super().__init__(message)
        self.status_code = status_code  # None when no HTTP response was received


class SparqlDecodeError(ConnectorError):
    """Response was JSON but its bindings do not describe RDF terms."""


# SPARQL results JSON (W3C "SPARQL 1.1 Query Results JSON Format")
class SparqlValue(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="ignore")

    type: Literal["uri", "bnode", "literal", "typed-literal"]
    value: str
    datatype: str | None = None
    lang: str | None = Field(None, alias="xml:lang")

    def to_term(self) -> Term:
        match self.type:
            case "uri":
                return Term.iri(self.value)
            case "bnode":
                return Term.bnode(self.value)
            case _:
                if self.lang:
                    return Term.literal(self.value, language=self.lang)
                return Term.literal(self.value, datatype=self.datatype)


class SparqlHead(BaseModel):
    vars: list[str] = Field(default_factory=list)


class SparqlBindings(BaseModel):
    bindings: list[dict[str, SparqlValue]]


class SparqlResults(BaseModel):
    head: SparqlHead
    results: SparqlBindings


def _iri_ref(term: Term) -> str:
    if term.kind is not TermKind.IRI:
        raise ValueError(f"only IRIs can be queried remotely, got {term}")
    return term.to_ntriples()


def hop_query(subject: Term, direction: Direction) -> str:
    """Single-subject hop query."""
    ref = _iri_ref(subject)
    if direction is Direction.FORWARD:
        return f"SELECT ?p ?o WHERE {{ {ref} ?p ?o }}"
    return f"SELECT ?p ?s WHERE {{ ?s ?p {ref} }}"


def bundled_hop_query(subjects: Sequence[Term], direction: Direction) -> str:
    """Hop query for several subjects at once, keyed by a VALUES clause."""
    refs = " ".join(_iri_ref(s) for s in subjects)
    key = "?s" if direction is Direction.FORWARD else "?o"
    return f"SELECT ?s ?p ?o WHERE {{ VALUES {key} {{ {refs} }} ?s ?p ?o }}"


ALL_TRIPLES_QUERY = "SELECT ?s ?p ?o WHERE { ?s ?p ?o }"


# Connector
class SparqlConnector:
    """
    Hop provider backed by a remote SPARQL endpoint.

    - `fetch_hops` issues one query per uncached (subject, direction).
    - `fetch_hops_bundled` issues ceil(k / bundle_size) queries for k
      uncached subjects.
    - `requests_sent` counts HTTP requests actually issued.
    """

    def __init__(
        self,
        endpoint: str,
        *,
        cache_capacity: int | None = None,
        bundle_size: int | None = None,
        timeout: float | None = None,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.bundle_size = max(1, bundle_size or settings.BUNDLE_SIZE)
        self.cache: ConnectorCache[tuple[Hop, ...]] = ConnectorCache(
            cache_capacity or settings.CACHE_CAPACITY
        )
        self._owns_client = client is None
        self._client = client or httpx.Client(
            timeout=timeout or settings.SPARQL_TIMEOUT,
            headers={
                "Accept": SPARQL_RESULTS_JSON,
                "User-Agent": settings.SPARQL_USER_AGENT,
            },
        )
        self._lock = threading.Lock()
        self.requests_sent = 0

    # --------------------------------------------------------
    # Transport
    # --------------------------------------------------------
    def query(self, sparql: str) -> SparqlResults:
        """
        Run a SELECT query and decode the JSON results.

        Raises
        ------
        ConnectorError
            HTTP status >= 400, transport failure or a non-JSON body.
        SparqlDecodeError
            JSON that is not a SPARQL results document.
        """
        with self._lock:
            self.requests_sent += 1
        headers = {"Accept": SPARQL_RESULTS_JSON}
        try:
            if len(sparql) <= settings.SPARQL_MAX_GET_LENGTH:
                response = self._client.get(
                    self.endpoint, params={"query": sparql}, headers=headers
                )
            else:
                response = self._client.post(
                    self.endpoint, data={"query": sparql}, headers=headers
                )
        except httpx.HTTPError as e:
            raise ConnectorError(f"SPARQL request to {self.endpoint} failed: {e}") from e

        logger.debug(
            f"event=sparql_request status={response.status_code} bytes={len(response.content)}"
        )
        if response.status_code >= 400:
            raise ConnectorError(
                f"SPARQL endpoint returned HTTP {response.status_code}",
                status_code=response.status_code,
            )
        try:
            payload = response.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ConnectorError(
                f"SPARQL endpoint returned a non-JSON body: {e}",
                status_code=response.status_code,
            ) from e
        try:
            return SparqlResults.model_validate(payload)
        except ValidationError as e:
            raise SparqlDecodeError(
                f"malformed SPARQL results: {e.error_count()} error(s)",
                status_code=response.status_code,
            ) from e

    # --------------------------------------------------------
    # Hop queries
    # --------------------------------------------------------
    def fetch_hops(self, subject: Term, direction: Direction) -> list[Hop]:
        """All (predicate, neighbor) pairs of one subject in one direction."""
        key: HopKey = (subject.lexical, direction)
        cached = self.cache.get(key)
        if cached is not None:
            return list(cached)

        neighbor_var = "o" if direction is Direction.FORWARD else "s"
        results = self.query(hop_query(subject, direction))
        hops = tuple(
            _decode_hop(row, "p", neighbor_var) for row in results.results.bindings
        )
        self.cache.put(key, hops)
        return list(hops)

    def fetch_hops_bundled(
        self, subjects: Sequence[Term], direction: Direction
    ) -> dict[Term, list[Hop]]:
        """
        Hops for several subjects; uncached ones are fetched in bundles.

        A failed bundle raises for all of its subjects; subjects of earlier
        bundles stay cached.
        """
        if not subjects:
            raise ValueError("subjects must not be empty")

        found: dict[Term, list[Hop]] = {}
        pending: list[Term] = []
        for subject in dict.fromkeys(subjects):
            cached = self.cache.get((subject.lexical, direction))
            if cached is None:
                pending.append(subject)
            else:
                found[subject] = list(cached)

        key_var = "s" if direction is Direction.FORWARD else "o"
        neighbor_var = "o" if direction is Direction.FORWARD else "s"
        for start in range(0, len(pending), self.bundle_size):
            bundle = pending[start : start + self.bundle_size]
            grouped: dict[str, list[Hop]] = {s.lexical: [] for s in bundle}
            results = self.query(bundled_hop_query(bundle, direction))
            for row in results.results.bindings:
                anchor = row.get(key_var)
                if anchor is None or anchor.value not in grouped:
                    raise SparqlDecodeError(f"binding without a requested ?{key_var}")
                grouped[anchor.value].append(_decode_hop(row, "p", neighbor_var))
            for subject in bundle:
                hops = tuple(grouped[subject.lexical])
                self.cache.put((subject.lexical, direction), hops)
                found[subject] = list(hops)

        logger.debug(
            f"event=hops_bundled subjects={len(found)} fetched={len(pending)} "
            f"direction={direction}"
        )
        return {s: found[s] for s in subjects}

    def fetch_all_triples(self) -> list[Triple]:
        """Materialize every statement the endpoint exposes."""
        results = self.query(ALL_TRIPLES_QUERY)
        triples: list[Triple] = []
        for row in results.results.bindings:
            try:
                s, p, o = (row[v].to_term() for v in ("s", "p", "o"))
                triples.append(Triple(s, p, o))
            except (KeyError, ValueError) as e:
                raise SparqlDecodeError(f"malformed statement binding: {e}") from e
        logger.info(f"event=endpoint_materialized triples={len(triples)}")
        return triples

    # --------------------------------------------------------
    # Lifecycle
    # --------------------------------------------------------
    def stats(self) -> dict[str, int]:
        return {
            "requests": self.requests_sent,
            "cache_hits": self.cache.hit_count,
            "cache_misses": self.cache.miss_count,
            "cache_size": len(self.cache),
        }

    def close(self) -> None:
        if self._owns_client:
            self._client.close()

    def __enter__(self) -> SparqlConnector:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def _decode_hop(row: dict[str, SparqlValue], pred_var: str, neighbor_var: str) -> Hop:
    try:
        hop = Hop(row[pred_var].to_term(), row[neighbor_var].to_term())
    except KeyError as e:
        raise SparqlDecodeError(f"binding is missing ?{e.args[0]}") from e
    except ValueError as e:
        raise SparqlDecodeError(f"binding is not a valid RDF term: {e}") from e
    if hop.predicate.kind is not TermKind.IRI:
        raise SparqlDecodeError(f"predicate binding is not an IRI: {hop.predicate}")
    return hop
