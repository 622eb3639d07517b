# kgstroll/parsers/terms.py
# RDF terms and statements
# - Term: IRI, blank node or literal (structural equality, hashable)
# - Triple: one statement; predicate is always an IRI
# - N-Triples serialization for terms and triple sequences

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

__all__ = [
    "TermKind",
    "Term",
    "Triple",
    "XSD",
    "Direction",
    "Hop",
    "escape_literal",
    "serialize_ntriples",
]

XSD = "http://www.w3.org/2001/XMLSchema#"

# Characters never allowed inside an IRI reference (plus controls/space)
_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_LANG_TAG = re.compile(r"^[A-Za-z]+(?:-[A-Za-z0-9]+)*$")
_BNODE_LABEL = re.compile(r"^[\w](?:[\w.\-]*[\w\-])?$")

_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
    "\b": "\\b",
    "\f": "\\f",
}


class TermKind(StrEnum):
    IRI = "iri"
    BLANK = "bnode"
    LITERAL = "literal"


@dataclass(frozen=True, slots=True)
class Term:
    """
    One RDF term.

    `lexical` is the IRI string, the blank node label (without `_:`) or the
    literal's lexical form. Only literals carry a datatype or language tag,
    never both.
    """

    kind: TermKind
    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self) -> None:
        match self.kind:
            case TermKind.IRI:
                if not self.lexical or _IRI_FORBIDDEN.search(self.lexical):
                    raise ValueError(f"invalid IRI: {self.lexical!r}")
            case TermKind.BLANK:
                if not _BNODE_LABEL.match(self.lexical):
                    raise ValueError(f"invalid blank node label: {self.lexical!r}")
            case TermKind.LITERAL:
                if self.datatype is not None and self.language is not None:
                    raise ValueError("literal cannot carry both datatype and language")
                if self.language is not None and not _LANG_TAG.match(self.language):
                    raise ValueError(f"invalid language tag: {self.language!r}")
                if self.datatype is not None and (
                    not self.datatype or _IRI_FORBIDDEN.search(self.datatype)
                ):
                    raise ValueError(f"invalid datatype IRI: {self.datatype!r}")
        if self.kind is not TermKind.LITERAL and (self.datatype or self.language):
            raise ValueError("only literals carry datatype or language")

    # ------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------
    @classmethod
    def iri(cls, value: str) -> Term:
        return cls(TermKind.IRI, value)

    @classmethod
    def bnode(cls, label: str) -> Term:
        return cls(TermKind.BLANK, label)

    @classmethod
    def literal(
        cls, value: str, datatype: str | None = None, language: str | None = None
    ) -> Term:
        return cls(TermKind.LITERAL, value, datatype, language)

    # ------------------------------------------------------------
    # Views
    # ------------------------------------------------------------
    @property
    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL

    @property
    def token(self) -> str:
        """Walk token: the IRI itself, `_:label` for blank nodes."""
        if self.kind is TermKind.BLANK:
            return f"_:{self.lexical}"
        return self.lexical

    def to_ntriples(self) -> str:
        match self.kind:
            case TermKind.IRI:
                return f"<{self.lexical}>"
            case TermKind.BLANK:
                return f"_:{self.lexical}"
            case _:
                text = f'"{escape_literal(self.lexical)}"'
                if self.datatype is not None:
                    return f"{text}^^<{self.datatype}>"
                if self.language is not None:
                    return f"{text}@{self.language}"
                return text

    def __str__(self) -> str:
        return self.to_ntriples()


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if self.predicate.kind is not TermKind.IRI:
            raise ValueError(f"predicate must be an IRI: {self.predicate}")
        if self.subject.kind is TermKind.LITERAL:
            raise ValueError(f"subject cannot be a literal: {self.subject}")

    def to_ntriples(self) -> str:
        return (
            f"{self.subject.to_ntriples()} {self.predicate.to_ntriples()} "
            f"{self.object.to_ntriples()} ."
        )


def escape_literal(value: str) -> str:
    """Escape a lexical form for a double-quoted N-Triples literal."""
    out: list[str] = []
    for ch in value:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    """Serialize statements, one per line, newline-terminated."""
    return "".join(f"{t.to_ntriples()}\n" for t in triples)


class Direction(StrEnum):
    FORWARD = "forward"
    REVERSE = "reverse"


class Hop(NamedTuple):
    """One step away from a vertex: the edge label and the vertex reached."""

    predicate: Term
    neighbor: Term
