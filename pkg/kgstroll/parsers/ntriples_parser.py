# kgstroll/parsers/ntriples_parser.py
# N-Triples parser (W3C line-oriented grammar, UTF-8)
# - One statement per line; comments (#) and blank lines skipped
# - Literal escapes and \u / \U code points decoded
# - Strict by default: first malformed line aborts with line/column

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator

from loguru import logger

from .base_parser import BaseParser, NTriplesParseError
from .terms import Term, Triple

_LANG = re.compile(r"[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_BNODE = re.compile(r"_:([\w](?:[\w.\-]*[\w\-])?)")
_HEX = frozenset("0123456789abcdefABCDEF")

_ECHAR = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


class _Syntax(Exception):
    """Internal: syntax error at a 0-based column of the current line."""

    def __init__(self, message: str, pos: int):
        super().__init__(message)
        self.pos = pos


class NTriplesParser(BaseParser):
    """
    Streaming N-Triples parser.

    Blank node labels are scoped to one document; nothing is merged
    across parser runs.
    """

    def parse(self, source: Iterable[bytes]) -> Iterator[Triple]:
        count = 0
        for lineno, raw in enumerate(source, start=1):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                self._reject(NTriplesParseError(f"invalid UTF-8: {e.reason}", lineno, e.start + 1))
                continue
            try:
                triple = self.parse_line(text.rstrip("\r\n"))
            except _Syntax as e:
                self._reject(NTriplesParseError(str(e), lineno, e.pos + 1))
                continue
            if triple is not None:
                count += 1
                yield triple
        logger.debug(
            f"event=ntriples_parsed statements={count} skipped={self.skipped}"
        )

    # --------------------------------------------------------
    # Line grammar
    # --------------------------------------------------------
    def parse_line(self, line: str) -> Triple | None:
        """Parse one line; None for blank and comment lines."""
        pos = _skip_ws(line, 0)
        if pos == len(line) or line[pos] == "#":
            return None

        match line[pos]:
            case "<":
                subject, pos = _read_iri(line, pos)
            case "_":
                subject, pos = _read_bnode(line, pos)
            case _:
                raise _Syntax("expected subject (IRI or blank node)", pos)

        pos = _skip_ws(line, pos)
        if pos == len(line) or line[pos] != "<":
            raise _Syntax("expected predicate IRI", pos)
        predicate, pos = _read_iri(line, pos)

        pos = _skip_ws(line, pos)
        if pos == len(line):
            raise _Syntax("expected object", pos)
        match line[pos]:
            case "<":
                obj, pos = _read_iri(line, pos)
            case "_":
                obj, pos = _read_bnode(line, pos)
            case '"':
                obj, pos = _read_literal(line, pos)
            case _:
                raise _Syntax("expected object (IRI, blank node or literal)", pos)

        pos = _skip_ws(line, pos)
        if pos == len(line) or line[pos] != ".":
            raise _Syntax("expected '.' at end of statement", pos)
        pos = _skip_ws(line, pos + 1)
        if pos < len(line) and line[pos] != "#":
            raise _Syntax("unexpected content after '.'", pos)

        return Triple(subject, predicate, obj)


# ------------------------------------------------------------
# Token readers: each returns (term, position after the token)
# ------------------------------------------------------------
def _skip_ws(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    return pos


def _read_uchar(line: str, pos: int) -> tuple[str, int]:
    """Decode \\uXXXX or \\UXXXXXXXX starting at the backslash."""
    width = 4 if line[pos + 1] == "u" else 8
    digits = line[pos + 2 : pos + 2 + width]
    if len(digits) != width or not set(digits) <= _HEX:
        raise _Syntax("malformed unicode escape", pos)
    code = int(digits, 16)
    if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
        raise _Syntax("unicode escape out of range", pos)
    return chr(code), pos + 2 + width


def _read_iri(line: str, pos: int) -> tuple[Term, int]:
    start = pos
    pos += 1
    chars: list[str] = []
    while pos < len(line):
        ch = line[pos]
        if ch == ">":
            try:
                return Term.iri("".join(chars)), pos + 1
            except ValueError as e:
                raise _Syntax(str(e), start) from e
        if ch == "\\":
            if pos + 1 < len(line) and line[pos + 1] in "uU":
                decoded, pos = _read_uchar(line, pos)
                chars.append(decoded)
                continue
            raise _Syntax("only \\u and \\U escapes are allowed in IRIs", pos)
        chars.append(ch)
        pos += 1
    raise _Syntax("unterminated IRI", start)


def _read_bnode(line: str, pos: int) -> tuple[Term, int]:
    m = _BNODE.match(line, pos)
    if m is None:
        raise _Syntax("malformed blank node label", pos)
    return Term.bnode(m.group(1)), m.end()


def _read_literal(line: str, pos: int) -> tuple[Term, int]:
    start = pos
    pos += 1
    chars: list[str] = []
    while True:
        if pos >= len(line):
            raise _Syntax("unterminated literal", start)
        ch = line[pos]
        if ch == '"':
            pos += 1
            break
        if ch == "\\":
            if pos + 1 >= len(line):
                raise _Syntax("dangling escape", pos)
            nxt = line[pos + 1]
            if nxt in "uU":
                decoded, pos = _read_uchar(line, pos)
                chars.append(decoded)
                continue
            if nxt not in _ECHAR:
                raise _Syntax(f"unknown escape \\{nxt}", pos)
            chars.append(_ECHAR[nxt])
            pos += 2
            continue
        chars.append(ch)
        pos += 1

    lexical = "".join(chars)
    if line.startswith("^^", pos):
        if pos + 2 >= len(line) or line[pos + 2] != "<":
            raise _Syntax("expected datatype IRI after '^^'", pos + 2)
        datatype, end = _read_iri(line, pos + 2)
        return Term.literal(lexical, datatype=datatype.lexical), end
    if pos < len(line) and line[pos] == "@":
        m = _LANG.match(line, pos + 1)
        if m is None:
            raise _Syntax("malformed language tag", pos + 1)
        return Term.literal(lexical, language=m.group(0)), m.end()
    return Term.literal(lexical), pos


def parse_ntriples(source: Iterable[bytes], *, lenient: bool = False) -> list[Triple]:
    """Parse a byte stream of N-Triples into a list of statements."""
    return list(NTriplesParser(lenient=lenient).parse(source))
