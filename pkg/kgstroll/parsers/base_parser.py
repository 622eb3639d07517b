# kgstroll/parsers/base_parser.py
# Abstract base class for RDF statement parsers
# - Defines the interface for all serialization parsers
# - Prevents direct instantiation
# - Carries the shared strict/lenient bookkeeping

from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator
from pathlib import Path

from kgstroll.core.errors import InputError

from .terms import Triple


class NTriplesParseError(InputError):
    """Malformed statement; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


class BaseParser(ABC):
    """
    Abstract base class for statement parsers.

    Strict parsers abort on the first malformed statement; lenient parsers
    skip it, count it in `skipped` and keep the error in `errors`.
    """

    def __init__(self, *, lenient: bool = False) -> None:
        if self.__class__ == BaseParser:
            raise NotImplementedError(
                "BaseParser is abstract. Use parsers.get_parser() to get parser instance."
            )
        self.lenient = lenient
        self.skipped = 0
        self.errors: list[NTriplesParseError] = []

    @abstractmethod
    def parse(self, source: Iterable[bytes]) -> Iterator[Triple]:
        """
        Yield statements from a byte stream, in document order.

        Raises:
            NTriplesParseError: on the first malformed statement (strict mode)
        """

    def parse_file(self, path: Path) -> list[Triple]:
        """
        Parse a whole file into memory.

        Raises:
            FileNotFoundError: If the file doesn't exist
            NTriplesParseError: If a statement is malformed (strict mode)
        """
        if not path.exists():
            raise FileNotFoundError(f"RDF file not found: {path}")
        if not path.is_file():
            raise ValueError(f"Path is not a file: {path}")
        with path.open("rb") as f:
            return list(self.parse(f))

    def _reject(self, error: NTriplesParseError) -> None:
        if not self.lenient:
            raise error
        self.skipped += 1
        self.errors.append(error)
