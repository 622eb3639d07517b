# RDF parser factory
# - Provides a unified interface for statement parsers
# - Exposes the factory plus the term types and parse errors

from .base_parser import BaseParser, NTriplesParseError
from .ntriples_parser import NTriplesParser, parse_ntriples
from .terms import Direction, Hop, Term, TermKind, Triple, serialize_ntriples


def get_parser(format_type: str = "nt", *, lenient: bool = False) -> BaseParser:
    """
    Get a parser instance for an RDF serialization.

    Args:
        format_type: "nt" / "ntriples" (the only supported serialization)
        lenient: skip malformed statements instead of aborting

    Raises:
        ValueError: If format_type is not supported

    Examples:
        >>> parser = get_parser("nt")
        >>> triples = parser.parse_file(Path("mutag.nt"))
    """
    match format_type.lower():
        case "nt" | "ntriples" | "n-triples":
            return NTriplesParser(lenient=lenient)
        case _:
            raise ValueError(
                f"Unsupported RDF format: {format_type}. Supported formats: nt"
            )


__all__ = [
    "get_parser",
    "parse_ntriples",
    "serialize_ntriples",
    "BaseParser",
    "NTriplesParser",
    "NTriplesParseError",
    "Direction",
    "Hop",
    "Term",
    "TermKind",
    "Triple",
]
