# kgstroll/main.py
# kgstroll command-line entrypoint
# - Parse flags (or a TOML --config overlaid by flags) into CliConfig
# - Load the graph from an N-Triples file or a SPARQL endpoint
# - Run the pipeline; write vectors (word2vec text) and literals (JSON)
# - Exit codes: 0 success, 1 configuration error, 2 input/parse error

from __future__ import annotations

import argparse
import sys
import tomllib
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from pathlib import Path
from typing import Any, NoReturn
from uuid import uuid4

import tomli_w
from loguru import logger
from pydantic import ValidationError

from kgstroll import PACKAGE_NAME, VERSION
from kgstroll.core.errors import ConfigurationError, InputError
from kgstroll.core.logger import setup_logger
from kgstroll.parsers.terms import Term
from kgstroll.schema import CliConfig
from kgstroll.services.graph import BaseGraph, KnowledgeGraph, RemoteKnowledgeGraph
from kgstroll.services.literals import LiteralPath, write_literal_table
from kgstroll.services.transformer import EmbeddingTransformer, FitResult
from kgstroll.utils.sparql_client import SparqlConnector

__all__ = ["run", "main", "build_parser", "load_config", "read_entities"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INPUT = 2

# flag dest -> embedder field
_EMBEDDER_FLAGS = {
    "mode": "mode",
    "dimension": "dimension",
    "window": "window",
    "negatives": "negatives",
    "epochs": "epochs",
    "min_count": "min_count",
    "subsample": "subsample",
    "learning_rate": "learning_rate",
}
_RUN_ONLY_FLAGS = {"config", "print_config", "log_level", "log_format"}


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the configuration-error code."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog=PACKAGE_NAME,
        description="Embed knowledge-graph entities from random walks and extract literal features.",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("--version", action="version", version=f"{PACKAGE_NAME} {VERSION}")

    src = parser.add_argument_group("input")
    src.add_argument("--input", help="N-Triples file (an http(s) URL is treated as --endpoint)")
    src.add_argument("--endpoint", help="SPARQL endpoint URL")
    src.add_argument("--entities", type=Path, help="Seed entities, one IRI per line")
    src.add_argument("--lenient", action="store_true", help="Skip malformed N-Triples lines")
    src.add_argument(
        "--materialize", action="store_true", help="Load the whole endpoint into memory first"
    )
    src.add_argument("--bundle-size", type=int, help="Subjects per bundled SPARQL request")
    src.add_argument("--cache-capacity", type=int, help="Cached hop results (LRU)")
    src.add_argument(
        "--skip-predicate",
        dest="skip_predicates",
        action="append",
        metavar="IRI",
        help="Predicate excluded from walks and literals (repeatable)",
    )

    walk = parser.add_argument_group("walks")
    walk.add_argument(
        "--walker",
        dest="walkers",
        action="append",
        metavar="SPEC",
        help="name:key=value,... e.g. random:depth=2,max=100,sampler=pagerank:alpha=0.85 "
        "(repeatable; sampler= must come last)",
    )
    walk.add_argument(
        "--canonical-order", action="store_true", help="Sort the merged corpus before training"
    )
    walk.add_argument("--dump-corpus", type=Path, help="Write walks, one per line")

    emb = parser.add_argument_group("embedder")
    emb.add_argument("--mode", choices=["skipgram", "cbow"])
    emb.add_argument("--dimension", type=int)
    emb.add_argument("--window", type=int)
    emb.add_argument("--negatives", type=int)
    emb.add_argument("--epochs", type=int)
    emb.add_argument("--min-count", type=int)
    emb.add_argument("--subsample", type=float)
    emb.add_argument("--learning-rate", type=float)

    lit = parser.add_argument_group("literals")
    lit.add_argument(
        "--literal-path",
        dest="literal_paths",
        action="append",
        metavar="IRI,IRI,...",
        help="Predicate path ending at literal values (repeatable)",
    )

    out = parser.add_argument_group("output")
    out.add_argument("--out", type=Path, help="Vector file (word2vec text format)")
    out.add_argument("--literals-out", type=Path, help="Literal table (JSON)")

    run_group = parser.add_argument_group("run")
    run_group.add_argument("--workers", type=int, help="Extraction and training threads; 0 = auto")
    run_group.add_argument("--seed", type=int)
    run_group.add_argument("--config", type=Path, help="TOML file with the same keys as the flags")
    run_group.add_argument(
        "--print-config", action="store_true", help="Print the resolved config as TOML and exit"
    )
    run_group.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    run_group.add_argument("--log-format", choices=["text", "json"])
    return parser


def load_config(args: argparse.Namespace) -> CliConfig:
    """
    TOML file (when given) overlaid with the flags given on the command line.

    Raises:
        ConfigurationError: unreadable TOML or invalid values
    """
    given = vars(args)
    data: dict[str, Any] = {}
    if "config" in given:
        try:
            data = tomllib.loads(Path(given["config"]).read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise ConfigurationError(f"cannot read config {given['config']}: {e}") from e

    embedder = dict(data.get("embedder", {}))
    for dest, value in given.items():
        if dest in _RUN_ONLY_FLAGS:
            continue
        if dest in _EMBEDDER_FLAGS:
            embedder[_EMBEDDER_FLAGS[dest]] = value
        elif dest == "literal_paths":
            data[dest] = [list(LiteralPath.parse(p).predicates) for p in value]
        else:
            data[dest] = value
    if embedder:
        data["embedder"] = embedder

    try:
        return CliConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(_format_validation(e)) from e


def _format_validation(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(p) for p in item["loc"]) or "config"
        parts.append(f"{where}: {item['msg']}")
    return "invalid configuration: " + "; ".join(parts)


def read_entities(path: Path) -> list[Term]:
    """
    One IRI per line; angle brackets optional, `#` comments and blank lines skipped.

    Raises:
        InputError: unreadable file or an invalid IRI (with line number)
        ConfigurationError: no entity listed
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read entities file {path}: {e}") from e
    seeds: list[Term] = []
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("<") and line.endswith(">"):
            line = line[1:-1]
        try:
            seeds.append(Term.iri(line))
        except ValueError as e:
            raise InputError(f"{path}: line {number}: {e}") from e
    if not seeds:
        raise ConfigurationError(f"entities file {path} lists no entity")
    return seeds


@contextmanager
def open_graph(cfg: CliConfig) -> Iterator[BaseGraph]:
    """Local graph from the input file, or an endpoint-backed graph."""
    if cfg.input is not None:
        yield KnowledgeGraph.from_file(cfg.input, cfg.skip_predicates, lenient=cfg.lenient)
        return
    assert cfg.endpoint is not None  # nosec B101
    with SparqlConnector(
        cfg.endpoint, cache_capacity=cfg.cache_capacity, bundle_size=cfg.bundle_size
    ) as connector:
        if cfg.materialize:
            yield KnowledgeGraph(connector.fetch_all_triples(), cfg.skip_predicates)
        else:
            yield RemoteKnowledgeGraph(connector, cfg.skip_predicates)
        stats = " ".join(f"{k}={v}" for k, v in connector.stats().items())
        logger.info(f"event=connector_stats endpoint={cfg.endpoint} {stats}")


def write_outputs(cfg: CliConfig, result: FitResult) -> None:
    assert result.model is not None  # nosec B101
    result.model.save_word2vec_format(cfg.out)
    if cfg.literals_out is not None:
        if result.literals is None:
            logger.warning("event=literals_skipped reason=no_literal_paths")
        else:
            write_literal_table(result.literals, cfg.literals_out)
    if cfg.dump_corpus is not None:
        with Path(cfg.dump_corpus).open("w", encoding="utf-8", newline="\n") as fh:
            for walk in result.walks:
                fh.write(" ".join(walk.tokens) + "\n")
        logger.info(f"event=corpus_written path={cfg.dump_corpus} walks={len(result.walks)}")


def execute(cfg: CliConfig) -> int:
    seeds = read_entities(cfg.entities)
    logger.info(
        f"event=run_started entities={len(seeds)} walkers={len(cfg.walkers)} "
        f"source={'endpoint' if cfg.endpoint else 'file'} workers={cfg.workers}"
    )
    with open_graph(cfg) as graph:
        result = EmbeddingTransformer(cfg).fit_transform(graph, seeds)
    for item in result.missing:
        logger.warning(f"event=entity_without_vector entity={item.entity.token} reason={item.reason}")
    write_outputs(cfg, result)
    logger.info(
        f"event=run_done walks={result.corpus_stats.walks_total} "
        f"walks_per_strategy={','.join(map(str, result.corpus_stats.walks_per_strategy))} "
        f"embeddings={len(result.embeddings)}"
    )
    return EXIT_OK


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    given = vars(args)
    setup_logger(given.get("log_level"), given.get("log_format"))
    for flag in ("entities", "out"):
        if flag not in given and "config" not in given:
            parser.print_usage(sys.stderr)
            sys.stderr.write(f"{parser.prog}: error: the following arguments are required: --{flag}\n")
            return EXIT_CONFIG

    with logger.contextualize(run_id=uuid4().hex[:8]):
        try:
            cfg = load_config(args)
            if given.get("print_config"):
                sys.stdout.write(tomli_w.dumps(cfg.model_dump(mode="json", exclude_none=True)))
                return EXIT_OK
            return execute(cfg)
        except ConfigurationError as e:
            logger.error(f"event=config_error error={e}")
            return EXIT_CONFIG
        except InputError as e:
            logger.error(f"event=input_error error={e}")
            return EXIT_INPUT
        except (OSError, ValueError) as e:
            logger.error(f"event=input_error error={e}")
            return EXIT_INPUT
        except Exception as e:
            logger.exception(f"event=unexpected_error error={e}")
            return EXIT_CONFIG


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
