# kgstroll/schema.py
# Pydantic configuration models
# - SamplerConfig / WalkerConfig: one walk strategy and its optional sampler
# - EmbedderParams: word2vec hyperparameters
# - PipelineConfig: walkers + embedder + literal paths
# - CliConfig: PipelineConfig plus inputs, outputs and run switches
# - parse_walker_spec / parse_sampler_spec: the `name:key=value,...` grammar

from __future__ import annotations

from enum import StrEnum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kgstroll.config import settings
from kgstroll.core.errors import ConfigurationError
from kgstroll.utils.cpu_detect import resolve_workers

__all__ = [
    "SamplerName",
    "SamplerConfig",
    "WalkStrategy",
    "WalkerConfig",
    "EmbedderMode",
    "EmbedderParams",
    "PipelineConfig",
    "CliConfig",
    "parse_sampler_spec",
    "parse_walker_spec",
]

MAX_SEED = (1 << 63) - 1

SamplerName = Literal["uniform", "predfreq", "objfreq", "predobjfreq", "pagerank"]


class WalkStrategy(StrEnum):
    RANDOM = "random"
    WL = "wl"
    HALK = "halk"


class EmbedderMode(StrEnum):
    SKIPGRAM = "skipgram"
    CBOW = "cbow"


class SamplerConfig(BaseModel):
    """
    Sampler choice for one walker.
    """

    name: SamplerName = Field("uniform", description="Weight allocation strategy")
    inverse: bool = Field(False, description="Map every weight w to 1/(1+w)")
    alpha: float = Field(
        0.85, gt=0.0, lt=1.0, description="PageRank damping factor (pagerank only)"
    )

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        json_schema_extra={"example": {"name": "pagerank", "alpha": 0.85}},
    )

    def to_spec(self) -> str:
        params = [f"inverse={str(self.inverse).lower()}"]
        if self.name == "pagerank":
            params.append(f"alpha={self.alpha!r}")
        return f"{self.name}:{','.join(params)}"


class WalkerConfig(BaseModel):
    """
    One walk strategy.

    `max_walks` absent means exhaustive extraction.
    """

    strategy: WalkStrategy = Field(WalkStrategy.RANDOM, description="random | wl | halk")
    max_depth: int = Field(2, ge=0, description="Hops appended to the root")
    max_walks: int | None = Field(
        None, ge=1, description="Sampled walks per entity; null = exhaustive"
    )
    with_reverse: bool = Field(False, description="Prepend walks over incoming edges")
    wl_iterations: int = Field(4, ge=1, description="WL relabeling iterations (wl only)")
    halk_threshold: float = Field(
        0.001, gt=0.0, lt=1.0, description="Minimum token frequency (halk only)"
    )
    seed: int = Field(0, ge=0, le=MAX_SEED)
    sampler: SamplerConfig | None = None

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        json_schema_extra={
            "example": {
                "strategy": "random",
                "max_depth": 2,
                "max_walks": 100,
                "sampler": {"name": "pagerank", "alpha": 0.85},
            }
        },
    )

    def to_spec(self) -> str:
        """Mini-grammar form; `parse_walker_spec(cfg.to_spec()) == cfg`."""
        params = [f"depth={self.max_depth}"]
        if self.max_walks is not None:
            params.append(f"max={self.max_walks}")
        params.append(f"reverse={str(self.with_reverse).lower()}")
        if self.strategy is WalkStrategy.WL:
            params.append(f"iterations={self.wl_iterations}")
        if self.strategy is WalkStrategy.HALK:
            params.append(f"threshold={self.halk_threshold!r}")
        params.append(f"seed={self.seed}")
        if self.sampler is not None:
            params.append(f"sampler={self.sampler.to_spec()}")
        return f"{self.strategy.value}:{','.join(params)}"


class EmbedderParams(BaseModel):
    """
    Word2vec hyperparameters.

    `learning_rate` left unset resolves to 0.025 for skip-gram and 0.05
    for CBOW.
    """

    mode: EmbedderMode = EmbedderMode.SKIPGRAM
    dimension: int = Field(100, ge=1)
    window: int = Field(5, ge=1)
    negatives: int = Field(5, ge=1)
    epochs: int = Field(10, ge=1)
    learning_rate: float | None = Field(None, gt=0.0)
    min_count: int = Field(1, ge=1)
    subsample: float = Field(1e-3, ge=0.0, description="0 disables subsampling")
    seed: int = Field(0, ge=0, le=MAX_SEED)
    workers: int = Field(1, ge=1)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def initial_lr(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.025 if self.mode is EmbedderMode.SKIPGRAM else 0.05


class PipelineConfig(BaseModel):
    """
    Everything `EmbeddingTransformer.fit_transform` needs.
    """

    walkers: list[WalkerConfig] = Field(..., min_length=1)
    embedder: EmbedderParams = Field(default_factory=EmbedderParams)
    literal_paths: list[list[str]] = Field(default_factory=list)
    combination: Literal["corpus_concat"] = "corpus_concat"
    canonical_order: bool = Field(
        False, description="Sort the merged corpus before training"
    )
    workers: int = Field(1, ge=1, description="Walk-extraction pool width")

    model_config = ConfigDict(extra="forbid")

    @field_validator("walkers", mode="before")
    @classmethod
    def parse_walker_strings(cls, v: Any) -> Any:
        if isinstance(v, list):
            return [parse_walker_spec(w) if isinstance(w, str) else w for w in v]
        return v

    @field_validator("literal_paths")
    @classmethod
    def validate_literal_paths(cls, v: list[list[str]]) -> list[list[str]]:
        for path in v:
            if not path or any(not p.strip() for p in path):
                raise ValueError("literal paths must be non-empty lists of predicate IRIs")
        return [[p.strip() for p in path] for path in v]


class CliConfig(PipelineConfig):
    """
    Command-line run: a pipeline plus its inputs and outputs.

    `input` is an N-Triples file; an http(s) URL given as input is moved to
    `endpoint`. `seed` and `workers` are inherited by walkers and the
    embedder unless they set their own.
    """

    input: Path | None = None
    endpoint: str | None = None
    entities: Path
    out: Path
    literals_out: Path | None = None
    dump_corpus: Path | None = None
    skip_predicates: list[str] = Field(default_factory=list)
    seed: int = Field(0, ge=0, le=MAX_SEED)
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=0)
    lenient: bool = False
    materialize: bool = False
    bundle_size: int = Field(default_factory=lambda: settings.BUNDLE_SIZE, ge=1)
    cache_capacity: int = Field(default_factory=lambda: settings.CACHE_CAPACITY, ge=1)

    @model_validator(mode="before")
    @classmethod
    def inherit_run_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        source = data.get("input")
        if isinstance(source, str) and source.startswith(("http://", "https://")):
            if data.get("endpoint"):
                raise ValueError("give either an input file or an endpoint, not both")
            data["endpoint"] = data.pop("input")

        seed = data.get("seed", 0)
        walkers = data.get("walkers")
        if isinstance(walkers, list):
            inherited = []
            for w in walkers:
                entry = parse_walker_spec(w, default_seed=seed) if isinstance(w, str) else w
                if isinstance(entry, dict) and "seed" not in entry:
                    entry = {**entry, "seed": seed}
                inherited.append(entry)
            data["walkers"] = inherited

        embedder = data.get("embedder") or {}
        if isinstance(embedder, dict):
            embedder = dict(embedder)
            embedder.setdefault("seed", seed)
            data["embedder"] = embedder
        return data

    @field_validator("workers")
    @classmethod
    def resolve_auto_workers(cls, v: int) -> int:
        return resolve_workers(v)

    @model_validator(mode="after")
    def check_inputs(self) -> CliConfig:
        if (self.input is None) == (self.endpoint is None):
            raise ValueError("exactly one of input file or endpoint is required")
        if self.embedder.workers != self.workers:
            self.embedder = self.embedder.model_copy(update={"workers": self.workers})
        return self


# --------------------------------------------------------
# Mini-grammar
# --------------------------------------------------------
_WALKER_KEYS = {
    "depth": "max_depth",
    "max_depth": "max_depth",
    "max": "max_walks",
    "max_walks": "max_walks",
    "reverse": "with_reverse",
    "with_reverse": "with_reverse",
    "iterations": "wl_iterations",
    "wl_iterations": "wl_iterations",
    "threshold": "halk_threshold",
    "halk_threshold": "halk_threshold",
    "seed": "seed",
}
_STRATEGY_ONLY = {"wl_iterations": WalkStrategy.WL, "halk_threshold": WalkStrategy.HALK}
_SAMPLER_KEYS = {"inverse", "alpha"}


def _split_params(text: str, what: str) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"{what}: expected key=value, got {item!r}")
        pairs.append((key.strip().lower(), value.strip()))
    return pairs


def parse_sampler_spec(text: str) -> dict[str, Any]:
    """`pagerank:alpha=0.85,inverse=true` -> SamplerConfig fields."""
    name, _, rest = text.strip().partition(":")
    fields: dict[str, Any] = {"name": name.strip().lower()}
    for key, value in _split_params(rest, f"sampler {text!r}"):
        if key not in _SAMPLER_KEYS:
            raise ConfigurationError(
                f"sampler {text!r}: unknown key {key!r} (known: alpha, inverse)"
            )
        fields[key] = value
    return fields


def parse_walker_spec(text: str, *, default_seed: int | None = None) -> dict[str, Any]:
    """
    Parse `name:key=value,...` into WalkerConfig fields.

    `sampler=` must be the last key: everything after it is the sampler's
    own `name:key=value,...` spec.

    >>> parse_walker_spec("random:depth=2,max=100,sampler=pagerank:alpha=0.85")["max_walks"]
    '100'
    """
    name, _, rest = text.strip().partition(":")
    strategy = name.strip().lower()
    if strategy not in {s.value for s in WalkStrategy}:
        raise ConfigurationError(
            f"walker {text!r}: unknown strategy {name!r} (known: random, wl, halk)"
        )
    fields: dict[str, Any] = {"strategy": strategy}

    head, marker, sampler_text = rest.partition("sampler=")
    if marker:
        if head and not head.rstrip().endswith(","):
            raise ConfigurationError(f"walker {text!r}: malformed key before sampler=")
        fields["sampler"] = parse_sampler_spec(sampler_text)

    for key, value in _split_params(head, f"walker {text!r}"):
        target = _WALKER_KEYS.get(key)
        if target is None:
            raise ConfigurationError(f"walker {text!r}: unknown key {key!r}")
        only = _STRATEGY_ONLY.get(target)
        if only is not None and only.value != strategy:
            raise ConfigurationError(f"walker {text!r}: {key!r} applies to {only.value} only")
        fields[target] = None if value.lower() in ("none", "") else value

    if default_seed is not None:
        fields.setdefault("seed", default_seed)
    return fields
