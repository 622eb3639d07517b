# kgstroll/services/walker.py
# Walk extraction
# - Exhaustive walks (all distinct walks up to max_depth, prefixes included)
# - Sampled walks (max_walks sampler-guided descents per entity)
# - Reverse walking: reverse segment + root + forward segment
# - Weisfeiler-Lehman relabeled copies and HALK rare-token filtering
# - Seeds are processed by a thread pool; results merge in seed order

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from loguru import logger

from kgstroll.core.errors import ConfigurationError
from kgstroll.parsers.terms import Direction, Hop, Term
from kgstroll.schema import WalkerConfig, WalkStrategy
from kgstroll.services.graph import BaseGraph, KnowledgeGraph
from kgstroll.services.sampler import Sampler, UniformSampler
from kgstroll.utils.random_source import RandomSource

__all__ = [
    "WalkerError",
    "Walk",
    "MissingEntity",
    "WalkResult",
    "extract_random",
    "extract_reverse",
    "extract_wl",
    "extract_halk",
    "extract_walks",
    "get_walker",
    "wl_labels",
    "fnv1a_64",
]

# Segment: alternating tokens leading away from the root, root excluded.
# Forward: (p1, e1, p2, e2, ...); reverse: (..., e2, p2, e1, p1) so that
# segment + (root,) reads in graph direction.
Segment = tuple[str, ...]

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


class WalkerError(ConfigurationError):
    """Walker configuration that cannot run against the given graph."""


@dataclass(frozen=True, slots=True)
class Walk:
    """Alternating entity/predicate tokens; `tokens[root_index]` is the root."""

    tokens: tuple[str, ...]
    root: Term
    root_index: int = 0

    @property
    def depth(self) -> int:
        return len(self.tokens) // 2

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, slots=True)
class MissingEntity:
    entity: Term
    reason: str


@dataclass(slots=True)
class WalkResult:
    walks: list[Walk] = field(default_factory=list)
    missing: list[MissingEntity] = field(default_factory=list)
    per_entity: dict[Term, int] = field(default_factory=dict)

    def extend(self, other: WalkResult) -> None:
        self.walks.extend(other.walks)
        self.missing.extend(other.missing)
        for entity, count in other.per_entity.items():
            self.per_entity[entity] = self.per_entity.get(entity, 0) + count


# --------------------------------------------------------
# Segment builders
# --------------------------------------------------------
def _step_tokens(hop: Hop, direction: Direction) -> Segment:
    if direction is Direction.FORWARD:
        return hop.predicate.token, hop.neighbor.token
    return hop.neighbor.token, hop.predicate.token


def _extend(segment: Segment, step: Segment, direction: Direction) -> Segment:
    return segment + step if direction is Direction.FORWARD else step + segment


def _exhaustive_segments(
    graph: BaseGraph, root: Term, depth: int, direction: Direction
) -> list[Segment]:
    """All distinct segments of 0..depth hops, breadth-first, insertion order."""
    segments: list[Segment] = [()]
    frontier: list[tuple[Term, Segment]] = [(root, ())]
    for _ in range(depth):
        if not frontier:
            break
        graph.prefetch([v for v, _ in frontier], direction)
        next_frontier: list[tuple[Term, Segment]] = []
        for vertex, segment in frontier:
            for hop in graph.get_hops(vertex, direction):
                extended = _extend(segment, _step_tokens(hop, direction), direction)
                next_frontier.append((hop.neighbor, extended))
        segments.extend(s for _, s in next_frontier)
        frontier = next_frontier
    return list(dict.fromkeys(segments))


def _sampled_segment(
    graph: BaseGraph,
    root: Term,
    depth: int,
    direction: Direction,
    sampler: Sampler,
    rng: RandomSource,
) -> Segment:
    """One sampler-guided descent; truncated at dead ends."""
    segment: Segment = ()
    vertex = root
    for _ in range(depth):
        hop = sampler.sample_hop(graph, vertex, direction, rng)
        if hop is None:
            break
        segment = _extend(segment, _step_tokens(hop, direction), direction)
        vertex = hop.neighbor
    return segment


def _join(reverse: Segment, root: Term, forward: Segment) -> Walk:
    return Walk(reverse + (root.token,) + forward, root, len(reverse))


def _distinct(walks: Iterable[Walk]) -> list[Walk]:
    """Keep the first walk of each token sequence, whatever its root position."""
    first: dict[tuple[str, ...], Walk] = {}
    for walk in walks:
        first.setdefault(walk.tokens, walk)
    return list(first.values())


# --------------------------------------------------------
# Per-entity extraction
# --------------------------------------------------------
def _entity_walks(
    graph: BaseGraph,
    root: Term,
    index: int,
    cfg: WalkerConfig,
    sampler: Sampler | None,
    with_reverse: bool,
) -> list[Walk]:
    exhaustive = cfg.max_walks is None
    if exhaustive:
        forward = _exhaustive_segments(graph, root, cfg.max_depth, Direction.FORWARD)
        if not with_reverse:
            return [_join((), root, seg) for seg in forward]
        reverse = _exhaustive_segments(graph, root, cfg.max_depth, Direction.REVERSE)
        return _distinct(_join(rev, root, fwd) for rev in reverse for fwd in forward)

    assert cfg.max_walks is not None  # nosec B101
    chooser = sampler or UniformSampler().fit(graph)
    rng = RandomSource(cfg.seed, index)
    walks: list[Walk] = []
    for _ in range(cfg.max_walks):
        rev: Segment = ()
        if with_reverse:
            rev = _sampled_segment(graph, root, cfg.max_depth, Direction.REVERSE, chooser, rng)
        fwd = _sampled_segment(graph, root, cfg.max_depth, Direction.FORWARD, chooser, rng)
        walks.append(_join(rev, root, fwd))
    return _distinct(walks)


def _run_pool(
    graph: BaseGraph,
    seeds: Sequence[Term],
    job: Callable[[int, Term], list[Walk]],
    workers: int,
) -> WalkResult:
    result = WalkResult()

    def guarded(item: tuple[int, Term]) -> tuple[Term, list[Walk] | None]:
        index, seed = item
        if not graph.has_vertex(seed):
            return seed, None
        return seed, job(index, seed)

    items = list(enumerate(seeds))
    if workers <= 1:
        collected = [guarded(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="walker") as pool:
            collected = list(pool.map(guarded, items))

    for seed, walks in collected:
        if walks is None:
            result.missing.append(MissingEntity(seed, "entity not found in graph"))
            logger.warning(f"event=entity_missing entity={seed.token}")
            continue
        result.walks.extend(walks)
        result.per_entity[seed] = result.per_entity.get(seed, 0) + len(walks)
    return result


def _check_sampler(sampler: Sampler | None) -> None:
    if sampler is not None and not sampler.fitted:
        raise WalkerError(f"{sampler.name} sampler must be fitted before extraction")


# --------------------------------------------------------
# Public operations
# --------------------------------------------------------
def extract_random(
    graph: BaseGraph,
    seeds: Sequence[Term],
    cfg: WalkerConfig,
    sampler: Sampler | None = None,
    *,
    workers: int = 1,
) -> WalkResult:
    """
    Random-walk corpus.

    Without `max_walks` every distinct walk of depth 0..max_depth is
    produced (the sampler is not consulted). With `max_walks = n`, n
    descents per entity are drawn and duplicates removed, so at most n
    distinct walks remain. Reverse segments are added when
    `cfg.with_reverse` is set.
    """
    _check_sampler(sampler)
    if cfg.max_walks is None and sampler is not None:
        logger.debug("event=sampler_ignored reason=exhaustive_extraction")

    def job(index: int, seed: Term) -> list[Walk]:
        return _entity_walks(graph, seed, index, cfg, sampler, cfg.with_reverse)

    result = _run_pool(graph, seeds, job, workers)
    logger.debug(
        f"event=random_walks entities={len(seeds)} walks={len(result.walks)} "
        f"reverse={cfg.with_reverse}"
    )
    return result


def extract_reverse(
    graph: BaseGraph,
    seeds: Sequence[Term],
    cfg: WalkerConfig,
    sampler: Sampler | None = None,
    *,
    workers: int = 1,
) -> WalkResult:
    """Walks joined from a reverse segment, the root and a forward segment."""
    _check_sampler(sampler)

    def job(index: int, seed: Term) -> list[Walk]:
        return _entity_walks(graph, seed, index, cfg, sampler, True)

    return _run_pool(graph, seeds, job, workers)


def fnv1a_64(text: str) -> int:
    """64-bit FNV-1a over UTF-8 bytes."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


def wl_labels(graph: KnowledgeGraph, iterations: int) -> list[dict[Term, str]]:
    """
    Weisfeiler-Lehman labels for iterations 0..k.

    Iteration 0 gives every vertex the same empty colour; iteration i+1
    digests the vertex's label with the sorted multiset of
    (predicate, neighbor label) pairs over its forward hops.
    """
    labels: list[dict[Term, str]] = [{v: "" for v in graph.vertices}]
    for _ in range(iterations):
        previous = labels[-1]
        current: dict[Term, str] = {}
        for vertex in graph.vertices:
            neighborhood = sorted(
                f"{hop.predicate.token}{{{previous[hop.neighbor]}"
                for hop in graph.get_hops(vertex, Direction.FORWARD)
            )
            # '^', '{' and '|' never occur in IRIs, so the encoding is unambiguous
            canonical = previous[vertex] + "^" + "|".join(neighborhood)
            current[vertex] = f"{fnv1a_64(canonical):016x}"
        labels.append(current)
    return labels


def _relabel(walk: Walk, labels: dict[Term, str], by_token: dict[str, Term]) -> Walk:
    tokens = list(walk.tokens)
    # entity tokens sit at even offsets from the root
    for i in range(walk.root_index % 2, len(tokens), 2):
        if i == walk.root_index:
            continue
        vertex = by_token.get(tokens[i])
        if vertex is not None:
            tokens[i] = labels[vertex]
    return Walk(tuple(tokens), walk.root, walk.root_index)


def extract_wl(
    graph: BaseGraph,
    seeds: Sequence[Term],
    cfg: WalkerConfig,
    sampler: Sampler | None = None,
    *,
    workers: int = 1,
) -> WalkResult:
    """
    Weisfeiler-Lehman walks: every base walk is emitted once per iteration
    0..k with non-root entity tokens replaced by that iteration's label.
    Iteration-0 copies equal the plain walks.
    """
    if cfg.wl_iterations < 1:
        raise WalkerError("WL iterations must be >= 1")
    if not isinstance(graph, KnowledgeGraph):
        raise WalkerError("WL relabeling needs a local graph; materialize the endpoint first")

    base = extract_random(graph, seeds, cfg, sampler, workers=workers)
    labels = wl_labels(graph, cfg.wl_iterations)
    by_token = {v.token: v for v in graph.vertices}

    result = WalkResult(missing=list(base.missing))
    for walk in base.walks:
        result.walks.append(walk)
        for iteration in range(1, cfg.wl_iterations + 1):
            result.walks.append(_relabel(walk, labels[iteration], by_token))
    for entity, count in base.per_entity.items():
        result.per_entity[entity] = count * (cfg.wl_iterations + 1)
    logger.debug(
        f"event=wl_walks iterations={cfg.wl_iterations} walks={len(result.walks)}"
    )
    return result


def extract_halk(walks: Sequence[Walk], threshold: float) -> list[Walk]:
    """
    Remove rare hops from a corpus.

    A token's frequency is the share of walks containing it. Non-root
    entity tokens rarer than `threshold` are dropped together with the
    predicate linking them toward the root; walks reduced to the bare root
    are kept once per root token.
    """
    if not 0.0 < threshold < 1.0:
        raise WalkerError(f"HALK threshold must be in (0, 1), got {threshold}")
    if not walks:
        return []

    presence: Counter[str] = Counter()
    for walk in walks:
        presence.update(set(walk.tokens[walk.root_index % 2 :: 2]))
    total = len(walks)
    rare = {token for token, n in presence.items() if n / total < threshold}

    kept: list[Walk] = []
    seen_singletons: set[str] = set()
    for walk in walks:
        filtered = _drop_rare(walk, rare)
        if len(filtered.tokens) == 1:
            if filtered.tokens[0] in seen_singletons:
                continue
            seen_singletons.add(filtered.tokens[0])
        kept.append(filtered)
    logger.debug(
        f"event=halk_filtered walks_in={total} walks_out={len(kept)} rare_tokens={len(rare)}"
    )
    return kept


def _drop_rare(walk: Walk, rare: set[str]) -> Walk:
    root = walk.root_index
    tokens = walk.tokens
    # reverse side: entity at i pairs with predicate at i+1
    before: list[str] = []
    for i in range(root % 2, root, 2):
        if tokens[i] not in rare:
            before.extend(tokens[i : i + 2])
    # forward side: entity at i pairs with predicate at i-1
    after: list[str] = []
    for i in range(root + 2, len(tokens), 2):
        if tokens[i] not in rare:
            after.extend(tokens[i - 1 : i + 1])
    return Walk(tuple(before) + (tokens[root],) + tuple(after), walk.root, len(before))


def _extract_halk_corpus(
    graph: BaseGraph,
    seeds: Sequence[Term],
    cfg: WalkerConfig,
    sampler: Sampler | None = None,
    *,
    workers: int = 1,
) -> WalkResult:
    base = extract_random(graph, seeds, cfg, sampler, workers=workers)
    filtered = extract_halk(base.walks, cfg.halk_threshold)
    counts = Counter(w.root for w in filtered)
    return WalkResult(
        walks=filtered,
        missing=base.missing,
        per_entity={s: counts.get(s, 0) for s in base.per_entity},
    )


Extractor = Callable[..., WalkResult]


def get_walker(cfg: WalkerConfig) -> Extractor:
    """
    Extraction function for a walker configuration.

    Random walkers with `with_reverse` use reverse extraction; WL and HALK
    build on random extraction and honor `with_reverse` too.
    """
    match cfg.strategy:
        case WalkStrategy.RANDOM:
            return extract_reverse if cfg.with_reverse else extract_random
        case WalkStrategy.WL:
            return extract_wl
        case WalkStrategy.HALK:
            return _extract_halk_corpus
        case _:
            raise WalkerError(f"unsupported walk strategy: {cfg.strategy}")


def extract_walks(
    graph: BaseGraph,
    seeds: Sequence[Term],
    cfg: WalkerConfig,
    sampler: Sampler | None = None,
    *,
    workers: int = 1,
) -> WalkResult:
    """Run one configured strategy (random, WL or HALK)."""
    return get_walker(cfg)(graph, seeds, cfg, sampler, workers=workers)
