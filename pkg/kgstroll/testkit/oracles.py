# kgstroll/testkit/oracles.py
# Brute-force reference implementations.
# Inputs are plain (subject, predicate, object) token strings; nothing here
# imports kgstroll so the oracles cannot share a bug with the code they check.

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence

import numpy as np
import numpy.typing as npt

__all__ = ["oracle_enumerate_walks", "oracle_pagerank", "finite_difference_grad"]

Edge = tuple[str, str, str]


def oracle_enumerate_walks(
    edges: Iterable[Edge],
    seed: str,
    depth: int,
    with_reverse: bool = False,
) -> set[tuple[str, ...]]:
    """
    Every walk of 0..depth hops from `seed`, prefixes included.

    With `with_reverse`, each walk is a reverse part (over incoming edges)
    followed by the seed and a forward part.
    """
    if depth > 4:
        raise ValueError("oracle is limited to depth <= 4")
    edge_list = list(edges)

    def forward(vertex: str, remaining: int) -> set[tuple[str, ...]]:
        found: set[tuple[str, ...]] = {()}
        if remaining == 0:
            return found
        for s, p, o in edge_list:
            if s == vertex:
                for tail in forward(o, remaining - 1):
                    found.add((p, o) + tail)
        return found

    def backward(vertex: str, remaining: int) -> set[tuple[str, ...]]:
        found: set[tuple[str, ...]] = {()}
        if remaining == 0:
            return found
        for s, p, o in edge_list:
            if o == vertex:
                for head in backward(s, remaining - 1):
                    found.add(head + (s, p))
        return found

    heads = backward(seed, depth) if with_reverse else {()}
    tails = forward(seed, depth)
    return {head + (seed,) + tail for head in heads for tail in tails}


def oracle_pagerank(
    vertices: Sequence[str],
    edges: Iterable[tuple[str, str]],
    alpha: float = 0.85,
    iters: int = 300,
) -> npt.NDArray[np.float64]:
    """Textbook dense power iteration; dangling mass is spread uniformly."""
    if iters < 100:
        raise ValueError("use at least 100 iterations")
    n = len(vertices)
    if n == 0:
        return np.zeros(0)
    position = {v: i for i, v in enumerate(vertices)}
    links = np.zeros((n, n))
    for source, target in edges:
        links[position[source], position[target]] += 1.0

    out = links.sum(axis=1)
    transition = np.zeros((n, n))
    for i in range(n):
        if out[i] > 0:
            transition[i] = links[i] / out[i]
        else:
            transition[i] = 1.0 / n

    rank = np.full(n, 1.0 / n)
    for _ in range(iters):
        rank = alpha * (rank @ transition) + (1.0 - alpha) / n
    return rank / rank.sum()


def finite_difference_grad(
    f: Callable[[npt.NDArray[np.float64]], float],
    x: npt.NDArray[np.float64],
    eps: float = 1e-4,
) -> npt.NDArray[np.float64]:
    """Central differences of a scalar function, one component at a time."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = grad.reshape(-1)
    point = x.astype(np.float64).copy()
    view = point.reshape(-1)
    for i in range(view.size):
        original = view[i]
        view[i] = original + eps
        upper = f(point)
        view[i] = original - eps
        lower = f(point)
        view[i] = original
        flat[i] = (upper - lower) / (2.0 * eps)
    return grad
