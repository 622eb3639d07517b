"""
Thread-safe LRU cache for connector hop results.

Every lookup is counted as a hit or a miss, so that
``hit_count + miss_count`` always equals the number of lookups served.
Insertions beyond ``capacity`` evict the least-recently-used entry.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from collections.abc import Hashable
from typing import Generic, TypeVar

__all__ = ["ConnectorCache"]

V = TypeVar("V")


class ConnectorCache(Generic[V]):
    """
    Bounded, thread-safe LRU mapping with hit/miss accounting.

    Updates are atomic per key; two threads missing the same key at once
    may both fetch it, and the later `put` simply wins.

    Examples
    --------
    >>> cache = ConnectorCache[int](capacity=2)
    >>> cache.put("a", 1); cache.put("b", 2); cache.put("c", 3)
    >>> cache.get("a") is None
    True
    >>> cache.hit_count, cache.miss_count
    (0, 1)
    """

    __slots__ = ("_capacity", "_data", "_lock", "hit_count", "miss_count")

    def __init__(self, capacity: int = 100_000) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self._capacity = capacity
        self._data: OrderedDict[Hashable, V] = OrderedDict()
        self._lock = threading.Lock()
        self.hit_count = 0
        self.miss_count = 0

    @property
    def capacity(self) -> int:
        return self._capacity

    def get(self, key: Hashable) -> V | None:
        """Return the cached value (promoting it) or None, counting the lookup."""
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                self.hit_count += 1
                return self._data[key]
            self.miss_count += 1
            return None

    def peek(self, key: Hashable) -> V | None:
        """Read without promoting or counting."""
        with self._lock:
            return self._data.get(key)

    def put(self, key: Hashable, value: V) -> None:
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
            self._data[key] = value
            while len(self._data) > self._capacity:
                self._data.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            self.hit_count = 0
            self.miss_count = 0

    def __contains__(self, key: object) -> bool:
        with self._lock:
            return key in self._data

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)

    def __repr__(self) -> str:
        return (
            f"ConnectorCache(size={len(self)}, capacity={self._capacity}, "
            f"hits={self.hit_count}, misses={self.miss_count})"
        )
