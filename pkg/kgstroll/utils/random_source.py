# kgstroll/utils/random_source.py
# Seeded random streams.
# (seed, stream_id) -> one PCG64 stream; identical pairs replay identical
# draws on every platform, so parallel workers each take their own stream.

from __future__ import annotations

import numpy as np
import numpy.typing as npt

__all__ = ["RandomSource"]

_U64 = (1 << 64) - 1


class RandomSource:
    """Independent, reproducible random stream keyed by (seed, stream_id)."""

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        self.seed = seed & _U64
        self.stream_id = stream_id & _U64
        sequence = np.random.SeedSequence([self.seed, self.stream_id])
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    def random(self) -> float:
        """One float in [0, 1)."""
        return float(self._gen.random())

    def randoms(self, size: int) -> npt.NDArray[np.float64]:
        return self._gen.random(size)

    def uniform(
        self, low: float, high: float, size: tuple[int, ...]
    ) -> npt.NDArray[np.float64]:
        return self._gen.uniform(low, high, size)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, stream_id={self.stream_id})"
