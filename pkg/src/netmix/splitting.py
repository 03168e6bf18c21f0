"""Hold-out dyad sampling and mask algebra.

A :class:`DyadMask` is the held-out index set: unordered node pairs sampled
independently with probability ``p``.  Applied symmetrically, so Frobenius
norms restricted to the mask count each dyad twice -- a uniform factor that
cancels in every argmin and weight computation.
"""

from __future__ import annotations

from typing import IO

import numpy as np

from .graph import Graph, ProbMatrix
from .rng import STREAM_SPLIT, rng_for


class DyadMask:
    """Held-out unordered pairs with their sampling probability and seed."""

    __slots__ = ("n", "p", "seed", "_iu", "_ju", "_bool", "_pairs")

    def __init__(self, n: int, pairs, p: float, seed: int):
        n = int(n)
        if n < 2:
            raise ValueError("mask requires n >= 2")
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"holdout probability {p} outside [0, 1]")
        arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                         dtype=np.int64).reshape(-1, 2)
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        if arr.size:
            if (lo == hi).any():
                raise ValueError("mask pairs must be off-diagonal")
            if lo.min() < 0 or hi.max() >= n:
                raise ValueError(f"mask pair out of range for n={n}")
        codes = np.unique(lo * n + hi)
        self.n = n
        self.p = float(p)
        self.seed = int(seed)
        self._iu = (codes // n).astype(np.int64)
        self._ju = (codes % n).astype(np.int64)
        self._bool: np.ndarray | None = None
        self._pairs: frozenset[tuple[int, int]] | None = None

    @property
    def count(self) -> int:
        """Number of held-out unordered pairs."""
        return len(self._iu)

    @property
    def holdout_pairs(self) -> frozenset[tuple[int, int]]:
        if self._pairs is None:
            self._pairs = frozenset(zip(self._iu.tolist(), self._ju.tolist()))
        return self._pairs

    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted ``(i, j)`` index arrays with ``i < j``."""
        return self._iu, self._ju

    def bool_matrix(self) -> np.ndarray:
        """Symmetric boolean indicator of held-out entries (diagonal False)."""
        if self._bool is None:
            m = np.zeros((self.n, self.n), dtype=bool)
            m[self._iu, self._ju] = True
            m[self._ju, self._iu] = True
            m.setflags(write=False)
            self._bool = m
        return self._bool

    def __contains__(self, pair) -> bool:
        i, j = int(pair[0]), int(pair[1])
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            return False
        return bool(self.bool_matrix()[i, j])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DyadMask):
            return NotImplemented
        return (
            self.n == other.n
            and self.p == other.p
            and self.seed == other.seed
            and np.array_equal(self._iu, other._iu)
            and np.array_equal(self._ju, other._ju)
        )

    def __repr__(self) -> str:
        return f"DyadMask(n={self.n}, count={self.count}, p={self.p})"


def sample_dyad_split(n: int, p: float, seed: int) -> DyadMask:
    """Include each unordered pair independently with probability ``p``.

    Deterministic given ``(n, p, seed)``; sampling uses a stream-split
    generator so other consumers of the same seed stay independent.
    """
    if n < 2:
        raise ValueError("dyad split requires n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"holdout probability {p} outside [0, 1]")
    iu, ju = np.triu_indices(n, 1)
    keep = rng_for(seed, STREAM_SPLIT).random(len(iu)) < p
    mask = DyadMask.__new__(DyadMask)
    mask.n = int(n)
    mask.p = float(p)
    mask.seed = int(seed)
    mask._iu = iu[keep].astype(np.int64)
    mask._ju = ju[keep].astype(np.int64)
    mask._bool = None
    mask._pairs = None
    return mask


def restrict(matrix: ProbMatrix | np.ndarray, mask: DyadMask):
    """Keep entries at held-out pairs (both triangles), zero elsewhere."""
    values = matrix.values if isinstance(matrix, ProbMatrix) else np.asarray(matrix)
    if values.shape != (mask.n, mask.n):
        raise ValueError(f"matrix shape {values.shape} does not match mask n={mask.n}")
    masked = np.where(mask.bool_matrix(), values, 0.0)
    if isinstance(matrix, ProbMatrix):
        return ProbMatrix(masked)
    return masked


def train_adjacency(g: Graph, mask: DyadMask) -> Graph:
    """Graph with held-out dyads zeroed, i.e. treated as non-edges."""
    if g.n != mask.n:
        raise ValueError(f"graph n={g.n} does not match mask n={mask.n}")
    e = g.edge_array
    if len(e) == 0:
        return Graph(g.n)
    keep = ~mask.bool_matrix()[e[:, 0], e[:, 1]]
    return Graph(g.n, e[keep])


def complement(mask: DyadMask) -> DyadMask:
    """Mask over all pairs not held out; probability becomes ``1 - p``."""
    iu, ju = np.triu_indices(mask.n, 1)
    keep = ~mask.bool_matrix()[iu, ju]
    out = DyadMask.__new__(DyadMask)
    out.n = mask.n
    out.p = 1.0 - mask.p
    out.seed = mask.seed
    out._iu = iu[keep].astype(np.int64)
    out._ju = ju[keep].astype(np.int64)
    out._bool = None
    out._pairs = None
    return out


def dump_mask(mask: DyadMask, stream: IO) -> None:
    """Text form: header line "n p seed", then one "i j" pair per line."""
    stream.write(f"{mask.n} {mask.p!r} {mask.seed}\n")
    iu, ju = mask.pair_arrays()
    for i, j in zip(iu.tolist(), ju.tolist()):
        stream.write(f"{i} {j}\n")


def load_mask(stream: IO) -> DyadMask:
    lines = stream.read().splitlines()
    if not lines:
        raise ValueError("empty mask stream")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"bad mask header {lines[0]!r}")
    n, p, seed = int(header[0]), float(header[1]), int(header[2])
    pairs = []
    for raw in lines[1:]:
        if raw.strip():
            i, j = raw.split()
            pairs.append((int(i), int(j)))
    return DyadMask(n, pairs, p, seed)
