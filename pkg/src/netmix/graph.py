"""Graph and probability-matrix data types with edge-list and matrix I/O.

``Graph`` stores edges sparsely (a frozen set of ordered-index pairs);
``ProbMatrix`` is dense symmetric with the diagonal fixed at zero.  Both are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import ParseError

logger = logging.getLogger(__name__)

_MAGIC = b"NMX1"


class Graph:
    """Undirected simple graph on nodes ``0..n-1``.

    Edges are unordered pairs held as ``(i, j)`` tuples with ``i < j``;
    self-loops and duplicates are rejected at construction.
    """

    __slots__ = ("n", "edges", "_adjacency", "_edge_array")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(n)
        if n < 0:
            raise ValueError("node count must be nonnegative")
        canonical: set[tuple[int, int]] = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) not allowed")
            if i > j:
                i, j = j, i
            if i < 0 or j >= n:
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            canonical.add((i, j))
        self.n = n
        self.edges = frozenset(canonical)
        self._adjacency: np.ndarray | None = None
        self._edge_array: np.ndarray | None = None

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_array(self) -> np.ndarray:
        """Edges as a lexicographically sorted ``(E, 2)`` int array."""
        if self._edge_array is None:
            arr = np.array(sorted(self.edges), dtype=np.int64).reshape(-1, 2)
            arr.setflags(write=False)
            self._edge_array = arr
        return self._edge_array

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 float matrix; cached and read-only."""
        if self._adjacency is None:
            a = np.zeros((self.n, self.n))
            e = self.edge_array
            if len(e):
                a[e[:, 0], e[:, 1]] = 1.0
                a[e[:, 1], e[:, 0]] = 1.0
            a.setflags(write=False)
            self._adjacency = a
        return self._adjacency

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edge_array.ravel(), minlength=self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True)
class GraphStats:
    avg_degree: float
    density: float


@dataclass(frozen=True)
class ParseStats:
    self_loops_dropped: int
    duplicates_dropped: int


def parse_edge_list(
    source: str | bytes | IO, n_override: int | None = None
) -> tuple[Graph, ParseStats]:
    """Parse edge-list text ("i j" per line, '#' starts a comment).

    Duplicate edges are deduped and self-loops dropped, both counted in the
    returned stats.  ``n`` is ``n_override`` when given, else one past the
    largest index seen.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    pairs: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    max_index = -1
    for line_number, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(
                f"expected two whitespace-separated indices, got {raw!r}", line_number
            )
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"non-integer index in {raw!r}", line_number) from None
        if i < 0 or j < 0:
            raise ParseError(f"negative index in {raw!r}", line_number)
        if n_override is not None and max(i, j) >= n_override:
            raise ValueError(
                f"line {line_number}: index {max(i, j)} out of bounds for n={n_override}"
            )
        max_index = max(max_index, i, j)
        if i == j:
            self_loops += 1
            continue
        pair = (i, j) if i < j else (j, i)
        if pair in pairs:
            duplicates += 1
        else:
            pairs.add(pair)
    n = n_override if n_override is not None else max_index + 1
    return Graph(n, pairs), ParseStats(self_loops, duplicates)


def load_edge_list(source: str | bytes | IO, n_override: int | None = None) -> Graph:
    """Parse edge-list text, logging a warning when lines were dropped."""
    graph, stats = parse_edge_list(source, n_override)
    if stats.self_loops_dropped or stats.duplicates_dropped:
        logger.warning(
            "edge list: dropped %d self-loops, %d duplicate edges",
            stats.self_loops_dropped,
            stats.duplicates_dropped,
        )
    return graph


def dumps_edge_list(g: Graph) -> str:
    """Canonical edge-list text: sorted "i j" lines."""
    return "".join(f"{i} {j}\n" for i, j in sorted(g.edges))


def dump_edge_list(g: Graph, stream: IO) -> None:
    stream.write(dumps_edge_list(g))


def graph_stats(g: Graph) -> GraphStats:
    """Average degree ``2E/n`` and density ``2E/(n(n-1))`` (0 for n < 2)."""
    if g.n < 1:
        raise ValueError("graph_stats requires at least one node")
    avg_degree = 2.0 * g.num_edges / g.n
    density = 2.0 * g.num_edges / (g.n * (g.n - 1)) if g.n >= 2 else 0.0
    return GraphStats(avg_degree, density)


class ProbMatrix:
    """Symmetric ``n x n`` real matrix of edge probabilities, zero diagonal.

    Construction symmetrizes exactly and forces the diagonal to zero (the
    diagonal never enters any objective, and adjacency diagonals are zero).
    Entries may lie outside [0, 1] until :func:`clip_unit` is applied.
    """

    __slots__ = ("n", "values")

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("ProbMatrix requires a square matrix")
        if not np.allclose(arr, arr.T, rtol=0.0, atol=1e-8):
            raise ValueError("ProbMatrix requires a symmetric matrix")
        arr = (arr + arr.T) / 2.0
        np.fill_diagonal(arr, 0.0)
        arr.setflags(write=False)
        self.n = arr.shape[0]
        self.values = arr

    def __repr__(self) -> str:
        return f"ProbMatrix(n={self.n})"


def clip_unit(p: ProbMatrix) -> ProbMatrix:
    """Entrywise projection onto [0, 1]; symmetry and zero diagonal kept."""
    return ProbMatrix(np.clip(p.values, 0.0, 1.0))


def prob_matrix_to_csv(p: ProbMatrix, stream: IO) -> None:
    """Full-matrix CSV, one row per line, shortest-roundtrip floats."""
    for row in p.values:
        stream.write(",".join(repr(float(v)) for v in row))
        stream.write("\n")


def prob_matrix_from_csv(stream: IO) -> ProbMatrix:
    rows = []
    for raw in stream.read().splitlines():
        if raw.strip():
            rows.append([float(tok) for tok in raw.split(",")])
    return ProbMatrix(np.array(rows))


def write_prob_matrix(p: ProbMatrix, stream: IO) -> None:
    """Compact binary form: magic ``NMX1``, little-endian uint32 n, then the
    strict upper triangle as little-endian float64 in row-major order (the
    diagonal is implicitly zero)."""
    stream.write(_MAGIC)
    stream.write(struct.pack("<I", p.n))
    iu, ju = np.triu_indices(p.n, 1)
    stream.write(np.ascontiguousarray(p.values[iu, ju], dtype="<f8").tobytes())


def read_prob_matrix(stream: IO) -> ProbMatrix:
    magic = stream.read(4)
    if magic != _MAGIC:
        raise ParseError(f"bad magic bytes {magic!r}, expected {_MAGIC!r}")
    (n,) = struct.unpack("<I", stream.read(4))
    expected = n * (n - 1) // 2
    data = np.frombuffer(stream.read(8 * expected), dtype="<f8")
    if data.size != expected:
        raise ParseError(f"truncated matrix payload: {data.size} of {expected} entries")
    values = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    values[iu, ju] = data
    values[ju, iu] = data
    return ProbMatrix(values)


def save_prob_matrix(p: ProbMatrix, path) -> None:
    """Write CSV when the path ends in .csv, binary otherwise."""
    if str(path).endswith(".csv"):
        with open(path, "w") as fh:
            prob_matrix_to_csv(p, fh)
    else:
        with open(path, "wb") as fh:
            write_prob_matrix(p, fh)


def load_prob_matrix(path) -> ProbMatrix:
    if str(path).endswith(".csv"):
        with open(path) as fh:
            return prob_matrix_from_csv(fh)
    with open(path, "rb") as fh:
        return read_prob_matrix(fh)
