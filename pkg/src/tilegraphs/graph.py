"""Undirected graphs as sorted edge arrays with a lazily built CSR view."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .boxjoin import concat_ranges
from .errors import ParameterError


def _id_dtype(n: int):
    return np.int32 if n < 2**31 else np.int64


def canonical_edges(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """(E, 2) array with u < v per row, rows sorted, duplicates removed."""
    u, v = np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64)
    a, b = np.minimum(u, v), np.maximum(u, v)
    if np.any(a == b):
        raise ParameterError("self-loops are not allowed")
    key = np.unique(a * np.int64(n) + b)
    return np.stack([key // n, key % n], axis=1).astype(_id_dtype(n))


@dataclass(eq=False)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``edges`` is an (E, 2) array with ``u < v`` in every row, sorted
    lexicographically.  Build instances through :meth:`from_edges` unless the
    array is already canonical.
    """

    n: int
    edges: np.ndarray

    @classmethod
    def from_edges(cls, n: int, u, v) -> "Graph":
        return cls(n, canonical_edges(u, v, n))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        e = self.edges.astype(np.int64)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, dst[order].astype(_id_dtype(self.n))

    @property
    def indptr(self) -> np.ndarray:
        return self._csr[0]

    @property
    def indices(self) -> np.ndarray:
        return self._csr[1]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def gather_neighbors(self, vertices: np.ndarray) -> np.ndarray:
        starts = self.indptr[vertices]
        return self.indices[concat_ranges(starts, self.indptr[vertices + 1] - starts)]

    def induced(self, vertices) -> tuple["Graph", np.ndarray]:
        """Induced subgraph; returns it with the sorted original ids of its vertices."""
        keep = np.unique(np.asarray(vertices, dtype=np.int64))
        pos = np.full(self.n, -1, dtype=np.int64)
        pos[keep] = np.arange(len(keep))
        e = self.edges
        mask = (pos[e[:, 0]] >= 0) & (pos[e[:, 1]] >= 0)
        sub = np.stack([pos[e[mask, 0]], pos[e[mask, 1]]], axis=1)
        return Graph(len(keep), sub.astype(_id_dtype(len(keep)))), keep

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        return bool(np.all(bfs_distances(self, [0]) >= 0))


def bfs_distances(G: Graph, sources, limit: int | None = None) -> np.ndarray:
    """Hop distances from the source set; -1 marks vertices beyond ``limit`` or unreachable.

    Level-synchronous BFS over the CSR arrays, so each level is a handful of
    vectorised numpy operations.
    """
    dist = np.full(G.n, -1, dtype=np.int32)
    frontier = np.unique(np.asarray(sources, dtype=np.int64))
    if frontier.size == 0:
        return dist
    if frontier.min() < 0 or frontier.max() >= G.n:
        raise ParameterError("source vertex out of range")
    dist[frontier] = 0
    level = 0
    indptr, indices = G.indptr, G.indices
    while frontier.size and (limit is None or level < limit):
        starts = indptr[frontier]
        nbrs = indices[concat_ranges(starts, indptr[frontier + 1] - starts)]
        nbrs = nbrs[dist[nbrs] < 0]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs).astype(np.int64)
        level += 1
        dist[frontier] = level
    return dist


def subdivide(G: Graph, m: int) -> Graph:
    """Replace each edge by a path with ``m`` edges.

    Original vertices keep their ids.  Edge number ``e`` (in sorted order)
    between ``u < v`` gets the new vertices ``n + e*(m-1) + t - 1`` for
    ``t = 1..m-1``, numbered from ``u`` towards ``v``.
    """
    if int(m) != m or m < 1:
        raise ParameterError("subdivision factor must be a positive integer")
    if m == 1:
        return Graph(G.n, G.edges.copy())
    E = G.num_edges
    n_new = G.n + (m - 1) * E
    u = G.edges[:, 0].astype(np.int64)
    v = G.edges[:, 1].astype(np.int64)
    base = G.n + np.arange(E, dtype=np.int64) * (m - 1)
    chain = base[:, None] + np.arange(m - 1, dtype=np.int64)[None, :]
    path = np.concatenate([u[:, None], chain, v[:, None]], axis=1)
    a = path[:, :-1].ravel()
    b = path[:, 1:].ravel()
    return Graph.from_edges(n_new, a, b)
