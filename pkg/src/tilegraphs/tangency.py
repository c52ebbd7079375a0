"""Tangency graphs of tilings: two boxes are adjacent when they share a facet patch
of positive (d-1)-dimensional volume.  Edges carry the axis orthogonal to the
shared patch."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boxjoin import box_join, compress
from .errors import DisconnectedGraphError, ParameterError
from .graph import Graph, _id_dtype
from .tiling import Tiling

BRUTE_FORCE_GUARD = 20000


@dataclass(eq=False)
class TangencyGraph(Graph):
    """Graph over tile indices; ``edge_dir[e]`` is the 0-based axis of edge ``e``."""

    dim: int = 2
    edge_dir: np.ndarray | None = None

    @classmethod
    def from_labeled(cls, n: int, dim: int, u, v, direction) -> "TangencyGraph":
        u, v = np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64)
        a, b = np.minimum(u, v), np.maximum(u, v)
        key = a * np.int64(n) + b
        order = np.argsort(key, kind="stable")
        key = key[order]
        if len(key) > 1 and np.any(key[1:] == key[:-1]):
            raise ParameterError("pair of tiles adjacent in more than one direction")
        edges = np.stack([key // max(n, 1), key % max(n, 1)], axis=1).astype(_id_dtype(n))
        dirs = np.asarray(direction, dtype=np.int8)[order]
        return cls(n, edges, dim, dirs)

    def edges_in_direction(self, axis: int) -> np.ndarray:
        """Edges whose shared patch is orthogonal to 0-based ``axis``."""
        return self.edges[self.edge_dir == axis]

    def labeled_edge_set(self) -> set[tuple[int, int, int]]:
        return {(int(u), int(v), int(d)) for (u, v), d in zip(self.edges.tolist(), self.edge_dir.tolist())}


def _finish(T: Tiling, us, vs, ds, require_connected: bool) -> TangencyGraph:
    u = np.concatenate(us) if us else np.zeros(0, np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, np.int64)
    d = np.concatenate(ds) if ds else np.zeros(0, np.int8)
    G = TangencyGraph.from_labeled(len(T), T.dim, u, v, d)
    if require_connected and not G.is_connected():
        raise DisconnectedGraphError(f"tangency graph of {len(T)} tiles is disconnected")
    return G


def build_tangency_graph(T: Tiling, require_connected: bool = True) -> TangencyGraph:
    """Sweep construction: for every axis, join upper faces with lower faces lying
    in the same hyperplane and keep pairs whose faces overlap with positive
    (d-1)-volume.  Exact, output-sensitive."""
    n, d = len(T), T.dim
    lo = np.empty((n, d), dtype=np.int64)
    hi = np.empty((n, d), dtype=np.int64)
    for a in range(d):
        lo[:, a], hi[:, a] = compress(T.lo[:, a], T.hi[:, a])
    us, vs, ds = [], [], []
    for axis in range(d):
        rest = [a for a in range(d) if a != axis]
        below, above = box_join(
            hi[:, axis], lo[:, rest], hi[:, rest],
            lo[:, axis], lo[:, rest], hi[:, rest],
        )
        us.append(below)
        vs.append(above)
        ds.append(np.full(len(below), axis, dtype=np.int8))
    return _finish(T, us, vs, ds, require_connected)


def brute_force_tangency(
    T: Tiling, guard: int = BRUTE_FORCE_GUARD, require_connected: bool = True
) -> TangencyGraph:
    """All-pairs oracle on the raw integer coordinates."""
    n, d = len(T), T.dim
    if n > guard:
        raise ParameterError(f"brute-force tangency limited to {guard} tiles, got {n}")
    lo, hi = T.lo, T.hi
    us, vs, ds = [], [], []
    chunk = max(1, 2_000_000 // max(n, 1))
    for s in range(0, n, chunk):
        rows = np.arange(s, min(n, s + chunk))
        open_overlap = [
            (lo[rows, a][:, None] < hi[None, :, a]) & (lo[None, :, a] < hi[rows, a][:, None])
            for a in range(d)
        ]
        for axis in range(d):
            hit = hi[rows, axis][:, None] == lo[None, :, axis]
            for a in range(d):
                if a != axis:
                    hit &= open_overlap[a]
            i, j = np.nonzero(hit)
            us.append(rows[i])
            vs.append(j)
            ds.append(np.full(len(i), axis, dtype=np.int8))
    return _finish(T, us, vs, ds, require_connected)


@dataclass(frozen=True)
class AlphaStats:
    alpha: Fraction
    alpha_per_dir: tuple[Fraction, ...]
    L: Fraction
    max_degree: int


def _max_ratio(num: np.ndarray, den: np.ndarray) -> Fraction:
    ratio = num.astype(float) / den.astype(float)
    top = ratio.max()
    cand = np.nonzero(ratio >= top * (1 - 1e-9))[0]
    return max(Fraction(int(num[c]), int(den[c])) for c in cand)


def alpha_stats(T: Tiling, G: TangencyGraph) -> AlphaStats:
    """Exact aspect statistics: the largest side ratio between tangent tiles, per
    edge direction, and the largest side length."""
    d = T.dim
    per_dir = []
    for axis in range(d):
        e = G.edges_in_direction(axis).astype(np.int64)
        if len(e) == 0:
            per_dir.append(Fraction(1))
            continue
        best = Fraction(1)
        for j in range(d):
            a, b = T.ell[e[:, 0], j], T.ell[e[:, 1], j]
            best = max(best, _max_ratio(a, b), _max_ratio(b, a))
        per_dir.append(best)
    max_deg = int(G.degrees.max()) if G.n else 0
    return AlphaStats(max(per_dir), tuple(per_dir), T.max_side(), max_deg)


@dataclass(frozen=True)
class DegreeBoundCheck:
    ok: bool
    max_degree: int
    bound: Fraction
    witness: int


def check_degree_bound(T: Tiling, G: TangencyGraph, stats: AlphaStats | None = None) -> DegreeBoundCheck:
    """Compare the maximum degree with 3^d * alpha^(2d)."""
    stats = stats or alpha_stats(T, G)
    bound = Fraction(3) ** T.dim * stats.alpha ** (2 * T.dim)
    deg = G.degrees
    witness = int(np.argmax(deg)) if G.n else 0
    max_deg = int(deg[witness]) if G.n else 0
    return DegreeBoundCheck(max_deg <= bound, max_deg, bound, witness)
