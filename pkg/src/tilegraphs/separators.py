"""Projection fibers, disjoint-path certificates across annuli, and exact minimum
annular separators via vertex-capacitated max-flow."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .boxjoin import group_ids
from .errors import BudgetExceededError, ParameterError
from .graph import Graph, bfs_distances
from .tiling import Tiling, as_gamma, layered_tiling, size_formula, tensor_power

FLOW_GUARD = 5 * 10**5


@dataclass(eq=False)
class FiberFamily:
    """Preimages of the projection that forgets axis 1 (index 0).

    Fiber ``f`` holds the tiles ``tiles[indptr[f]:indptr[f+1]]`` sorted by their
    axis-1 coordinate; ``fiber_of[t]`` is the fiber containing tile ``t``.
    """

    base: Tiling
    indptr: np.ndarray
    tiles: np.ndarray
    fiber_of: np.ndarray
    structural_ok: bool | None = None

    def __len__(self) -> int:
        return len(self.indptr) - 1

    def fiber(self, f: int) -> np.ndarray:
        return self.tiles[self.indptr[f]:self.indptr[f + 1]]

    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)


def project(T: Tiling) -> FiberFamily:
    """Project every tile onto its last d-1 coordinates and group tiles by image.

    For tilings carrying (gamma, n) provenance the base is compared exactly
    with the (d-1)-dimensional layered tiling of the same sequence.
    """
    d = T.dim
    if d < 2:
        raise ParameterError("projection needs d >= 2")
    keep = [d - 1] + list(range(1, d - 1))
    cols = [T.lo[:, a] for a in keep] + [T.ell[:, a] for a in keep]
    fid, reps = group_ids(*cols)
    base = Tiling(T.lo[reps][:, 1:], T.ell[reps][:, 1:], T.den[1:])
    order = np.lexsort((T.lo[:, 0], fid))
    counts = np.bincount(fid, minlength=len(reps))
    indptr = np.zeros(len(reps) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    structural = None
    if T.provenance is not None and d >= 3:
        gamma, n = T.provenance
        base.provenance = (gamma, n)
        expected = layered_tiling(d - 1, tensor_power(gamma, n)) if n > 0 else None
        structural = base.same_tiles(expected) if expected is not None else len(base) == 1
    return FiberFamily(base, indptr, order.astype(np.int64), fid.astype(np.int64), structural)


@dataclass
class FiberPathCheck:
    ok: bool
    path: np.ndarray
    reason: str = ""


def fiber_is_path(G: Graph, fam: FiberFamily, f: int) -> FiberPathCheck:
    """Check that the fiber induces a simple path, in increasing axis-1 order."""
    members = fam.fiber(f)
    m = len(members)
    if m == 1:
        return FiberPathCheck(True, members)
    pos = {int(t): i for i, t in enumerate(members)}
    internal = set()
    for t in members:
        for u in G.neighbors(int(t)):
            if int(u) in pos:
                a, b = sorted((pos[int(t)], pos[int(u)]))
                internal.add((a, b))
    if len(internal) != m - 1:
        return FiberPathCheck(False, members, f"{len(internal)} induced edges on {m} vertices")
    bad = [e for e in internal if e[1] != e[0] + 1]
    if bad:
        a, b = bad[0]
        return FiberPathCheck(False, members, f"edge between non-consecutive tiles {members[a]} and {members[b]}")
    return FiberPathCheck(True, members)


@dataclass
class FiberSummary:
    fibers: int
    disjoint: bool
    all_paths: bool
    bad_fibers: list[int]


def check_all_fibers(G: Graph, fam: FiberFamily) -> FiberSummary:
    """Vectorised version of :func:`fiber_is_path` over every fiber."""
    n = G.n
    disjoint = bool(np.all(np.bincount(fam.tiles, minlength=n) == 1))
    rank = np.empty(n, dtype=np.int64)
    rank[fam.tiles] = np.arange(n) - np.repeat(fam.indptr[:-1], fam.sizes())
    e = G.edges.astype(np.int64)
    same = fam.fiber_of[e[:, 0]] == fam.fiber_of[e[:, 1]]
    e = e[same]
    fib = fam.fiber_of[e[:, 0]]
    consecutive = np.abs(rank[e[:, 0]] - rank[e[:, 1]]) == 1
    per_fiber = np.bincount(fib, minlength=len(fam))
    per_fiber_consec = np.bincount(fib[consecutive], minlength=len(fam))
    need = fam.sizes() - 1
    bad = np.nonzero((per_fiber != need) | (per_fiber_consec != need))[0]
    return FiberSummary(len(fam), disjoint, len(bad) == 0, bad.tolist())


def fiber_diameter(G: Graph, fam: FiberFamily, f: int) -> int:
    """Exact d_G-diameter of a fiber's vertex set (distances in all of G)."""
    members = fam.fiber(f)
    best = 0
    for t in members:
        dist = bfs_distances(G, [int(t)])
        best = max(best, int(dist[members].max()))
    return best


def fiber_diameter_bound(T: Tiling, G: Graph, fam: FiberFamily, f: int) -> tuple[bool, Fraction]:
    """Check diam_G(fiber) >= 1/L_T - 1 using the fiber's end tiles, falling back
    to the exact fiber diameter when the ends are too close."""
    bound = 1 / T.max_side() - 1
    members = fam.fiber(f)
    need = int(np.ceil(float(bound))) if bound > 0 else 0
    if need <= 0:
        return True, bound
    dist = bfs_distances(G, [int(members[0])], limit=need - 1)
    if dist[int(members[-1])] < 0:
        return True, bound
    return fiber_diameter(G, fam, f) >= bound, bound


def check_fiber_diameters(T: Tiling, G: Graph, fam: FiberFamily) -> tuple[int, list[int], Fraction]:
    """Number of fibers meeting the diameter bound, the failing ones, and the bound."""
    bad, bound = [], 1 / T.max_side() - 1
    for f in range(len(fam)):
        ok, bound = fiber_diameter_bound(T, G, fam, f)
        if not ok:
            bad.append(f)
    return len(fam) - len(bad), bad, bound


def scale_index(R: int, d: int, b: int) -> int | None:
    """floor(log_b(R/(d+1))) computed with integers; None when R < d+1."""
    if R < d + 1:
        return None
    h = 0
    while (d + 1) * b ** (h + 1) <= R:
        h += 1
    return h


def copy_members(T: Tiling, v: int, h: int) -> np.ndarray:
    """Tiles of the copy of the level-h layered tiling that contains tile ``v``.

    Writes T_{gamma^n} = T_{gamma^(n-h)} o T_{gamma^h}; the parent tile is found
    by integer division of the scaled coordinates.
    """
    gamma, n = T.provenance
    gamma = as_gamma(gamma)
    b, d = gamma.b, T.dim
    if h >= n:
        return np.arange(len(T), dtype=np.int64)
    outer = np.array(tensor_power(gamma, n - h).entries, dtype=np.int64)
    layer = T.lo[:, d - 1] * (b**n // T.den[d - 1])
    parent_layer = layer // b**h
    G_parent = outer[parent_layer]
    mask = parent_layer == parent_layer[v]
    for a in range(d - 1):
        idx = (T.lo[:, a] * G_parent) // T.den[a]
        mask &= idx == idx[v]
    return np.nonzero(mask)[0]


@dataclass
class FiberCertificate:
    v: int
    R: int
    Rprime: int | None
    h: int | None
    fibers: np.ndarray
    copy_size: int = 0
    copy_in_ball: bool = False
    crossing: int = 0
    regime_ok: bool = False
    note: str = ""

    @property
    def fiber_count(self) -> int:
        return len(self.fibers)


def annulus_path_certificate(
    T: Tiling, G: Graph, fam: FiberFamily, v: int, R: int, Rprime: int | None = None
) -> FiberCertificate:
    """Disjoint fibers through the copy of T_{gamma^h} containing ``v``.

    Each returned fiber meets B(v, R) (checked by BFS) and, when ``Rprime`` is
    given, the number of them that also reach distance ``Rprime`` is counted;
    those are vertex-disjoint S(v,R) -> S(v,R') connections.
    """
    if T.provenance is None:
        raise ParameterError("certificate needs a tiling with (gamma, n) provenance")
    gamma, n = T.provenance
    gamma = as_gamma(gamma)
    d, b = T.dim, gamma.b
    h = scale_index(R, d, b)
    if h is None:
        return FiberCertificate(v, R, Rprime, None, np.zeros(0, np.int64), note=f"R={R} < d+1={d + 1}: no scale available")
    h = min(h, n)
    members = copy_members(T, v, h)
    fibers = np.unique(fam.fiber_of[members])
    limit = max(R, Rprime or 0)
    dist = bfs_distances(G, [v], limit=limit)
    in_ball = bool(np.all((dist[members] >= 0) & (dist[members] <= R)))
    crossing = 0
    regime = False
    if Rprime is not None:
        # reaching distance >= R' means some member is unreached at limit R'-1 or at R'
        far = (dist < 0) | (dist >= Rprime)
        fiber_far = np.zeros(len(fam), dtype=bool)
        fiber_far[fam.fiber_of[far]] = True
        fiber_near = np.zeros(len(fam), dtype=bool)
        fiber_near[fam.fiber_of[(dist >= 0) & (dist <= R)]] = True
        crossing = int(np.count_nonzero(fiber_far[fibers] & fiber_near[fibers]))
        regime = 2 * Rprime < 1 / T.max_side() - 1
    return FiberCertificate(v, R, Rprime, h, fibers, len(members), in_ball, crossing, regime)


@dataclass
class CutCertificate:
    source_size: int
    sink_size: int
    path_count: int
    min_cut: np.ndarray
    cut_separates: bool
    paths: list[list[int]] | None = None

    @property
    def menger_ok(self) -> bool:
        return self.path_count == len(self.min_cut) and self.cut_separates


def _flow_network(G: Graph, sources, sinks, uncuttable=None):
    n = G.n
    big = n + 1
    cap_v = np.ones(n, dtype=np.int32)
    if uncuttable is not None:
        cap_v[np.asarray(uncuttable, dtype=np.int64)] = big
    s, t = 2 * n, 2 * n + 1
    e = G.edges.astype(np.int64)
    src = np.concatenate([2 * np.arange(n), 2 * e[:, 0] + 1, 2 * e[:, 1] + 1,
                          np.full(len(sources), s), 2 * sinks + 1])
    dst = np.concatenate([2 * np.arange(n) + 1, 2 * e[:, 1], 2 * e[:, 0],
                          2 * sources, np.full(len(sinks), t)])
    cap = np.concatenate([cap_v, np.full(2 * len(e) + len(sources) + len(sinks), big, dtype=np.int32)])
    C = sp.csr_matrix((cap.astype(np.int32), (src, dst)), shape=(2 * n + 2, 2 * n + 2))
    return C, s, t


def _separates(G: Graph, removed: np.ndarray, sources: np.ndarray, sinks: np.ndarray) -> bool:
    alive = np.ones(G.n, dtype=bool)
    alive[removed] = False
    starts = sources[alive[sources]]
    if len(starts) == 0:
        return True
    sub, ids = G.induced(np.nonzero(alive)[0])
    pos = np.full(G.n, -1, dtype=np.int64)
    pos[ids] = np.arange(len(ids))
    dist = bfs_distances(sub, pos[starts])
    targets = pos[sinks[alive[sinks]]]
    return bool(np.all(dist[targets] < 0))


def _max_vertex_flow(G: Graph, sources, sinks, uncuttable=None, return_paths=False, guard=FLOW_GUARD):
    sources = np.unique(np.asarray(sources, dtype=np.int64))
    sinks = np.unique(np.asarray(sinks, dtype=np.int64))
    if G.n > guard:
        raise BudgetExceededError("flow graph vertices", G.n, guard)
    if len(np.intersect1d(sources, sinks)):
        raise ParameterError("source and sink sets overlap")
    if len(sources) == 0 or len(sinks) == 0:
        return CutCertificate(len(sources), len(sinks), 0, np.zeros(0, np.int64), True, [] if return_paths else None)
    C, s, t = _flow_network(G, sources, sinks, uncuttable)
    res = maximum_flow(C, s, t, method="dinic")
    F = res.flow.tocsr()
    resid = (C - F).tocsr()
    resid.data[resid.data < 0] = 0
    resid.eliminate_zeros()
    reach = np.zeros(C.shape[0], dtype=bool)
    reach[breadth_first_order(resid, s, directed=True, return_predecessors=False)] = True
    x = np.arange(G.n)
    cut = x[reach[2 * x] & ~reach[2 * x + 1]]
    separates = _separates(G, cut, sources, sinks)
    paths = _extract_paths(F, G.n, s, t) if return_paths else None
    return CutCertificate(len(sources), len(sinks), int(res.flow_value), cut, separates, paths)


def _extract_paths(F: sp.csr_matrix, n: int, s: int, t: int) -> list[list[int]]:
    F = F.tocsr()
    nxt = {}
    for a in range(F.shape[0]):
        row = slice(F.indptr[a], F.indptr[a + 1])
        for b, f in zip(F.indices[row], F.data[row]):
            if f > 0:
                nxt.setdefault(a, []).append(int(b))
    paths = []
    for first in sorted(nxt.get(s, [])):
        path, node = [], first
        while node != t:
            if node % 2 == 0:
                path.append(node // 2)
                node = node + 1
            else:
                node = nxt[node].pop(0)
        paths.append(path)
    return paths


def disjoint_path_count(G: Graph, S1, S2, return_paths: bool = False, guard: int = FLOW_GUARD) -> CutCertificate:
    """Maximum number of fully vertex-disjoint S1 -> S2 paths, with a minimum
    vertex cut (which may contain terminals) and the Menger self-check."""
    return _max_vertex_flow(G, S1, S2, return_paths=return_paths, guard=guard)


def _annulus(G: Graph, v: int, R: int, Rprime: int):
    dist = bfs_distances(G, [v], limit=Rprime)
    keep = np.nonzero((dist >= R) & (dist <= Rprime))[0]
    sub, ids = G.induced(keep)
    d_sub = dist[ids]
    return sub, ids, np.nonzero(d_sub == R)[0], np.nonzero(d_sub == Rprime)[0], dist


def annulus_flow(G: Graph, v: int, R: int, Rprime: int, return_paths: bool = False,
                 guard: int = FLOW_GUARD) -> CutCertificate:
    """Vertex-disjoint S(v,R) -> S(v,R') paths, solved inside the annulus.

    Any such path contains a sub-path whose interior stays strictly between
    the two spheres, so restricting to R <= d(v, .) <= R' loses nothing.
    """
    if not 0 <= R < Rprime:
        raise ParameterError("need 0 <= R < R'")
    sub, ids, s1, s2, _ = _annulus(G, v, R, Rprime)
    cert = _max_vertex_flow(sub, s1, s2, return_paths=return_paths, guard=guard)
    cert.min_cut = ids[cert.min_cut]
    if cert.paths is not None:
        cert.paths = [[int(ids[x]) for x in p] for p in cert.paths]
    return cert


@dataclass
class AnnularSeparator:
    v: int
    R: int
    Rprime: int
    vertices: np.ndarray
    sphere_bound: int
    separates: bool

    @property
    def size(self) -> int:
        return len(self.vertices)


def min_annular_separator(G: Graph, v: int, R: int, Rprime: int, guard: int = FLOW_GUARD) -> AnnularSeparator:
    """Smallest U inside B(v,R') minus B(v,R) separating S(v,R) from S(v,R')."""
    if not 1 <= R < Rprime:
        raise ParameterError("need 1 <= R < R'")
    sub, ids, s1, s2, dist = _annulus(G, v, R, Rprime)
    if len(s2) == 0:
        return AnnularSeparator(v, R, Rprime, np.zeros(0, np.int64), 0, True)
    cert = _max_vertex_flow(sub, s1, s2, uncuttable=s1, guard=guard)
    sphere_sizes = [int(np.count_nonzero(dist == r)) for r in range(R + 1, Rprime + 1)]
    return AnnularSeparator(v, R, Rprime, ids[cert.min_cut], min(sphere_sizes), cert.cut_separates)


@dataclass
class SeparatorRow:
    v: int
    R: int
    Rprime: int
    h: int | None
    fiber_count: int
    expected_fibers: int | None
    crossing: int
    flow_count: int
    cut_size: int
    menger_ok: bool
    regime_ok: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def separator_sweep(T: Tiling, G: Graph, fam: FiberFamily, vertices, radii, gap: int = 2,
                    guard: int = FLOW_GUARD) -> list[SeparatorRow]:
    """Fiber certificates and exact flow counts for every (v, R) with R' = R + gap."""
    gamma, _ = T.provenance
    base_count = size_formula(gamma, T.dim - 1) if T.dim >= 3 else None
    rows = []
    for v in vertices:
        for R in radii:
            Rp = R + gap
            cert = annulus_path_certificate(T, G, fam, int(v), int(R), Rp)
            flow = annulus_flow(G, int(v), int(R), Rp, guard=guard)
            expected = base_count ** cert.h if (cert.h is not None and base_count) else None
            rows.append(SeparatorRow(
                int(v), int(R), Rp, cert.h, cert.fiber_count, expected, cert.crossing,
                flow.path_count, len(flow.min_cut), flow.menger_ok, cert.regime_ok,
            ))
    return rows
