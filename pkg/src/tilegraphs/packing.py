"""Neat cube packings from layered tilings and the star-of-spheres realisation of
their subdivided tangency graphs as sphere packings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .boxjoin import concat_ranges
from .errors import BudgetExceededError, InvariantError, ParameterError, ValidationError
from .graph import Graph, subdivide
from .tangency import TangencyGraph, _max_ratio, build_tangency_graph
from .tiling import (
    DEFAULT_TILE_BUDGET,
    Tiling,
    _lcm,
    as_gamma,
    overlapping_pairs,
    power_tiling,
    size_formula,
    tensor_power,
)

HUB, CHAIN, LEAF = 0, 1, 2
ROLE_NAMES = {HUB: "hub", CHAIN: "chain", LEAF: "leaf"}
REAL = np.longdouble


class PackingRefusedError(ValidationError):
    pass


class StarPreconditionError(ValidationError):
    def __init__(self, message: str, witnesses: list):
        super().__init__(message)
        self.witnesses = witnesses


@dataclass(eq=False)
class CubePacking:
    """Axis-parallel cubes with exact coordinates (a :class:`Tiling` whose boxes
    are cubes and whose axes share one denominator)."""

    cubes: Tiling
    graph: TangencyGraph
    neat: bool
    aspect: Fraction
    gamma: object = None
    n: int | None = None

    def __len__(self) -> int:
        return len(self.cubes)

    @property
    def den(self) -> int:
        return self.cubes.den[0]

    def side(self, i: int) -> Fraction:
        return Fraction(int(self.cubes.ell[i, 0]), self.den)

    @classmethod
    def from_cubes(cls, corners, sides) -> "CubePacking":
        corners = [[Fraction(x) for x in c] for c in corners]
        sides = [Fraction(s) for s in sides]
        d = len(corners[0])
        den = _lcm([x.denominator for c in corners for x in c] + [s.denominator for s in sides])
        lo = np.array([[int(x * den) for x in c] for c in corners], dtype=np.int64).reshape(-1, d)
        ell = np.array([[int(s * den)] * d for s in sides], dtype=np.int64).reshape(-1, d)
        T = Tiling(lo, ell, (den,) * d)
        return _finish_packing(T, None, None)


def _aspect(T: Tiling, G: TangencyGraph) -> Fraction:
    if G.num_edges == 0:
        return Fraction(1)
    e = G.edges.astype(np.int64)
    a, b = T.ell[e[:, 0], 0], T.ell[e[:, 1], 0]
    return max(_max_ratio(a, b), _max_ratio(b, a))


def _finish_packing(T: Tiling, gamma, n, graph=None) -> CubePacking:
    if len(set(T.den)) != 1 or np.any(T.ell != T.ell[:, :1]):
        raise ValidationError("every box of a cube packing must be a cube")
    G = graph if graph is not None else build_tangency_graph(T, require_connected=False)
    C = CubePacking(T, G, False, _aspect(T, G), gamma, n)
    C.neat = check_neat(C).ok
    return C


def cube_packing(gamma, n: int, d: int, strict: bool = True, verify: bool = True,
                 budget: int = DEFAULT_TILE_BUDGET) -> CubePacking:
    """Rescale T_{gamma^n} so every tile becomes a cube.

    Layer i of gamma^n holds cubes of side b^n / g_i, so the horizontal extent is
    [0, b^n]^(d-1) and the total height is H(gamma^n).  Cube j corresponds to
    tile j of the layered tiling; with ``verify`` the two tangency graphs are
    compared edge by edge, including edge directions.
    """
    gamma = as_gamma(gamma)
    if strict and not (gamma.integral_ratios and gamma.boundary_equal):
        bad = [
            (i + 1, x, y) for i, (x, y) in enumerate(zip(gamma.entries, gamma.entries[1:]))
            if max(x, y) % min(x, y)
        ]
        raise PackingRefusedError(
            f"gamma {gamma} admits no neat packing: non-integral neighbour ratios at {bad}"
            if bad else f"gamma {gamma} has unequal end entries"
        )
    if n < 0:
        raise ParameterError("power must be non-negative")
    required = size_formula(gamma, d) ** n
    if required > budget:
        raise BudgetExceededError("cube packing", required, budget)
    g = list(tensor_power(gamma, n).entries) if n > 0 else [1]
    scale = gamma.b ** n
    D = _lcm(g)
    los, ells = [], []
    z = 0
    for gi in g:
        side = scale * D // gi
        grid = np.meshgrid(*[np.arange(gi, dtype=np.int64) * side] * (d - 1), indexing="ij")
        lo = np.stack([a.ravel() for a in grid] + [np.full(gi ** (d - 1), z, dtype=np.int64)], axis=1)
        los.append(lo)
        ells.append(np.full_like(lo, side))
        z += side
    T = Tiling(np.concatenate(los), np.concatenate(ells), (D,) * d).canonical()
    graph = build_tangency_graph(T)
    if verify:
        ref = build_tangency_graph(power_tiling(d, gamma, n, budget))
        same = (
            ref.n == graph.n
            and np.array_equal(ref.edges, graph.edges)
            and np.array_equal(ref.edge_dir, graph.edge_dir)
        )
        if not same:
            raise InvariantError("cube packing tangency graph differs from the tiling's")
    return _finish_packing(T, gamma, n, graph)


@dataclass
class NeatReport:
    ok: bool
    overlaps: np.ndarray
    violations: np.ndarray

    def witnesses(self, limit: int = 5) -> list[str]:
        out = [f"cubes {a} and {b} overlap in their interiors" for a, b in self.overlaps[:limit].tolist()]
        out += [f"tangent cubes {a} and {b}: neither facet inside the contact" for a, b in self.violations[:limit].tolist()]
        return out


def _containment(T: Tiling, G: TangencyGraph) -> tuple[np.ndarray, np.ndarray]:
    """For every edge: is u's touching facet inside v's, and vice versa."""
    e = G.edges.astype(np.int64)
    u_in_v = np.ones(len(e), dtype=bool)
    v_in_u = np.ones(len(e), dtype=bool)
    lo, hi = T.lo, T.hi
    for axis in range(T.dim):
        sel = G.edge_dir == axis
        u, v = e[sel, 0], e[sel, 1]
        for a in range(T.dim):
            if a == axis:
                continue
            u_in_v[sel] &= (lo[v, a] <= lo[u, a]) & (hi[u, a] <= hi[v, a])
            v_in_u[sel] &= (lo[u, a] <= lo[v, a]) & (hi[v, a] <= hi[u, a])
    return u_in_v, v_in_u


def check_neat(C: CubePacking) -> NeatReport:
    """Exact check that all cubes are interior-disjoint and every tangent pair
    has one touching facet contained in the other."""
    overlaps = overlapping_pairs(C.cubes)
    u_in_v, v_in_u = _containment(C.cubes, C.graph)
    bad = C.graph.edges[~(u_in_v | v_in_u)]
    return NeatReport(len(overlaps) == 0 and len(bad) == 0, overlaps, bad)


def contact_points(C: CubePacking) -> tuple[np.ndarray, int]:
    """Centre of mass of A and B's intersection for every tangent pair.

    Returns integer numerators (E, d) over the returned denominator.
    """
    T, G = C.cubes, C.graph
    e = G.edges.astype(np.int64)
    u, v = e[:, 0], e[:, 1]
    u_in_v, _ = _containment(T, G)
    small = np.where(u_in_v, u, v)
    pts = 2 * T.lo[small] + T.ell[small]
    axis = G.edge_dir.astype(np.int64)
    rows = np.arange(len(e))
    plane = np.where(T.hi[u, axis] == T.lo[v, axis], T.hi[u, axis], T.hi[v, axis])
    pts[rows, axis] = 2 * plane
    return pts, 2 * C.den


def _exact(arr: np.ndarray) -> np.ndarray:
    if arr.size and int(np.max(np.abs(arr))) > 2**20:
        return arr.astype(object)
    return arr


def _check_points(lo, side, pts, eps: Fraction, inclusive: bool, owner) -> list[str]:
    """Exact preconditions on contact points, all inputs over one denominator.

    ``lo`` (P, d), ``side`` (P,), ``pts`` (P, d) describe the cube owning each
    point; ``owner`` groups points by cube for the pairwise distance check.
    """
    lo, side, pts = _exact(lo), _exact(side), _exact(pts)
    en, ed = eps.numerator, eps.denominator
    d = pts.shape[1]
    dist = np.concatenate([pts - lo, lo + side[:, None] - pts], axis=1)
    far = dist * ed >= en * side[:, None] if inclusive else dist * ed > en * side[:, None]
    on = dist == 0
    good = (np.sum(on, axis=1) == 1) & (np.sum(far, axis=1) == 2 * d - 1) & np.all(dist >= 0, axis=1)
    problems = [f"point {i} of cube {owner[i]} is not in the eps-boundary" for i in np.nonzero(~good)[0][:5]]
    order = np.argsort(owner, kind="stable")
    counts = np.bincount(owner) if len(owner) else np.zeros(0, np.int64)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]]) if len(counts) else counts
    rank_start = starts[owner[order]]
    a = np.repeat(order, counts[owner[order]])
    b = order[concat_ranges(rank_start, counts[owner[order]])]
    keep = a < b
    a, b = a[keep], b[keep]
    if len(a):
        diff = pts[a] - pts[b]
        sq = np.sum(diff * diff, axis=1)
        close = sq * ed * ed < en * en * side[a] * side[a]
        problems += [f"points {i} and {j} of cube {owner[i]} closer than eps*side" for i, j in zip(a[close][:5], b[close][:5])]
    return problems


def _star_geometry(lo, side, pts, normal, eps, k: int):
    """Chain and leaf spheres for every (cube, contact point) row, in extended precision."""
    lo, side, pts, normal = (np.asarray(x, dtype=REAL) for x in (lo, side, pts, normal))
    eps = REAL(eps.numerator) / REAL(eps.denominator)
    c0 = lo + side[:, None] / 2
    leaf_r = eps * side / 8
    cp = pts + normal * leaf_r[:, None]
    vec = cp - c0
    length = np.sqrt(np.sum(vec * vec, axis=1))
    u = vec / length[:, None]
    z = c0 + u * (side / 4)[:, None]
    r = (length - side / 4 - leaf_r) / (2 * k)
    steps = (2 * np.arange(1, k + 1, dtype=REAL) - 1)[None, :] * r[:, None]
    chain = z[:, None, :] + u[:, None, :] * steps[:, :, None]
    return chain, r, cp, leaf_r


def _normals(lo, side, pts) -> np.ndarray:
    low = pts == lo
    high = pts == lo + side[:, None]
    return low.astype(np.int64) - high.astype(np.int64)


def chain_length(d: int, eps: Fraction) -> int:
    """k = ceil(6d / eps)."""
    q = Fraction(6 * d) / eps
    return -(-q.numerator // q.denominator)


@dataclass(eq=False)
class SphereSet:
    """Spheres as parallel arrays.  ``index`` is the chain position (1..k) for
    chain spheres; ``contact`` identifies the contact point (or -1 for hubs)."""

    centers: np.ndarray
    radii: np.ndarray
    cube: np.ndarray
    role: np.ndarray
    index: np.ndarray
    contact: np.ndarray

    def __len__(self) -> int:
        return len(self.radii)

    def tag(self, i: int) -> str:
        role = ROLE_NAMES[int(self.role[i])]
        extra = f"[{int(self.index[i])}]" if self.role[i] == CHAIN else ""
        where = f" @contact {int(self.contact[i])}" if self.role[i] != HUB else ""
        return f"sphere {i} (cube {int(self.cube[i])}, {role}{extra}{where})"


@dataclass
class Sphere:
    center: np.ndarray
    radius: REAL
    cube: int
    role: str
    index: int
    contact: int


@dataclass(eq=False)
class SpherePacking(SphereSet):
    expected: Graph | None = None
    cube_lo: np.ndarray | None = None
    cube_side: np.ndarray | None = None
    alpha: Fraction = Fraction(1)
    eps: Fraction = Fraction(1, 2)
    k: int = 0
    m: int = 1
    params: dict = field(default_factory=dict)

    def sphere(self, i: int) -> Sphere:
        return Sphere(self.centers[i], self.radii[i], int(self.cube[i]), ROLE_NAMES[int(self.role[i])],
                      int(self.index[i]), int(self.contact[i]))


def star_spheres(corner, side, points, eps, inclusive: bool = True) -> SphereSet:
    """Hub, chains and leaves inside one cube for the given contact points.

    All preconditions are checked exactly; ``inclusive`` accepts points at
    distance exactly eps*side from a second facet.
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ParameterError("eps must lie in (0, 1/2)")
    corner = [Fraction(x) for x in corner]
    side = Fraction(side)
    d = len(corner)
    points = [[Fraction(x) for x in p] for p in points]
    den = _lcm([x.denominator for x in corner] + [side.denominator] + [x.denominator for p in points for x in p])
    P = len(points)
    lo = np.tile(np.array([int(x * den) for x in corner], dtype=np.int64), (P, 1))
    sd = np.full(P, int(side * den), dtype=np.int64)
    pts = np.array([[int(x * den) for x in p] for p in points], dtype=np.int64).reshape(P, d)
    problems = _check_points(lo, sd, pts, eps, inclusive, np.zeros(P, dtype=np.int64))
    if problems:
        raise StarPreconditionError("; ".join(problems), problems)
    k = chain_length(d, eps)
    scale = REAL(1) / REAL(den)
    hub_c = (np.array([int(x * den) for x in corner], dtype=REAL) + REAL(int(side * den)) / 2) * scale
    centers = [hub_c[None, :]]
    radii = [np.array([REAL(int(side * den)) / 4 * scale], dtype=REAL)]
    role, index, contact = [HUB], [0], [-1]
    if P:
        chain, r, leaf_c, leaf_r = _star_geometry(lo * scale, sd * scale, pts * scale, _normals(lo, sd, pts), eps, k)
        for p in range(P):
            centers += [chain[p], leaf_c[p][None, :]]
            radii += [np.full(k, r[p], dtype=REAL), np.array([leaf_r[p]], dtype=REAL)]
            role += [CHAIN] * k + [LEAF]
            index += list(range(1, k + 1)) + [0]
            contact += [p] * (k + 1)
    n = len(role)
    return SphereSet(np.concatenate(centers).astype(REAL), np.concatenate(radii), np.zeros(n, np.int64),
                     np.array(role, np.int8), np.array(index, np.int64), np.array(contact, np.int64))


def sphere_pack(C: CubePacking, alpha=None, inclusive: bool = True) -> SpherePacking:
    """Replace every cube by a star of spheres with eps = 1/(2 alpha).

    Sphere ids follow :func:`subdivide` with m = 2k + 3: hubs keep the cube ids
    and edge e = (u, v) owns ids n + e(m-1) .. n + e(m-1) + m - 2, running
    chain(u), leaf(u), leaf(v), chain(v) from u to v.
    """
    report = check_neat(C)
    if not report.ok:
        raise ValidationError("cube packing is not neat: " + "; ".join(report.witnesses()))
    alpha = C.aspect if alpha is None else Fraction(alpha)
    if alpha < C.aspect:
        raise ParameterError(f"alpha {alpha} below packing aspect {C.aspect}")
    eps = 1 / (2 * alpha)
    T, G, d = C.cubes, C.graph, C.cubes.dim
    k = chain_length(d, eps)
    m = 2 * k + 3
    n, E = len(T), G.num_edges
    pts, den = contact_points(C)
    e = G.edges.astype(np.int64)
    cube = np.concatenate([e[:, 0], e[:, 1]])
    eid = np.concatenate([np.arange(E), np.arange(E)])
    end = np.concatenate([np.zeros(E, np.int64), np.ones(E, np.int64)])
    hp = np.concatenate([pts, pts])
    lo2, side2 = 2 * T.lo[cube], 2 * T.ell[cube, 0]
    problems = _check_points(lo2, side2, hp, eps, inclusive, cube)
    if problems:
        raise StarPreconditionError("; ".join(problems), problems)

    scale = REAL(1) / REAL(den)
    N = n + E * (m - 1)
    centers = np.empty((N, d), dtype=REAL)
    radii = np.empty(N, dtype=REAL)
    owner = np.empty(N, dtype=np.int64)
    role = np.empty(N, dtype=np.int8)
    index = np.zeros(N, dtype=np.int64)
    contact = np.full(N, -1, dtype=np.int64)

    cube_lo = T.lo.astype(REAL) / REAL(C.den)
    cube_side = T.ell[:, 0].astype(REAL) / REAL(C.den)
    centers[:n] = cube_lo + cube_side[:, None] / 2
    radii[:n] = cube_side / 4
    owner[:n] = np.arange(n)
    role[:n] = HUB

    chain, r, leaf_c, leaf_r = _star_geometry(lo2 * scale, side2 * scale, hp * scale, _normals(lo2, side2, hp), eps, k)
    base = n + eid * (m - 1)
    i = np.arange(1, k + 1)
    chain_ids = np.where(end[:, None] == 0, base[:, None] + i[None, :] - 1, base[:, None] + 2 * k + 2 - i[None, :])
    leaf_ids = base + k + end
    centers[chain_ids] = chain
    radii[chain_ids] = r[:, None]
    owner[chain_ids] = cube[:, None]
    role[chain_ids] = CHAIN
    index[chain_ids] = i[None, :]
    contact[chain_ids] = eid[:, None]
    centers[leaf_ids] = leaf_c
    radii[leaf_ids] = leaf_r
    owner[leaf_ids] = cube
    role[leaf_ids] = LEAF
    contact[leaf_ids] = eid
    expected = subdivide(Graph(G.n, G.edges), m)
    return SpherePacking(centers, radii, owner, role, index, contact, expected, cube_lo, cube_side,
                         alpha, eps, k, m, {"alpha": str(alpha), "eps": str(eps), "k": k, "m": m})


def _sweep_pairs(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All pairs of closed intervals that intersect."""
    order = np.argsort(lo, kind="stable")
    slo = lo[order]
    end = np.searchsorted(slo, hi[order], side="right")
    pos = np.arange(len(lo))
    counts = np.maximum(end - pos - 1, 0)
    a = np.repeat(order, counts)
    b = order[concat_ranges(pos + 1, counts)]
    return a, b


@dataclass
class PackingReport:
    ok: bool
    spheres: int
    realized_edges: int
    expected_edges: int
    overlaps: list[str]
    missing: list[str]
    extra: list[str]
    escaped: list[str]
    max_edge_gap: float
    min_nonedge_gap: float
    M_realized: float
    min_radius_rel: float
    edges: np.ndarray = field(repr=False, default=None)

    def summary(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "edges"}
        for key in ("overlaps", "missing", "extra", "escaped"):
            out[key] = out[key][:5]
        return out


def validate_packing(P: SpherePacking, rtol: float = 1e-9) -> PackingReport:
    """Geometric audit: pairwise gaps, realised tangencies against the claimed
    subdivision graph, containment in the owning cube and radius ratios.

    A pair counts as tangent when |dist - (r_i + r_j)| <= rtol (r_i + r_j).
    """
    c, r = P.centers, P.radii
    pad = r * REAL(1 + rtol)
    a, b = _sweep_pairs(np.asarray(c[:, 0] - pad, dtype=float), np.asarray(c[:, 0] + pad, dtype=float))
    for axis in range(1, c.shape[1]):
        keep = np.abs(c[a, axis] - c[b, axis]) <= pad[a] + pad[b]
        a, b = a[keep], b[keep]
    dist = np.sqrt(np.sum((c[a] - c[b]) ** 2, axis=1))
    rsum = r[a] + r[b]
    rel = (dist - rsum) / rsum
    touch = np.abs(rel) <= rtol
    inside = rel < -rtol
    overlaps = [f"{P.tag(i)} and {P.tag(j)} overlap (relative gap {float(g):.3e})"
                for i, j, g in zip(a[inside][:20], b[inside][:20], rel[inside][:20])]
    realized = Graph.from_edges(len(r), a[touch], b[touch]) if np.any(touch) else Graph(len(r), np.zeros((0, 2), np.int64))
    missing, extra = [], []
    if P.expected is not None:
        want, got = P.expected.edge_set(), realized.edge_set()
        missing = [f"{P.tag(i)} should touch {P.tag(j)}" for i, j in sorted(want - got)[:20]]
        extra = [f"{P.tag(i)} touches {P.tag(j)} unexpectedly" for i, j in sorted(got - want)[:20]]
    escaped = []
    rel_r = np.array([np.inf])
    if P.cube_lo is not None:
        lo, side = P.cube_lo[P.cube], P.cube_side[P.cube]
        slack = r[:, None] * REAL(rtol)
        out = np.any((c - r[:, None] < lo - slack) | (c + r[:, None] > lo + side[:, None] + slack), axis=1)
        escaped = [f"{P.tag(i)} leaves its cube" for i in np.nonzero(out)[0][:20]]
        rel_r = r / side
    e = realized.edges.astype(np.int64)
    ratio = np.maximum(r[e[:, 0]] / r[e[:, 1]], r[e[:, 1]] / r[e[:, 0]]) if len(e) else np.array([1.0])
    nonedge = rel[~touch & ~inside]
    ok = not (overlaps or missing or extra or escaped)
    return PackingReport(
        ok, len(r), realized.num_edges, P.expected.num_edges if P.expected is not None else -1,
        overlaps, missing, extra, escaped,
        float(np.max(np.abs(rel[touch]))) if np.any(touch) else 0.0,
        float(np.min(nonedge)) if len(nonedge) else math.inf,
        float(np.max(ratio)), float(np.min(rel_r)), e,
    )


def min_radius_by_cube(P: SpherePacking) -> np.ndarray:
    """Smallest sphere radius inside each cube, divided by that cube's side."""
    out = np.full(len(P.cube_side), np.inf, dtype=REAL)
    np.minimum.at(out, P.cube, P.radii / P.cube_side[P.cube])
    return out


def icosphere(level: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere: vertices (V, 3) and triangle faces (F, 3)."""
    t = (1 + math.sqrt(5)) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / math.sqrt(1 + t * t) for v in verts]
    for _ in range(level):
        mids: dict[tuple[int, int], int] = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in mids:
                p = verts[i] + verts[j]
                verts.append(p / np.linalg.norm(p))
                mids[key] = len(verts) - 1
            return mids[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(verts), np.array(faces, dtype=np.int64)


def sphere_mesh(P: SphereSet, level: int = 1) -> tuple[np.ndarray, np.ndarray]:
    if P.centers.shape[1] != 3:
        raise ParameterError("mesh export needs d = 3")
    V, F = icosphere(level)
    c = np.asarray(P.centers, dtype=float)
    r = np.asarray(P.radii, dtype=float)
    verts = (c[:, None, :] + r[:, None, None] * V[None, :, :]).reshape(-1, 3)
    faces = (F[None, :, :] + len(V) * np.arange(len(r))[:, None, None]).reshape(-1, 3)
    return verts, faces


_CUBE_FACES = np.array([
    (0, 2, 1), (1, 2, 3), (4, 5, 6), (5, 7, 6), (0, 1, 4), (1, 5, 4),
    (2, 6, 3), (3, 6, 7), (0, 4, 2), (2, 4, 6), (1, 3, 5), (3, 7, 5),
], dtype=np.int64)


def cube_mesh(C: CubePacking) -> tuple[np.ndarray, np.ndarray]:
    if C.cubes.dim != 3:
        raise ParameterError("mesh export needs d = 3")
    corners = np.array([[(i >> a) & 1 for a in range(3)] for i in range(8)], dtype=float)
    lo = C.cubes.lo.astype(float) / C.den
    side = C.cubes.ell[:, 0].astype(float) / C.den
    verts = (lo[:, None, :] + side[:, None, None] * corners[None, :, :]).reshape(-1, 3)
    faces = (_CUBE_FACES[None, :, :] + 8 * np.arange(len(lo))[:, None, None]).reshape(-1, 3)
    return verts, faces


def write_mesh(verts: np.ndarray, faces: np.ndarray, path) -> None:
    """ASCII PLY or OBJ, chosen by the file suffix."""
    path = str(path)
    with open(path, "w", newline="\n") as fh:
        if path.endswith(".obj"):
            np.savetxt(fh, verts, fmt="v %.12g %.12g %.12g")
            np.savetxt(fh, faces + 1, fmt="f %d %d %d")
        elif path.endswith(".ply"):
            fh.write(f"ply\nformat ascii 1.0\nelement vertex {len(verts)}\n"
                     "property double x\nproperty double y\nproperty double z\n"
                     f"element face {len(faces)}\nproperty list uchar int vertex_indices\nend_header\n")
            np.savetxt(fh, verts, fmt="%.12g")
            np.savetxt(fh, np.hstack([np.full((len(faces), 1), 3), faces]), fmt="%d")
        else:
            raise ParameterError(f"unknown mesh format for {path}")


def packing_to_json(P: SpherePacking, report: PackingReport | None = None) -> dict:
    """Spheres with their tags; tangencies carry the realised relative gap."""
    spheres = [
        {"center": [float(x) for x in P.centers[i]], "radius": float(P.radii[i]), "cube": int(P.cube[i]),
         "role": ROLE_NAMES[int(P.role[i])], "index": int(P.index[i]), "contact": int(P.contact[i])}
        for i in range(len(P))
    ]
    tangencies = []
    if report is not None and report.edges is not None and len(report.edges):
        e = report.edges
        c, r = P.centers, P.radii
        dist = np.sqrt(np.sum((c[e[:, 0]] - c[e[:, 1]]) ** 2, axis=1))
        gap = (dist - r[e[:, 0]] - r[e[:, 1]]).astype(float)
        tangencies = [[int(i), int(j), float(g)] for (i, j), g in zip(e.tolist(), gap)]
    return {"dim": int(P.centers.shape[1]), "params": P.params, "spheres": spheres, "tangencies": tangencies}


def cubes_to_json(C: CubePacking) -> dict:
    T = C.cubes
    return {
        "dim": T.dim,
        "den": C.den,
        "neat": C.neat,
        "aspect": str(C.aspect),
        "cubes": [[*map(int, T.lo[i]), int(T.ell[i, 0])] for i in range(len(T))],
        "edges": [[int(u), int(v), int(a) + 1] for (u, v), a in zip(C.graph.edges.tolist(), C.graph.edge_dir.tolist())],
    }
