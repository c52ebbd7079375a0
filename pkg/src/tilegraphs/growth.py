"""BFS metric machinery on tangency graphs and empirical volume-growth checks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError, DisconnectedGraphError, ParameterError
from .graph import Graph, bfs_distances
from .tangency import alpha_stats, build_tangency_graph
from .tiling import DEFAULT_TILE_BUDGET, Tiling, as_gamma, size_formula, tile_product

EXACT_DIAMETER_GUARD = 10**5
EXHAUSTIVE_SAMPLE_LIMIT = 10**4


def ball(G: Graph, v: int, R: int) -> np.ndarray:
    """Sorted ids of vertices within hop distance ``R`` of ``v``."""
    if R < 0:
        raise ParameterError("radius must be non-negative")
    dist = bfs_distances(G, [v], limit=R)
    return np.nonzero(dist >= 0)[0]


def sphere(G: Graph, v: int, R: int) -> np.ndarray:
    """Sorted ids of vertices at hop distance exactly ``R`` from ``v``."""
    if R < 0:
        raise ParameterError("radius must be non-negative")
    dist = bfs_distances(G, [v], limit=R)
    return np.nonzero(dist == R)[0]


def eccentricity(G: Graph, v: int) -> int:
    dist = bfs_distances(G, [v])
    if np.any(dist < 0):
        raise DisconnectedGraphError("graph is disconnected")
    return int(dist.max())


@dataclass(frozen=True)
class DiameterResult:
    lower: int
    upper: int
    bfs_runs: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> int:
        if not self.exact:
            raise ValueError(f"diameter only bracketed in [{self.lower}, {self.upper}]")
        return self.lower


def diameter(G: Graph, exact_guard: int = EXACT_DIAMETER_GUARD, max_bfs: int = 2000) -> DiameterResult:
    """Exact diameter from per-vertex eccentricity bounds, or a certified bracket.

    After a BFS from ``v`` every vertex ``w`` satisfies
    ``max(d(v,w), ecc(v) - d(v,w)) <= ecc(w) <= ecc(v) + d(v,w)``.  Sources
    alternate between the vertex with the largest upper bound and the one with
    the smallest lower bound until the largest upper bound meets the largest
    lower bound.  Graphs up to ``exact_guard`` vertices always run to
    completion; larger ones stop after ``max_bfs`` BFS runs and report
    ``[max lower bound, max upper bound]``, both certified.
    """
    if G.n == 0:
        raise ParameterError("empty graph")
    if G.n == 1:
        return DiameterResult(0, 0, 0)
    big = np.iinfo(np.int32).max
    ecc_lo = np.zeros(G.n, dtype=np.int32)
    ecc_hi = np.full(G.n, big, dtype=np.int32)
    done = np.zeros(G.n, dtype=bool)
    deg = G.degrees
    runs = 0
    v = int(np.argmax(deg))
    pick_high = True
    while True:
        dist = bfs_distances(G, [v])
        runs += 1
        if runs == 1 and np.any(dist < 0):
            raise DisconnectedGraphError("diameter of a disconnected graph is infinite")
        e = int(dist.max())
        done[v] = True
        np.maximum(ecc_lo, np.maximum(dist, e - dist), out=ecc_lo)
        np.minimum(ecc_hi, e + dist, out=ecc_hi)
        ecc_lo[v] = ecc_hi[v] = e
        lb, ub = int(ecc_lo.max()), int(ecc_hi.max())
        if lb >= ub:
            return DiameterResult(lb, lb, runs)
        if G.n > exact_guard and runs >= max_bfs:
            return DiameterResult(lb, ub, runs)
        # only vertices whose upper bound exceeds lb can still matter
        open_ = (~done) & (ecc_hi > lb)
        cand = np.nonzero(open_)[0]
        if pick_high:
            scores = ecc_hi[cand].astype(np.int64) * (G.n + 1) + deg[cand]
            v = int(cand[np.argmax(scores)])
        else:
            pool = np.nonzero(~done)[0]
            scores = ecc_lo[pool].astype(np.int64) * (G.n + 1) - deg[pool]
            v = int(pool[np.argmin(scores)])
        pick_high = not pick_high


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def sample_vertices(n: int, count: int, seed: int, exhaustive_limit: int = EXHAUSTIVE_SAMPLE_LIMIT) -> np.ndarray:
    """Fixed-seed uniform sample of distinct vertex ids (all ids for small graphs)."""
    if n <= exhaustive_limit or count >= n:
        return np.arange(n, dtype=np.int64)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=count, replace=False)).astype(np.int64)


def ball_sizes(G: Graph, vertices: Iterable[int], radii: Sequence[int], threads: int = 1) -> np.ndarray:
    """Matrix of |B(v, R)| with one row per vertex and one column per radius."""
    radii = [int(r) for r in radii]
    rmax = max(radii)

    def one(v):
        dist = bfs_distances(G, [int(v)], limit=rmax)
        reached = dist[dist >= 0]
        counts = np.bincount(reached, minlength=rmax + 1).cumsum()
        return [int(counts[r]) for r in radii]

    return np.array(_map(one, list(vertices), threads), dtype=np.int64).reshape(-1, len(radii))


def ols_slope(x: np.ndarray, y: np.ndarray) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0:
        raise ParameterError("slope fit needs at least two distinct radii")
    return float(np.dot(xc, y - y.mean()) / denom)


def sandwich_constant(radii, sizes: np.ndarray, k: float) -> float:
    """Smallest C with C^-1 R^k <= |B| <= C R^k over every row."""
    rk = np.power(np.asarray(radii, dtype=float), k)[None, :]
    s = sizes.astype(float)
    return float(max((s / rk).max(), (rk / s).max()))


@dataclass
class GrowthProfile:
    vertices: np.ndarray
    radii: tuple[int, ...]
    sizes: np.ndarray
    fitted_k: float
    slope_min: float
    slope_max: float
    k_theory: float | None = None
    sandwich_C: float | None = None
    diam_bounds: tuple[int, int] | None = None

    def rows(self) -> list[tuple[int, int, int]]:
        return [
            (int(v), int(r), int(self.sizes[i, j]))
            for i, v in enumerate(self.vertices)
            for j, r in enumerate(self.radii)
        ]

    def summary(self) -> dict:
        return {
            "k_theory": self.k_theory,
            "k_fit": self.fitted_k,
            "k_fit_min": self.slope_min,
            "k_fit_max": self.slope_max,
            "C_sandwich": self.sandwich_C,
            "diam_bounds": list(self.diam_bounds) if self.diam_bounds else None,
            "samples": int(len(self.vertices)),
            "radii": list(self.radii),
        }


def growth_profile(
    G: Graph,
    radii: Sequence[int],
    sample_count: int = 64,
    seed: int = 0,
    k_theory: float | None = None,
    threads: int = 1,
    exhaustive_limit: int = EXHAUSTIVE_SAMPLE_LIMIT,
    diam: DiameterResult | None = None,
) -> GrowthProfile:
    """Ball sizes at the given radii for seeded sample vertices, with a pooled
    least-squares slope of log|B| against log R and, if ``k_theory`` is given,
    the sandwich constant at that exponent."""
    if G.n < 2:
        raise ParameterError("growth profile undefined for graphs with fewer than two vertices")
    radii = tuple(sorted({int(r) for r in radii}))
    if len(radii) < 2:
        raise ParameterError("need at least two distinct radii")
    diam = diam or diameter(G)
    if radii[0] < 1 or radii[-1] > diam.upper:
        raise ParameterError(f"radii must lie in [1, diam]; diam <= {diam.upper}, got {radii}")
    verts = sample_vertices(G.n, sample_count, seed, exhaustive_limit)
    sizes = ball_sizes(G, verts, radii, threads)
    logr = np.log(np.asarray(radii, dtype=float))
    logs = np.log(sizes.astype(float))
    pooled = ols_slope(np.tile(logr, len(verts)), logs.ravel())
    per_vertex = [ols_slope(logr, row) for row in logs]
    C = sandwich_constant(radii, sizes, k_theory) if k_theory is not None else None
    return GrowthProfile(
        vertices=verts,
        radii=radii,
        sizes=sizes,
        fitted_k=pooled,
        slope_min=float(min(per_vertex)),
        slope_max=float(max(per_vertex)),
        k_theory=k_theory,
        sandwich_C=C,
        diam_bounds=(diam.lower, diam.upper),
    )


@dataclass
class IngredientCheck:
    ok: bool
    radius: Fraction | int
    bound: int | Fraction
    worst: int
    witness: int | None
    details: list[tuple] = field(default_factory=list)


def check_lower_ingredient(
    G: Graph, gamma, d: int, n: int, vertices: Iterable[int], threads: int = 1
) -> IngredientCheck:
    """|B(v, (d+1) b^j)| >= (|gamma|^(d))^j for j = 0..n at every given vertex."""
    gamma = as_gamma(gamma)
    b, size = gamma.b, size_formula(gamma, d)
    radii = [(d + 1) * b**j for j in range(n + 1)]
    verts = list(vertices)
    sizes = ball_sizes(G, verts, radii, threads)
    need = np.array([size**j for j in range(n + 1)], dtype=object)
    ok, witness, details = True, None, []
    for i, v in enumerate(verts):
        for j in range(n + 1):
            if sizes[i, j] < need[j]:
                ok = False
                witness = int(v)
                details.append((int(v), j, int(sizes[i, j]), int(need[j])))
    return IngredientCheck(ok, radii[-1], int(need[-1]), int(sizes.min()), witness, details)


def check_contract_lower_bound(
    S: Tiling, T: Tiling, vertices: Iterable[int] | None = None, threads: int = 1,
    budget: int = DEFAULT_TILE_BUDGET,
) -> IngredientCheck:
    """|B_G(X, diam G(T))| >= |T| in G = G(S o T)."""
    if len(S) * len(T) > budget:
        raise BudgetExceededError("product tiling", len(S) * len(T), budget)
    G = build_tangency_graph(tile_product(S, T, validate=False))
    r = diameter(build_tangency_graph(T)).value
    verts = list(range(G.n)) if vertices is None else list(vertices)
    sizes = ball_sizes(G, verts, [max(r, 0)], threads)[:, 0]
    bad = np.nonzero(sizes < len(T))[0]
    return IngredientCheck(
        ok=len(bad) == 0,
        radius=r,
        bound=len(T),
        worst=int(sizes.min()),
        witness=int(verts[bad[0]]) if len(bad) else None,
    )


def check_growth_upper_ingredient(
    S: Tiling, T: Tiling, vertices: Iterable[int] | None = None, threads: int = 1,
    budget: int = DEFAULT_TILE_BUDGET,
) -> IngredientCheck:
    """|B_G(X, 1/(alpha_S^(2d) L_T))| <= (3 alpha_S^2)^(d^2) (d+1) |T| in G = G(S o T)."""
    if len(S) * len(T) > budget:
        raise BudgetExceededError("product tiling", len(S) * len(T), budget)
    d = S.dim
    alpha_S = alpha_stats(S, build_tangency_graph(S)).alpha
    radius = 1 / (alpha_S ** (2 * d) * T.max_side())
    bound = (3 * alpha_S**2) ** (d * d) * (d + 1) * len(T)
    G = build_tangency_graph(tile_product(S, T, validate=False))
    verts = list(range(G.n)) if vertices is None else list(vertices)
    hops = math.floor(radius)
    sizes = ball_sizes(G, verts, [hops], threads)[:, 0]
    bad = np.nonzero(sizes > bound)[0]
    return IngredientCheck(
        ok=len(bad) == 0,
        radius=radius,
        bound=bound,
        worst=int(sizes.max()),
        witness=int(verts[bad[0]]) if len(bad) else None,
    )
