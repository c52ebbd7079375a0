"""Certified finite windows into the infinite orthant graph built from the
nested cube packings of gamma^0, gamma^1, gamma^2, ..."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .boxjoin import group_ids
from .errors import BudgetExceededError, ParameterError
from .graph import Graph, bfs_distances
from .packing import CubePacking, cube_packing
from .tiling import DEFAULT_TILE_BUDGET, as_gamma, size_formula


def total_height(gamma) -> Fraction:
    """H(gamma) = b * sum(1 / gamma_i)."""
    gamma = as_gamma(gamma)
    return gamma.b * sum(Fraction(1, g) for g in gamma.entries)


@lru_cache(maxsize=8)
def _level(entries: tuple[int, ...], d: int, n: int, budget: int) -> CubePacking:
    return cube_packing(entries, n, d, strict=False, verify=False, budget=budget)


def level_packing(gamma, d: int, n: int, budget: int = DEFAULT_TILE_BUDGET) -> CubePacking:
    """Level-n cube packing; bottom cubes have side 1 and the corner sits at the origin.
    Cached and shared read-only between views."""
    return _level(as_gamma(gamma).entries, d, n, budget)


def _check_gamma(gamma):
    gamma = as_gamma(gamma)
    if not gamma.boundary_min:
        raise ParameterError(f"gamma {gamma} needs gamma_1 = gamma_b = b = min(gamma)")
    return gamma


def cube_box(C: CubePacking, v: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    T = C.cubes
    if not 0 <= v < len(T):
        raise ParameterError(f"tile {v} does not exist at this level")
    lo = tuple(Fraction(int(x), C.den) for x in T.lo[v])
    return lo, tuple(x + C.side(v) for x in lo)


def embed_ids(gamma, d: int, ids, from_level: int, to_level: int, budget: int = DEFAULT_TILE_BUDGET) -> np.ndarray:
    """Ids at ``to_level`` of the same cubes given by ``ids`` at ``from_level``."""
    if to_level < from_level:
        raise ParameterError("levels only embed upwards")
    ids = np.asarray(ids, dtype=np.int64)
    if to_level == from_level:
        return ids
    A = level_packing(gamma, d, from_level, budget)
    B = level_packing(gamma, d, to_level, budget)
    L = np.lcm(A.den, B.den)
    qa = np.concatenate([A.cubes.lo[ids], A.cubes.ell[ids, :1]], axis=1) * (L // A.den)
    qb = np.concatenate([B.cubes.lo, B.cubes.ell[:, :1]], axis=1) * (L // B.den)
    both = np.concatenate([qb, qa])
    gid, _ = group_ids(*both.T)
    first = np.full(gid.max() + 1, -1, dtype=np.int64)
    first[gid[:len(qb)]] = np.arange(len(qb))
    out = first[gid[len(qb):]]
    if np.any(out < 0):
        raise ParameterError("some cubes are missing at the target level")
    return out


def level_for_radius(gamma, d: int, v: int, R: int, level: int = 1) -> int:
    """Smallest n >= level whose window certifiably contains B(v, 2R).

    Every cube has side at most 1, so a path of s steps from v ends in a cube
    whose lower corner is below hi(v) + s - 1 on every axis.  Cubes outside the
    level-n region start at b^n horizontally or at H(gamma)^n vertically, so
    hi(v) + 2R <= those bounds is enough.
    """
    gamma = _check_gamma(gamma)
    if R < 0:
        raise ParameterError("radius must be non-negative")
    _, hi = cube_box(level_packing(gamma, d, level), v)
    H = total_height(gamma)
    n = level
    while not (all(h + 2 * R <= gamma.b ** n for h in hi[:-1]) and hi[-1] + 2 * R <= H ** n):
        n += 1
    return n


@dataclass(eq=False)
class LocalView:
    """Ball B(v, R) of the infinite graph realised inside level ``n``.

    ``vertices`` are level-n ids (sorted), ``graph`` is the induced subgraph on
    them and ``dist`` the distances from the center.
    """

    center: int
    R: int
    n: int
    vertices: np.ndarray
    graph: Graph
    dist: np.ndarray
    certified: bool

    @property
    def size(self) -> int:
        return len(self.vertices)

    @property
    def local_center(self) -> int:
        return int(np.searchsorted(self.vertices, self.center))


def orthant_ball(gamma, d: int, v: int, R: int, level: int = 1, n: int | None = None,
                 budget: int = DEFAULT_TILE_BUDGET) -> LocalView:
    """Ball around tile ``v`` (given at ``level``) in the infinite graph.

    Uses the certified level unless ``n`` is forced; a forced level below the
    certified one yields ``certified = False``.
    """
    gamma = _check_gamma(gamma)
    need = level_for_radius(gamma, d, v, R, level)
    n = need if n is None else n
    if n < level:
        raise ParameterError("window level below the vertex's level")
    required = size_formula(gamma, d) ** n
    if required > budget:
        raise BudgetExceededError("orthant window tiles", required, budget)
    C = level_packing(gamma, d, n, budget)
    center = int(embed_ids(gamma, d, [v], level, n, budget)[0])
    dist = bfs_distances(C.graph, [center], limit=R)
    members = np.nonzero(dist >= 0)[0]
    sub, ids = C.graph.induced(members)
    return LocalView(center, R, n, ids, sub, dist[ids], n >= need)
