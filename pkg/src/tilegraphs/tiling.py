"""Exact tilings of the unit cube by axis-parallel boxes.

A :class:`Tiling` keeps, for every axis, one common denominator and stores all
tile corners and side lengths as integer numerators over it.  Every layered
tiling and every product of such tilings is representable this way, and all
geometric predicates reduce to integer comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .boxjoin import box_join, compress
from .errors import BudgetExceededError, DimensionError, ParameterError

DEFAULT_TILE_BUDGET = 10**7
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class GammaSequence:
    """A finite sequence of positive integers driving the layered construction."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise ParameterError("gamma sequence must be non-empty")
        if any(e < 1 for e in entries):
            raise ParameterError(f"gamma entries must be positive: {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def parse(cls, text: str) -> "GammaSequence":
        try:
            return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))
        except ValueError as exc:
            raise ParameterError(f"cannot parse gamma sequence {text!r}") from exc

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __matmul__(self, other: "GammaSequence") -> "GammaSequence":
        return tensor(self, other)

    def __str__(self) -> str:
        return ",".join(map(str, self.entries))

    @property
    def b(self) -> int:
        return len(self.entries)

    @cached_property
    def boundary_equal(self) -> bool:
        return self.entries[0] == self.entries[-1]

    @cached_property
    def boundary_min(self) -> bool:
        return self.entries[0] == self.entries[-1] == self.b == min(self.entries)

    @cached_property
    def integral_ratios(self) -> bool:
        return all(
            max(x, y) % min(x, y) == 0 for x, y in zip(self.entries, self.entries[1:])
        )


def as_gamma(gamma) -> GammaSequence:
    if isinstance(gamma, GammaSequence):
        return gamma
    if isinstance(gamma, str):
        return GammaSequence.parse(gamma)
    return GammaSequence(tuple(gamma))


@dataclass(frozen=True)
class Tile:
    """Closed box encoded as (min corner, side lengths)."""

    p: tuple[Fraction, ...]
    ell: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.p) != len(self.ell):
            raise DimensionError("corner and length vectors differ in dimension")
        if any(l <= 0 for l in self.ell):
            raise ParameterError(f"tile side lengths must be positive: {self.ell}")

    @property
    def dim(self) -> int:
        return len(self.p)

    @property
    def upper(self) -> tuple[Fraction, ...]:
        return tuple(a + l for a, l in zip(self.p, self.ell))

    @property
    def volume(self) -> Fraction:
        return reduce(lambda x, y: x * y, self.ell, Fraction(1))


def _lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def _fits_int64(*arrays) -> bool:
    return all(a.size == 0 or int(np.max(np.abs(a))) < _INT64_SAFE for a in arrays)


def _as_int_array(values, shape) -> np.ndarray:
    arr = np.array(values, dtype=object).reshape(shape)
    if arr.size == 0 or max(abs(int(v)) for v in arr.ravel()) < _INT64_SAFE:
        return arr.astype(np.int64)
    return arr


@dataclass(eq=False)
class Tiling:
    """Finite set of boxes with exact coordinates ``lo / den`` and lengths ``ell / den``.

    ``lo`` and ``ell`` are (N, d) integer arrays (int64, or object for very large
    numerators); ``den`` holds one positive denominator per axis.
    """

    lo: np.ndarray
    ell: np.ndarray
    den: tuple[int, ...]
    provenance: tuple[GammaSequence, int] | None = None
    _hi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.den = tuple(int(x) for x in self.den)
        if self.lo.ndim != 2 or self.lo.shape != self.ell.shape:
            raise DimensionError("lo and ell must be (N, d) arrays of equal shape")
        if self.lo.shape[1] != len(self.den):
            raise DimensionError("one denominator per axis required")

    @property
    def dim(self) -> int:
        return len(self.den)

    def __len__(self) -> int:
        return self.lo.shape[0]

    @property
    def hi(self) -> np.ndarray:
        if self._hi is None:
            self._hi = self.lo + self.ell
        return self._hi

    def tile(self, i: int) -> Tile:
        return Tile(
            tuple(Fraction(int(self.lo[i, a]), self.den[a]) for a in range(self.dim)),
            tuple(Fraction(int(self.ell[i, a]), self.den[a]) for a in range(self.dim)),
        )

    def tiles(self) -> list[Tile]:
        return [self.tile(i) for i in range(len(self))]

    @classmethod
    def from_tiles(cls, tiles: Sequence[Tile], provenance=None) -> "Tiling":
        if not tiles:
            raise ParameterError("a tiling needs at least one tile")
        d = tiles[0].dim
        if any(t.dim != d for t in tiles):
            raise DimensionError("tiles of mixed dimension")
        den = [_lcm(x.denominator for t in tiles for x in (t.p[a], t.ell[a])) for a in range(d)]
        lo = [[int(t.p[a] * den[a]) for a in range(d)] for t in tiles]
        ell = [[int(t.ell[a] * den[a]) for a in range(d)] for t in tiles]
        n = len(tiles)
        return cls(_as_int_array(lo, (n, d)), _as_int_array(ell, (n, d)), tuple(den), provenance)

    def with_provenance(self, provenance) -> "Tiling":
        return Tiling(self.lo, self.ell, self.den, provenance)

    def normalized(self) -> "Tiling":
        """Same tiles over the smallest common denominator per axis."""
        lo, ell, den = self.lo.copy(), self.ell.copy(), list(self.den)
        for a in range(self.dim):
            g = den[a]
            for col in (lo[:, a], ell[:, a]):
                if g == 1:
                    break
                if col.dtype == object:
                    for v in col:
                        g = math.gcd(g, int(v))
                        if g == 1:
                            break
                else:
                    g = math.gcd(g, int(np.gcd.reduce(col)))
            if g > 1:
                lo[:, a] //= g
                ell[:, a] //= g
                den[a] //= g
        if lo.dtype == object and _fits_int64(lo, ell):
            lo, ell = lo.astype(np.int64), ell.astype(np.int64)
        return Tiling(lo, ell, tuple(den), self.provenance)

    def canonical(self) -> "Tiling":
        """Tiles sorted by (p_d, p_1, ..., p_{d-1}), ties broken by side lengths."""
        d = self.dim
        primary = [d - 1] + list(range(d - 1))
        if self.lo.dtype == object:
            rows = sorted(
                range(len(self)),
                key=lambda i: tuple(int(self.lo[i, a]) for a in primary)
                + tuple(int(self.ell[i, a]) for a in primary),
            )
            order = np.array(rows, dtype=np.int64)
        else:
            keys = [self.ell[:, a] for a in reversed(primary)] + [
                self.lo[:, a] for a in reversed(primary)
            ]
            order = np.lexsort(keys)
        return Tiling(self.lo[order], self.ell[order], self.den, self.provenance)

    def same_tiles(self, other: "Tiling") -> bool:
        """Exact tile-set equality, independent of order and representation."""
        if self.dim != other.dim or len(self) != len(other):
            return False
        a, b = self.normalized().canonical(), other.normalized().canonical()
        return (
            a.den == b.den
            and bool(np.array_equal(a.lo, b.lo))
            and bool(np.array_equal(a.ell, b.ell))
        )

    def volume(self) -> Fraction:
        vol = np.ones(len(self), dtype=object)
        for a in range(self.dim):
            vol = vol * self.ell[:, a].astype(object)
        return Fraction(int(vol.sum()), math.prod(self.den))

    def bounding_box(self) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
        lo = tuple(Fraction(int(self.lo[:, a].min()), self.den[a]) for a in range(self.dim))
        hi = tuple(Fraction(int(self.hi[:, a].max()), self.den[a]) for a in range(self.dim))
        return lo, hi

    def max_side(self) -> Fraction:
        return max(Fraction(int(self.ell[:, a].max()), self.den[a]) for a in range(self.dim))


def _check_dim(d: int) -> None:
    if int(d) != d or d < 2:
        raise DimensionError(f"dimension must be an integer >= 2, got {d}")


def identity_tiling(d: int) -> Tiling:
    _check_dim(d)
    ones = np.ones((1, d), dtype=np.int64)
    return Tiling(np.zeros((1, d), dtype=np.int64), ones, (1,) * d, (GammaSequence((1,)), 1))


def layered_tiling(d: int, gamma, provenance=None) -> Tiling:
    """Layer i of ``[0,1]^d`` (along the last axis) is a gamma_i x ... x gamma_i grid."""
    _check_dim(d)
    gamma = as_gamma(gamma)
    b = gamma.b
    den_h = _lcm(gamma.entries)
    blocks_lo, blocks_ell = [], []
    for i, g in enumerate(gamma.entries):
        step = den_h // g
        grid = np.indices((g,) * (d - 1), dtype=np.int64).reshape(d - 1, -1).T * step
        count = grid.shape[0]
        lo = np.empty((count, d), dtype=np.int64)
        lo[:, : d - 1] = grid
        lo[:, d - 1] = i
        ell = np.empty((count, d), dtype=np.int64)
        ell[:, : d - 1] = step
        ell[:, d - 1] = 1
        blocks_lo.append(lo)
        blocks_ell.append(ell)
    # Layers are emitted bottom-up and grids with axis 1 slowest, which is
    # already the canonical order.
    return Tiling(
        np.concatenate(blocks_lo),
        np.concatenate(blocks_ell),
        (den_h,) * (d - 1) + (b,),
        provenance if provenance is not None else (gamma, 1),
    )


def _product_arrays(S: Tiling, T: Tiling):
    ns, nt, d = len(S), len(T), S.dim
    dt = np.array(T.den, dtype=object)
    bound = [
        int(np.max(np.abs(S.hi[:, a].astype(object)))) * T.den[a] * 2 + 1 for a in range(d)
    ]
    use_object = max(bound) >= _INT64_SAFE or S.lo.dtype == object or T.lo.dtype == object
    if use_object:
        slo, sell = S.lo.astype(object), S.ell.astype(object)
        tlo, tell = T.lo.astype(object), T.ell.astype(object)
        dt_arr = dt
    else:
        slo, sell, tlo, tell = S.lo, S.ell, T.lo, T.ell
        dt_arr = np.array(T.den, dtype=np.int64)
    lo = slo[:, None, :] * dt_arr + tlo[None, :, :] * sell[:, None, :]
    ell = sell[:, None, :] * tell[None, :, :]
    return lo.reshape(ns * nt, d), ell.reshape(ns * nt, d)


def tile_product(S: Tiling, T: Tiling, validate: bool = True) -> Tiling:
    """Replace every tile of ``S`` by an affinely scaled copy of ``T``."""
    if S.dim != T.dim:
        raise DimensionError(f"dimension mismatch: {S.dim} vs {T.dim}")
    if validate:
        for name, t in (("left", S), ("right", T)):
            rep = validate_tiling(t)
            if not rep.ok:
                raise ParameterError(f"{name} factor is not a tiling of the unit cube: {rep.summary()}")
    lo, ell = _product_arrays(S, T)
    den = tuple(a * b for a, b in zip(S.den, T.den))
    prov = None
    if S.provenance is not None and T.provenance is not None:
        (gs, ns), (gt, nt) = S.provenance, T.provenance
        if gs == gt:
            prov = (gs, ns + nt)
        else:
            prov = (tensor(tensor_power(gs, ns), tensor_power(gt, nt)), 1)
    return Tiling(lo, ell, den, prov).normalized().canonical()


def tiling_power(T: Tiling, n: int, budget: int = DEFAULT_TILE_BUDGET) -> Tiling:
    """n-fold tile product of ``T`` with itself (identity for n = 0)."""
    if n < 0:
        raise ParameterError("power must be non-negative")
    if len(T) ** n > budget:
        raise BudgetExceededError("tiling power", len(T) ** n, budget)
    out = identity_tiling(T.dim)
    for _ in range(n):
        out = tile_product(out, T, validate=False)
    return out


def tensor(gamma, other) -> GammaSequence:
    g, h = as_gamma(gamma), as_gamma(other)
    return GammaSequence(tuple(x * y for x in g.entries for y in h.entries))


def tensor_power(gamma, n: int) -> GammaSequence:
    if n < 0:
        raise ParameterError("power must be non-negative")
    gamma = as_gamma(gamma)
    out = GammaSequence((1,))
    for _ in range(n):
        out = tensor(out, gamma)
    return out


def gamma_pqh(d: int, p: int, q: int, h: int) -> GammaSequence:
    """The sequence <b, tb, ..., tb, b> with b = h^(q(d-1)) and t = h^(p - dq)."""
    _check_dim(d)
    if min(p, q) < 1:
        raise ParameterError("p and q must be positive")
    if h < 2:
        raise ParameterError("h must be at least 2")
    if p < q * d:
        raise ParameterError(f"need p >= q*d, got p={p}, q={q}, d={d}")
    b = h ** (q * (d - 1))
    t = h ** (p - d * q)
    return GammaSequence((b,) + (t * b,) * (b - 2) + (b,))


def size_formula(gamma, d: int) -> int:
    """Number of tiles of the layered tiling: sum of gamma_i^(d-1)."""
    _check_dim(d)
    return sum(g ** (d - 1) for g in as_gamma(gamma).entries)


def growth_degree_args(gamma, d: int) -> tuple[int, int]:
    """Integers (N, b) with growth degree log N / log b."""
    gamma = as_gamma(gamma)
    if gamma.b < 2:
        raise ParameterError("growth degree undefined for sequences of length 1")
    return size_formula(gamma, d), gamma.b


def growth_degree(gamma, d: int) -> float:
    num, base = growth_degree_args(gamma, d)
    return math.log(num) / math.log(base)


def s_tradeoff(d: int, k):
    """Separator exponent d - 1 + (k - d)(1 - 1/(d - 1)); exact for rational k."""
    if d < 3:
        raise DimensionError("tradeoff defined for d >= 3")
    if k < d:
        raise ParameterError("need k >= d")
    if isinstance(k, (int, Fraction)):
        return Fraction(d - 1) + (Fraction(k) - d) * (1 - Fraction(1, d - 1))
    return d - 1 + (k - d) * (1 - 1 / (d - 1))


def power_tiling(d: int, gamma, n: int, budget: int = DEFAULT_TILE_BUDGET) -> Tiling:
    """Layered tiling of the n-th tensor power, refusing above ``budget`` tiles."""
    gamma = as_gamma(gamma)
    if n < 0:
        raise ParameterError("power must be non-negative")
    required = size_formula(gamma, d) ** n
    if required > budget:
        raise BudgetExceededError("tiling", required, budget)
    if n == 0:
        return identity_tiling(d).with_provenance((gamma, 0))
    return layered_tiling(d, tensor_power(gamma, n), provenance=(gamma, n))


@dataclass
class ValidationReport:
    ok: bool
    tile_count: int
    volume: Fraction
    expected_volume: Fraction | None
    bbox: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]
    overlaps: list[tuple[int, int]] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return "ok" if self.ok else "; ".join(self.messages)


def overlapping_pairs(T: Tiling) -> np.ndarray:
    """Index pairs (i < j) of boxes whose interiors intersect."""
    n, d = len(T), T.dim
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    lo = np.empty((n, d), dtype=np.int64)
    hi = np.empty((n, d), dtype=np.int64)
    for a in range(d):
        lo[:, a], hi[:, a] = compress(T.lo[:, a], T.hi[:, a])
    g = np.zeros(n, dtype=np.int64)
    i, j = box_join(g, lo, hi, g, lo, hi)
    keep = i < j
    pairs = np.stack([i[keep], j[keep]], axis=1)
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def validate_tiling(T: Tiling, unit_cube: bool = True) -> ValidationReport:
    """Exact check of interior-disjointness, volume and bounding box."""
    messages = []
    pairs = overlapping_pairs(T)
    if len(pairs):
        shown = ", ".join(f"({i},{j})" for i, j in pairs[:10].tolist())
        messages.append(f"{len(pairs)} overlapping tile pairs, e.g. {shown}")
    vol = T.volume()
    bbox = T.bounding_box()
    expected = None
    if unit_cube:
        expected = Fraction(1)
        cube = ((Fraction(0),) * T.dim, (Fraction(1),) * T.dim)
        if bbox != cube:
            messages.append(f"bounding box {bbox} is not the unit cube")
        if vol != expected:
            messages.append(f"total volume {vol} != 1")
    return ValidationReport(
        ok=not messages,
        tile_count=len(T),
        volume=vol,
        expected_volume=expected,
        bbox=bbox,
        overlaps=[tuple(p) for p in pairs.tolist()],
        messages=messages,
    )
