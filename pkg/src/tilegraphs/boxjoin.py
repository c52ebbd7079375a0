"""Vectorised, output-sensitive joins of axis-parallel intervals and boxes.

Everything here works on integer coordinates.  Callers pass raw scaled
integers; :func:`compress` maps them to dense order-preserving ranks so the
composite sort keys below never overflow int64.
"""

from __future__ import annotations

import numpy as np


def concat_ranges(starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Concatenation of ``arange(s, s + l)`` for every (s, l) pair."""
    lengths = np.asarray(lengths, dtype=np.int64)
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.asarray(starts, dtype=np.int64)
    offsets = np.cumsum(lengths) - lengths
    return np.repeat(starts - offsets, lengths) + np.arange(total, dtype=np.int64)


def compress(*arrays: np.ndarray) -> list[np.ndarray]:
    """Replace values by their rank among all values of all ``arrays``."""
    flat = np.concatenate([np.asarray(a).ravel() for a in arrays])
    _, inv = np.unique(flat, return_inverse=True)
    inv = inv.astype(np.int64)
    out, pos = [], 0
    for a in arrays:
        size = np.asarray(a).size
        out.append(inv[pos:pos + size].reshape(np.shape(a)))
        pos += size
    return out


def group_ids(*cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense ids for equal rows of the stacked columns.

    Returns ``(ids, representatives)`` where ``representatives[c]`` is the index
    of one row belonging to group ``c``.  Ids follow lexicographic row order.
    """
    n = len(cols[0])
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    order = np.lexsort(cols[::-1])
    change = np.zeros(n, dtype=bool)
    change[0] = True
    for c in cols:
        sc = c[order]
        change[1:] |= sc[1:] != sc[:-1]
    sorted_ids = np.cumsum(change) - 1
    ids = np.empty(n, dtype=np.int64)
    ids[order] = sorted_ids
    return ids, order[change]


def interval_join(gp, lop, hip, gq, loq, hiq) -> tuple[np.ndarray, np.ndarray]:
    """All pairs (p, q) with equal group and overlapping open intervals.

    Two open intervals overlap iff ``lo_p < hi_q`` and ``lo_q < hi_p``.  The pairs
    split into those with ``lo_q`` in ``[lo_p, hi_p)`` and those with ``lo_p`` in
    ``(lo_q, hi_q)``; each family is a contiguous run in a sorted order, so the
    join costs O((P + Q) log(P + Q) + output).  Inputs must be non-negative
    ranks small enough that ``group * M + coord`` fits in int64.
    """
    gp, lop, hip = (np.asarray(a, dtype=np.int64) for a in (gp, lop, hip))
    gq, loq, hiq = (np.asarray(a, dtype=np.int64) for a in (gq, loq, hiq))
    if len(gp) == 0 or len(gq) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    m = int(max(hip.max(), hiq.max(), lop.max(), loq.max())) + 1

    kq = gq * m + loq
    oq = np.argsort(kq, kind="stable")
    kq = kq[oq]
    start = np.searchsorted(kq, gp * m + lop, side="left")
    end = np.searchsorted(kq, gp * m + hip, side="left")
    cnt = end - start
    p1 = np.repeat(np.arange(len(gp), dtype=np.int64), cnt)
    q1 = oq[concat_ranges(start, cnt)]

    kp = gp * m + lop
    op = np.argsort(kp, kind="stable")
    kp = kp[op]
    start = np.searchsorted(kp, gq * m + loq, side="right")
    end = np.searchsorted(kp, gq * m + hiq, side="left")
    cnt = np.maximum(end - start, 0)
    q2 = np.repeat(np.arange(len(gq), dtype=np.int64), cnt)
    p2 = op[concat_ranges(start, cnt)]
    return np.concatenate([p1, p2]), np.concatenate([q1, q2])


def _members(ids: np.ndarray, nclasses: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    order = np.argsort(ids, kind="stable")
    counts = np.bincount(ids, minlength=nclasses)
    starts = np.cumsum(counts) - counts
    return order, starts, counts


def box_join(gp, lop, hip, gq, loq, hiq) -> tuple[np.ndarray, np.ndarray]:
    """All pairs (p, q) with equal group whose open boxes intersect.

    ``lop``/``hip`` have shape (P, k).  The axis with the fewest distinct
    intervals is joined first at the level of interval *classes* (members that
    share the exact interval), then each matched class pair becomes a new group
    for the remaining axes.  On grid-like inputs this keeps the intermediate
    candidate sets proportional to the output.
    """
    lop, hip = np.asarray(lop, dtype=np.int64), np.asarray(hip, dtype=np.int64)
    loq, hiq = np.asarray(loq, dtype=np.int64), np.asarray(hiq, dtype=np.int64)
    gp, gq = np.asarray(gp, dtype=np.int64), np.asarray(gq, dtype=np.int64)
    k = lop.shape[1]
    if len(gp) == 0 or len(gq) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    if k == 1:
        return interval_join(gp, lop[:, 0], hip[:, 0], gq, loq[:, 0], hiq[:, 0])

    g_all = np.concatenate([gp, gq])
    best, best_count = 0, None
    for a in range(k):
        lo_all = np.concatenate([lop[:, a], loq[:, a]])
        hi_all = np.concatenate([hip[:, a], hiq[:, a]])
        ids, _ = group_ids(g_all, lo_all, hi_all)
        count = int(ids.max()) + 1
        if best_count is None or count < best_count:
            best, best_count = a, count
    a = best
    rest = [j for j in range(k) if j != a]

    cp, rep_p = group_ids(gp, lop[:, a], hip[:, a])
    cq, rep_q = group_ids(gq, loq[:, a], hiq[:, a])
    pc, qc = interval_join(
        gp[rep_p], lop[rep_p, a], hip[rep_p, a],
        gq[rep_q], loq[rep_q, a], hiq[rep_q, a],
    )
    if len(pc) == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    pair_ids = np.arange(len(pc), dtype=np.int64)

    order_p, start_p, count_p = _members(cp, len(rep_p))
    sub_p = order_p[concat_ranges(start_p[pc], count_p[pc])]
    new_gp = np.repeat(pair_ids, count_p[pc])
    order_q, start_q, count_q = _members(cq, len(rep_q))
    sub_q = order_q[concat_ranges(start_q[qc], count_q[qc])]
    new_gq = np.repeat(pair_ids, count_q[qc])

    i, j = box_join(
        new_gp, lop[sub_p][:, rest], hip[sub_p][:, rest],
        new_gq, loq[sub_q][:, rest], hiq[sub_q][:, rest],
    )
    return sub_p[i], sub_q[j]
