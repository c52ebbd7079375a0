from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tilegraphs.errors import BudgetExceededError, ParameterError
from tilegraphs.infinite import (
    cube_box,
    embed_ids,
    level_for_radius,
    level_packing,
    orthant_ball,
    total_height,
)

GAMMA = (3, 6, 3)


def _edge_set(view, ids_map=None):
    ids = view.vertices if ids_map is None else ids_map
    e = ids[view.graph.edges]
    return {(min(a, b), max(a, b)) for a, b in e.tolist()}


def test_total_height():
    assert total_height(GAMMA) == Fraction(5, 2)
    assert total_height((4, 8, 8, 4)) == 3


def test_levels_nest_at_the_corner():
    A, B = level_packing(GAMMA, 2, 1), level_packing(GAMMA, 2, 2)
    ids = embed_ids(GAMMA, 2, np.arange(len(A)), 1, 2)
    for v in (0, 5, len(A) - 1):
        assert cube_box(A, v) == cube_box(B, int(ids[v]))
    # adjacency is preserved by the embedding
    Bset = B.graph.edge_set()
    for u, v in A.graph.edges.tolist():
        a, b = sorted((int(ids[u]), int(ids[v])))
        assert (a, b) in Bset


def test_zero_radius():
    view = orthant_ball(GAMMA, 3, 0, 0)
    assert view.size == 1 and view.certified
    assert view.local_center == 0 and view.dist.tolist() == [0]


@pytest.mark.parametrize("d,v,R,level", [(2, 0, 1, 1), (2, 30, 2, 2), (3, 20, 1, 1), (3, 0, 2, 1)])
def test_certified_ball_is_stable(d, v, R, level):
    view = orthant_ball(GAMMA, d, v, R, level=level)
    assert view.certified and view.n == level_for_radius(GAMMA, d, v, R, level)
    bigger = orthant_ball(GAMMA, d, v, R, level=level, n=view.n + 1)
    mapped = embed_ids(GAMMA, d, view.vertices, view.n, view.n + 1)
    assert sorted(mapped.tolist()) == bigger.vertices.tolist()
    assert _edge_set(view, mapped) == _edge_set(bigger)
    order = np.argsort(mapped)
    assert np.array_equal(view.dist[order], bigger.dist)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 80), st.integers(0, 3))
def test_certified_levels_agree_d2(v, R):
    view = orthant_ball(GAMMA, 2, v, R, level=2)
    nxt = orthant_ball(GAMMA, 2, v, R, level=2, n=view.n + 1)
    assert nxt.size == view.size
    assert view.graph.num_edges == nxt.graph.num_edges


def test_forced_low_level_is_uncertified():
    need = level_for_radius(GAMMA, 2, 0, 3)
    assert need > 1
    assert not orthant_ball(GAMMA, 2, 0, 3, n=need - 1).certified


def test_errors():
    with pytest.raises(ParameterError, match="gamma"):
        orthant_ball((2, 3, 2), 3, 0, 1)
    with pytest.raises(ParameterError):
        orthant_ball(GAMMA, 3, 0, -1)
    with pytest.raises(ParameterError):
        orthant_ball(GAMMA, 3, 10**6, 1)
    with pytest.raises(BudgetExceededError):
        orthant_ball(GAMMA, 3, 0, 1, n=4, budget=10**5)
    with pytest.raises(ParameterError):
        embed_ids(GAMMA, 2, [0], 2, 1)
