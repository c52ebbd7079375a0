import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nx_graph
from tilegraphs.errors import DisconnectedGraphError, ParameterError
from tilegraphs.graph import Graph
from tilegraphs.growth import (
    ball,
    ball_sizes,
    check_contract_lower_bound,
    check_growth_upper_ingredient,
    check_lower_ingredient,
    diameter,
    eccentricity,
    growth_profile,
    sample_vertices,
    sphere,
)
from tilegraphs.tangency import build_tangency_graph
from tilegraphs.tiling import growth_degree, identity_tiling, layered_tiling, power_tiling


def cycle(n):
    return Graph.from_edges(n, np.arange(n), (np.arange(n) + 1) % n)


def path(n):
    return Graph.from_edges(n, np.arange(n - 1), np.arange(1, n))


def test_hand_examples():
    assert list(ball(cycle(4), 0, 0)) == [0]
    assert len(ball(cycle(4), 0, 1)) == 3
    assert list(sphere(path(5), 0, 2)) == [2]
    assert list(sphere(cycle(4), 1, 0)) == [1]
    assert diameter(cycle(4)).value == 2
    assert diameter(Graph(1, np.zeros((0, 2), np.int64))).value == 0
    with pytest.raises(ParameterError):
        ball(cycle(4), 0, -1)


def test_disconnected_diameter_rejected():
    G = Graph.from_edges(4, [0, 2], [1, 3])
    with pytest.raises(DisconnectedGraphError):
        diameter(G)
    with pytest.raises(DisconnectedGraphError):
        eccentricity(G, 0)


@pytest.mark.parametrize(
    "d,gamma,n,expected",
    # values computed by networkx all-pairs BFS
    [(3, (3, 6, 3), 1, 6), (3, (3, 6, 3), 2, 24), (2, (3, 6, 3), 3, 52), (3, (4, 8, 8, 4), 1, 9)],
)
def test_frozen_diameters(d, gamma, n, expected):
    G = build_tangency_graph(power_tiling(d, gamma, n))
    res = diameter(G)
    assert res.exact and res.value == expected
    if G.n <= 3000:
        assert nx.diameter(nx_graph(G)) == expected


def test_diameter_bracket_beyond_guard():
    G = build_tangency_graph(power_tiling(2, (3, 6, 3), 3))
    res = diameter(G, exact_guard=10, max_bfs=2)
    assert res.lower <= 52 <= res.upper


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 60), st.floats(0.05, 0.5), st.integers(0, 1000))
def test_diameter_matches_networkx_random(n, p, seed):
    H = nx.gnp_random_graph(n, p, seed=seed)
    if not nx.is_connected(H):
        return
    G = Graph.from_edges(n, *zip(*H.edges())) if H.number_of_edges() else Graph(n, np.zeros((0, 2), np.int64))
    assert diameter(G).value == nx.diameter(H)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=2, max_size=4), st.integers(0, 10**6))
def test_ball_sphere_identities(gamma, seed):
    G = build_tangency_graph(layered_tiling(3, gamma))
    rng = np.random.default_rng(seed)
    v = int(rng.integers(G.n))
    H = nx_graph(G)
    ref = nx.single_source_shortest_path_length(H, v)
    sizes = [len(ball(G, v, R)) for R in range(6)]
    assert sizes[0] == 1
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))
    for R in range(6):
        assert sizes[R] == sum(1 for k in ref.values() if k <= R)
        assert sizes[R] == sum(len(sphere(G, v, r)) for r in range(R + 1))
        assert sizes[R] <= G.n


def test_sampling_deterministic_and_exhaustive():
    a = sample_vertices(10**6, 64, seed=7)
    assert np.array_equal(a, sample_vertices(10**6, 64, seed=7))
    assert len(np.unique(a)) == 64
    assert np.array_equal(sample_vertices(50, 10, seed=1), np.arange(50))


def test_ball_sizes_thread_independent():
    G = build_tangency_graph(power_tiling(3, (3, 6, 3), 2))
    verts = sample_vertices(G.n, 20, 3, exhaustive_limit=0)
    assert np.array_equal(ball_sizes(G, verts, [1, 3, 9], 1), ball_sizes(G, verts, [1, 3, 9], 4))


def test_profile_errors():
    with pytest.raises(ParameterError):
        growth_profile(Graph(1, np.zeros((0, 2), np.int64)), [1, 2])
    G = build_tangency_graph(power_tiling(3, (3, 6, 3), 1))
    with pytest.raises(ParameterError):
        growth_profile(G, [3, 9])  # 9 exceeds the diameter 6
    with pytest.raises(ParameterError):
        growth_profile(G, [3])


def test_profile_rows_and_sandwich():
    G = build_tangency_graph(power_tiling(3, (3, 6, 3), 2))
    k = growth_degree((3, 6, 3), 3)
    prof = growth_profile(G, [3, 9], sample_count=64, seed=0, k_theory=k)
    assert len(prof.rows()) == 2 * G.n  # exhaustive below 10^4 vertices
    worst = max(max(s / r**k, r**k / s) for _, r, s in prof.rows())
    assert prof.sandwich_C == pytest.approx(worst)
    assert prof.slope_min <= prof.fitted_k <= prof.slope_max


def test_sandwich_constant_stable_in_d2():
    # n = 2..4 for d = 2 stays small enough to run exhaustively
    gamma = (3, 6, 3)
    k = growth_degree(gamma, 2)
    Cs = []
    for n in (2, 3, 4):
        G = build_tangency_graph(power_tiling(2, gamma, n))
        radii = [3**j for j in range(1, n + 1)]
        Cs.append(growth_profile(G, radii, sample_count=64, seed=0, k_theory=k).sandwich_C)
    assert max(Cs) <= 2 * min(Cs)


def test_lower_ingredient_exhaustive_n2():
    G = build_tangency_graph(power_tiling(3, (3, 6, 3), 2))
    chk = check_lower_ingredient(G, (3, 6, 3), 3, 2, range(G.n))
    assert chk.ok and chk.witness is None


def test_contract_lower_bound():
    T = layered_tiling(3, (3, 6, 3))
    chk = check_contract_lower_bound(T, T)
    assert chk.ok and chk.bound == 54 and chk.radius == 6


@pytest.mark.parametrize(
    "S,T",
    [
        (layered_tiling(3, (3, 6, 3)), layered_tiling(3, (3, 6, 3))),
        (identity_tiling(3), layered_tiling(3, (3, 6, 3))),
        (layered_tiling(3, (4, 8, 8, 4)), identity_tiling(3)),
    ],
)
def test_growth_upper_ingredient(S, T):
    chk = check_growth_upper_ingredient(S, T)
    assert chk.ok
    assert chk.worst <= chk.bound
