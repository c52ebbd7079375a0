import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nx_graph, vertex_disjoint_paths
from tilegraphs.errors import BudgetExceededError, ParameterError
from tilegraphs.graph import Graph, bfs_distances
from tilegraphs.separators import (
    annulus_flow,
    annulus_path_certificate,
    check_all_fibers,
    check_fiber_diameters,
    copy_members,
    disjoint_path_count,
    fiber_diameter,
    fiber_is_path,
    min_annular_separator,
    project,
    scale_index,
    separator_sweep,
)
from tilegraphs.tangency import build_tangency_graph
from tilegraphs.tiling import Tile, Tiling, layered_tiling, power_tiling, tensor_power


@pytest.fixture(scope="module")
def level2():
    T = power_tiling(3, (3, 6, 3), 2)
    return T, build_tangency_graph(T), project(T)


def graph_from_nx(H):
    n = H.number_of_nodes()
    if H.number_of_edges() == 0:
        return Graph(n, np.zeros((0, 2), np.int64))
    u, v = zip(*H.edges())
    return Graph.from_edges(n, u, v)


def test_projection_structure(level2):
    T, G, fam = level2
    assert len(fam) == 12**2
    assert fam.structural_ok
    assert fam.base.same_tiles(layered_tiling(2, tensor_power((3, 6, 3), 2)))
    assert sorted(np.unique(fam.sizes()).tolist()) == [9, 18, 36]


def test_fibers_are_ordered_paths(level2):
    T, G, fam = level2
    summary = check_all_fibers(G, fam)
    assert summary.disjoint and summary.all_paths and summary.bad_fibers == []
    for f in (0, 50, 143):
        chk = fiber_is_path(G, fam, f)
        assert chk.ok
        xs = T.lo[chk.path, 0]
        assert np.all(np.diff(xs) > 0)


def test_fiber_diameter_bound(level2):
    T, G, fam = level2
    ok, bad, bound = check_fiber_diameters(T, G, fam)
    assert bound == 8 and ok == len(fam) and bad == []
    assert fiber_diameter(G, fam, 0) >= 8


def test_fiber_path_detects_a_broken_fiber():
    T = layered_tiling(2, (3, 3))
    G = build_tangency_graph(T)
    fam = project(T)
    broken = Graph.from_edges(G.n, *zip(*[e for e in G.edges.tolist() if e != [0, 1]]))
    assert not fiber_is_path(broken, fam, 0).ok
    assert 0 in check_all_fibers(broken, fam).bad_fibers


def test_untagged_projection_has_no_structural_claim():
    T = Tiling.from_tiles([Tile(t.p, t.ell) for t in layered_tiling(3, (2, 2)).tiles()])
    assert project(T).structural_ok is None


def test_scale_index():
    assert scale_index(3, 3, 3) is None
    assert [scale_index(R, 3, 3) for R in (4, 11, 12, 35, 36)] == [0, 0, 1, 1, 2]


def test_copy_members_count(level2):
    T, G, fam = level2
    for v in (0, 1234, 2915):
        assert len(copy_members(T, v, 0)) == 1
        m1 = copy_members(T, v, 1)
        assert len(m1) == 54 and v in m1
        assert len(copy_members(T, v, 2)) == 2916


def test_certificate_small_radius_empty(level2):
    T, G, fam = level2
    cert = annulus_path_certificate(T, G, fam, 10, 3, 5)
    assert cert.h is None and cert.fiber_count == 0


def test_certificate_counts(level2):
    T, G, fam = level2
    cert = annulus_path_certificate(T, G, fam, 1500, 12, 14)
    assert cert.h == 1 and cert.fiber_count == 12 and cert.copy_size == 54
    assert cert.copy_in_ball
    assert not cert.regime_ok  # 2 * 14 >= 9 - 1
    cert = annulus_path_certificate(T, G, fam, 1500, 4, 6)
    assert cert.h == 0 and cert.fiber_count == 1


def test_flow_paths_are_disjoint_and_valid(level2):
    T, G, fam = level2
    cert = annulus_flow(G, 1500, 4, 6, return_paths=True)
    assert cert.menger_ok
    dist = bfs_distances(G, [1500])
    edges = G.edge_set()
    seen = set()
    for p in cert.paths:
        assert dist[p[0]] == 4 and dist[p[-1]] == 6
        assert not seen.intersection(p)
        seen.update(p)
        assert all((min(a, b), max(a, b)) in edges for a, b in zip(p, p[1:]))
    assert len(cert.paths) == cert.path_count


def test_flow_matches_networkx_on_annulus(level2):
    T, G, fam = level2
    H = nx_graph(G)
    dist = bfs_distances(G, [700])
    S1 = np.nonzero(dist == 3)[0].tolist()
    S2 = np.nonzero(dist == 5)[0].tolist()
    assert annulus_flow(G, 700, 3, 5).path_count == vertex_disjoint_paths(H, S1, S2)


@settings(max_examples=40, deadline=None)
@given(st.integers(6, 40), st.floats(0.05, 0.4), st.integers(0, 10**5))
def test_disjoint_paths_match_networkx(n, p, seed):
    H = nx.gnp_random_graph(n, p, seed=seed)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    S1, S2 = perm[:3].tolist(), perm[3:6].tolist()
    G = graph_from_nx(H)
    cert = disjoint_path_count(G, S1, S2, return_paths=True)
    assert cert.path_count == vertex_disjoint_paths(H, S1, S2)
    assert cert.menger_ok
    used = [x for path in cert.paths for x in path]
    assert len(used) == len(set(used))


def _separator_oracle(G, v, R, Rp):
    H = nx_graph(G)
    dist = nx.single_source_shortest_path_length(H, v)
    keep = [x for x, k in dist.items() if R <= k <= Rp]
    A = H.subgraph(keep).copy()
    outer = [x for x in keep if dist[x] == Rp]
    if not outer:
        return 0
    K = nx.Graph()
    K.add_nodes_from(x for x in keep if dist[x] != R)
    for a, b in A.edges():
        a2 = "s" if dist[a] == R else a
        b2 = "s" if dist[b] == R else b
        if a2 != b2:
            K.add_edge(a2, b2)
    K.add_node("s")
    K.add_edges_from((x, "t") for x in outer)
    return nx.node_connectivity(K, "s", "t")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**5), st.integers(1, 3), st.integers(1, 3))
def test_min_separator_matches_contraction_oracle(seed, R, gap):
    T = power_tiling(2, (3, 6, 3), 2)
    G = build_tangency_graph(T)
    v = int(np.random.default_rng(seed).integers(G.n))
    sep = min_annular_separator(G, v, R, R + gap)
    assert sep.size == _separator_oracle(G, v, R, R + gap)
    assert sep.separates
    assert sep.size <= sep.sphere_bound
    dist = bfs_distances(G, [v])
    assert np.all((dist[sep.vertices] > R) & (dist[sep.vertices] <= R + gap))


def test_flow_guard_and_argument_checks():
    G = build_tangency_graph(power_tiling(3, (3, 6, 3), 1))
    with pytest.raises(BudgetExceededError):
        disjoint_path_count(G, [0], [53], guard=10)
    with pytest.raises(ParameterError):
        disjoint_path_count(G, [0, 1], [1, 2])
    with pytest.raises(ParameterError):
        annulus_flow(G, 0, 3, 3)


def test_sweep_rows(level2):
    T, G, fam = level2
    rows = separator_sweep(T, G, fam, [0, 1500], [4, 12])
    assert len(rows) == 4
    for r in rows:
        assert r.menger_ok and r.flow_count == r.cut_size
        assert r.fiber_count == r.expected_fibers
        if r.regime_ok:
            assert r.flow_count >= r.fiber_count
