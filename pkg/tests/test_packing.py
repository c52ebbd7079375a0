import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from oracles import nx_graph
from tilegraphs.errors import ValidationError
from tilegraphs.graph import Graph, subdivide
from tilegraphs.packing import (
    CHAIN,
    HUB,
    LEAF,
    CubePacking,
    PackingRefusedError,
    SpherePacking,
    StarPreconditionError,
    chain_length,
    check_neat,
    contact_points,
    cube_mesh,
    cube_packing,
    icosphere,
    min_radius_by_cube,
    packing_to_json,
    sphere_mesh,
    sphere_pack,
    star_spheres,
    validate_packing,
    write_mesh,
)
from tilegraphs.tangency import build_tangency_graph
from tilegraphs.tiling import power_tiling

F = Fraction


@pytest.fixture(scope="module")
def packed():
    C = cube_packing((3, 6, 3), 1, 3)
    P = sphere_pack(C)
    return C, P, validate_packing(P, 1e-9)


def test_cube_packing_n1(packed):
    C, _, _ = packed
    assert len(C) == 54 and C.neat and C.aspect == 2
    sides = sorted({C.side(i) for i in range(len(C))})
    assert sides == [F(1, 2), F(1)]
    lo, hi = C.cubes.bounding_box()
    assert hi == (F(3), F(3), F(5, 2))  # [0, b]^2 x [0, H(gamma)]
    # 9 + 9 unit cubes in the outer layers, 36 half cubes in the middle
    assert C.cubes.volume() == 18 + 36 * F(1, 8)


def test_cube_volumes_and_heights():
    C = cube_packing((3, 6, 3), 2, 3)
    g = (9, 18, 9, 18, 36, 18, 9, 18, 9)
    assert C.cubes.volume() == sum(gi**2 * F(9, gi) ** 3 for gi in g)
    assert C.cubes.bounding_box()[1][2] == sum(F(9, gi) for gi in g)
    assert C.neat and C.aspect == 2


def test_cube_graph_equals_tiling_graph():
    for gamma, n in [((3, 6, 3), 2), ((4, 8, 8, 4), 1)]:
        C = cube_packing(gamma, n, 3)
        G = build_tangency_graph(power_tiling(3, gamma, n))
        assert np.array_equal(C.graph.edges, G.edges)
        assert np.array_equal(C.graph.edge_dir, G.edge_dir)


def test_neat_examples():
    assert check_neat(cube_packing((4, 8, 8, 4), 2, 3)).ok
    X = CubePacking.from_cubes([(0, 0, 0), (1, F(1, 2), 0)], [1, 1])
    rep = check_neat(X)
    assert not rep.ok and rep.violations.tolist() == [[0, 1]]
    assert "neither facet" in rep.witnesses()[0]
    Y = CubePacking.from_cubes([(0, 0, 0), (F(1, 2), 0, 0)], [1, 1])
    assert check_neat(Y).overlaps.tolist() == [[0, 1]]


def test_single_cube_and_refusal():
    C = cube_packing((1,), 1, 3)
    assert len(C) == 1 and C.side(0) == 1
    P = sphere_pack(C)
    assert len(P) == 1 and P.radii[0] == 0.25 and validate_packing(P).ok
    with pytest.raises(PackingRefusedError, match=r"\(1, 2, 3\)"):
        cube_packing((2, 3, 2), 1, 3)
    forced = cube_packing((2, 3, 2), 1, 3, strict=False)
    assert not forced.neat
    with pytest.raises(ValidationError, match="not neat"):
        sphere_pack(forced)


def test_contact_points_are_facet_centres(packed):
    C, _, _ = packed
    pts, den = contact_points(C)
    e = C.graph.edges.astype(int)
    for k in (0, 40, len(e) - 1):
        u, v = e[k]
        small = u if C.side(u) <= C.side(v) else v
        axis = int(C.graph.edge_dir[k])
        centre = [F(int(C.cubes.lo[small, a]), C.den) + C.side(small) / 2 for a in range(3)]
        got = [F(int(x), den) for x in pts[k]]
        assert [got[a] for a in range(3) if a != axis] == [centre[a] for a in range(3) if a != axis]


def test_star_parameters():
    eps = F(1, 4)
    assert chain_length(3, eps) == 72
    S = star_spheres((0, 0, 0), 1, [], eps)
    assert len(S) == 1 and S.role[0] == HUB
    pts = [(F(1, 2), F(1, 2), 0), (F(1, 2), F(1, 2), 1)]
    S = star_spheres((0, 0, 0), 1, pts, eps)
    assert len(S) == 1 + 2 * 73
    assert float(S.radii[0]) == 0.25
    leaves = S.radii[S.role == LEAF]
    assert np.all(leaves == np.longdouble(1) / 32)
    chain = S.radii[S.role == CHAIN]
    # facet-centre points: |z_p - z'_p| = 1/2 - eps/8 - 1/4 - eps/8 = (1 - eps)/4
    assert np.allclose(chain.astype(float), (1 - 0.25) / 4 / (2 * 72), rtol=1e-15)


def _star_graph_edges(S, k):
    edges = set()
    for p in np.unique(S.contact[S.contact >= 0]):
        ids = np.nonzero(S.contact == p)[0]
        chain = ids[S.role[ids] == CHAIN][np.argsort(S.index[ids][S.role[ids] == CHAIN])]
        leaf = ids[S.role[ids] == LEAF][0]
        seq = [0, *chain.tolist(), int(leaf)]
        edges |= {(min(a, b), max(a, b)) for a, b in zip(seq, seq[1:])}
    return edges


def _as_packing(S, side):
    lo = np.zeros((1, S.centers.shape[1]), dtype=np.longdouble)
    return SpherePacking(S.centers, S.radii, S.cube, S.role, S.index, S.contact,
                         None, lo, np.array([side], dtype=np.longdouble))


def test_star_geometry_validates():
    eps = F(1, 4)
    pts = [(F(1, 2), F(1, 2), 0), (F(1, 2), F(1, 2), 1), (0, F(1, 4), F(1, 4)), (1, F(3, 4), F(1, 2))]
    S = star_spheres((0, 0, 0), 1, pts, eps)
    P = _as_packing(S, 1)
    P.expected = Graph.from_edges(len(S), *zip(*_star_graph_edges(S, 72)))
    rep = validate_packing(P)
    assert rep.ok, rep.summary()
    # every hub-leaf arc has k + 1 edges
    H = nx_graph(P.expected)
    for leaf in np.nonzero(S.role == LEAF)[0]:
        assert nx.shortest_path_length(H, 0, int(leaf)) == 73


def test_separated_chains_antipodal():
    eps = F(1, 4)
    S = star_spheres((0, 0, 0), 1, [(F(1, 2), F(1, 2), 0), (F(1, 2), F(1, 2), 1)], eps)
    a = np.nonzero(S.contact == 0)[0]
    b = np.nonzero(S.contact == 1)[0]
    c = S.centers.astype(float)
    r = S.radii.astype(float)
    gaps = np.linalg.norm(c[a][:, None] - c[b][None], axis=2) - r[a][:, None] - r[b][None]
    assert gaps.min() >= 0.25 / (2 * math.sqrt(3))


def test_star_preconditions_named():
    eps = F(1, 4)
    with pytest.raises(StarPreconditionError, match="not in the eps-boundary") as exc:
        star_spheres((0, 0, 0), 1, [(0, 0, F(1, 2))], eps)  # on an edge
    assert exc.value.witnesses
    with pytest.raises(StarPreconditionError):
        star_spheres((0, 0, 0), 1, [(F(1, 2), F(1, 2), F(1, 2))], eps)  # interior point
    with pytest.raises(StarPreconditionError, match="closer than"):
        star_spheres((0, 0, 0), 1, [(F(1, 2), F(1, 2), 0), (F(1, 2), F(11, 20), 0)], eps)
    # exactly eps * side from a second facet: accepted inclusively, refused strictly
    edge_pt = [(F(1, 4), F(1, 2), 0)]
    assert len(star_spheres((0, 0, 0), 1, edge_pt, eps)) == 74
    with pytest.raises(StarPreconditionError):
        star_spheres((0, 0, 0), 1, edge_pt, eps, inclusive=False)


def test_packing_validates(packed):
    C, P, rep = packed
    assert rep.ok, rep.summary()
    assert P.k == 72 and P.m == 147
    assert rep.spheres == 54 + 156 * 146
    assert rep.realized_edges == rep.expected_edges == 156 * 147


def test_packing_graph_is_subdivision(packed):
    C, P, rep = packed
    want = subdivide(Graph(C.graph.n, C.graph.edges), 147)
    assert {tuple(e) for e in rep.edges.tolist()} == want.edge_set()
    # label-free sanity check on the realised graph
    H = nx.Graph(list(map(tuple, rep.edges.tolist())))
    W = nx_graph(want)
    assert nx.weisfeiler_lehman_graph_hash(H, iterations=4) == nx.weisfeiler_lehman_graph_hash(W, iterations=4)


def test_isomorphism_vf2_small():
    C = cube_packing((2, 4, 2), 1, 2)
    P = sphere_pack(C)
    rep = validate_packing(P)
    assert rep.ok
    H = nx.Graph(list(map(tuple, rep.edges.tolist())))
    H.add_nodes_from(range(len(P)))
    assert nx.is_isomorphic(H, nx_graph(subdivide(Graph(C.graph.n, C.graph.edges), P.m)))


def test_radius_bounds(packed):
    C, P, rep = packed
    eps, k, d = 0.25, 72, 3
    rel = min_radius_by_cube(P).astype(float)
    # derived bound for the construction: |z_p - z'_p| >= (1 - eps) l / 4
    assert rel.min() >= (1 - eps) / (8 * k) * (1 - 1e-12)
    assert rel.min() == pytest.approx((1 - eps) / (8 * k))
    # all chain radii stay below eps / (6 sqrt d) times the side
    chain = P.radii[P.role == CHAIN] / P.cube_side[P.cube[P.role == CHAIN]]
    assert float(chain.max()) <= eps / (6 * math.sqrt(d))
    assert rep.M_realized == pytest.approx(2 * k / (1 - eps))
    assert rep.M_realized <= 120 * 4 * d


def test_perturbation_is_caught(packed):
    C, P, _ = packed
    for role in (CHAIN, LEAF, HUB):
        i = int(np.nonzero(P.role == role)[0][3])
        Q = SpherePacking(P.centers.copy(), P.radii.copy(), P.cube, P.role, P.index, P.contact,
                          P.expected, P.cube_lo, P.cube_side, P.alpha, P.eps, P.k, P.m, P.params)
        Q.radii[i] *= np.longdouble(1 + 1e-6)
        rep = validate_packing(Q, 1e-9)
        assert not rep.ok
        assert any(f"sphere {i} " in w for w in rep.overlaps + rep.missing + rep.extra + rep.escaped)


def test_exports(tmp_path, packed):
    C, P, rep = packed
    V, Fc = icosphere(1)
    assert V.shape == (42, 3) and Fc.shape == (80, 3)
    assert np.allclose(np.linalg.norm(V, axis=1), 1)
    write_mesh(*sphere_mesh(P, 0), tmp_path / "s.ply")
    head = (tmp_path / "s.ply").read_text().split("\n", 10)
    assert head[0] == "ply" and head[2] == f"element vertex {12 * len(P)}"
    write_mesh(*cube_mesh(C), tmp_path / "c.obj")
    lines = (tmp_path / "c.obj").read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == 8 * 54
    assert sum(l.startswith("f ") for l in lines) == 12 * 54
    data = packing_to_json(P, rep)
    assert set(data["spheres"][0]) >= {"center", "radius", "cube", "role"}
    assert len(data["tangencies"]) == rep.realized_edges
    assert max(abs(g) for _, _, g in data["tangencies"]) < 1e-12
