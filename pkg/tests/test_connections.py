from fractions import Fraction

import numpy as np
import pytest

from holoflux.connections import (
    AdmissibleMap,
    DomainError,
    Germ,
    RestrictedConnection,
    admissible_to_map,
    boundary_germ,
    constant_label,
    edge_status,
    flux_admissible_map,
    flux_germ,
    germ_extend,
    holonomy,
    quasi_flux,
    random_connection,
    trivial_germ,
)
from holoflux.geometry import (
    Graph,
    OrientedSurface,
    PolyPath,
    Simplex,
    build_graph,
    decompose_minimal,
)
from holoflux.liegroup import GroupElement, haar_sample, identity, u1_element

RNG = np.random.default_rng(501)


def plane_surface_3d():
    """Big triangle in the plane x=0, normal +x."""
    tri = Simplex(
        [(0, -9, -9), (0, 20, -9), (0, -9, 20)],
        normal=(1, 0, 0),
    )
    return OrientedSurface([tri])


def crossing_graph():
    """Two external edges meeting at a transversal crossing point of x=0."""
    left = PolyPath([(-1, 0, 0), (0, 0, 0)])
    right = PolyPath([(0, 0, 0), (1, 0, 0)])
    return Graph.from_paths([left, right])


# ---------------------------------------------------------------------------
# holonomy
# ---------------------------------------------------------------------------


def test_holonomy_single_edge():
    g = haar_sample(RNG, "su2")
    graph = Graph.from_paths([PolyPath([(0, 0), (1, 0)])])
    conn = RestrictedConnection(graph, "su2", {"e0": g})
    path = PolyPath([(0, 0), (1, 0)])
    assert holonomy(conn, path).dist(g) <= 1e-15


def test_holonomy_composes():
    rng = np.random.default_rng(2)
    g1, g2 = haar_sample(rng, "su2"), haar_sample(rng, "su2")
    graph = Graph.from_paths([PolyPath([(0, 0), (1, 0)]), PolyPath([(1, 0), (1, 1)])])
    conn = RestrictedConnection(graph, "su2", {"e0": g1, "e1": g2})
    path = PolyPath([(0, 0), (1, 0), (1, 1)])
    assert holonomy(conn, path).dist(g1 @ g2) <= 1e-15
    # anti-homomorphism under inversion
    assert holonomy(conn, path.reversed()).dist((g1 @ g2).inverse()) <= 1e-15


def test_holonomy_retracing_word_is_identity():
    g = haar_sample(RNG, "su2")
    graph = Graph.from_paths([PolyPath([(0, 0), (1, 0)])])
    conn = RestrictedConnection(graph, "su2", {"e0": g})
    assert holonomy(conn, [("e0", 1), ("e0", -1)]).is_identity(1e-15)


def test_holonomy_rejects_foreign_path():
    graph = Graph.from_paths([PolyPath([(0, 0), (1, 0)])])
    conn = random_connection(graph, "su2", np.random.default_rng(1))
    with pytest.raises(DomainError):
        holonomy(conn, PolyPath([(5, 5), (6, 6)]))


# ---------------------------------------------------------------------------
# germs
# ---------------------------------------------------------------------------


def _stable_element(point, salt=0):
    h = hash((salt,) + tuple(point))
    return haar_sample(np.random.default_rng(abs(h) % 2**32), "su2")


def test_trivial_germ_extends_to_identity():
    s = plane_surface_3d()
    q = trivial_germ(s, "su2")
    gamma = PolyPath([(-1, 0, 0), (1, 0, 0), (1, 1, 0)])
    assert germ_extend(q, gamma).is_identity()


def test_germ_single_piece_matches_rule():
    s = plane_surface_3d()
    q = boundary_germ(s, "su2", _stable_element)
    gamma = PolyPath([(1, 0, 0), (2, 0, 0)])  # external, doesn't touch S
    assert germ_extend(q, gamma).dist(q(gamma, "external")) <= 1e-15


def test_germ_extension_decomposition_independent():
    rng = np.random.default_rng(77)
    s = plane_surface_3d()
    for salt in range(100):
        q = boundary_germ(s, "su2", lambda p, _s=salt: _stable_element(p, _s))
        q.validate([PolyPath([(-1, 0, 0), (1, 1, 0)]), PolyPath([(1, 0, 0), (2, 0, 0)])])
        a, b, c = rng.integers(1, 5, size=3)
        gamma = PolyPath([(-int(a), 0, 0), (int(b), int(c), 0)])
        v_min = germ_extend(q, gamma)
        # random refinement of the minimal decomposition
        dec = decompose_minimal(gamma, s)
        prod = identity("su2")
        for piece in dec.pieces:
            t = float(rng.uniform(0.3, 0.7))
            seg, sp = piece.path.locate(t)
            if 0 < sp < 1:
                p1, p2 = piece.path.split_at(seg, sp)
                prod = prod @ q(p1, piece.status) @ q(p2, piece.status)
            else:
                prod = prod @ q(piece.path, piece.status)
        assert v_min.dist(prod) <= 1e-10


def test_germ_domain_error_on_mixed_path():
    s = plane_surface_3d()
    q = trivial_germ(s, "su2")
    gamma = PolyPath([(-1, 0, 0), (1, 0, 0)])  # crosses S: mixed
    with pytest.raises(DomainError):
        q(gamma)


# ---------------------------------------------------------------------------
# quasi-flux
# ---------------------------------------------------------------------------


def test_quasi_flux_identity_label():
    graph = crossing_graph()
    conn = random_connection(graph, "su2", np.random.default_rng(3))
    s = plane_surface_3d()
    label = constant_label(s, identity("su2"))
    out = quasi_flux(conn, s, label)
    for eid in graph.edges:
        assert out(eid).dist(conn(eid)) <= 1e-15


def test_quasi_flux_left_translation():
    # edge leaving S transversally: sigma_out = 1 (leaves to +x side), sigma_in = 0
    graph = Graph.from_paths([PolyPath([(0, 0, 0), (1, 0, 0)])])
    conn = random_connection(graph, "su2", np.random.default_rng(4))
    s = plane_surface_3d()
    g = haar_sample(np.random.default_rng(5), "su2")
    out = quasi_flux(conn, s, constant_label(s, g))
    assert out("e0").dist(g @ conn("e0")) <= 1e-14


def test_quasi_flux_inverse():
    graph = crossing_graph()
    conn = random_connection(graph, "su2", np.random.default_rng(6))
    s = plane_surface_3d()
    g = haar_sample(np.random.default_rng(7), "su2")
    label = constant_label(s, g)
    back = quasi_flux(quasi_flux(conn, s, label), s, label.inverse())
    for eid in graph.edges:
        assert back(eid).dist(conn(eid)) <= 1e-13


def test_quasi_flux_requires_refined_edges():
    graph = Graph.from_paths([PolyPath([(-1, 0, 0), (1, 0, 0)])])  # crosses S
    conn = random_connection(graph, "su2", np.random.default_rng(8))
    s = plane_surface_3d()
    with pytest.raises(DomainError):
        quasi_flux(conn, s, constant_label(s, identity("su2")))


def test_quasi_flux_internal_edge_untouched():
    graph = Graph.from_paths([PolyPath([(0, 0, 0), (0, 1, 0)])])  # inside x=0 plane
    s = plane_surface_3d()
    assert edge_status(graph.edges["e0"], s) == "internal"
    conn = random_connection(graph, "su2", np.random.default_rng(9))
    g = haar_sample(np.random.default_rng(10), "su2")
    out = quasi_flux(conn, s, constant_label(s, g))
    assert out("e0").dist(conn("e0")) <= 1e-15


def test_quasi_flux_composes_to_joint_surface_when_disjoint():
    from holoflux.geometry import joint_surface
    from holoflux.connections import SurfaceLabel

    tri1 = Simplex([(0, -9, -9), (0, 20, -9), (0, -9, 20)], normal=(1, 0, 0))
    tri2 = Simplex([(3, -9, -9), (3, 20, -9), (3, -9, 20)], normal=(1, 0, 0))
    s1 = OrientedSurface([tri1], piece_ids=("p1",))
    s2 = OrientedSurface([tri2], piece_ids=("p2",))
    joint = joint_surface(s1, s2)
    graph = Graph.from_paths(
        [
            PolyPath([(0, 0, 0), (3, 0, 0)]),
            PolyPath([(3, 0, 0), (5, 1, 0)]),
        ]
    )
    rng = np.random.default_rng(11)
    conn = random_connection(graph, "su2", rng)
    g1, g2 = haar_sample(rng, "su2"), haar_sample(rng, "su2")
    l1 = constant_label(s1, g1)
    l2 = constant_label(s2, g2)
    joint_label = SurfaceLabel(
        joint, "su2", per_stratum={"a.p1": g1, "b.p2": g2}
    )
    seq = quasi_flux(quasi_flux(conn, s2, l2), s1, l1)
    park = quasi_flux(conn, joint, joint_label)
    for eid in graph.edges:
        assert seq(eid).dist(park(eid)) <= 1e-13


def test_quasi_flux_preserves_haar_moments():
    """Pushing Haar samples through the flux action fixes tested moments."""
    graph = Graph.from_paths([PolyPath([(0, 0, 0), (1, 0, 0)])])
    s = plane_surface_3d()
    g = haar_sample(np.random.default_rng(12), "su2")
    label = constant_label(s, g)
    rng = np.random.default_rng(13)
    n = 20000
    from holoflux.liegroup import haar_sample_matrices

    mats = haar_sample_matrices(rng, "su2", n)
    pushed = np.einsum("ab,nbc->nac", g.matrix, mats)
    for arr_from, arr_to in ((mats, pushed),):
        for i in range(2):
            for j in range(2):
                m1 = arr_from[:, i, j].mean()
                m2 = arr_to[:, i, j].mean()
                se = arr_from[:, i, j].std() / np.sqrt(n) + arr_to[:, i, j].std() / np.sqrt(n)
                assert abs(m1 - m2) <= 4 * se + 1e-3


# ---------------------------------------------------------------------------
# admissible maps
# ---------------------------------------------------------------------------


def test_flux_admissible_map_reproduces_quasi_flux():
    graph = crossing_graph()
    conn = random_connection(graph, "su2", np.random.default_rng(14))
    s = plane_surface_3d()
    g = haar_sample(np.random.default_rng(15), "su2")
    label = constant_label(s, g)
    r = flux_admissible_map(label)
    r.validate([PolyPath([(0, 0, 0), (1, 0, 0)]), PolyPath([(1, 0, 0), (2, 1, 0)])])
    via_r = admissible_to_map(r, conn)
    via_flux = quasi_flux(conn, s, label)
    for eid in graph.edges:
        assert via_r(eid).dist(via_flux(eid)) <= 1e-13


def test_admissible_identity_rule():
    graph = crossing_graph()
    conn = random_connection(graph, "su2", np.random.default_rng(16))
    s = plane_surface_3d()
    r = AdmissibleMap(s, "su2", lambda p, st: identity("su2"))
    out = admissible_to_map(r, conn)
    for eid in graph.edges:
        assert out(eid).dist(conn(eid)) <= 1e-15


def test_admissible_inverse_composes_to_identity():
    graph = crossing_graph()
    conn = random_connection(graph, "su2", np.random.default_rng(17))
    s = plane_surface_3d()
    g = haar_sample(np.random.default_rng(18), "su2")
    r = flux_admissible_map(constant_label(s, g))
    fwd = admissible_to_map(r, conn)
    back = admissible_to_map(r.inverse(), fwd)
    for eid in graph.edges:
        assert back(eid).dist(conn(eid)) <= 1e-13


def test_flux_germ_matches_quasi_flux_holonomy():
    graph = crossing_graph()
    conn = random_connection(graph, "su2", np.random.default_rng(19))
    s = plane_surface_3d()
    g = haar_sample(np.random.default_rng(20), "su2")
    label = constant_label(s, g)
    q = flux_germ(label, base=conn)
    flux_conn = quasi_flux(conn, s, label)
    for eid, path in graph.edges.items():
        assert germ_extend(q, path).dist(flux_conn(eid)) <= 1e-13
