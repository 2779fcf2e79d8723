"""Geometric winding + Weyl machinery versus the symbolic multiplier form.

The winding map steers a straight edge through labeled surfaces; applying
the product of the surfaces' flux operators to the moved spin network must
produce the same state (up to the graph relabeling) as inserting the
alternating-sign generator exponentials directly on a straight chain.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from holoflux.connections import SurfaceLabel
from holoflux.cylindrical import (
    align_to_common,
    gsn,
    inner_product_exact,
    refine_for_surface,
    subdivide_edge,
)
from holoflux.estimates import _assignment_state, _signed_basis, insert_left_matrix
from holoflux.geometry import (
    Graph,
    OrientedSurface,
    PolyPath,
    Simplex,
    completely_transversal,
    map_path,
    punctures,
)
from holoflux.liegroup import Irrep, exp_alg, su2_basis
from holoflux.stratmaps import winding_map
from holoflux.weylops import WeylDescriptor, apply_weyl

HALF = Irrep("su2", Fraction(1, 2))
BASIS = su2_basis()


def strip_surface(c, height, half_width=0.04):
    tri = Simplex(
        [(-10, height, c - half_width), (15, height, c - half_width),
         (2.5, height, c + half_width)],
        normal=(0, 1, 0),
    )
    return OrientedSurface([tri], piece_ids=(f"strip{c}",))


@pytest.mark.parametrize("assignment", [(0, 0), (2, 5), (1, 4), (3, 3)])
def test_geometric_winding_matches_symbolic_multipliers(assignment):
    t = 0.37
    eps, height = 0.3, 0.6
    taus = [1.0, 2.0]
    signed = _signed_basis(BASIS)
    # one strip per signed generator, at distinct transverse positions
    z_targets = [0.02 + 0.1 * i for i in range(len(signed))]
    surfaces = [strip_surface(c, height) for c in z_targets]
    levels = [assignment[0], assignment[1]]

    # geometric route: wind the axis, then apply every flux operator
    phi = winding_map(taus, levels, z_targets, eps, height)
    axis = PolyPath([(0, 0, 0), (5, 0, 0)])
    moved_path = map_path(phi, axis)
    for j, i in enumerate(levels):
        ps = [p for p in punctures(moved_path, surfaces[i]) if p.is_puncture]
        assert completely_transversal(moved_path, surfaces[i])
    moved_graph = Graph.from_paths([moved_path])
    t_moved = gsn(moved_graph, "su2", {"e0": (HALF.key(), 0, 1)})
    state = t_moved
    for i, surface in enumerate(surfaces):
        label = SurfaceLabel(
            surface, "su2",
            per_stratum={pid: exp_alg(signed[i], t / 2.0) for pid in surface.piece_ids},
        )
        state = apply_weyl(WeylDescriptor(surface, label), state)
    base_ref = t_moved
    for surface in surfaces:
        base_ref = refine_for_surface(base_ref, surface)
    a, b = align_to_common(base_ref, state)
    val_geometric = inner_product_exact(a, b)

    # symbolic route: straight chain with the alternating multipliers
    chain = Graph.from_paths([PolyPath([(0, 0, 0), (5, 0, 0)])])
    t_sym = gsn(chain, "su2", {"e0": (HALF.key(), 0, 1)})
    fine = subdivide_edge(t_sym, "e0", 0.2)          # split at tau_1 = 1 of 5
    fine = subdivide_edge(fine, "e0.b", 0.25)        # split at tau_2 = 2 of 5
    edge_ids = ["e0.a", "e0.b.a", "e0.b.b"]
    inserted = fine
    for j, i in enumerate(levels, start=1):
        sign = (-1) ** (j + 1)
        mat = HALF.evaluate(exp_alg(signed[i], sign * t))
        inserted = insert_left_matrix(inserted, edge_ids[j], mat)
    val_symbolic = inner_product_exact(fine, inserted)

    assert val_geometric == pytest.approx(val_symbolic, abs=1e-12)
    # sanity: the overlap is the product of the multipliers' diagonal parts
    assert abs(val_geometric) <= 1.0 + 1e-12


def test_orientation_flip_composite():
    """A half-turn rotation composite reverses a chord in place."""
    from holoflux.geometry import pt_float
    from holoflux.stratmaps import rotation_map, verify_stratified

    x_gen = np.array([[0.0, -math.pi], [math.pi, 0.0]])
    m = rotation_map(x_gen, r1=1.5, r2=1.0)
    chord = PolyPath([(-1, 0), (1, 0)])
    image = map_path(m, chord)
    assert np.linalg.norm(pt_float(image.vertices[0]) - np.array([1.0, 0.0])) <= 1e-10
    assert np.linalg.norm(pt_float(image.vertices[1]) - np.array([-1.0, 0.0])) <= 1e-10
    rep = verify_stratified(m, 2000, np.random.default_rng(3))
    assert rep["support_violations"] == 0
    assert rep["roundtrip_max"] <= 1e-10


def test_shrink_into_subsegment_composite():
    """Scaling composite lands one edge inside a sub-segment of another."""
    from holoflux.geometry import pt_float
    from holoflux.stratmaps import EuclideanGauge, scaling_map, verify_stratified

    m = scaling_map(EuclideanGauge(2), 0.5, 0.2)
    long_edge = PolyPath([(-1, 0), (1, 0)])
    image = map_path(m, long_edge)
    assert np.allclose(pt_float(image.vertices[0]), [-0.5, 0.0], atol=1e-12)
    assert np.allclose(pt_float(image.vertices[-1]), [0.5, 0.0], atol=1e-12)
    # the image is a genuine sub-segment of the original edge
    from holoflux.geometry import build_graph

    graph, words = build_graph([long_edge, image])
    assert len(words[1]) == 1
    sub_id = words[1][0][0]
    assert any(eid == sub_id for eid, _sign in words[0])
    rep = verify_stratified(m, 1000, np.random.default_rng(5))
    assert rep["support_violations"] == 0
