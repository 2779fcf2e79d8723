import math

import numpy as np
import pytest

from holoflux.stratmaps import (
    EuclideanGauge,
    Piece,
    SimplexGauge,
    StratMapError,
    bump_map,
    compose,
    interp_two_surfaces,
    radial_piece,
    rotation_map,
    scaling_map,
    verify_stratified,
    winding_map,
)

RNG = np.random.default_rng(7321)


def sphere_points(rng, dim, n, radius=1.0):
    pts = rng.normal(size=(n, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * radius


# ---------------------------------------------------------------------------
# radial pieces
# ---------------------------------------------------------------------------


def test_radial_identity_and_doubling():
    p = EuclideanGauge(3)
    ident = radial_piece(lambda x: 1.0, lambda x: 0.0, p)
    dbl = radial_piece(lambda x: 2.0, lambda x: 0.0, p)
    x = np.array([0.3, -1.2, 0.7])
    assert np.allclose(ident.forward(x), x)
    assert np.allclose(dbl.forward(x), 2 * x)
    assert np.allclose(dbl.inverse(dbl.forward(x)), x)


def test_radial_random_admissible_roundtrip_and_collinearity():
    rng = np.random.default_rng(5)
    p = EuclideanGauge(3)
    for _ in range(50):
        a0 = float(rng.uniform(0.5, 2.0))
        b0 = float(rng.uniform(-0.3, 2.0))
        piece = radial_piece(lambda x, a0=a0: a0, lambda x, b0=b0: b0, p)
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        x *= rng.uniform(0.5, 2.0)
        if p(x) * a0 + b0 <= 0.05:
            continue
        y = piece.forward(x)
        assert np.linalg.norm(piece.inverse(y) - x) <= 1e-10
        # collinearity: image stays on the ray through x
        cross = np.linalg.norm(np.cross(x, y))
        assert cross <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(y)


def test_radial_validation_rejects_bad_fields():
    p = EuclideanGauge(2)
    with pytest.raises(StratMapError):
        radial_piece(lambda x: -1.0, lambda x: 0.0, p,
                     domain_points=sphere_points(RNG, 2, 5))
    with pytest.raises(StratMapError):
        # a not constant on rays
        radial_piece(lambda x: 1.0 + np.linalg.norm(x), lambda x: 0.0, p,
                     domain_points=sphere_points(RNG, 2, 5))


# ---------------------------------------------------------------------------
# two-surface interpolation
# ---------------------------------------------------------------------------


def test_interp_identical_bodies_identity_on_s0():
    p0 = EuclideanGauge(3)
    interp = interp_two_surfaces(p0, p0, 0.5, 2.0, 1.0, 1.0,
                                 rng=np.random.default_rng(1), dim=3)
    for x in sphere_points(np.random.default_rng(2), 3, 30):
        assert np.linalg.norm(interp.qhat_plus.forward(x) - x) <= 1e-12


def test_interp_scaled_ball_example():
    # p1 = |x|/sqrt(lam): the ratio p1/p0 is constant, which pins
    # lam0_plus to that constant; S0 then lands on lam0_plus * S1 = S0
    lam = 2.0
    p0 = EuclideanGauge(3)
    p1 = EuclideanGauge(3, radius=math.sqrt(lam))
    q = 1.0 / math.sqrt(lam)
    lam_plus = 1.5 * q
    interp = interp_two_surfaces(p0, p1, 0.3 * q, lam_plus, q, q,
                                 rng=np.random.default_rng(3), dim=3)
    for x in sphere_points(np.random.default_rng(4), 3, 50):
        img = interp.qhat_plus.forward(x)
        assert abs(p1(img) - q) <= 1e-10
    # points on lam_plus S1 are fixed
    for d in sphere_points(np.random.default_rng(5), 3, 50):
        x = d * lam_plus * math.sqrt(lam)
        assert np.linalg.norm(interp.qhat_plus.forward(x) - x) <= 1e-12


def test_interp_ellipse_moves_sphere_onto_scaled_ellipse():
    class EllipseGauge:
        dim = 2

        def __call__(self, x):
            return math.sqrt(x[0] ** 2 / 4.0 + x[1] ** 2)

    p0 = EuclideanGauge(2)
    p1 = EllipseGauge()
    rng = np.random.default_rng(6)
    qs = [p1(d) / p0(d) for d in sphere_points(rng, 2, 500)]
    lam0_plus = max(qs)  # printed ordering: lam0_plus <= sup q
    lam_plus = 2.0 * max(qs)
    interp = interp_two_surfaces(p0, p1, 0.4 * min(qs), lam_plus, min(qs), lam0_plus,
                                 rng=np.random.default_rng(7), dim=2)
    for d in sphere_points(np.random.default_rng(8), 2, 100):
        img = interp.qhat_plus.forward(d)  # d is on S0
        assert abs(p1(img) - lam0_plus) <= 1e-10
        # half-ray preservation
        assert abs(d[0] * img[1] - d[1] * img[0]) <= 1e-12


def test_interp_rejects_bad_ordering():
    p0 = EuclideanGauge(2)
    with pytest.raises(StratMapError):
        interp_two_surfaces(p0, p0, 1.5, 2.0, 1.0, 1.0,
                            rng=np.random.default_rng(1), dim=2)


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


def test_scaling_identity_at_lambda_one():
    m = scaling_map(EuclideanGauge(3), 1.0, 0.1)
    rng = np.random.default_rng(11)
    rep = verify_stratified(m, 500, rng)
    assert rep["support_violations"] == 0
    assert rep["roundtrip_max"] == 0.0
    for _ in range(20):
        x = rng.normal(size=3)
        assert np.array_equal(m.forward(x), x)


def test_scaling_doubles_ball_and_fixes_outside():
    m = scaling_map(EuclideanGauge(3), 2.0, 0.1)
    rng = np.random.default_rng(12)
    for _ in range(200):
        x = rng.normal(size=3)
        r = np.linalg.norm(x)
        if r <= 1.0:
            assert np.linalg.norm(m.forward(x) - 2 * x) <= 1e-12
        if r >= 2.2:
            assert np.array_equal(m.forward(x), x)


def test_scaling_continuity_on_shells():
    m = scaling_map(EuclideanGauge(3), 2.0, 0.1)
    rng = np.random.default_rng(13)
    worst = 0.0
    for d in sphere_points(rng, 3, 1000):
        inner_val = 2.0 * d  # core formula at |x| = 1
        shell_val = m.pieces[1].apply(d)
        worst = max(worst, float(np.linalg.norm(inner_val - shell_val)))
        x_out = d * 2.2
        shell_out = m.pieces[1].apply(x_out)
        worst = max(worst, float(np.linalg.norm(shell_out - x_out)))
    assert worst <= 1e-9


def test_scaling_shrink_case():
    m = scaling_map(EuclideanGauge(2), 0.4, 0.25)
    rng = np.random.default_rng(14)
    rep = verify_stratified(m, 2000, rng)
    assert rep["support_violations"] == 0
    assert rep["roundtrip_max"] <= 1e-10
    assert rep["boundary_max_mismatch"] <= 1e-9
    x = np.array([0.5, -0.5])
    assert np.linalg.norm(m.forward(x) - 0.4 * x) <= 1e-12


# ---------------------------------------------------------------------------
# rotation
# ---------------------------------------------------------------------------


def so_generator(k, angle, i=0, j=1):
    """Generator of the rotation sending e_i toward e_j by `angle`."""
    x = np.zeros((k, k))
    x[i, j] = -angle
    x[j, i] = angle
    return x


def test_rotation_norm_preserving_and_identity_outside():
    x_gen = so_generator(3, math.pi / 3)
    m = rotation_map(x_gen, r1=2.0, r2=1.0)
    rng = np.random.default_rng(15)
    for _ in range(1000):
        x = rng.normal(size=3) * rng.uniform(0, 3)
        y = m.forward(x)
        assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12
        if np.linalg.norm(x) >= 2.0:
            assert np.array_equal(y, x)


def test_rotation_core_matches_matrix_exponential():
    angle = math.pi / 2
    x_gen = so_generator(3, angle)
    m = rotation_map(x_gen, r1=2.0, r2=1.0)
    x = np.array([0.5, 0.0, 0.0])
    # series oracle for e^X
    series = np.eye(3)
    term = np.eye(3)
    for k in range(1, 30):
        term = term @ x_gen / k
        series = series + term
    assert np.linalg.norm(m.forward(x) - series @ x) <= 1e-12
    assert np.allclose(m.forward(x), [0.0, 0.5, 0.0], atol=1e-12)


def test_rotation_fixes_kernel_coordinates():
    x_gen = so_generator(4, 1.1)
    m = rotation_map(x_gen, r1=2.0, r2=1.0)
    rng = np.random.default_rng(16)
    for _ in range(200):
        x = rng.normal(size=4)
        y = m.forward(x)
        assert np.allclose(y[2:], x[2:], atol=1e-12)  # ker X components fixed


def test_rotation_homotopy_to_identity():
    """t -> rotation with generator tX is the identity at t = 0 and moves
    sample points by at most the angle increment along the homotopy."""
    rng = np.random.default_rng(17)
    angle = 2.0
    xs = [rng.normal(size=3) for _ in range(20)]
    ts = np.linspace(0.0, 1.0, 21)
    dt = ts[1] - ts[0]
    prev = [np.asarray(x, dtype=float) for x in xs]  # t = 0: identity
    for t in ts[1:]:
        m = rotation_map(so_generator(3, float(t) * angle), 2.0, 1.0)
        vals = [m.forward(x) for x in xs]
        step = max(np.linalg.norm(a - b) for a, b in zip(vals, prev))
        # a rotation by an extra dt*angle moves |x| <= 2 by at most that arc
        assert step <= dt * angle * 2.0 + 1e-9
        prev = vals
    m0 = rotation_map(so_generator(3, 1e-12), 2.0, 1.0)
    for x in xs:
        assert np.linalg.norm(m0.forward(x) - x) <= 1e-10


def test_rotation_verify():
    m = rotation_map(so_generator(3, 1.2), 2.0, 1.0)
    rep = verify_stratified(m, 2000, np.random.default_rng(18))
    assert rep["support_violations"] == 0
    assert rep["roundtrip_max"] <= 1e-10
    assert rep["boundary_max_mismatch"] <= 1e-9
    assert rep["jacobian_min_abs_det"] > 1e-8


def test_rotation_chord_to_rotated_chord():
    """The planar-rotation instance carries the chord to the rotated chord."""
    from holoflux.geometry import PolyPath, map_path, pt_float

    alpha = 0.7
    m = rotation_map(so_generator(2, alpha), r1=1.05, r2=1.0)
    chord = PolyPath([(-1, 0), (1, 0)])
    image = map_path(m, chord)
    expected = [(-math.cos(alpha), -math.sin(alpha)), (math.cos(alpha), math.sin(alpha))]
    for got, want in zip(image.vertices, expected):
        assert np.linalg.norm(pt_float(got) - np.asarray(want)) <= 1e-10


# ---------------------------------------------------------------------------
# bump
# ---------------------------------------------------------------------------


def default_bump(n=3, tau=1.0, eps=0.25, a=0.8):
    return bump_map(-tau, tau, eps, a, n)


def test_bump_parameter_validation():
    with pytest.raises(StratMapError):
        bump_map(1.0, -1.0, 0.1, 1.0, 3)
    with pytest.raises(StratMapError):
        bump_map(-1.0, 1.0, 1.5, 1.0, 3)  # eps too large
    with pytest.raises(StratMapError):
        bump_map(-1.0, 1.0, 0.1, -1.0, 3)


def test_bump_midpoint_anchor():
    """(-tau, 0, 0) -> (-tau, a, 0): the left ramp midpoint rises to a."""
    tau, eps, a = 1.0, 0.25, 0.8
    m = default_bump()
    got = m.forward(np.array([-tau, 0.0, 0.0]))
    assert np.allclose(got, [-tau, a, 0.0], atol=1e-12)


def test_bump_left_anchor_fixed():
    tau, eps = 1.0, 0.25
    m = default_bump()
    for y in np.linspace(-0.4, 2.0, 23):
        x = np.array([-tau - eps, y, 0.0])
        assert np.array_equal(m.forward(x), x)


def test_bump_axis_maps_to_polyline():
    from holoflux.geometry import PolyPath, map_path, pt_float

    tau, eps, a = 1.0, 0.25, 0.8
    m = default_bump()
    axis = PolyPath([(-2, 0, 0), (2, 0, 0)])
    image = map_path(m, axis)
    expected = [
        (-2, 0, 0),
        (-tau - eps, 0, 0),
        (-tau + eps, 2 * a, 0),
        (tau - eps, 2 * a, 0),
        (tau + eps, 0, 0),
        (2, 0, 0),
    ]
    verts = [pt_float(v) for v in image.vertices]
    assert len(verts) == len(expected)
    for got, want in zip(verts, expected):
        assert np.linalg.norm(got - np.asarray(want, dtype=float)) <= 1e-12


def test_bump_changes_only_y():
    m = default_bump()
    rng = np.random.default_rng(19)
    for _ in range(500):
        x = rng.uniform(-2, 2, size=3)
        y = m.forward(x)
        assert y[0] == x[0]
        assert y[2] == x[2]


def test_bump_inverse_roundtrip_in_box():
    tau, eps, a = 1.0, 0.25, 0.8
    m = default_bump()
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(10_000):
        x = np.array(
            [
                rng.uniform(-tau - eps, tau + eps),
                rng.uniform(-2 * eps, 2 * a + 2 * eps),
                rng.uniform(-2 * eps, 2 * eps),
            ]
        )
        y = m.forward(x)
        worst = max(worst, float(np.linalg.norm(m.inverse(y) - x)))
    assert worst <= 1e-10


def test_bump_verify_all_dimensions():
    for n in (2, 3, 4):
        m = bump_map(-1.0, 1.0, 0.25, 0.8, n)
        rep = verify_stratified(m, 3000, np.random.default_rng(21 + n))
        assert rep["support_violations"] == 0, n
        assert rep["roundtrip_max"] <= 1e-10, n
        assert rep["boundary_max_mismatch"] <= 1e-9, n
        assert rep["jacobian_min_abs_det"] > 1e-8, n


def test_bump_corrupted_piece_flagged():
    m = default_bump()
    bad = m.pieces[0]
    corrupted = Piece(
        bad.name,
        bad.contains,
        lambda pt: np.asarray(bad.apply(pt), dtype=float) + np.array([0.0, 1e-3, 0.0]),
    )
    m.pieces[0] = corrupted
    rep = verify_stratified(m, 500, np.random.default_rng(22))
    assert rep["boundary_max_mismatch"] >= 1e-4


# ---------------------------------------------------------------------------
# composition closure
# ---------------------------------------------------------------------------


def test_composition_passes_verify():
    m1 = rotation_map(so_generator(3, 0.9), 2.0, 1.0)
    m2 = scaling_map(EuclideanGauge(3), 1.5, 0.2)
    comp = compose(m1, m2)
    rep = verify_stratified(comp, 2000, np.random.default_rng(23))
    assert rep["support_violations"] == 0
    assert rep["roundtrip_max"] <= 1e-10
    # composition acts as expected on a sample
    x = np.array([0.2, 0.1, -0.3])
    assert np.allclose(comp.forward(x), m2.forward(m1.forward(x)), atol=1e-14)


# ---------------------------------------------------------------------------
# winding
# ---------------------------------------------------------------------------


def winding_scene(z_targets, height=0.6, x_span=(0.0, 5.0), half_width=0.2):
    """Oriented triangle strips in the plane y = height around each target."""
    from holoflux.geometry import OrientedSurface, Simplex

    surfaces = []
    x_lo, x_hi = x_span
    mid = 0.5 * (x_lo + x_hi)
    wide = 2 * (x_hi - x_lo)
    for c in z_targets:
        tri = Simplex(
            [
                (mid - wide, height, c - half_width),
                (mid + wide, height, c - half_width),
                (mid, height, c + half_width),
            ],
            normal=(0, 1, 0),
        )
        surfaces.append(OrientedSurface([tri]))
    return surfaces


def test_winding_two_punctures_same_surface():
    from holoflux.geometry import PolyPath, completely_transversal, map_path, punctures

    eps, height = 0.3, 0.6
    taus = [1.0, 2.0]
    z_targets = [0.0]
    m = winding_map(taus, [0, 0], z_targets, eps, height)
    axis = PolyPath([(0, 0, 0), (5, 0, 0)])
    image = map_path(m, axis)
    (surface,) = winding_scene(z_targets, height)
    ps = punctures(image, surface)
    ps = [p for p in ps if p.is_puncture]
    assert len(ps) == 2
    assert completely_transversal(image, surface)
    # crossing points sit at the marked parameters with alternating signs
    xs = sorted(float(p.point[0]) for p in ps)
    assert xs == pytest.approx(taus, abs=1e-9)
    signs = [p.sign_out for p in sorted(ps, key=lambda p: p.param)]
    assert signs[0] == -signs[1]


def test_winding_four_punctures_alternating_surfaces():
    from holoflux.geometry import PolyPath, completely_transversal, map_path, punctures

    eps, height = 0.25, 0.5
    taus = [1.0, 2.0, 3.0, 4.0]
    levels = [0, 1, 0, 1]
    z_targets = [0.0, 0.45]
    m = winding_map(taus, levels, z_targets, eps, height)
    axis = PolyPath([(0, 0, 0), (5, 0, 0)])
    image = map_path(m, axis)
    surfaces = winding_scene(z_targets, height)
    for i, surface in enumerate(surfaces):
        ps = [p for p in punctures(image, surface) if p.is_puncture]
        expected = [taus[j] for j in range(4) if levels[j] == i]
        assert sorted(float(p.point[0]) for p in ps) == pytest.approx(expected, abs=1e-9)
        assert completely_transversal(image, surface)
    # signs alternate in j across the union
    union_ps = []
    for surface in surfaces:
        union_ps.extend(p for p in punctures(image, surface) if p.is_puncture)
    union_ps.sort(key=lambda p: float(p.point[0]))
    signs = [p.sign_out for p in union_ps]
    assert signs == [signs[0], -signs[0], signs[0], -signs[0]]


def test_winding_empty_is_identity():
    m = winding_map([], [], [0.0], 0.1, 0.5)
    x = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(m.forward(x), x)


def test_winding_verify():
    m = winding_map([1.0, 2.0], [0, 0], [0.3], 0.3, 0.6)
    rep = verify_stratified(m, 1500, np.random.default_rng(31))
    assert rep["support_violations"] == 0
    assert rep["roundtrip_max"] <= 1e-10


def test_winding_rejects_bad_spacing():
    with pytest.raises(StratMapError):
        winding_map([1.0, 1.3], [0, 0], [0.0], 0.3, 0.5)
    with pytest.raises(StratMapError):
        winding_map([1.0, 2.0, 3.0], [0, 0, 0], [0.0], 0.2, 0.5)


# ---------------------------------------------------------------------------
# simplex <-> ball composite (scripted from the constructors)
# ---------------------------------------------------------------------------


def test_simplex_gauge_and_ball_interp():
    verts = [(1.2, 0.1), (-0.8, 1.0), (-0.5, -1.1)]
    sg = SimplexGauge(verts)
    ball = EuclideanGauge(2)
    rng = np.random.default_rng(33)
    qs = []
    for d in sphere_points(rng, 2, 400):
        qs.append(ball(d) / sg(d))
    lam_minus, lam_plus = 0.5 * min(qs), 1.5 * max(qs)
    lam0_minus, lam0_plus = 1.05 * min(qs), 0.9 * max(qs)
    interp = interp_two_surfaces(sg, ball, lam_minus, lam_plus, lam0_minus, lam0_plus,
                                 rng=np.random.default_rng(34), dim=2)
    # the simplex boundary lands on the sphere of radius lam0_plus
    for d in sphere_points(np.random.default_rng(35), 2, 200):
        x = sg.support_point(d, 1.0)  # on the simplex boundary
        img = interp.qhat_plus.forward(x)
        assert abs(ball(img) - lam0_plus) <= 1e-9
