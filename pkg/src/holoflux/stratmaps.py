"""Explicit constructors for localized stratified diffeomorphisms of R^n.

Each constructor returns a :class:`StratMap`: a piece list of (closed-region
predicate, closed-form forward map) together with the matching inverse
pieces, the support region outside which the map is exactly the identity,
and enough metadata to pre-split PL paths at the piece boundaries.  The
families implemented:

* ``radial_piece`` -- x -> (a + b/p)(x) x with inverse (1/a)(1 - b/p)(x) x
  for homogeneous p and ray-constant a, b (half-ray preserving).
* ``interp_two_surfaces`` -- the two-sided interpolation moving one star
  body boundary onto a scaled copy of another while fixing an outer shell.
* ``scaling_map`` -- lambda * id on a star body, identity outside a
  (1+eps)-inflated shell, stitched by the interpolation above.
* ``rotation_map`` -- e^{a(|x|) X} x with a ramping from 1 inside r2 to 0
  outside r1; norm preserving, identity on ker X.
* ``bump_map`` -- the box-local shear that lifts a segment of the x-axis to
  a trapezoidal polyline, three columns x three rows x a cosine falloff in
  the transverse directions (9 planar pieces, 18 for n >= 4, 27 connected
  components at n = 3; n = 2 is the degenerate no-transverse case).
* ``winding_map`` -- a composition of transverse-coordinate tents and
  y-bumps steering prescribed parameters of the x-axis through prescribed
  surface strips with alternating signs.

``verify_stratified`` checks every output: piece formulas agree on shared
boundaries, forward/inverse roundtrips, exact identity outside the support,
and nonsingular per-piece Jacobians on samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "StratMapError",
    "Piece",
    "StratMap",
    "compose",
    "EuclideanGauge",
    "SimplexGauge",
    "radial_piece",
    "interp_two_surfaces",
    "scaling_map",
    "rotation_map",
    "bump_map",
    "winding_map",
    "verify_stratified",
]


class StratMapError(ValueError):
    """Invalid constructor parameters or violated sampling validation."""


@dataclass
class Piece:
    name: str
    contains: Callable  # closed-region membership, point -> bool
    apply: Callable     # closed-form map, point -> point


@dataclass
class StratMap:
    """A piecewise closed-form homeomorphism, identity outside its support."""

    dim: int
    pieces: list
    inv_pieces: list
    in_support: Callable            # strict interior of the moving region
    bbox: tuple                     # (lo, hi) arrays enclosing the support
    boundary_sampler: Callable      # (rng, count) -> list of boundary points
    break_functions: list = field(default_factory=list)  # scalar g(point)=0 loci
    family: str = ""
    params: dict = field(default_factory=dict)

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.in_support_closure(x):
            return x
        for piece in self.pieces:
            if piece.contains(x):
                return np.asarray(piece.apply(x), dtype=float)
        return x

    def inverse(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if not self.in_support_closure(y):
            return y
        for piece in self.inv_pieces:
            if piece.contains(y):
                return np.asarray(piece.apply(y), dtype=float)
        return y

    def in_support_closure(self, x) -> bool:
        lo, hi = self.bbox
        return bool(np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12))

    def pieces_at(self, x):
        """Evaluations of every forward piece whose closed region holds x,
        plus the identity when x is not strictly inside the support."""
        x = np.asarray(x, dtype=float)
        vals = [np.asarray(p.apply(x), dtype=float) for p in self.pieces if p.contains(x)]
        if not self.in_support(x):
            vals.append(x)
        return vals

    def piece_name(self, x) -> str:
        x = np.asarray(x, dtype=float)
        if self.in_support_closure(x):
            for piece in self.pieces:
                if piece.contains(x):
                    return piece.name
        return "identity"

    def inverted(self) -> "StratMap":
        return StratMap(
            dim=self.dim,
            pieces=self.inv_pieces,
            inv_pieces=self.pieces,
            in_support=self.in_support,
            bbox=self.bbox,
            boundary_sampler=self.boundary_sampler,
            break_functions=self.break_functions,
            family=f"inverse({self.family})",
            params=self.params,
        )

    # pre-splitting support for map_path
    def path_break_params(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        out = set()
        for g in self.break_functions:
            out.update(_segment_roots(lambda s: g(a + s * (b - a))))
        return sorted(out)


def _segment_roots(f: Callable, grid: int = 128):
    """Approximate zeros of a scalar function on [0, 1] by scan + bisection."""
    svals = np.linspace(0.0, 1.0, grid + 1)
    fvals = [f(s) for s in svals]
    roots = []
    for i in range(grid):
        fa, fb = fvals[i], fvals[i + 1]
        if fa == 0.0 and 0 < svals[i] < 1:
            roots.append(svals[i])
            continue
        if fa * fb < 0:
            lo, hi = svals[i], svals[i + 1]
            flo = fa
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if flo * fm <= 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            r = 0.5 * (lo + hi)
            if 1e-12 < r < 1 - 1e-12:
                roots.append(r)
    return roots


def compose(*maps: StratMap) -> StratMap:
    """Composition (left-to-right application order: maps[0] first)."""
    if not maps:
        raise StratMapError("need at least one map")
    dim = maps[0].dim
    if any(m.dim != dim for m in maps):
        raise StratMapError("dimension mismatch in composition")

    def fwd(x):
        for m in maps:
            x = m.forward(x)
        return x

    def inv(y):
        for m in reversed(maps):
            y = m.inverse(y)
        return y

    los = np.min([m.bbox[0] for m in maps], axis=0)
    his = np.max([m.bbox[1] for m in maps], axis=0)

    def in_support(x):
        z = np.asarray(x, dtype=float)
        for m in maps:
            if m.in_support(z):
                return True
            z = m.forward(z)
        return False

    def boundary_sampler(rng, count):
        pts = []
        per = max(1, count // len(maps))
        for i, m in enumerate(maps):
            for p in m.boundary_sampler(rng, per):
                q = np.asarray(p, dtype=float)
                # pull back through the earlier maps
                for earlier in reversed(maps[:i]):
                    q = earlier.inverse(q)
                pts.append(q)
        return pts

    def break_params(a, b):
        # earlier maps act affinely between their own breaks; propagate
        svals = sorted(set(maps[0].path_break_params(a, b)) | {0.0, 1.0})
        if len(maps) == 1:
            return [s for s in svals if 0 < s < 1]
        rest = compose(*maps[1:]) if len(maps) > 2 else maps[1]
        out = set(s for s in svals if 0 < s < 1)
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        for s0, s1 in zip(svals, svals[1:]):
            pa = maps[0].forward(a + s0 * (b - a))
            pb = maps[0].forward(a + s1 * (b - a))
            for u in rest.path_break_params(pa, pb):
                out.add(s0 + u * (s1 - s0))
        return sorted(out)

    composite = StratMap(
        dim=dim,
        pieces=[Piece("composite", lambda x: True, fwd)],
        inv_pieces=[Piece("composite-inverse", lambda y: True, inv)],
        in_support=in_support,
        bbox=(los, his),
        boundary_sampler=boundary_sampler,
        family="compose(" + ",".join(m.family for m in maps) + ")",
        params={"factors": [m.family for m in maps]},
    )
    composite.path_break_params = break_params  # type: ignore[method-assign]
    composite.pieces_at = lambda x: [fwd(np.asarray(x, dtype=float))]  # type: ignore
    return composite


# ---------------------------------------------------------------------------
# Gauges (Minkowski functionals of star bodies)
# ---------------------------------------------------------------------------


class EuclideanGauge:
    """p(x) = |x| / radius: the gauge of a round ball."""

    def __init__(self, dim: int, radius: float = 1.0):
        self.dim = dim
        self.radius = float(radius)

    def __call__(self, x) -> float:
        return float(np.linalg.norm(x)) / self.radius

    def support_point(self, direction, level: float = 1.0) -> np.ndarray:
        d = np.asarray(direction, dtype=float)
        return d / np.linalg.norm(d) * self.radius * level

    def bounding_radius(self, level: float) -> float:
        return self.radius * level


class SimplexGauge:
    """Gauge of a simplex (or any polytope) with 0 in its interior.

    p(x) = max_i <a_i, x> over the facet functionals normalized to 1 on each
    facet; homogeneous of degree 1 and piecewise linear.
    """

    def __init__(self, vertices: Sequence):
        verts = np.asarray(vertices, dtype=float)
        k = verts.shape[1]
        if verts.shape[0] != k + 1:
            raise StratMapError("need a full-dimensional simplex (k+1 vertices)")
        self.dim = k
        rows = []
        for i in range(k + 1):
            others = np.delete(verts, i, axis=0)
            base = others[0]
            span = others[1:] - base
            nrm = _orthogonal_complement(span)
            # orient away from the omitted vertex, normalize to 1 on the facet
            if nrm @ (verts[i] - base) > 0:
                nrm = -nrm
            c = nrm @ base
            if c <= 0:
                raise StratMapError("origin must be interior to the simplex")
            rows.append(nrm / c)
        self.facets = np.asarray(rows)
        self.vertices = verts

    def __call__(self, x) -> float:
        return float(np.max(self.facets @ np.asarray(x, dtype=float)))

    def support_point(self, direction, level: float = 1.0) -> np.ndarray:
        d = np.asarray(direction, dtype=float)
        p = self(d)
        if p <= 0:
            raise StratMapError("direction outside the gauge cone")
        return d / p * level

    def bounding_radius(self, level: float) -> float:
        return float(np.max(np.linalg.norm(self.vertices, axis=1))) * level


def _orthogonal_complement(span: np.ndarray) -> np.ndarray:
    """A vector orthogonal to all rows of span (codimension-1 case)."""
    _u, _s, vh = np.linalg.svd(span)
    return vh[-1]


# ---------------------------------------------------------------------------
# Radial pieces
# ---------------------------------------------------------------------------


@dataclass
class RadialPiece:
    """x -> (a + b/p)(x) x with the explicit inverse (1/a)(1 - b/p)(x) x.

    a, b must be constant on rays, p homogeneous of degree 1, and a, p,
    p a + b positive on the domain; these are validated on samples.
    """

    a: Callable
    b: Callable
    p: Callable

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        return (self.a(x) + self.b(x) / self.p(x)) * x

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        return (1.0 / self.a(y)) * (1.0 - self.b(y) / self.p(y)) * y

    def validate(self, domain_points, atol: float = 1e-9):
        for x in domain_points:
            x = np.asarray(x, dtype=float)
            av, pv, bv = self.a(x), self.p(x), self.b(x)
            if not (av > 0 and pv > 0 and pv * av + bv > 0):
                raise StratMapError("positivity violated on the domain sample")
            for lam in (0.5, 2.0):
                if abs(self.p(lam * x) - lam * pv) > atol * max(1.0, pv):
                    raise StratMapError("p is not homogeneous of degree 1")
                if abs(self.a(lam * x) - av) > atol or abs(self.b(lam * x) - bv) > atol:
                    raise StratMapError("a, b are not constant on rays")


def radial_piece(a: Callable, b: Callable, p: Callable,
                 domain_points=None) -> RadialPiece:
    piece = RadialPiece(a, b, p)
    if domain_points is not None:
        piece.validate(domain_points)
    return piece


# ---------------------------------------------------------------------------
# Two-surface interpolation
# ---------------------------------------------------------------------------


@dataclass
class TwoSurfaceInterp:
    """Radial interpolation data between two star-body gauges.

    qhat_plus fixes the outer shell {p1 = lam_plus} pointwise and carries
    {p0 = 1} onto {p1 = lam0_plus}; qhat_minus is the inner-sided analogue.
    """

    p0: Callable
    p1: Callable
    lam_minus: float
    lam_plus: float
    lam0_minus: float
    lam0_plus: float
    qhat_plus: RadialPiece = None
    qhat_minus: RadialPiece = None

    def __post_init__(self):
        p0, p1 = self.p0, self.p1

        def q(x):
            return p1(x) / p0(x)

        def make(lam, lam0):
            def a(x):
                return (lam - lam0) / (lam - q(x))

            def b(x):
                return lam * (lam0 - q(x)) / (lam - q(x))

            return RadialPiece(a, b, p1)

        self.qhat_plus = make(self.lam_plus, self.lam0_plus)
        self.qhat_minus = make(self.lam_minus, self.lam0_minus)

    def validate_ordering(self, rng: np.random.Generator, dim: int, samples: int = 400):
        qs = []
        for _ in range(samples):
            d = rng.normal(size=dim)
            d /= np.linalg.norm(d)
            qs.append(self.p1(d) / self.p0(d))
        q_inf, q_sup = min(qs), max(qs)
        # sampled inf/sup only bracket the true ones: allow a small slack
        slack = 0.02 * (q_sup - q_inf) + 1e-12
        ok = (
            0 < self.lam_minus < q_inf
            and q_inf <= self.lam0_minus + slack
            and self.lam0_plus <= q_sup + slack
            and q_sup < self.lam_plus
        )
        if not ok:
            raise StratMapError("interpolation parameters violate the ordering")

    def v_plus(self, x) -> bool:
        return self.p0(x) >= 1.0 and self.p1(x) <= self.lam_plus

    def v_minus(self, x) -> bool:
        return self.p1(x) >= self.lam_minus and self.p0(x) <= 1.0


def interp_two_surfaces(p0, p1, lam_minus, lam_plus, lam0_minus, lam0_plus,
                        rng: np.random.Generator = None, dim: int = None) -> TwoSurfaceInterp:
    interp = TwoSurfaceInterp(p0, p1, lam_minus, lam_plus, lam0_minus, lam0_plus)
    if rng is not None:
        if dim is None:
            dim = getattr(p0, "dim", None) or getattr(p1, "dim")
        interp.validate_ordering(rng, dim)
    return interp


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


def scaling_map(gauge, lam: float, eps: float) -> StratMap:
    """lambda * id on the closed star body, identity outside the inflated shell.

    Stitches the linear core to the identity region with the two-surface
    interpolation applied to the body and its sqrt-scaled copy (split into
    the cases lambda >= 1 and lambda < 1).
    """
    if lam <= 0 or eps <= 0:
        raise StratMapError("need lambda > 0 and eps > 0")
    dim = gauge.dim
    outer_level = (1.0 + eps) * max(lam, 1.0)
    r_out = gauge.bounding_radius(outer_level)
    bbox = (-r_out * np.ones(dim), r_out * np.ones(dim))

    if lam == 1.0:
        return StratMap(
            dim=dim,
            pieces=[],
            inv_pieces=[],
            in_support=lambda x: False,
            bbox=bbox,
            boundary_sampler=lambda rng, n: [],
            family="scaling",
            params={"lam": lam, "eps": eps},
        )

    if lam >= 1.0:
        sq = math.sqrt(lam)
        lam_plus = (1.0 + eps) * sq
        lam0_plus = sq
    else:
        sq = math.sqrt(1.0 + eps)
        lam_plus = sq
        lam0_plus = lam / sq

    def p0(x):
        return gauge(x)

    def p1(x):
        return gauge(x) / sq

    # only the outward-sided interpolation is needed for the stitch
    interp = TwoSurfaceInterp(p0, p1, 0.5 / sq, lam_plus, 1.0 / sq, lam0_plus)
    qp = interp.qhat_plus

    shell_hi = outer_level  # p0 value of the fixed outer boundary

    core = Piece("core", lambda x: gauge(x) <= 1.0, lambda x: lam * np.asarray(x, dtype=float))
    shell = Piece(
        "shell",
        lambda x: 1.0 <= gauge(x) <= shell_hi,
        qp.forward,
    )
    inv_core = Piece("core", lambda y: gauge(y) <= lam, lambda y: np.asarray(y, dtype=float) / lam)
    inv_shell = Piece(
        "shell",
        lambda y: lam <= gauge(y) <= shell_hi,
        qp.inverse,
    )

    def boundary_sampler(rng, count):
        pts = []
        for _ in range(count):
            d = rng.normal(size=dim)
            level = 1.0 if rng.integers(2) else shell_hi
            pts.append(gauge.support_point(d, level))
        return pts

    breaks = [
        lambda pt: gauge(pt) - 1.0,
        lambda pt: gauge(pt) - shell_hi,
    ]
    return StratMap(
        dim=dim,
        pieces=[core, shell],
        inv_pieces=[inv_core, inv_shell],
        in_support=lambda x: gauge(x) < shell_hi,
        bbox=bbox,
        boundary_sampler=boundary_sampler,
        break_functions=breaks,
        family="scaling",
        params={"lam": lam, "eps": eps},
    )


# ---------------------------------------------------------------------------
# Rotation
# ---------------------------------------------------------------------------


def rotation_map(x_gen: np.ndarray, r1: float, r2: float) -> StratMap:
    """Rotation e^{a(|x|) X} x: full strength inside r2, ramped off by r1."""
    x_gen = np.asarray(x_gen, dtype=float)
    if not (r1 > r2 > 0):
        raise StratMapError("need r1 > r2 > 0")
    if np.linalg.norm(x_gen + x_gen.T) > 1e-12:
        raise StratMapError("generator must be antisymmetric")
    dim = x_gen.shape[0]
    evals, vecs = np.linalg.eigh(1j * x_gen)

    def rot(angle_scale: float) -> np.ndarray:
        return ((vecs * np.exp(-1j * angle_scale * evals)) @ vecs.conj().T).real

    full = rot(1.0)
    full_inv = rot(-1.0)

    def ramp(r: float) -> float:
        if r >= r1:
            return 0.0
        return (r1 - r) / (r1 - r2)

    def fwd_annulus(x):
        x = np.asarray(x, dtype=float)
        s = ramp(np.linalg.norm(x))
        if s == 0.0:
            return x
        return rot(s) @ x

    def inv_annulus_fn(y):
        y = np.asarray(y, dtype=float)
        s = ramp(np.linalg.norm(y))
        if s == 0.0:
            return y
        return rot(-s) @ y

    core = Piece("core", lambda x: np.linalg.norm(x) <= r2,
                 lambda x: full @ np.asarray(x, dtype=float))
    annulus = Piece("annulus", lambda x: r2 <= np.linalg.norm(x) <= r1, fwd_annulus)
    inv_core = Piece("core", lambda y: np.linalg.norm(y) <= r2,
                     lambda y: full_inv @ np.asarray(y, dtype=float))
    inv_annulus = Piece("annulus", lambda y: r2 <= np.linalg.norm(y) <= r1, inv_annulus_fn)

    def boundary_sampler(rng, count):
        pts = []
        for _ in range(count):
            d = rng.normal(size=dim)
            d /= np.linalg.norm(d)
            pts.append(d * (r2 if rng.integers(2) else r1))
        return pts

    return StratMap(
        dim=dim,
        pieces=[core, annulus],
        inv_pieces=[inv_core, inv_annulus],
        in_support=lambda x: np.linalg.norm(x) < r1,
        bbox=(-r1 * np.ones(dim), r1 * np.ones(dim)),
        boundary_sampler=boundary_sampler,
        break_functions=[
            lambda pt: np.linalg.norm(pt) - r2,
            lambda pt: np.linalg.norm(pt) - r1,
        ],
        family="rotation",
        params={"r1": r1, "r2": r2},
    )


# ---------------------------------------------------------------------------
# Bump
# ---------------------------------------------------------------------------


def bump_map(tau1: float, tau2: float, eps: float, a: float, n: int,
             axis_x: int = 0, axis_y: int = 1, sign: float = 1.0,
             z_core: float = None, z_outer: float = None) -> StratMap:
    """Box-local bump lifting the x-axis over [tau1, tau2] to height 2a.

    Changes only the y-coordinate inside the box
    C = [tau1-eps, tau2+eps] x [-2eps, 2a+2eps] x B_{2eps} and maps the axis
    segment to the polyline through (tau1-eps, 0), (tau1+eps, 2a),
    (tau2-eps, 2a), (tau2+eps, 0).  Pieces: three columns (the two slope
    columns and the flat middle) x three rows (shear strip around the axis,
    and the two pencil rows compressing toward the fixed box edges) x the
    transverse falloff zones (full-strength core and cosine annulus).

    ``axis_x``/``axis_y``/``sign`` generalize to bumps in other coordinate
    planes and downward bumps (used by ``winding_map``); ``z_core``/
    ``z_outer`` override the transverse falloff radii (defaults eps, 2 eps).
    """
    if not (tau1 < tau2):
        raise StratMapError("need tau1 < tau2")
    if not (0 < eps < 0.5 * (tau2 - tau1)):
        raise StratMapError("need 0 < eps < (tau2 - tau1)/2")
    if a <= 0:
        raise StratMapError("need a > 0")
    if n < 2:
        raise StratMapError("need ambient dimension >= 2")
    if axis_x == axis_y or max(axis_x, axis_y) >= n:
        raise StratMapError("bad coordinate axes")
    z_core = eps if z_core is None else float(z_core)
    z_outer = 2 * eps if z_outer is None else float(z_outer)
    if not (0 < z_core < z_outer):
        raise StratMapError("need 0 < z_core < z_outer")
    z_axes = [i for i in range(n) if i not in (axis_x, axis_y)]

    x_lo, x_hi = tau1 - eps, tau2 + eps
    y_bot, y_top = -2 * eps, 2 * a + 2 * eps
    slope = a / eps

    def shift(x: float) -> float:
        """Piecewise-linear lift profile r(x): 0 at the box x-faces, 2a flat."""
        if x <= x_lo or x >= x_hi:
            return 0.0
        if x <= tau1 + eps:
            return slope * (x - x_lo)
        if x >= tau2 - eps:
            return slope * (x_hi - x)
        return 2 * a

    def z_radius(pt) -> float:
        return math.sqrt(sum(pt[i] ** 2 for i in z_axes)) if z_axes else 0.0

    def ring_falloff(pt) -> float:
        # cosine falloff from 1 at the core radius to 0 at the outer radius;
        # with the default radii (eps, 2 eps) this is (1 - cos(pi |z|/eps))/2
        u = (z_radius(pt) - z_core) / (z_outer - z_core)
        return 0.5 * (1.0 + math.cos(math.pi * u))

    def yval(pt) -> float:
        return sign * pt[axis_y]

    def with_y(pt, y) -> np.ndarray:
        out = np.array(pt, dtype=float)
        out[axis_y] = sign * y
        return out

    # row maps: the strip |y| <= eps is sheared by the full lift r; the top
    # and bottom rows are phi_aux pencils y -> y + h (y0 - y) whose fixed
    # lines y0 sit on the box edges, with h chosen to meet the shear at
    # y = +-eps: h_top = r/(2a + eps), h_bottom = -r/eps
    def row_fwd(row: str, zone_g) -> Callable:
        def apply(pt):
            pt = np.asarray(pt, dtype=float)
            r = shift(pt[axis_x]) * zone_g(pt)
            y = yval(pt)
            if row == "strip":
                return with_y(pt, y + r)
            if row == "top":
                h = r / (2 * a + eps)
                return with_y(pt, y + h * (y_top - y))
            h = -r / eps
            return with_y(pt, y + h * (y_bot - y))

        return apply

    def row_inv(row: str, zone_g) -> Callable:
        def apply(pt):
            pt = np.asarray(pt, dtype=float)
            r = shift(pt[axis_x]) * zone_g(pt)
            yp = yval(pt)
            if row == "strip":
                return with_y(pt, yp - r)
            if row == "top":
                h = r / (2 * a + eps)
                return with_y(pt, (yp - h * y_top) / (1.0 - h))
            h = -r / eps
            return with_y(pt, (yp + h * 2 * eps) / (1.0 - h))

        return apply

    col_ranges = [
        ("left", x_lo, tau1 + eps),
        ("mid", tau1 + eps, tau2 - eps),
        ("right", tau2 - eps, x_hi),
    ]
    row_ranges = [
        ("bottom", y_bot, -eps),
        ("strip", -eps, eps),
        ("top", eps, y_top),
    ]
    if z_axes:
        zone_ranges = [
            ("zcore", 0.0, z_core, lambda pt: 1.0),
            ("zring", z_core, z_outer, ring_falloff),
        ]
    else:
        zone_ranges = [("planar", 0.0, 0.0, lambda pt: 1.0)]

    def make_contains(c_lo, c_hi, row, r_lo, r_hi, z_lo, z_hi, zone_g,
                      forward_side: bool):
        def contains(pt):
            x = pt[axis_x]
            if not (c_lo <= x <= c_hi):
                return False
            if z_axes:
                rz = z_radius(pt)
                if not (z_lo <= rz <= z_hi):
                    return False
            y = yval(pt)
            if forward_side:
                return r_lo <= y <= r_hi
            # image-side row bounds: the strip edges travel with the lift,
            # the box edges stay put
            off = shift(x) * zone_g(pt)
            lo = r_lo + off if row in ("strip", "top") else r_lo
            hi = r_hi + off if row in ("bottom", "strip") else r_hi
            return lo <= y <= hi

        return contains

    pieces, inv_pieces = [], []
    for cname, c_lo, c_hi in col_ranges:
        for rname, r_lo, r_hi in row_ranges:
            for zname, z_lo, z_hi, zone_g in zone_ranges:
                name = f"{cname}-{rname}-{zname}"
                pieces.append(
                    Piece(
                        name,
                        make_contains(c_lo, c_hi, rname, r_lo, r_hi, z_lo, z_hi, zone_g, True),
                        row_fwd(rname, zone_g),
                    )
                )
                inv_pieces.append(
                    Piece(
                        name,
                        make_contains(c_lo, c_hi, rname, r_lo, r_hi, z_lo, z_hi, zone_g, False),
                        row_inv(rname, zone_g),
                    )
                )

    lo = np.full(n, -z_outer)
    hi = np.full(n, z_outer)
    lo[axis_x], hi[axis_x] = x_lo, x_hi
    if sign > 0:
        lo[axis_y], hi[axis_y] = y_bot, y_top
    else:
        lo[axis_y], hi[axis_y] = -y_top, -y_bot

    def in_support(pt):
        pt = np.asarray(pt, dtype=float)
        if not (x_lo < pt[axis_x] < x_hi):
            return False
        if not (y_bot < yval(pt) < y_top):
            return False
        if z_axes:
            rz = math.sqrt(sum(pt[i] ** 2 for i in z_axes))
            if rz >= z_outer:
                return False
        return True

    def boundary_sampler(rng, count):
        pts = []
        for _ in range(count):
            pt = np.array([rng.uniform(l, h) for l, h in zip(lo, hi)])
            kind = rng.integers(3)
            if kind == 0:
                pt[axis_x] = [x_lo, tau1 + eps, tau2 - eps, x_hi][rng.integers(4)]
            elif kind == 1:
                pt[axis_y] = sign * [y_bot, -eps, eps, y_top][rng.integers(4)]
            elif z_axes:
                rz = [z_core, z_outer][rng.integers(2)]
                zdir = rng.normal(size=len(z_axes))
                zdir *= rz / np.linalg.norm(zdir)
                for i, zi in zip(z_axes, zdir):
                    pt[i] = zi
            pts.append(pt)
        return pts

    breaks = [
        (lambda c: (lambda pt: pt[axis_x] - c))(c)
        for c in (x_lo, tau1 + eps, tau2 - eps, x_hi)
    ] + [
        (lambda c: (lambda pt: sign * pt[axis_y] - c))(c)
        for c in (y_bot, -eps, eps, y_top)
    ]
    if z_axes:
        breaks += [
            (lambda c: (lambda pt: math.sqrt(sum(pt[i] ** 2 for i in z_axes)) - c))(c)
            for c in (z_core, z_outer)
        ]

    return StratMap(
        dim=n,
        pieces=pieces,
        inv_pieces=inv_pieces,
        in_support=in_support,
        bbox=(lo, hi),
        boundary_sampler=boundary_sampler,
        break_functions=breaks,
        family="bump",
        params={
            "tau1": tau1, "tau2": tau2, "eps": eps, "a": a, "n": n,
            "axis_x": axis_x, "axis_y": axis_y, "sign": sign,
            "z_core": z_core, "z_outer": z_outer,
        },
    )


# ---------------------------------------------------------------------------
# Winding
# ---------------------------------------------------------------------------


def winding_map(taus: Sequence[float], levels: Sequence[int],
                z_targets: Sequence[float], eps: float, height: float,
                n: int = 3) -> StratMap:
    """Steer the x-axis through prescribed surface strips at prescribed times.

    taus: strictly increasing, even count, mutual spacing > 2*eps; the j-th
    crossing happens at x = taus[j].  levels[j] selects the target strip;
    z_targets[i] is the first transverse coordinate of strip i.  The strips
    are understood to sit in the plane y = height; the lifted segments
    alternate between y = 0 and y = 2*height, so crossing signs alternate
    as (-1)^(j+1).

    Built as tents in the (x, z1)-plane (one per crossing, steering z1 to
    the target) composed with one y-bump per lifted block.
    """
    taus = [float(t) for t in taus]
    if len(taus) % 2 != 0:
        raise StratMapError("need an even number of crossing times")
    if len(taus) == 0:
        return StratMap(
            dim=n,
            pieces=[],
            inv_pieces=[],
            in_support=lambda x: False,
            bbox=(-np.ones(n), np.ones(n)),
            boundary_sampler=lambda rng, count: [],
            family="winding",
            params={"taus": [], "levels": [], "z_targets": list(z_targets),
                    "eps": eps, "height": height, "sign_base": 1},
        )
    if any(t2 - t1 <= 2 * eps for t1, t2 in zip(taus, taus[1:])):
        raise StratMapError("crossing times must be spaced more than 2*eps apart")
    if len(levels) != len(taus):
        raise StratMapError("one target level per crossing time")
    if n < 3:
        raise StratMapError("winding needs ambient dimension >= 3")
    if height <= 0 or eps <= 0:
        raise StratMapError("need positive height and eps")

    factors = []
    w = eps / 2.0
    c_max = max((abs(z_targets[l]) for l in levels), default=0.0)
    # tents first (the axis is still at y = 0, z = 0)
    for tau_j, level in zip(taus, levels):
        c = float(z_targets[level])
        if c == 0.0:
            continue
        tent = bump_map(
            tau_j - 3 * w / 4,
            tau_j + 3 * w / 4,
            w / 4,
            abs(c) / 2.0,
            n,
            axis_x=0,
            axis_y=2,
            sign=1.0 if c > 0 else -1.0,
            z_core=max(w, 2 * height) if n == 3 else max(w, 2 * height),
            z_outer=2 * max(w, 2 * height),
        )
        factors.append(tent)
    # y-bumps: lift each block [tau_{2k}, tau_{2k+1}] to 2*height
    for k in range(0, len(taus), 2):
        lift = bump_map(
            taus[k],
            taus[k + 1],
            eps,
            height,
            n,
            axis_x=0,
            axis_y=1,
            z_core=c_max + eps,
            z_outer=2 * (c_max + eps),
        )
        factors.append(lift)
    if not factors:
        raise StratMapError("winding with no displacement")
    composite = compose(*factors)
    composite.family = "winding"
    composite.params = {
        "taus": taus,
        "levels": list(levels),
        "z_targets": list(z_targets),
        "eps": eps,
        "height": height,
        "sign_base": 1,
    }
    return composite


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def verify_stratified(m: StratMap, samples: int, rng: np.random.Generator) -> dict:
    """Numerical certificate for a stratified map.

    Reports the worst boundary disagreement between piece formulas, the
    worst forward/inverse roundtrip error, the number of points outside the
    support that move at all (must be zero: the identity there is exact),
    and the smallest |det J| seen on per-piece interior samples.
    """
    lo, hi = m.bbox
    span = hi - lo
    boundary_max = 0.0
    for pt in m.boundary_sampler(rng, max(16, samples // 10)):
        vals = m.pieces_at(pt)
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                boundary_max = max(boundary_max, float(np.linalg.norm(vals[i] - vals[j])))
    roundtrip_max = 0.0
    jac_min = math.inf
    h = 1e-6
    for _ in range(samples):
        x = lo + rng.uniform(size=m.dim) * span
        y = m.forward(x)
        roundtrip_max = max(roundtrip_max, float(np.linalg.norm(m.inverse(y) - x)))
        z = m.inverse(x)
        roundtrip_max = max(roundtrip_max, float(np.linalg.norm(m.forward(z) - x)))
        name = m.piece_name(x)
        if name != "identity":
            # Jacobian only when the whole stencil stays in one piece
            stencil_ok = all(
                m.piece_name(x + dh) == name and m.piece_name(x - dh) == name
                for dh in (h * np.eye(m.dim))
            )
            if stencil_ok:
                jac = np.empty((m.dim, m.dim))
                for c in range(m.dim):
                    e = np.zeros(m.dim)
                    e[c] = h
                    jac[:, c] = (m.forward(x + e) - m.forward(x - e)) / (2 * h)
                jac_min = min(jac_min, abs(float(np.linalg.det(jac))))
    support_violations = 0
    outside_max = 0.0
    for _ in range(samples):
        x = lo - 0.5 * span + rng.uniform(size=m.dim) * 2.0 * span
        if m.in_support(x):
            continue
        y = m.forward(x)
        if not np.array_equal(y, x):
            support_violations += 1
            outside_max = max(outside_max, float(np.linalg.norm(y - x)))
    return {
        "boundary_max_mismatch": boundary_max,
        "roundtrip_max": roundtrip_max,
        "support_violations": support_violations,
        "outside_motion_max": outside_max,
        "jacobian_min_abs_det": None if jac_min is math.inf else jac_min,
        "samples": samples,
    }
