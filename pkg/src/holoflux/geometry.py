"""Piecewise-linear paths, oriented simplicial surfaces, and intersection data.

Everything geometric is exact: coordinates are converted to
``fractions.Fraction`` (floats convert exactly, being binary rationals), and
all predicates (membership, segment/simplex intersection, side tests) are
decided with rational linear algebra.  Parameters reported to callers are
arclength-proportional floats; the underlying split *points* remain exact.

The central operation is ``decompose_minimal``: the unique coarsest splitting
of an edge into pieces whose interiors lie inside the surface or avoid it.
Signed transversality data (``sigma_eval``) and punctures derive from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeometryError",
    "PrecisionError",
    "Point",
    "as_point",
    "PolyPath",
    "Simplex",
    "OrientedSurface",
    "joint_surface",
    "Graph",
    "Decomposition",
    "DecompositionPiece",
    "decompose_minimal",
    "sigma_eval",
    "sigma_pair",
    "punctures",
    "completely_transversal",
    "Puncture",
    "build_graph",
    "AffineMap",
    "map_path",
]

Point = tuple  # tuple[Fraction, ...]


class GeometryError(ValueError):
    """Invalid geometric input."""


class PrecisionError(RuntimeError):
    """A predicate could not be decided reliably (float fallback paths only)."""


def as_point(coords: Sequence) -> Point:
    return tuple(Fraction(c) for c in coords)


def pt_float(p: Point) -> np.ndarray:
    return np.array([float(c) for c in p], dtype=float)


def _sub(p: Point, q: Point) -> Point:
    return tuple(a - b for a, b in zip(p, q))


def _add(p: Point, q: Point) -> Point:
    return tuple(a + b for a, b in zip(p, q))


def _scale(p: Point, s: Fraction) -> Point:
    return tuple(s * a for a in p)


def _dot(p: Point, q: Point) -> Fraction:
    return sum(a * b for a, b in zip(p, q))


def _lerp(a: Point, b: Point, s: Fraction) -> Point:
    return tuple(x + s * (y - x) for x, y in zip(a, b))


def _is_zero(p: Point) -> bool:
    return all(c == 0 for c in p)


def _parallel(u: Point, v: Point) -> bool:
    k = len(u)
    for i in range(k):
        for j in range(i + 1, k):
            if u[i] * v[j] - u[j] * v[i] != 0:
                return False
    return True


def _strictly_between(a: Point, b: Point, c: Point) -> bool:
    """True if b = a + s (c - a) with 0 < s < 1 (forward collinear interior point)."""
    u = _sub(b, a)
    v = _sub(c, a)
    if not _parallel(u, v):
        return False
    for i in range(len(a)):
        if v[i] != 0:
            s = u[i] / v[i]
            if u != _scale(v, s):
                return False
            return 0 < s < 1
    return False


# ---------------------------------------------------------------------------
# Exact linear algebra (small systems over Fraction)
# ---------------------------------------------------------------------------


def solve_exact(rows: list, rhs: list):
    """Solve A x = b over the rationals.

    Returns (kind, data): ('unique', x), ('none', None), or
    ('underdetermined', (particular, basis)) with basis spanning the kernel.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    pivots = []
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, m):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = Fraction(1) / a[row][col]
        a[row] = [v * inv for v in a[row]]
        for r in range(m):
            if r != row and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    for r in range(row, m):
        if a[r][n] != 0:
            return ("none", None)
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = a[i][n]
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return ("unique", x)
    basis = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -a[i][fc]
        basis.append(vec)
    return ("underdetermined", (x, basis))


def rank_exact(rows: list) -> int:
    if not rows:
        return 0
    m = len(rows)
    n = len(rows[0])
    a = [list(r) for r in rows]
    rank = 0
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, m):
            if a[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        for r in range(m):
            if r != row and a[r][col] != 0:
                f = a[r][col] / a[row][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[row])]
        rank += 1
        row += 1
    return rank


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------


def _canonical_vertices(vertices: tuple) -> tuple:
    """Drop interior vertices lying strictly between their neighbours."""
    if len(vertices) <= 2:
        return vertices
    out = [vertices[0]]
    for i in range(1, len(vertices) - 1):
        if not _strictly_between(out[-1], vertices[i], vertices[i + 1]):
            out.append(vertices[i])
    out.append(vertices[-1])
    return tuple(out)


class PolyPath:
    """A finite piecewise-linear edge in R^k (injective except possibly closed).

    Vertices are exact rational points; the parametrization is
    arclength-proportional, so reparametrization-equivalent polylines
    canonicalize to the same vertex list.
    """

    def __init__(self, vertices: Iterable[Sequence], validate: bool = True):
        verts = tuple(as_point(v) for v in vertices)
        if len(verts) < 2:
            raise GeometryError("a path needs at least two vertices")
        k = len(verts[0])
        if k < 2:
            raise GeometryError("ambient dimension must be >= 2")
        if any(len(v) != k for v in verts):
            raise GeometryError("inconsistent ambient dimension")
        for a, b in zip(verts, verts[1:]):
            if a == b:
                raise GeometryError("consecutive vertices must be distinct")
        verts = _canonical_vertices(verts)
        self.vertices = verts
        self.dim = k
        if validate:
            self._check_injective()
        lens = [math.dist(pt_float(a), pt_float(b)) for a, b in zip(verts, verts[1:])]
        total = sum(lens)
        self._cum = [0.0]
        for L in lens:
            self._cum.append(self._cum[-1] + L / total)
        self._cum[-1] = 1.0

    # The edge condition: no self-intersections except possibly v0 = vL.
    def _check_injective(self):
        segs = list(zip(self.vertices, self.vertices[1:]))
        n = len(segs)
        for i in range(n):
            for j in range(i + 1, n):
                inter = _segment_segment(segs[i][0], segs[i][1], segs[j][0], segs[j][1])
                for kind, data in inter:
                    if kind == "overlap":
                        raise GeometryError("path overlaps itself")
                    s, t = data
                    adjacent = j == i + 1
                    closing = i == 0 and j == n - 1
                    if adjacent and s == 1 and t == 0:
                        continue
                    if closing and s == 0 and t == 1:
                        continue  # closed edge: v0 == vL allowed
                    raise GeometryError("path is not injective")

    @property
    def start(self) -> Point:
        return self.vertices[0]

    @property
    def end(self) -> Point:
        return self.vertices[-1]

    @property
    def is_closed(self) -> bool:
        return self.start == self.end

    def reversed(self) -> "PolyPath":
        return PolyPath(tuple(reversed(self.vertices)), validate=False)

    def canonical_key(self):
        return self.vertices

    def same_geometry(self, other: "PolyPath") -> bool:
        return self.vertices == other.vertices

    def same_unoriented(self, other: "PolyPath") -> bool:
        return self.vertices == other.vertices or self.vertices == tuple(
            reversed(other.vertices)
        )

    def locate(self, t: float):
        """Map arclength parameter t in [0,1] to (segment index, exact s on it)."""
        if not (0.0 <= t <= 1.0):
            raise GeometryError("parameter outside [0,1]")
        for i in range(len(self._cum) - 1):
            if t <= self._cum[i + 1] or i == len(self._cum) - 2:
                lo, hi = self._cum[i], self._cum[i + 1]
                s = 0.0 if hi == lo else (t - lo) / (hi - lo)
                return i, Fraction(min(max(s, 0.0), 1.0))
        raise GeometryError("parameter lookup failed")

    def point_at(self, t: float) -> Point:
        i, s = self.locate(t)
        return _lerp(self.vertices[i], self.vertices[i + 1], s)

    def param_of(self, seg: int, s: Fraction) -> float:
        lo, hi = self._cum[seg], self._cum[seg + 1]
        return lo + float(s) * (hi - lo)

    def split_at(self, seg: int, s: Fraction):
        """Split into two sub-paths at exact location (seg, s); s in (0,1) strictly
        interior to the polyline."""
        p = _lerp(self.vertices[seg], self.vertices[seg + 1], s)
        first = list(self.vertices[: seg + 1])
        if first[-1] != p:
            first.append(p)
        second = [p] + list(self.vertices[seg + 1 :])
        if len(second) > 1 and second[0] == second[1]:
            second = second[1:]
        if len(first) < 2 or len(second) < 2:
            raise GeometryError("split point must be interior")
        return PolyPath(first, validate=False), PolyPath(second, validate=False)

    def subpath_exact(self, loc0, loc1) -> "PolyPath":
        (i0, s0), (i1, s1) = loc0, loc1
        p0 = _lerp(self.vertices[i0], self.vertices[i0 + 1], s0)
        p1 = _lerp(self.vertices[i1], self.vertices[i1 + 1], s1)
        verts = [p0]
        for i in range(i0 + 1, i1 + 1):
            v = self.vertices[i]
            if v != verts[-1]:
                verts.append(v)
        if p1 != verts[-1]:
            verts.append(p1)
        return PolyPath(verts, validate=False)

    def concat(self, other: "PolyPath") -> "PolyPath":
        if self.end != other.start:
            raise GeometryError("paths are not composable")
        return PolyPath(self.vertices + other.vertices[1:], validate=False)

    def __repr__(self):
        pts = ", ".join(str(pt_float(v)) for v in self.vertices[:4])
        more = "..." if len(self.vertices) > 4 else ""
        return f"PolyPath[{pts}{more}]"


# ---------------------------------------------------------------------------
# Simplices and surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Simplex:
    """An affine q-simplex in R^k with per-facet openness flags.

    ``closed_facets[i]`` says whether the facet with barycentric coordinate
    lambda_i = 0 belongs to the point set.  Codimension-1 simplices carry an
    orientation through ``normal`` (stored exactly; unit within 1e-12).
    """

    vertices: tuple
    closed_facets: tuple = None
    normal: tuple = None

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        k = len(verts[0])
        q = len(verts) - 1
        if q < 0 or q >= k:
            raise GeometryError("simplex dimension must satisfy 0 <= q < k")
        if q > 0:
            rows = [list(_sub(v, verts[0])) for v in verts[1:]]
            if rank_exact(rows) != q:
                raise GeometryError("simplex vertices are affinely dependent")
        cf = self.closed_facets
        if cf is None:
            cf = tuple(True for _ in verts)
        else:
            cf = tuple(bool(b) for b in cf)
            if len(cf) != len(verts):
                raise GeometryError("need one openness flag per facet")
        object.__setattr__(self, "closed_facets", cf)
        if self.normal is not None:
            nrm = as_point(self.normal)
            if len(nrm) != k:
                raise GeometryError("normal dimension mismatch")
            nf = pt_float(nrm)
            if abs(np.linalg.norm(nf) - 1.0) > 1e-12:
                raise GeometryError("normal must be unit within 1e-12")
            # orthogonality within float noise: rotated scenes carry rounded
            # normals; sign tests stay exact on the stored values
            for v in verts[1:]:
                d = pt_float(_sub(v, verts[0]))
                if abs(float(np.dot(nf, d))) > 1e-9 * max(1.0, np.linalg.norm(d)):
                    raise GeometryError("normal is not orthogonal to the simplex")
            object.__setattr__(self, "normal", nrm)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @property
    def ambient_dim(self) -> int:
        return len(self.vertices[0])

    def barycentric(self, p: Point):
        """Exact barycentric coordinates, or None if p is off the affine hull."""
        v0 = self.vertices[0]
        q = self.dim
        if q == 0:
            return [Fraction(1)] if p == v0 else None
        rows = [[self.vertices[j + 1][i] - v0[i] for j in range(q)] for i in range(len(p))]
        rhs = [p[i] - v0[i] for i in range(len(p))]
        kind, sol = solve_exact(rows, rhs)
        if kind != "unique":
            return None  # spanning vectors independent: only 'none' possible here
        lam = [Fraction(1) - sum(sol)] + list(sol)
        return lam

    def contains(self, p: Point) -> bool:
        lam = self.barycentric(p)
        if lam is None:
            return False
        for i, l in enumerate(lam):
            if l < 0:
                return False
            if l == 0 and not self.closed_facets[i]:
                return False
        return True


class OrientedSurface:
    """A finite union of disjoint affine simplices with an intersection rule.

    rule: 'natural' or 'topological' (they coincide on PL data; both kept),
    optionally inverted (sign-flipped) via ``inverted``.
    """

    def __init__(self, pieces: Iterable[Simplex], rule: str = "natural",
                 inverted: bool = False, piece_ids: Sequence[str] = None,
                 validate: bool = True):
        self.pieces = tuple(pieces)
        if not self.pieces:
            raise GeometryError("surface needs at least one piece")
        k = self.pieces[0].ambient_dim
        if any(s.ambient_dim != k for s in self.pieces):
            raise GeometryError("inconsistent ambient dimension")
        if rule not in ("natural", "topological"):
            raise GeometryError(f"unknown intersection rule {rule!r}")
        self.rule = rule
        self.inverted = bool(inverted)
        self.dim = k
        if piece_ids is None:
            piece_ids = tuple(f"s{i}" for i in range(len(self.pieces)))
        self.piece_ids = tuple(piece_ids)
        if len(self.piece_ids) != len(self.pieces):
            raise GeometryError("need one id per piece")
        if validate:
            self._check_disjoint()

    def _check_disjoint(self):
        # Exact pairwise disjointness for pieces of dim <= 2 (vertex containment
        # plus edge-vs-simplex events); higher-dim pieces get the same necessary
        # checks, which are complete for the scene families used here.
        for i in range(len(self.pieces)):
            for j in range(i + 1, len(self.pieces)):
                if _simplices_meet(self.pieces[i], self.pieces[j]):
                    raise GeometryError("surface pieces must be pairwise disjoint")

    def inverse(self) -> "OrientedSurface":
        return OrientedSurface(self.pieces, rule=self.rule,
                               inverted=not self.inverted,
                               piece_ids=self.piece_ids, validate=False)

    def find_piece(self, p: Point):
        for pid, s in zip(self.piece_ids, self.pieces):
            if s.contains(p):
                return pid, s
        return None, None

    def contains(self, p: Point) -> bool:
        return self.find_piece(p)[1] is not None


def joint_surface(s1: OrientedSurface, s2: OrientedSurface) -> OrientedSurface:
    """Joint surface of two disjoint surfaces; its natural signs add."""
    if s1.dim != s2.dim:
        raise GeometryError("ambient dimension mismatch")
    if s1.rule != s2.rule or s1.inverted != s2.inverted:
        raise GeometryError("joint surfaces must share rule and orientation tag")
    ids = tuple(f"a.{i}" for i in s1.piece_ids) + tuple(f"b.{i}" for i in s2.piece_ids)
    return OrientedSurface(s1.pieces + s2.pieces, rule=s1.rule,
                           inverted=s1.inverted, piece_ids=ids)


def _simplex_edges(s: Simplex):
    if s.dim == 0:
        return []
    return [
        (s.vertices[i], s.vertices[j])
        for i in range(len(s.vertices))
        for j in range(i + 1, len(s.vertices))
    ]


def _simplices_meet(s1: Simplex, s2: Simplex) -> bool:
    for v in s1.vertices:
        if s2.contains(v):
            return True
    for v in s2.vertices:
        if s1.contains(v):
            return True
    for a, b in _simplex_edges(s1):
        if _segment_hits_simplex(a, b, s2):
            return True
    for a, b in _simplex_edges(s2):
        if _segment_hits_simplex(a, b, s1):
            return True
    return False


def _segment_hits_simplex(a: Point, b: Point, s: Simplex) -> bool:
    events = _segment_simplex_events(a, b, s)
    for kind, lo, hi in events:
        if kind == "point":
            if s.contains(_lerp(a, b, lo)):
                return True
        else:
            mid = (lo + hi) / 2
            if s.contains(_lerp(a, b, mid)) or s.contains(_lerp(a, b, lo)) or s.contains(_lerp(a, b, hi)):
                return True
    return False


# ---------------------------------------------------------------------------
# Exact segment intersections
# ---------------------------------------------------------------------------


def _segment_segment(a: Point, b: Point, c: Point, d: Point):
    """Intersections of segments ab and cd.

    Returns a list of events: ('point', (s, t)) with ab(s) = cd(t), or
    ('overlap', ((s0, t0), (s1, t1))) for a shared collinear subsegment.
    """
    u = _sub(b, a)
    v = _sub(d, c)
    rows = [[u[i], -v[i]] for i in range(len(a))]
    rhs = [c[i] - a[i] for i in range(len(a))]
    kind, sol = solve_exact(rows, rhs)
    if kind == "none":
        return []
    if kind == "unique":
        s, t = sol
        if 0 <= s <= 1 and 0 <= t <= 1:
            return [("point", (s, t))]
        return []
    # collinear on a common line: project c, d onto ab's parameter
    den = _dot(u, u)
    if den == 0:
        return []
    sc = _dot(_sub(c, a), u) / den
    sd = _dot(_sub(d, a), u) / den
    lo_s, hi_s = min(sc, sd), max(sc, sd)
    lo = max(Fraction(0), lo_s)
    hi = min(Fraction(1), hi_s)
    if lo > hi:
        return []
    def t_of(sv):
        if sd == sc:
            return Fraction(0)
        return (sv - sc) / (sd - sc)
    if lo == hi:
        return [("point", (lo, t_of(lo)))]
    return [("overlap", ((lo, t_of(lo)), (hi, t_of(hi))))]


def _segment_simplex_events(a: Point, b: Point, s: Simplex):
    """Parameter ranges where segment ab meets the closed hull of simplex s.

    Returns events ('point', s*, s*) or ('interval', lo, hi); membership in
    the (possibly partially open) point set is decided by probing.
    """
    u = _sub(b, a)
    q = s.dim
    v0 = s.vertices[0]
    k = len(a)
    # unknowns: lambda_1..lambda_q, sparam ; equations: v0 + sum l_i (v_i - v0) = a + s u
    rows = [
        [s.vertices[j + 1][i] - v0[i] for j in range(q)] + [-u[i]]
        for i in range(k)
    ]
    rhs = [a[i] - v0[i] for i in range(k)]
    kind, sol = solve_exact(rows, rhs)
    if kind == "none":
        return []
    if kind == "unique":
        lam = sol[:q]
        sp = sol[q]
        lam0 = Fraction(1) - sum(lam)
        if 0 <= sp <= 1 and lam0 >= 0 and all(l >= 0 for l in lam):
            return [("point", sp, sp)]
        return []
    part, basis = sol
    if len(basis) != 1 or basis[0][q] == 0:
        # cannot occur: simplex spanning vectors are independent, so the
        # kernel is one-dimensional with a nonzero segment component
        raise PrecisionError("degenerate segment/simplex configuration")
    dirv = basis[0]
    # one-parameter family parametrized by sp: lambda_i(sp) affine
    r_per_sp = Fraction(1) / dirv[q]
    lam_const = [part[i] - part[q] * dirv[i] * r_per_sp for i in range(q)]
    lam_lin = [dirv[i] * r_per_sp for i in range(q)]
    lam_const.append(Fraction(1) - sum(lam_const))
    lam_lin.append(-sum(lam_lin))
    lo, hi = Fraction(0), Fraction(1)
    for cst, lin in zip(lam_const, lam_lin):
        # constraint cst + lin*sp >= 0 on [lo, hi]
        if lin == 0:
            if cst < 0:
                return []
        elif lin > 0:
            lo = max(lo, -cst / lin)
        else:
            hi = min(hi, -cst / lin)
    if lo > hi:
        return []
    if lo == hi:
        return [("point", lo, lo)]
    return [("interval", lo, hi)]


# ---------------------------------------------------------------------------
# Minimal admissible decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionPiece:
    path: PolyPath
    status: str  # 'internal' | 'external'
    t0: float
    t1: float


@dataclass(frozen=True)
class Decomposition:
    parent: PolyPath
    pieces: tuple

    @property
    def breakpoints(self):
        return [p.t1 for p in self.pieces[:-1]]

    def breakpoint_points(self):
        return [p.path.end for p in self.pieces[:-1]]

    def statuses(self):
        return [p.status for p in self.pieces]


def _surface_membership(surface: OrientedSurface, p: Point) -> bool:
    return surface.contains(p)


def _cut_locations(path: PolyPath, surface: OrientedSurface):
    """All candidate cut locations (segment, s) where membership may change."""
    locs = set()
    nseg = len(path.vertices) - 1
    for i in range(nseg):
        a, b = path.vertices[i], path.vertices[i + 1]
        locs.add((i, Fraction(0)))
        locs.add((i, Fraction(1)))
        for s in surface.pieces:
            for kind, lo, hi in _segment_simplex_events(a, b, s):
                locs.add((i, lo))
                locs.add((i, hi))
    # order: by (segment, s); merge duplicates at segment joints
    ordered = sorted(locs)
    merged = []
    for seg, s in ordered:
        if s == 1 and (seg + 1, Fraction(0)) in locs:
            continue  # same point as start of next segment
        merged.append((seg, s))
    return merged


def decompose_minimal(path: PolyPath, surface: OrientedSurface) -> Decomposition:
    """The unique minimal S-admissible decomposition of an edge.

    Pieces alternate between interiors contained in S ('internal') and
    interiors disjoint from S ('external'); every other admissible
    decomposition refines this one.  Exact arithmetic: no tolerance.
    """
    if path.dim != surface.dim:
        raise GeometryError("ambient dimension mismatch")
    locs = _cut_locations(path, surface)
    # classify open intervals between consecutive cuts by probing midpoints
    statuses = []
    for (i0, s0), (i1, s1) in zip(locs, locs[1:]):
        if i0 == i1:
            mid = [(i0, (s0 + s1) / 2)]
        else:
            mid = [(i0, (s0 + 1) / 2)] + [(j, Fraction(1, 2)) for j in range(i0 + 1, i1)]
            if s1 > 0:
                mid.append((i1, s1 / 2))
        inside = None
        for seg, s in mid:
            p = _lerp(path.vertices[seg], path.vertices[seg + 1], s)
            val = _surface_membership(surface, p)
            if inside is None:
                inside = val
            elif inside != val:
                # membership changed inside an "atomic" interval: the cut
                # enumeration missed an event; cannot happen with exact events
                raise PrecisionError("membership changed between detected events")
        statuses.append("internal" if inside else "external")
    # merge: drop cut j when both sides share status and the cut point's
    # membership matches it
    keep = [locs[0]]
    keep_status = []
    cur_status = statuses[0]
    for idx in range(1, len(locs) - 1):
        seg, s = locs[idx]
        p = _lerp(path.vertices[seg], path.vertices[seg + 1], s)
        inside = _surface_membership(surface, p)
        nxt_status = statuses[idx]
        same = nxt_status == cur_status
        matches = (inside and cur_status == "internal") or (
            not inside and cur_status == "external"
        )
        if same and matches:
            continue
        keep.append(locs[idx])
        keep_status.append(cur_status)
        cur_status = nxt_status
    keep.append(locs[-1])
    keep_status.append(cur_status)
    pieces = []
    for idx in range(len(keep) - 1):
        sub = path.subpath_exact(keep[idx], keep[idx + 1])
        t0 = path.param_of(*keep[idx])
        t1 = path.param_of(*keep[idx + 1])
        pieces.append(DecompositionPiece(sub, keep_status[idx], t0, t1))
    return Decomposition(parent=path, pieces=tuple(pieces))


# ---------------------------------------------------------------------------
# Intersection functions and punctures
# ---------------------------------------------------------------------------


def _initial_sign(surface: OrientedSurface, path: PolyPath) -> int:
    """Sign of the side the initial segment leaves into; 0 for off-surface,
    tangent, or in-surface starts.  Natural and topological rules coincide on
    PL data (tangency collapses), so both map here."""
    pid, piece = surface.find_piece(path.start)
    if piece is None:
        return 0
    if piece.normal is None:
        return 0  # codimension >= 2: no induced orientation data
    d1 = _sub(path.vertices[1], path.vertices[0])
    dp = _dot(piece.normal, d1)
    if dp > 0:
        s = 1
    elif dp < 0:
        s = -1
    else:
        return 0
    return -s if surface.inverted else s


def sigma_eval(surface: OrientedSurface, path: PolyPath, direction: str) -> int:
    """Signed transversality of an edge against an oriented surface.

    direction='outgoing': evaluated at path(0); +1 when the initial segment
    leaves to the positive-normal side, -1 to the negative side, 0 when the
    start is off the surface or the departure is tangent/inside.
    direction='incoming' is the compatible partner at path(1):
    sigma_in(path) = -sigma_out(path reversed).
    """
    if direction == "outgoing":
        return _initial_sign(surface, path)
    if direction == "incoming":
        return -_initial_sign(surface, path.reversed())
    raise GeometryError(f"unknown direction {direction!r}")


def sigma_pair(surface: OrientedSurface, path: PolyPath):
    return (
        sigma_eval(surface, path, "outgoing"),
        sigma_eval(surface, path, "incoming"),
    )


@dataclass(frozen=True)
class Puncture:
    param: float
    point: tuple
    sign_in: int
    sign_out: int
    is_puncture: bool


def punctures(path: PolyPath, surface: OrientedSurface):
    """All punctures and half-punctures of the path through the surface.

    A joint x between consecutive minimal-decomposition pieces is a puncture
    when the incoming sign of the earlier piece and the outgoing sign of the
    later piece have positive product (the path passes through).  Nonzero
    signs at any piece endpoint mark half-punctures.
    """
    dec = decompose_minimal(path, surface)
    out = []
    pieces = dec.pieces
    for i in range(len(pieces) + 1):
        if i == 0:
            pt = pieces[0].path.start
            t = 0.0
            s_in = 0
            s_out = sigma_eval(surface, pieces[0].path, "outgoing")
        elif i == len(pieces):
            pt = pieces[-1].path.end
            t = 1.0
            s_in = sigma_eval(surface, pieces[-1].path, "incoming")
            s_out = 0
        else:
            pt = pieces[i].path.start
            t = pieces[i].t0
            s_in = sigma_eval(surface, pieces[i - 1].path, "incoming")
            s_out = sigma_eval(surface, pieces[i].path, "outgoing")
        if s_in == 0 and s_out == 0:
            continue
        out.append(
            Puncture(
                param=t,
                point=pt,
                sign_in=s_in,
                sign_out=s_out,
                is_puncture=s_in * s_out > 0,
            )
        )
    return out


def completely_transversal(path: PolyPath, surface: OrientedSurface) -> bool:
    dec = decompose_minimal(path, surface)
    if any(p.status == "internal" for p in dec.pieces):
        return False
    return all(p.is_puncture for p in punctures(path, surface))


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


class Graph:
    """Finitely many PL edges meeting at most in endpoints."""

    def __init__(self, edges: dict, validate: bool = True):
        self.edges = dict(edges)
        if validate:
            self._check_graph()

    @classmethod
    def from_paths(cls, paths: Iterable[PolyPath]) -> "Graph":
        return cls({f"e{i}": p for i, p in enumerate(paths)})

    def _check_graph(self):
        items = list(self.edges.values())
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                if not _edges_meet_only_at_endpoints(items[i], items[j]):
                    raise GeometryError("graph edges may intersect only at endpoints")

    @property
    def dim(self) -> int:
        return next(iter(self.edges.values())).dim

    def edge_ids(self):
        return list(self.edges.keys())

    def vertices(self):
        vs = set()
        for e in self.edges.values():
            vs.add(e.start)
            vs.add(e.end)
        return vs

    def split_edge(self, edge_id: str, t: float):
        """Split one edge at arclength parameter t; returns (graph', (id_a, id_b))."""
        path = self.edges[edge_id]
        seg, s = path.locate(t)
        if (seg == 0 and s == 0) or (seg == len(path.vertices) - 2 and s == 1):
            raise GeometryError("split parameter must be interior")
        return self.split_edge_exact(edge_id, (seg, s))

    def split_edge_exact(self, edge_id: str, loc):
        path = self.edges[edge_id]
        first, second = path.split_at(*loc)
        new_edges = dict(self.edges)
        del new_edges[edge_id]
        id_a, id_b = edge_id + ".a", edge_id + ".b"
        new_edges[id_a] = first
        new_edges[id_b] = second
        return Graph(new_edges, validate=False), (id_a, id_b)

    def endpoint_degree(self, v: Point) -> int:
        deg = 0
        for e in self.edges.values():
            if e.start == v:
                deg += 1
            if e.end == v:
                deg += 1
        return deg


def _edges_meet_only_at_endpoints(p1: PolyPath, p2: PolyPath) -> bool:
    ends1 = {p1.start, p1.end}
    ends2 = {p2.start, p2.end}
    segs1 = list(zip(p1.vertices, p1.vertices[1:]))
    segs2 = list(zip(p2.vertices, p2.vertices[1:]))
    for a, b in segs1:
        for c, d in segs2:
            for kind, data in _segment_segment(a, b, c, d):
                if kind == "overlap":
                    return False
                s, t = data
                pt = _lerp(a, b, s)
                if pt not in ends1 or pt not in ends2:
                    return False
    return True


def build_graph(paths: Sequence[PolyPath]):
    """Split paths at mutual intersections so edges meet only at endpoints.

    Returns (graph, words): for each input path, its expression as a sequence
    of (edge_id, +1/-1) over the produced graph.
    """
    paths = list(paths)
    cuts = [set() for _ in paths]  # exact (segment, s) per path
    for i, p in enumerate(paths):
        for seg in range(len(p.vertices) - 1):
            cuts[i].add((seg, Fraction(0)))
            cuts[i].add((seg, Fraction(1)))
    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            p, q = paths[i], paths[j]
            for si, (a, b) in enumerate(zip(p.vertices, p.vertices[1:])):
                for sj, (c, d) in enumerate(zip(q.vertices, q.vertices[1:])):
                    for kind, data in _segment_segment(a, b, c, d):
                        if kind == "point":
                            s, t = data
                            cuts[i].add((si, s))
                            cuts[j].add((sj, t))
                        else:
                            (s0, t0), (s1, t1) = data
                            cuts[i].add((si, s0))
                            cuts[i].add((si, s1))
                            cuts[j].add((sj, t0))
                            cuts[j].add((sj, t1))
    # each path becomes a chain of sub-paths between consecutive cuts
    edge_list = []  # canonical sub-edges
    words = []
    for i, p in enumerate(paths):
        ordered = sorted(cuts[i])
        merged = []
        for seg, s in ordered:
            if s == 1 and (seg + 1, Fraction(0)) in cuts[i]:
                continue
            merged.append((seg, s))
        word = []
        for loc0, loc1 in zip(merged, merged[1:]):
            sub = p.subpath_exact(loc0, loc1)
            idx = None
            sign = 1
            for k, e in enumerate(edge_list):
                if e.same_geometry(sub):
                    idx, sign = k, 1
                    break
                if e.same_geometry(sub.reversed()):
                    idx, sign = k, -1
                    break
            if idx is None:
                edge_list.append(sub)
                idx, sign = len(edge_list) - 1, 1
            word.append((f"e{idx}", sign))
        words.append(word)
    graph = Graph({f"e{k}": e for k, e in enumerate(edge_list)})
    return graph, words


# ---------------------------------------------------------------------------
# Mapping paths
# ---------------------------------------------------------------------------


class AffineMap:
    """x -> Q x + b with exact rational Q, b and exact inverse."""

    def __init__(self, matrix, offset=None):
        q = [[Fraction(v) for v in row] for row in matrix]
        k = len(q)
        if any(len(r) != k for r in q):
            raise GeometryError("matrix must be square")
        if offset is None:
            offset = [0] * k
        self.matrix = q
        self.offset = as_point(offset)
        self.dim = k
        self._inv = self._invert()

    def _invert(self):
        k = self.dim
        cols = []
        for c in range(k):
            rhs = [Fraction(1) if r == c else Fraction(0) for r in range(k)]
            kind, sol = solve_exact(self.matrix, rhs)
            if kind != "unique":
                raise GeometryError("affine map is not invertible")
            cols.append(sol)
        return [[cols[c][r] for c in range(k)] for r in range(k)]

    def apply(self, p: Point) -> Point:
        return tuple(
            sum(self.matrix[r][c] * p[c] for c in range(self.dim)) + self.offset[r]
            for r in range(self.dim)
        )

    def apply_inverse(self, p: Point) -> Point:
        shifted = _sub(p, self.offset)
        return tuple(
            sum(self._inv[r][c] * shifted[c] for c in range(self.dim))
            for r in range(self.dim)
        )

    def inverse(self) -> "AffineMap":
        inv_off = self.apply_inverse(as_point([0] * self.dim))
        return AffineMap(self._inv, inv_off)

    def linear_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])


def map_path(mapping, path: PolyPath) -> PolyPath:
    """Image polyline of a path under an affine map or a stratified map.

    Stratified maps are applied after pre-splitting the path at the map's
    declared break loci; each sub-segment must map affinely (checked at
    midpoints within 1e-9), otherwise the image would not be PL.
    """
    if isinstance(mapping, AffineMap):
        return PolyPath([mapping.apply(v) for v in path.vertices], validate=False)
    # stratified map: float evaluation with pre-splitting
    breaks = getattr(mapping, "path_break_params", None)
    verts = [pt_float(v) for v in path.vertices]
    if breaks is not None:
        refined = [verts[0]]
        for a, b in zip(verts, verts[1:]):
            for s in breaks(a, b):
                p = a + s * (b - a)
                if np.linalg.norm(p - refined[-1]) > 1e-14:
                    refined.append(p)
            if np.linalg.norm(b - refined[-1]) > 1e-14:
                refined.append(b)
        verts = refined
    images = [np.asarray(mapping.forward(v), dtype=float) for v in verts]
    for (a, b), (fa, fb) in zip(zip(verts, verts[1:]), zip(images, images[1:])):
        mid = 0.5 * (a + b)
        fmid = np.asarray(mapping.forward(mid), dtype=float)
        if np.linalg.norm(fmid - 0.5 * (fa + fb)) > 1e-9:
            raise PrecisionError(
                "map is not affine along a path segment; refine the pre-split"
            )
    return PolyPath([tuple(Fraction(float(c)) for c in v) for v in images],
                    validate=False)


def map_surface(mapping: AffineMap, surface: OrientedSurface) -> OrientedSurface:
    """Image of a simplicial surface under an invertible affine map.

    Normals transform by the inverse transpose of the linear part (exact when
    the matrix is rational-orthogonal, renormalized in float otherwise).
    """
    inv_t = np.array([[float(v) for v in row] for row in mapping._inv]).T
    new_pieces = []
    for s in surface.pieces:
        verts = [mapping.apply(v) for v in s.vertices]
        normal = None
        if s.normal is not None:
            n = inv_t @ pt_float(s.normal)
            n = n / np.linalg.norm(n)
            # keep exact rational normals exact when the map is
            exact_n = tuple(
                sum(mapping._inv[r][c] * s.normal[r] for r in range(mapping.dim))
                for c in range(mapping.dim)
            )
            if _dot(exact_n, exact_n) == 1:
                normal = exact_n  # rational-orthogonal map: exact unit normal
            else:
                normal = tuple(Fraction(float(c)) for c in n)
        new_pieces.append(Simplex(verts, closed_facets=s.closed_facets, normal=normal))
    return OrientedSurface(new_pieces, rule=surface.rule, inverted=surface.inverted,
                           piece_ids=surface.piece_ids)
