"""Rational polytopes in halfspace (H) and vertex (V) presentation.

Conversions use the double description method on integer data; volumes use
a pulling triangulation of the face lattice, so every quantity here is an
exact :class:`~fractions.Fraction`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact import (
    Enclosure,
    LPInfeasible,
    RationalParseError,
    VecQ,
    affine_rank,
    det,
    dot,
    fmt,
    int_det,
    lcm,
    lp_maximize,
    primitive,
    rank,
    sqrt_enclosure,
    sub,
    to_fraction,
)


class DegeneratePolytopeError(ValueError):
    """Input is not full-dimensional (or is empty)."""


class UnboundedPolytopeError(ValueError):
    """An H-presentation does not describe a bounded set."""


class PolytopeInputError(ValueError):
    """Malformed polytope JSON; the message carries the location."""


@dataclass(frozen=True)
class HPolytope:
    """``{x : A x <= b}`` with rational data."""

    A: tuple
    b: tuple

    def __post_init__(self):
        A = tuple(tuple(to_fraction(x) for x in row) for row in self.A)
        b = tuple(to_fraction(x) for x in self.b)
        if len(A) != len(b) or not A:
            raise ValueError("A and b must be non-empty with equal length")
        if len({len(r) for r in A}) != 1:
            raise ValueError("rows of A must have equal length")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.A[0])

    @property
    def m(self) -> int:
        return len(self.A)

    @classmethod
    def from_inequalities(cls, A, b) -> "HPolytope":
        """Build an irredundant H-polytope; raises if unbounded or degenerate."""
        raw = cls(A, b)
        hull = _hull_from_h(raw)
        return cls(tuple(hull.A), tuple(hull.b))

    def scaled(self, sigma) -> "HPolytope":
        sigma = Fraction(sigma)
        return HPolytope(self.A, tuple(sigma * x for x in self.b))

    def translated(self, t: Sequence) -> "HPolytope":
        """The set ``P + t``."""
        return HPolytope(self.A, tuple(bj + dot(a, t) for a, bj in zip(self.A, self.b)))


@dataclass(frozen=True)
class VPolytope:
    """``conv(vertices)`` with rational vertices."""

    vertices: tuple

    def __post_init__(self):
        V = tuple(tuple(to_fraction(x) for x in v) for v in self.vertices)
        if not V or len({len(v) for v in V}) != 1:
            raise ValueError("vertices must be non-empty and of equal length")
        object.__setattr__(self, "vertices", V)

    @property
    def n(self) -> int:
        return len(self.vertices[0])

    @property
    def k(self) -> int:
        return len(self.vertices)

    @classmethod
    def from_points(cls, points) -> "VPolytope":
        """Convex hull of ``points``, keeping only the extreme ones."""
        hull = _hull_from_v(cls(points))
        return cls(tuple(hull.vertices))

    def scaled(self, sigma) -> "VPolytope":
        sigma = Fraction(sigma)
        return VPolytope(tuple(tuple(sigma * x for x in v) for v in self.vertices))

    def translated(self, t: Sequence) -> "VPolytope":
        return VPolytope(tuple(tuple(x + Fraction(s) for x, s in zip(v, t)) for v in self.vertices))


Polytope = HPolytope | VPolytope


# ---------------------------------------------------------------------------
# double description

def extreme_rays(rows: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{y : r.y >= 0 for r in rows}``.

    Rows are integer vectors; rays come back as primitive integer vectors.
    Raises ValueError when the cone is not pointed (rows do not span).
    """
    rows = [tuple(r) for r in rows]
    d = len(rows[0])
    # greedy choice of d independent rows for the initial simplicial cone
    basis_idx: list[int] = []
    for i, r in enumerate(rows):
        if rank([rows[j] for j in basis_idx] + [r]) > len(basis_idx):
            basis_idx.append(i)
            if len(basis_idx) == d:
                break
    if len(basis_idx) < d:
        raise ValueError("cone has a lineality space")
    B = [rows[i] for i in basis_idx]
    # rays of {B y >= 0}: columns of B^{-1}; adjugate columns avoid fractions
    D = int_det(B)
    rays: list[tuple[int, ...]] = []
    for k in range(d):
        col = []
        for j in range(d):
            minor = [[B[r][c] for c in range(d) if c != j] for r in range(d) if r != k]
            col.append((-1) ** (j + k) * int_det(minor))
        if D < 0:
            col = [-x for x in col]
        rays.append(primitive(col))
    order = basis_idx + [i for i in range(len(rows)) if i not in basis_idx]
    # zero sets indexed by position in ``order``
    zeros: list[int] = []
    for k in range(d):
        zeros.append(sum(1 << p for p in range(d) if p != k))

    for pos in range(d, len(order)):
        a = rows[order[pos]]
        vals = [sum(x * y for x, y in zip(a, r)) for r in rays]
        plus = [i for i, v in enumerate(vals) if v > 0]
        minus = [i for i, v in enumerate(vals) if v < 0]
        zero = [i for i, v in enumerate(vals) if v == 0]
        new_rays: list[tuple[int, ...]] = []
        new_zeros: list[int] = []
        for p in plus:
            for q in minus:
                common = zeros[p] & zeros[q]
                if bin(common).count("1") < d - 2:
                    continue
                adjacent = True
                for r in range(len(rays)):
                    if r != p and r != q and (zeros[r] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                ray = tuple(vals[p] * y - vals[q] * x for x, y in zip(rays[p], rays[q]))
                new_rays.append(primitive(ray))
                new_zeros.append(common | (1 << pos))
        keep = plus + zero
        zero_set = set(zero)
        rays = [rays[i] for i in keep] + new_rays
        zeros = [zeros[i] | ((1 << pos) if i in zero_set else 0) for i in keep] + new_zeros
    return rays


def _int_rows(A, b) -> list[tuple[int, ...]]:
    """Homogenized integer rows (b_j, -a_j) of the cone over ``A x <= b``."""
    out = []
    for a, bj in zip(A, b):
        row = (bj,) + tuple(-x for x in a)
        den = lcm(Fraction(x).denominator for x in row)
        out.append(tuple(int(Fraction(x) * den) for x in row))
    return out


@dataclass(frozen=True)
class Hull:
    """Both presentations of a full-dimensional polytope plus incidences.

    ``incidence[j]`` is the frozenset of vertex indices on facet ``j``.
    """

    vertices: tuple
    A: tuple
    b: tuple
    incidence: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices[0])


def _facet_rows(vertices, A, b):
    """Keep the facet-defining, pairwise non-proportional rows of ``A x <= b``."""
    n = len(vertices[0])
    kept_A, kept_b, inc, seen = [], [], [], set()
    for a, bj in zip(A, b):
        if all(x == 0 for x in a):
            continue
        tight = frozenset(i for i, v in enumerate(vertices) if dot(a, v) == bj)
        if len(tight) < n or affine_rank([vertices[i] for i in tight]) != n - 1:
            continue
        key = primitive((bj,) + tuple(a))
        if key in seen:
            continue
        seen.add(key)
        kept_A.append(tuple(a))
        kept_b.append(bj)
        inc.append(tight)
    return kept_A, kept_b, inc


@lru_cache(maxsize=256)
def _hull_from_h(P: HPolytope) -> Hull:
    n = P.n
    A = [a for a, bj in zip(P.A, P.b) if any(x != 0 for x in a) or bj < 0]
    b = [bj for a, bj in zip(P.A, P.b) if any(x != 0 for x in a) or bj < 0]
    if any(all(x == 0 for x in a) for a in A):
        raise DegeneratePolytopeError("infeasible constraint 0 <= negative")
    rows = _int_rows(A, b) + [(1,) + (0,) * n]
    try:
        rays = extreme_rays(rows)
    except ValueError as exc:
        raise UnboundedPolytopeError("halfspaces do not bound a polytope") from exc
    vertices = []
    for r in rays:
        if r[0] == 0:
            if any(r[1:]):
                raise UnboundedPolytopeError("recession direction %r" % (r[1:],))
            continue
        vertices.append(tuple(Fraction(x, r[0]) for x in r[1:]))
    if not vertices:
        raise DegeneratePolytopeError("empty polytope")
    vertices = sorted(set(vertices))
    if affine_rank(vertices) != n:
        raise DegeneratePolytopeError("polytope is not full-dimensional")
    kept_A, kept_b, inc = _facet_rows(vertices, A, b)
    return Hull(tuple(vertices), tuple(kept_A), tuple(kept_b), tuple(inc))


@lru_cache(maxsize=256)
def _hull_from_v(Q: VPolytope) -> Hull:
    n = Q.n
    pts = sorted(set(Q.vertices))
    if affine_rank(pts) != n:
        raise DegeneratePolytopeError("points do not affinely span R^%d" % n)
    rows = []
    for v in pts:
        row = (Fraction(1),) + tuple(-x for x in v)
        den = lcm(x.denominator for x in row)
        rows.append(tuple(int(x * den) for x in row))
    rays = extreme_rays(rows)
    A, b = [], []
    for r in rays:
        if not any(r[1:]):
            continue
        A.append(tuple(Fraction(x) for x in r[1:]))
        b.append(Fraction(r[0]))
    # drop points that are not vertices: their tight normals do not span
    verts = [
        v for v in pts
        if rank([a for a, bj in zip(A, b) if dot(a, v) == bj]) == n
    ]
    kept_A, kept_b, inc = _facet_rows(verts, A, b)
    return Hull(tuple(verts), tuple(kept_A), tuple(kept_b), tuple(inc))


def hull(P: Polytope) -> Hull:
    if isinstance(P, HPolytope):
        return _hull_from_h(P)
    if isinstance(P, VPolytope):
        return _hull_from_v(P)
    raise TypeError(f"expected HPolytope or VPolytope, got {type(P).__name__}")


def v_to_h(Q: VPolytope) -> HPolytope:
    """Irredundant H-presentation with primitive integer normals."""
    h = _hull_from_v(Q)
    return HPolytope(h.A, h.b)


def h_to_v(P: HPolytope) -> VPolytope:
    return VPolytope(_hull_from_h(P).vertices)


def as_h(P: Polytope) -> HPolytope:
    if isinstance(P, HPolytope):
        h = _hull_from_h(P)
        return P if len(h.A) == P.m else HPolytope(h.A, h.b)
    return v_to_h(P)


def as_v(P: Polytope) -> VPolytope:
    h = hull(P)
    if isinstance(P, VPolytope) and len(h.vertices) == P.k:
        return P
    return VPolytope(h.vertices)


# ---------------------------------------------------------------------------
# triangulation and volumes

def _face_facets(h: Hull, face: frozenset, dim: int) -> list[frozenset]:
    """Facets (dim-1 faces) of a face given by its vertex set."""
    out = []
    for inc in h.incidence:
        sub_face = face & inc
        if len(sub_face) < dim or sub_face == face or sub_face in out:
            continue
        if affine_rank([h.vertices[i] for i in sorted(sub_face)]) == dim - 1:
            out.append(sub_face)
    return out


def triangulate_face(h: Hull, face: frozenset, dim: int, apex: int | None = None,
                     _memo: dict | None = None) -> list[tuple[int, ...]]:
    """Pulling triangulation of a ``dim``-face into simplices of vertex indices."""
    memo = {} if _memo is None else _memo
    key = (face, apex)
    if key in memo:
        return memo[key]
    if dim == 0:
        result = [tuple(face)]
    else:
        top = min(face) if apex is None else apex
        result = []
        for sub_face in _face_facets(h, face, dim):
            if top in sub_face:
                continue
            for simplex in triangulate_face(h, sub_face, dim - 1, None, memo):
                result.append((top,) + simplex)
    memo[key] = result
    return result


def _simplex_volume(points) -> Fraction:
    p0 = points[0]
    n = len(p0)
    return abs(det([sub(p, p0) for p in points[1:]])) / math.factorial(n)


def volume(P: Polytope, apex: int = 0) -> Fraction:
    """Exact volume by fanning from vertex ``apex`` over the boundary triangulation."""
    h = hull(P)
    n = h.n
    face = frozenset(range(len(h.vertices)))
    total = Fraction(0)
    for s in triangulate_face(h, face, n, apex=apex):
        total += _simplex_volume([h.vertices[i] for i in s])
    return total


# ---------------------------------------------------------------------------
# facet data

@dataclass(frozen=True)
class FacetData:
    """Facet normals ``a``, offsets ``beta`` and normalized facet volumes ``omega``."""

    a: tuple
    beta: tuple
    omega: tuple
    norm2: tuple

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def n(self) -> int:
        return len(self.a[0])


class OriginNotInteriorError(ValueError):
    pass


def facet_data(P: HPolytope) -> FacetData:
    """Exact facet data of an origin-interior H-polytope.

    ``omega_j = (n / beta_j) * vol(conv({0} u F_j))``.
    """
    if not isinstance(P, HPolytope):
        raise TypeError("facet_data expects an HPolytope")
    if any(bj <= 0 for bj in P.b):
        raise OriginNotInteriorError("origin must be interior (all offsets > 0)")
    h = _hull_from_h(P)
    if len(h.A) != P.m:
        raise ValueError("H-presentation has redundant inequalities")
    n = P.n
    origin = tuple(Fraction(0) for _ in range(n))
    omegas = []
    memo: dict = {}
    for inc, bj in zip(h.incidence, h.b):
        pyramid = Fraction(0)
        for s in triangulate_face(h, inc, n - 1, _memo=memo):
            pyramid += _simplex_volume([origin] + [h.vertices[i] for i in s])
        omegas.append(n * pyramid / bj)
    return FacetData(
        a=h.A, beta=h.b, omega=tuple(omegas), norm2=tuple(dot(a, a) for a in h.A)
    )


def interior_point(P: Polytope) -> tuple[VecQ, Fraction]:
    """Rational point maximizing ``min_j (b_j - a_j.x)/||a_j||_1`` and that margin."""
    H = as_h(P)
    n = H.n
    A = [tuple(a) + (sum(abs(x) for x in a),) for a in H.A]
    c = (Fraction(0),) * n + (Fraction(1),)
    sol = lp_maximize(c, A, H.b)
    return sol.x[:n], sol.value


def translate_origin_interior(P: Polytope) -> HPolytope:
    """Translate so that the origin is interior (all offsets positive)."""
    H = as_h(P)
    x, margin = interior_point(H)
    if margin <= 0:
        raise DegeneratePolytopeError("polytope has empty interior")
    return H.translated(tuple(-t for t in x))


@lru_cache(maxsize=256)
def facets(P: Polytope) -> FacetData:
    """Facet data of ``P`` after translating the origin into its interior.

    Normals and ``omega`` do not depend on the translation.
    """
    H = as_h(P)
    if all(bj > 0 for bj in H.b):
        return facet_data(H)
    return facet_data(translate_origin_interior(H))


# ---------------------------------------------------------------------------
# surface area, scaling, isoperimetric bound

@dataclass(frozen=True)
class PolytopeSummary:
    n: int
    volume: Fraction
    surface: Enclosure
    iso_lower: Fraction


def surface_area(P: Polytope, bits: int = 60) -> Enclosure:
    """``S(P) = sum_j omega_j ||a_j||`` as a rational enclosure."""
    fd = facets(P)
    total = Enclosure(Fraction(0), Fraction(0))
    for w, nn in zip(fd.omega, fd.norm2):
        total = total + sqrt_enclosure(nn, bits).scaled(w)
    return total


def scale_to_unit_surface(P: Polytope, bits: int = 60) -> tuple[Fraction, Polytope]:
    """Rational ``sigma`` with ``1 <= S(sigma P) <= 1 + 1/n``, certified by enclosure."""
    n = P.n
    S = surface_area(P, bits)
    upper = 1 + Fraction(1, n)

    def ok(sig: Fraction) -> int:
        f = sig ** (n - 1)
        if f * S.lo < 1:
            return -1
        if f * S.hi > upper:
            return 1
        return 0

    lo, hi = Fraction(0), Fraction(1)
    while ok(hi) < 0:
        hi *= 2
    while True:
        if ok(hi) == 0:
            return hi, P.scaled(hi)
        mid = (lo + hi) / 2
        verdict = ok(mid)
        if verdict == 0:
            return mid, P.scaled(mid)
        if verdict < 0:
            lo = mid
        else:
            hi = mid


def iso_lower_bound(P: Polytope, bits: int = 60) -> Fraction:
    """Rational ``nu <= vol^(n-1) / S^n`` using the upper end of the S enclosure."""
    n = P.n
    return volume(P) ** (n - 1) / surface_area(P, bits).hi ** n


def summary(P: Polytope, bits: int = 60) -> PolytopeSummary:
    return PolytopeSummary(
        n=P.n, volume=volume(P), surface=surface_area(P, bits), iso_lower=iso_lower_bound(P, bits)
    )


# ---------------------------------------------------------------------------
# sections and chords

def section_volume(P: Polytope, i: int) -> Fraction:
    """``vol_{n-1}(P & {x_i = 0})``; zero when the section has empty relative interior."""
    H = as_h(P)
    n = H.n
    if n < 2:
        raise ValueError("sections need n >= 2")
    A = [tuple(x for k, x in enumerate(a) if k != i) for a in H.A]
    b = list(H.b)
    kept_A, kept_b = [], []
    for a, bj in zip(A, b):
        if all(x == 0 for x in a):
            if bj < 0:
                return Fraction(0)
            continue
        kept_A.append(a)
        kept_b.append(bj)
    if not kept_A:
        raise UnboundedPolytopeError("section is unbounded")
    sec = HPolytope(tuple(kept_A), tuple(kept_b))
    try:
        _, margin = interior_point(sec)
    except LPInfeasible:
        return Fraction(0)
    if margin <= 0:
        return Fraction(0)
    return volume(sec)


def longest_chord(P: Polytope, v: Sequence) -> Fraction:
    """Largest ``t`` with ``x, x + t v`` both in ``P``; the chord length is ``t ||v||``."""
    v = tuple(to_fraction(x) for x in v)
    if all(x == 0 for x in v):
        raise ValueError("direction must be nonzero")
    H = as_h(P)
    n = H.n
    rows, rhs = [], []
    for a, bj in zip(H.A, H.b):
        rows.append(tuple(a) + (Fraction(0),))
        rhs.append(bj)
        rows.append(tuple(a) + (dot(a, v),))
        rhs.append(bj)
    c = (Fraction(0),) * n + (Fraction(1),)
    return lp_maximize(c, rows, rhs).value


# ---------------------------------------------------------------------------
# JSON

def _read_matrix(data, key, where):
    rows = data.get(key)
    if not isinstance(rows, list) or not rows:
        raise PolytopeInputError(f"{where}.{key}: expected a non-empty list")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise PolytopeInputError(f"{where}.{key}[{i}]: expected a list")
        try:
            out.append(tuple(to_fraction(x, f"{where}.{key}[{i}][{j}]") for j, x in enumerate(row)))
        except RationalParseError as exc:
            raise PolytopeInputError(str(exc)) from exc
    return out


def polytope_from_dict(data: dict, where: str = "$") -> Polytope:
    if not isinstance(data, dict):
        raise PolytopeInputError(f"{where}: expected an object")
    kind = data.get("kind")
    n = data.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise PolytopeInputError(f"{where}.n: expected a positive integer")
    if kind == "H":
        A = _read_matrix(data, "A", where)
        b_raw = data.get("b")
        if not isinstance(b_raw, list):
            raise PolytopeInputError(f"{where}.b: expected a list")
        try:
            b = [to_fraction(x, f"{where}.b[{i}]") for i, x in enumerate(b_raw)]
        except RationalParseError as exc:
            raise PolytopeInputError(str(exc)) from exc
        if len(b) != len(A):
            raise PolytopeInputError(f"{where}.b: length {len(b)} != rows of A {len(A)}")
        if any(len(r) != n for r in A):
            raise PolytopeInputError(f"{where}.A: rows must have length n={n}")
        return HPolytope.from_inequalities(A, b)
    if kind == "V":
        V = _read_matrix(data, "V", where)
        if any(len(v) != n for v in V):
            raise PolytopeInputError(f"{where}.V: vertices must have length n={n}")
        return VPolytope.from_points(V)
    raise PolytopeInputError(f"{where}.kind: expected 'H' or 'V', got {kind!r}")


def polytope_to_dict(P: Polytope) -> dict:
    if isinstance(P, HPolytope):
        return {"n": P.n, "kind": "H", "A": [[fmt(x) for x in r] for r in P.A], "b": [fmt(x) for x in P.b]}
    return {"n": P.n, "kind": "V", "V": [[fmt(x) for x in v] for v in P.vertices]}


def load_polytope(path) -> Polytope:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise PolytopeInputError(f"{path}: invalid JSON at line {exc.lineno} col {exc.colno}") from exc
    return polytope_from_dict(data)


__all__ = [
    "HPolytope", "VPolytope", "Polytope", "Hull", "FacetData", "PolytopeSummary",
    "DegeneratePolytopeError", "UnboundedPolytopeError", "OriginNotInteriorError", "PolytopeInputError",
    "extreme_rays", "hull", "v_to_h", "h_to_v", "as_h", "as_v", "volume", "facet_data", "facets",
    "interior_point", "translate_origin_interior", "surface_area", "scale_to_unit_surface",
    "iso_lower_bound", "summary", "section_volume", "longest_chord", "triangulate_face",
    "polytope_from_dict", "polytope_to_dict", "load_polytope"
]
