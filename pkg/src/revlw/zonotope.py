"""Projection bodies of polytopes as zonotopes.

For a polytope with facet normals ``a_j`` and normalized facet volumes
``omega_j`` the projection body is the zonotope with generators
``omega_j a_j / 2``; its support function at a unit vector is the
(n-1)-volume of the orthogonal projection onto the normal hyperplane.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .exact import RationalParseError, det, dot, fmt, lp_maximize, primitive, rank, to_fraction
from .polytope import Polytope, VPolytope, as_v, facets, volume

UNIT_TOL = 1e-12
MC_CHUNK = 1 << 16


class ZonotopeCostError(RuntimeError):
    """Refusal to run a determinant sum that is too large."""


@dataclass(frozen=True)
class Zonotope:
    """``sum_j [-g_j, g_j]``."""

    generators: tuple

    def __post_init__(self):
        G = tuple(tuple(to_fraction(x) for x in g) for g in self.generators)
        if not G or len({len(g) for g in G}) != 1:
            raise ValueError("generators must be non-empty and of equal length")
        object.__setattr__(self, "generators", G)

    @property
    def n(self) -> int:
        return len(self.generators[0])

    @property
    def m(self) -> int:
        return len(self.generators)

    def support(self, x: Sequence) -> Fraction:
        """Exact ``h_Z(x) = sum_j |g_j . x|``."""
        x = tuple(Fraction(v) for v in x)
        return sum((abs(dot(g, x)) for g in self.generators), Fraction(0))

    def support_float(self, X: np.ndarray) -> np.ndarray:
        G = self.float_generators()
        return np.abs(np.asarray(X, dtype=float) @ G.T).sum(axis=-1)

    def float_generators(self) -> np.ndarray:
        return np.array([[float(x) for x in g] for g in self.generators])

    def merged(self) -> "Zonotope":
        """Same zonotope with parallel generators summed and zero ones dropped."""
        groups: dict[tuple, Fraction] = {}
        rep: dict[tuple, tuple] = {}
        for g in self.generators:
            if all(x == 0 for x in g):
                continue
            key = primitive(g)
            first = next(x for x in key if x != 0)
            if first < 0:
                key = tuple(-x for x in key)
            # g = c * key with c possibly negative; |c| adds up
            k0 = next(i for i, x in enumerate(key) if x != 0)
            groups[key] = groups.get(key, Fraction(0)) + abs(g[k0] / key[k0])
            rep[key] = key
        return Zonotope(tuple(tuple(c * x for x in rep[k]) for k, c in groups.items()))

    def vertices(self) -> VPolytope:
        """V-presentation; only sensible for a handful of distinct generators."""
        Z = self.merged()
        pts = set()
        for signs in product((-1, 1), repeat=Z.m):
            pts.add(tuple(sum((s * g[i] for s, g in zip(signs, Z.generators)), Fraction(0))
                          for i in range(Z.n)))
        return VPolytope.from_points(sorted(pts))

    def to_dict(self) -> dict:
        return {"n": self.n, "generators": [[fmt(x) for x in g] for g in self.generators]}

    @classmethod
    def from_dict(cls, data: dict) -> "Zonotope":
        try:
            gens = [[to_fraction(x, f"$.generators[{i}][{j}]") for j, x in enumerate(g)]
                    for i, g in enumerate(data["generators"])]
        except (KeyError, TypeError) as exc:
            raise ValueError("zonotope JSON needs a 'generators' list") from exc
        except RationalParseError:
            raise
        if any(len(g) != data.get("n") for g in gens):
            raise ValueError("generator length does not match n")
        return cls(tuple(map(tuple, gens)))


def projection_body(P: Polytope) -> Zonotope:
    fd = facets(P)
    return Zonotope(tuple(tuple(w * x / 2 for x in a) for a, w in zip(fd.a, fd.omega)))


def _check_unit(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    nn = float(u @ u)
    if nn == 0.0:
        raise ValueError("direction must be nonzero")
    if abs(nn - 1.0) > UNIT_TOL:
        raise ValueError(f"direction is not unit (|u|^2 = {nn!r})")
    return u


def projection_area(P: Polytope, u) -> float:
    """``vol_{n-1}(P | u^perp)`` for a unit vector ``u``."""
    u = _check_unit(u)
    fd = facets(P)
    A = np.array([[float(x) for x in a] for a in fd.a])
    w = np.array([float(x) for x in fd.omega])
    return 0.5 * float(np.abs(A @ u) @ w)


def projection_area_rational(P: Polytope, w: Sequence) -> Fraction:
    """Exact ``(1/2) sum_j omega_j |w . a_j|``, i.e. ``||w|| vol_{n-1}(P | w^perp)``."""
    w = tuple(to_fraction(x) for x in w)
    if all(x == 0 for x in w):
        raise ValueError("direction must be nonzero")
    fd = facets(P)
    return sum((om * abs(dot(w, a)) for a, om in zip(fd.a, fd.omega)), Fraction(0)) / 2


def projection_hull_oracle(P: Polytope, u) -> float:
    """Projection volume from the convex hull of the projected vertices (n = 2, 3)."""
    u = _check_unit(u)
    V = np.array([[float(x) for x in v] for v in as_v(P).vertices])
    n = V.shape[1]
    # orthonormal basis of u^perp from the SVD null space
    _, _, vt = np.linalg.svd(u.reshape(1, -1))
    basis = vt[1:]
    proj = V @ basis.T
    if n == 2:
        return float(proj.max() - proj.min())
    if n == 3:
        return float(ConvexHull(proj).volume)
    raise ValueError("hull oracle supports n = 2 or 3 only")


def zonotope_volume(Z: Zonotope, force: bool = False) -> Fraction:
    """``2^n sum_{|J|=n} |det g_J|``."""
    Z = Z.merged()
    n, m = Z.n, Z.m
    if n >= 4 and m > 20 and not force:
        raise ZonotopeCostError(f"{math.comb(m, n)} determinants; pass force=True to run anyway")
    total = Fraction(0)
    for J in combinations(Z.generators, n):
        total += abs(det(J))
    return 2 ** n * total


def polar_membership(Z: Zonotope, x: Sequence) -> bool:
    """``x`` lies in the polar of ``Z`` iff ``h_Z(x) <= 1``."""
    return Z.support(x) <= 1


def polar_axis_extents(Z: Zonotope) -> tuple[Fraction, ...]:
    """Exact ``max x_i`` over the polar of ``Z``, for each axis.

    LP after sign splitting: ``s_j >= +-g_j.x``, ``sum s_j <= 1``.
    """
    Z = Z.merged()
    n, m = Z.n, Z.m
    if rank(Z.generators) < n:
        raise ValueError("zonotope is not full-dimensional; polar is unbounded")
    rows, rhs = [], []
    for j, g in enumerate(Z.generators):
        e = tuple(Fraction(-1 if k == j else 0) for k in range(m))
        rows.append(tuple(g) + e)
        rows.append(tuple(-x for x in g) + e)
        rhs += [Fraction(0), Fraction(0)]
    rows.append((Fraction(0),) * n + (Fraction(1),) * m)
    rhs.append(Fraction(1))
    out = []
    for i in range(n):
        c = tuple(Fraction(int(k == i)) for k in range(n + m))
        out.append(lp_maximize(c, rows, rhs).value)
    return tuple(out)


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    ci95: float
    hits: int
    samples: int
    box_volume: Fraction

    @property
    def sigma(self) -> float:
        return self.ci95 / 1.96


def _count_hits(G: np.ndarray, Zexact: Zonotope, half: np.ndarray, seed_seq, count: int) -> int:
    rng = np.random.default_rng(seed_seq)
    X = (rng.random((count, half.size)) * 2.0 - 1.0) * half
    s = np.abs(X @ G.T).sum(axis=1)
    hits = int(np.count_nonzero(s < 1.0 - 1e-9))
    # exact decision inside the guard band; sample coordinates are exact dyadics
    for i in np.nonzero(np.abs(s - 1.0) <= 1e-9)[0]:
        if polar_membership(Zexact, tuple(Fraction(float(v)) for v in X[i])):
            hits += 1
    return hits


def polar_volume_mc(Z: Zonotope, samples: int, seed: int, workers: int = 1) -> MCEstimate:
    """Hit-or-miss estimate of the polar volume of ``Z`` over its exact bounding box.

    Samples are split into fixed chunks with their own spawned seed streams, so
    the estimate depends only on ``(seed, samples)``, not on ``workers``.
    """
    Zm = Z.merged()
    ext = polar_axis_extents(Zm)
    half = np.array([float(e) for e in ext])
    box = Fraction(1)
    for e in ext:
        box *= 2 * e
    G = Zm.float_generators()
    chunks = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        chunks.append(samples % MC_CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(chunks))
    args = [(G, Zm, half, s, c) for s, c in zip(seqs, chunks)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda a: _count_hits(*a), args))
    else:
        counts = [_count_hits(*a) for a in args]
    hits = sum(counts)
    p = hits / samples
    est = float(box) * p
    ci = 1.96 * float(box) * math.sqrt(max(p * (1 - p), 0.0) / samples)
    return MCEstimate(estimate=est, ci95=ci, hits=hits, samples=samples, box_volume=box)


@dataclass(frozen=True)
class ZhangReport:
    lhs: Fraction
    rhs_estimate: float
    ratio: float
    ratio_ci95: float
    polar: MCEstimate

    @property
    def ratio_sigma(self) -> float:
        return self.ratio_ci95 / 1.96


def zhang_check(P: Polytope, samples: int, seed: int, workers: int = 1) -> ZhangReport:
    """Compare ``vol^(n-1)`` with ``binom(2n,n) / (n^n vol(polar of Pi P))``.

    The ratio lhs/rhs is at least 1 and equals 1 exactly for simplices.
    """
    n = P.n
    lhs = volume(P) ** (n - 1)
    mc = polar_volume_mc(projection_body(P), samples, seed, workers)
    if mc.hits == 0:
        raise ValueError("no Monte Carlo hits; increase samples")
    c = math.comb(2 * n, n) / n ** n
    rhs = c / mc.estimate
    ratio = float(lhs) * mc.estimate / c
    ratio_ci = float(lhs) * mc.ci95 / c
    return ZhangReport(lhs=lhs, rhs_estimate=rhs, ratio=ratio, ratio_ci95=ratio_ci, polar=mc)
