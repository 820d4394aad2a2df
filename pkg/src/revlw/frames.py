"""Frames, projection averages and the searches for a best frame.

A frame is an orthonormal basis; the projection average of ``P`` for a frame
is the product of the projection volumes onto the hyperplanes normal to the
frame vectors. Minimizing it is the same as finding a smallest box around
the projection body, which is what every search in this module does.
"""
from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterator, Sequence

import numpy as np

from .exact import (
    VecQ,
    det,
    dot,
    fmt,
    gram_schmidt,
    int_det,
    inv_e_lower,
    nullspace,
    primitive,
    rank,
    sqrt_enclosure,
    to_fraction,
)
from .polytope import (
    DegeneratePolytopeError,
    Polytope,
    as_v,
    facets,
    iso_lower_bound,
    scale_to_unit_surface,
    surface_area,
    volume,
)
from .zonotope import Zonotope, projection_area_rational, projection_body

ORTH_TOL = 1e-12
DEFAULT_BUDGET = 10 ** 9


class BudgetExceededError(RuntimeError):
    """Certified search refused because the projected work exceeds the budget."""

    def __init__(self, projected: float, budget: int, min_tau: Fraction | None):
        self.projected = projected
        self.budget = budget
        self.min_tau = min_tau
        hint = f"; smallest feasible tau is {fmt(min_tau)}" if min_tau is not None else "; no tau <= 1 fits"
        super().__init__(f"projected {projected:.3g} evaluations exceed budget {budget}{hint}")


# ---------------------------------------------------------------------------
# frames

@dataclass(frozen=True)
class Frame:
    """Orthonormal basis stored as the rows of an ``n x n`` array."""

    vectors: np.ndarray

    def __post_init__(self):
        U = np.array(self.vectors, dtype=float)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise ValueError("a frame needs n vectors of length n")
        defect = np.abs(U @ U.T - np.eye(U.shape[0])).max()
        if defect > ORTH_TOL:
            raise ValueError(f"vectors are not orthonormal (defect {defect:.3g})")
        U.setflags(write=False)
        object.__setattr__(self, "vectors", U)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def orthonormalized(cls, M) -> "Frame":
        Q, R = np.linalg.qr(np.asarray(M, dtype=float).T)
        Q = Q * np.sign(np.diag(R))
        return cls(Q.T)


def _float_facets(P: Polytope) -> tuple[np.ndarray, np.ndarray]:
    fd = facets(P)
    return (np.array([[float(x) for x in a] for a in fd.a]),
            np.array([float(w) for w in fd.omega]))


def projection_areas(P: Polytope, U: np.ndarray) -> np.ndarray:
    """Projection volumes for every row of ``U`` (rows assumed unit)."""
    A, w = _float_facets(P)
    return 0.5 * (np.abs(np.asarray(U, dtype=float) @ A.T) @ w)


def psi(P: Polytope, F: Frame) -> float:
    return float(np.prod(projection_areas(P, F.vectors)))


def lambda_ratio(P: Polytope, F: Frame) -> float:
    n = F.n
    return float(volume(P)) ** (n - 1) / psi(P, F)


# ---------------------------------------------------------------------------
# exact frames

def _orthogonal(W: Sequence[VecQ]) -> bool:
    return all(dot(W[i], W[k]) == 0 for i in range(len(W)) for k in range(i))


def lambda_ratio_exact(P: Polytope, W: Sequence[Sequence]) -> Fraction:
    """Exact LW-ratio for the frame of normalized, exactly orthogonal rational vectors ``W``.

    ``prod |w_i|^2 = det(W)^2`` for orthogonal rows, so the norm product is
    the rational ``|det W|`` and the ratio is always rational.
    """
    W = [tuple(to_fraction(x) for x in w) for w in W]
    n = P.n
    if len(W) != n or not _orthogonal(W):
        raise ValueError("need n pairwise orthogonal rational vectors")
    den = Fraction(1)
    for w in W:
        den *= projection_area_rational(P, w)
    return volume(P) ** (n - 1) * abs(det(W)) / den


def crosspolytope_edge_frame(n: int, odd: bool = False) -> tuple[VecQ, ...]:
    """Pairs ``e_{2i-1} +- e_{2i}`` along edges of the crosspolytope.

    For odd ``n`` pass ``odd=True``: n-1 edge directions plus the last axis.
    """
    if n < 2:
        raise ValueError("n >= 2 required")
    if n % 2 and not odd:
        raise ValueError("odd n: use odd=True (n-1 edge directions and one axis)")
    out = []
    for i in range(0, n - 1, 2):
        plus = [Fraction(0)] * n
        minus = [Fraction(0)] * n
        plus[i] = plus[i + 1] = minus[i] = Fraction(1)
        minus[i + 1] = Fraction(-1)
        out += [tuple(plus), tuple(minus)]
    if n % 2:
        out.append(tuple(Fraction(int(k == n - 1)) for k in range(n)))
    return tuple(out)


# ---------------------------------------------------------------------------
# pseudo frames

@dataclass(frozen=True)
class PseudoFrame:
    """Rational near-unit, exactly orthogonal vectors ``w_i``.

    ``facet_indices[i]`` names the facet whose normal ``w_i`` must be
    orthogonal to (``None`` for the free last direction).
    """

    vectors: tuple
    rho: Fraction
    facet_indices: tuple = ()
    grid_indices: tuple = ()

    def __post_init__(self):
        W = tuple(tuple(to_fraction(x) for x in w) for w in self.vectors)
        rho = Fraction(self.rho)
        object.__setattr__(self, "vectors", W)
        object.__setattr__(self, "rho", rho)
        if not 0 < rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        for w in W:
            nn = dot(w, w)
            if not 1 <= nn <= (1 + rho) ** 2:
                raise ValueError(f"|w|^2 = {nn} outside [1, (1+rho)^2]")
        if not _orthogonal(W):
            raise ValueError("pseudo frame vectors must be exactly orthogonal")


def _check_scaled(P: Polytope) -> None:
    S = surface_area(P)
    if S.lo < 1 or S.hi > 1 + Fraction(1, P.n):
        raise ValueError("polytope must be scaled to 1 <= S(P) <= 1 + 1/n first")


def pseudo_average(P_scaled: Polytope, W: PseudoFrame) -> Fraction:
    """Exact ``2^-n prod_i sum_j omega_j |w_i . a_j|``."""
    _check_scaled(P_scaled)
    fd = facets(P_scaled)
    for w, j in zip(W.vectors, W.facet_indices):
        if j is not None and dot(w, fd.a[j]) != 0:
            raise ValueError(f"w is not orthogonal to facet normal {j}")
    out = Fraction(1)
    for w in W.vectors:
        out *= 2 * projection_area_rational(P_scaled, w)
    return out / 2 ** P_scaled.n


# ---------------------------------------------------------------------------
# planar exact solvers

def _ccw_polygon(P: Polytope) -> list[VecQ]:
    """Vertices of a polygon in counter-clockwise order (exact monotone chain)."""
    if P.n != 2:
        raise ValueError("planar polygon required")
    try:
        pts = sorted(as_v(P).vertices)
    except DegeneratePolytopeError as exc:
        raise ValueError("degenerate polygon") from exc

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _width(points, v) -> Fraction:
    vals = [dot(p, v) for p in points]
    return max(vals) - min(vals)


def _perp(v):
    return (-v[1], v[0])


@dataclass(frozen=True)
class Planar:
    lam: Fraction
    edge: int
    direction: VecQ
    rect_area: Fraction


def lw_exact_2d(P: Polytope) -> Planar:
    """Exact LW-constant of a polygon via edge-parallel enclosing rectangles."""
    poly = _ccw_polygon(P)
    area = volume(P)
    best = None
    for k in range(len(poly)):
        v = tuple(b - a for a, b in zip(poly[k], poly[(k + 1) % len(poly)]))
        rect = _width(poly, v) * _width(poly, _perp(v)) / dot(v, v)
        if best is None or rect < best[0]:
            best = (rect, k, v)
    rect, k, v = best
    return Planar(lam=area / rect, edge=k, direction=v, rect_area=rect)


def min_perimeter_rect_2d(P: Polytope) -> tuple[VecQ, Fraction]:
    """Direction and squared perimeter of a minimal-perimeter enclosing rectangle."""
    poly = _ccw_polygon(P)
    best = None
    for k in range(len(poly)):
        v = tuple(b - a for a, b in zip(poly[k], poly[(k + 1) % len(poly)]))
        half = _width(poly, v) + _width(poly, _perp(v))
        val = 4 * half * half / dot(v, v)
        if best is None or val < best[1]:
            best = (v, val)
    return best


def min_rect_zonogon(Z: Zonotope) -> tuple[VecQ, Fraction]:
    """Exact smallest-area rectangle around a planar zonotope (generator-parallel sides)."""
    if Z.n != 2:
        raise ValueError("planar zonotope required")
    best = None
    for g in Z.merged().generators:
        area = 4 * Z.support(g) * Z.support(_perp(g)) / dot(g, g)
        if best is None or area < best[1]:
            best = (g, area)
    return best


# ---------------------------------------------------------------------------
# near-normal bases and shell grids

def _int_nullspace(rows: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """Primitive integer basis of the null space, orthogonalized exactly."""
    rows = [tuple(r) for r in rows if any(r)]
    if rows and len(rows) == n - 1 and rank(rows) == n - 1:
        # generalized cross product by cofactors
        v = []
        for j in range(n):
            minor = [[r[c] for c in range(n) if c != j] for r in rows]
            v.append((-1) ** j * int_det(minor))
        return [primitive(v)]
    basis = gram_schmidt(nullspace(rows, n))
    return [primitive(b) for b in basis]


def _near_normal(X: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Power-of-two exponent e with ``1 <= |X / 2^e|^2 < 4``."""
    q = sum(x * x for x in X)
    return X, (q.bit_length() - 1) // 2


def near_normal_basis(constraints: Sequence[Sequence], n: int) -> list[VecQ]:
    """Exactly orthogonal rational basis of the solution space, squared norms in [1, 4]."""
    rows = [primitive([to_fraction(x) for x in c]) for c in constraints]
    out = []
    for X in _int_nullspace(rows, n):
        X, e = _near_normal(X)
        out.append(tuple(Fraction(x, 1 << e) for x in X))
    return out


def _shell_coeffs(q: Sequence[int], lo: int, hi: int) -> Iterator[tuple[int, ...]]:
    """Integer tuples c (lexicographic) with ``lo <= sum c_k^2 q_k <= hi``."""
    k = len(q)

    def rec(i: int, acc: int, prefix: tuple[int, ...]):
        if i == k - 1:
            qi = q[i]
            # need lo - acc <= c^2 qi <= hi - acc
            top = hi - acc
            if top < 0:
                return
            cmax = math.isqrt(top // qi)
            bottom = lo - acc
            cmin = 0 if bottom <= 0 else _ceil_sqrt_div(bottom, qi)
            if cmin > cmax:
                return
            for c in range(-cmax, -cmin + 1):
                yield prefix + (c,)
            for c in range(max(cmin, 1), cmax + 1):
                yield prefix + (c,)
            return
        rest = hi - acc
        cmax = math.isqrt(rest // q[i]) if rest >= 0 else -1
        for c in range(-cmax, cmax + 1):
            yield from rec(i + 1, acc + c * c * q[i], prefix + (c,))

    yield from rec(0, 0, ())


def _ceil_sqrt_div(a: int, b: int) -> int:
    """Smallest c >= 0 with c^2 * b >= a."""
    c = math.isqrt(a // b)
    while c * c * b < a:
        c += 1
    return c


@dataclass(frozen=True)
class _Shell:
    """Shell grid around a near-normal basis, in integer form.

    Points are ``W / (N * L)`` with ``W = sum c_k X_k'`` integer.
    """

    X: tuple          # scaled integer basis vectors X_k' (common denominator L)
    L: int
    N: int
    n: int

    def points(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        q = [sum(x * x for x in X) for X in self.X]
        lo = (self.N * self.L) ** 2
        hi = ((self.N + 2 * self.n) * self.L) ** 2
        for c in _shell_coeffs(q, lo, hi):
            W = tuple(sum(ck * X[i] for ck, X in zip(c, self.X)) for i in range(len(self.X[0])))
            first = next(x for x in W if x != 0)
            if first > 0:
                yield c, W


def _make_shell(rows: Sequence[Sequence[int]], n: int, N: int) -> _Shell | None:
    basis = _int_nullspace(rows, n)
    if not basis:
        return None
    exps = [_near_normal(X)[1] for X in basis]
    e = max(exps)
    X = tuple(tuple(x << (e - ek) for x in B) for B, ek in zip(basis, exps))
    return _Shell(X=X, L=1 << e, N=N, n=n)


def grid_step(tau: Fraction, n: int) -> tuple[Fraction, int]:
    """Grid parameters for accuracy ``tau``: ``(rho_hat, N)`` with step ``1/N``.

    ``rho_hat = 2n/N`` does not exceed ``tau 2^n / (e n^n)``.
    """
    rho_lower = Fraction(tau) * 2 ** n * inv_e_lower() / n ** n
    N = math.ceil(2 * n / rho_lower)
    return Fraction(2 * n, N), N


def grid_shell(basis: Sequence[Sequence], rho: Fraction, n: int) -> Iterator[VecQ]:
    """All ``w = sum t_k x_k`` with ``t_k`` in ``(rho/2n) Z`` and ``1 <= |w|^2 <= (1+rho)^2``.

    Of each antipodal pair only the point whose first nonzero coordinate is
    positive is produced.
    """
    rho = Fraction(rho)
    alpha = rho / (2 * n)
    xs = [tuple(to_fraction(x) for x in b) for b in basis]
    q = [dot(x, x) for x in xs]
    if any(dot(xs[i], xs[k]) != 0 for i in range(len(xs)) for k in range(i)):
        raise ValueError("basis must be orthogonal")
    # |w|^2 = sum c_k^2 alpha^2 q_k; clear denominators to get an integer shell
    r = [alpha * alpha * x for x in q]
    upper = (1 + rho) ** 2
    den = math.lcm(*(x.denominator for x in r))
    qi = [int(x * den) for x in r]
    lo, hi = den, math.floor(upper * den)
    for c in _shell_coeffs(qi, lo, hi):
        w = tuple(sum((ck * alpha * x[i] for ck, x in zip(c, xs)), Fraction(0)) for i in range(n))
        first = next(v for v in w if v != 0)
        if first > 0:
            yield w


# ---------------------------------------------------------------------------
# certified structured search

@dataclass
class SearchResult:
    mode: str
    psi: Fraction
    lambda_lower: Fraction
    tau: Fraction | None
    frame: tuple
    r_choice: tuple = ()
    grid_index: tuple = ()
    evaluations: int = 0
    grids: int = 0
    skipped: int = 0
    wall_ms: int = 0
    sigma: Fraction = Fraction(1)
    delta: Fraction | None = None
    nu: Fraction | None = None
    certificate_valid: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self, timings: bool = True) -> dict:
        def q(x):
            return None if x is None else fmt(x)

        out = {
            "mode": self.mode,
            "psi": q(self.psi),
            "lambda_lower": q(self.lambda_lower),
            "tau": q(self.tau),
            "frame": [[fmt(x) if isinstance(x, Fraction) else repr(float(x)) for x in w] for w in self.frame],
            "r_choice": list(self.r_choice),
            "grid_index": [list(c) for c in self.grid_index],
            "evaluations": self.evaluations,
            "grids": self.grids,
            "skipped": self.skipped,
            "wall_ms": self.wall_ms if timings else 0,
            "sigma": q(self.sigma),
            "delta": q(self.delta),
            "nu": q(self.nu),
            "certificate_valid": self.certificate_valid,
        }
        out.update(self.extra)
        return out


def projected_evaluations(n: int, m: int, tau: Fraction) -> float:
    """Cardinality bound for a certified run, after the antipodal reduction."""
    rho, N = grid_step(tau, n)
    per_axis = 2 * (1 + float(rho)) * N + 1
    exponent = ((n - 1) * n + 2) // 2
    return math.comb(m + n - 2, n - 1) * per_axis ** exponent / 2 ** n


def min_feasible_tau(n: int, m: int, budget: int) -> Fraction | None:
    if projected_evaluations(n, m, Fraction(1)) > budget:
        return None
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(40):
        mid = (lo + hi) / 2
        if projected_evaluations(n, m, mid) > budget:
            lo = mid
        else:
            hi = mid
    return hi.limit_denominator(10 ** 6) if projected_evaluations(
        n, m, hi.limit_denominator(10 ** 6)) <= budget else hi


@dataclass(frozen=True)
class _Problem:
    n: int
    N: int
    normals: tuple      # primitive integer facet normals
    weights: tuple      # integer weights N_j with omega_j c_j = N_j / D
    floor: tuple        # (p, q): p/q <= min over unit u of sum_j N_j |u . a_j'|


def _support_floor(gens: Sequence[tuple[int, ...]], n: int, max_subsets: int = 4000) -> Fraction:
    """Rational lower bound on ``min_{|u|=1} sum_j |g_j . u|``.

    For invertible ``B`` built from n generators, ``|u| <= c |Bu|_1`` with ``c``
    the largest column norm of ``B^-1``.
    """
    from itertools import combinations, islice

    from .exact import solve

    best = Fraction(0)
    for J in islice(combinations(gens, n), max_subsets):
        if int_det(J) == 0:
            continue
        cols = []
        for k in range(n):
            e = [Fraction(int(i == k)) for i in range(n)]
            cols.append(solve(J, e))
        c2 = max(dot(col, col) for col in cols)
        best = max(best, 1 / sqrt_enclosure(c2).hi)
    return best


def _prepare(P: Polytope, N: int) -> tuple[_Problem, int]:
    fd = facets(P)
    omegas = []
    normals = tuple(primitive(a) for a in fd.a)
    for a, pa, w in zip(fd.a, normals, fd.omega):
        k = next(i for i, x in enumerate(pa) if x != 0)
        omegas.append(w * (a[k] / pa[k]))
    D = math.lcm(*(w.denominator for w in omegas))
    weights = tuple(int(w * D) for w in omegas)
    merged: dict[tuple, int] = {}
    for a, wt in zip(normals, weights):
        key = a if next(x for x in a if x) > 0 else tuple(-x for x in a)
        merged[key] = merged.get(key, 0) + wt
    fl = _support_floor(sorted(tuple(wt * x for x in a) for a, wt in merged.items()), P.n)
    fl = Fraction(math.floor(fl * (1 << 20)), 1 << 20)  # keep integer work small
    return _Problem(n=P.n, N=N, normals=normals, weights=weights,
                    floor=(fl.numerator, fl.denominator)), D


def _factor(prob: _Problem, W: tuple[int, ...]) -> int:
    total = 0
    for a, wt in zip(prob.normals, prob.weights):
        s = 0
        for x, y in zip(a, W):
            s += x * y
        total += wt * (s if s >= 0 else -s)
    return total


def _search_branch(prob: _Problem, R: tuple[int, ...]):
    """Best pseudo frame for one facet multiset ``R``.

    Returns the best ``(num, den, idx, Ws, Ls)`` and the counters
    ``[evaluations, grids, skipped, pruned]``; the pseudo average is
    proportional to ``num/den``. Candidates are visited smallest factor
    first; a partial frame whose value times the floor on the remaining
    factors exceeds the incumbent is cut together with all its successors.
    Equal values are resolved on the grid-index tuple, so the witness does
    not depend on the visiting order.
    """
    n = prob.n
    best = [None]
    stats = [0, 0, 0, 0]
    # every later factor I(W)/L is at least N * floor
    lift, fq = prob.N * prob.floor[0], prob.floor[1]

    def better(nnum, nden, key, b):
        lhs, rhs = nnum * b[1], b[0] * nden
        return lhs < rhs or (lhs == rhs and key < b[2])

    def rec(level: int, Ws: tuple, Ls: tuple, num: int, den: int, idx: tuple):
        rows = list(Ws)
        if level < n - 1:
            rows.append(prob.normals[R[level]])
        shell = _make_shell(rows, n, prob.N)
        stats[1] += 1
        if shell is None:
            stats[2] += 1
            return
        # best-first: small factors first, grid index breaks ties
        pts = sorted((_factor(prob, W), c, W) for c, W in shell.points())
        k = n - 1 - level
        for pos, (f, c, W) in enumerate(pts):
            nnum, nden = num * f, den * shell.L
            key = idx + (c,)
            b = best[0]
            if level == n - 1:
                stats[0] += 1
                if b is None or better(nnum, nden, key, b):
                    best[0] = (nnum, nden, key, Ws + (W,), Ls + (shell.L,))
                elif nnum * b[1] > b[0] * nden:
                    stats[3] += len(pts) - pos - 1
                    break
                continue
            # later factors are at least N * floor each; ties may still win on index
            if b is not None and nnum * lift ** k * b[1] > b[0] * nden * fq ** k:
                stats[3] += len(pts) - pos
                break
            rec(level + 1, Ws + (W,), Ls + (shell.L,), nnum, nden, key)

    rec(0, (), (), 1, 1, ())
    b = best[0]
    if b is None:
        return None, stats
    return b, stats


def _run_branches(prob: _Problem, branches: list[tuple[int, ...]]):
    return [(R,) + _search_branch(prob, R) for R in branches]


def structured_search(P_scaled: Polytope, tau, budget: int | None = None, workers: int = 1) -> SearchResult:
    """Certified upper bound ``psi`` with ``Psi(P) <= psi`` and, per the grid
    covering argument, ``psi <= Psi(P) + tau``.

    ``P_scaled`` must satisfy ``1 <= S(P) <= 1 + 1/n``. Facet multisets of
    size n-1 fix the directions parallel to facets; the remaining freedom is
    swept on shell grids of step ``rho/(2n)``.
    """
    t0 = time.perf_counter()
    tau = to_fraction(tau)
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    _check_scaled(P_scaled)
    n = P_scaled.n
    budget = int(os.environ.get("REVLW_BUDGET", DEFAULT_BUDGET)) if budget is None else budget
    fd = facets(P_scaled)
    projected = projected_evaluations(n, fd.m, tau)
    if projected > budget:
        raise BudgetExceededError(projected, budget, min_feasible_tau(n, fd.m, budget))
    rho, N = grid_step(tau, n)
    prob, D = _prepare(P_scaled, N)
    branches = list(combinations_with_replacement(range(fd.m), n - 1))
    if workers > 1 and len(branches) > 1:
        chunks = [branches[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_branches, [prob] * len(chunks), chunks))
        results = sorted((r for part in parts for r in part), key=lambda r: r[0])
    else:
        results = _run_branches(prob, branches)
    best = None
    evals = grids = skipped = pruned = 0
    for R, b, stats in results:
        evals += stats[0]
        grids += stats[1]
        skipped += stats[2]
        pruned += stats[3]
        if b is None:
            continue
        if best is None or b[0] * best[1][1] < best[1][0] * b[1]:
            best = (R, b)
    if best is None:
        raise RuntimeError("no pseudo frame found")
    R, (num, den, idx, Ws, Ls) = best
    frame = tuple(tuple(Fraction(x, N * L) for x in W) for W, L in zip(Ws, Ls))
    psi_val = Fraction(num, den) / (N ** n * D ** n * 2 ** n)
    lam = volume(P_scaled) ** (n - 1) / psi_val
    return SearchResult(
        mode="certified", psi=psi_val, lambda_lower=lam, tau=tau, frame=frame,
        r_choice=R, grid_index=idx, evaluations=evals, grids=grids, skipped=skipped,
        wall_ms=int((time.perf_counter() - t0) * 1000),
        extra={"rho": fmt(rho), "pruned": pruned, "projected_evaluations": projected},
    )


def lw_approx(P: Polytope, delta, nu, budget: int | None = None, workers: int = 1) -> SearchResult:
    """``Lambda`` with ``Lambda <= Lambda(P) <= (1 + delta) Lambda`` when ``nu <= iso(P)``."""
    delta = to_fraction(delta)
    nu = to_fraction(nu)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if nu <= 0:
        raise ValueError("nu must be positive")
    valid = nu <= iso_lower_bound(P)
    if not valid:
        warnings.warn("nu exceeds the certified isoperimetric lower bound; certificate void",
                      stacklevel=2)
    sigma, Ps = scale_to_unit_surface(P)
    tau = min(Fraction(1), nu * delta)
    res = structured_search(Ps, tau, budget=budget, workers=workers)
    res.sigma = sigma
    res.delta = delta
    res.nu = nu
    res.certificate_valid = valid
    res.mode = "approx"
    return res


# ---------------------------------------------------------------------------
# plane-sweep heuristic

def random_frame(n: int, seed) -> Frame:
    """Orthonormalized Gaussian sample; ``seed`` may be an int or a SeedSequence."""
    rng = np.random.default_rng(seed)
    return Frame.orthonormalized(rng.standard_normal((n, n)))


class _ZonotopeWidths:
    """Box widths around a zonotope, candidates parallel to generators."""

    def __init__(self, G: np.ndarray):
        self.G = G

    def widths(self, U: np.ndarray) -> np.ndarray:
        return 2.0 * np.abs(U @ self.G.T).sum(axis=-1)

    def candidates(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        P2 = np.stack([self.G @ u, self.G @ v], axis=1)
        nrm = np.linalg.norm(P2, axis=1)
        keep = nrm > 1e-14
        return P2[keep] / nrm[keep, None]


class _PointWidths:
    """Box widths around the convex hull of points, candidates parallel to hull edges."""

    def __init__(self, V: np.ndarray):
        self.V = V

    def widths(self, U: np.ndarray) -> np.ndarray:
        proj = np.atleast_2d(U) @ self.V.T
        return proj.max(axis=-1) - proj.min(axis=-1)

    def candidates(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        P2 = np.stack([self.V @ u, self.V @ v], axis=1)
        # every hull edge joins two of the points; pairwise differences cover them
        i, k = np.triu_indices(len(P2), 1)
        D = P2[k] - P2[i]
        nrm = np.linalg.norm(D, axis=1)
        keep = nrm > 1e-14
        return D[keep] / nrm[keep, None]


def _sweep(body, U: np.ndarray, tol: float, max_passes: int = 200) -> tuple[np.ndarray, float]:
    n = U.shape[0]
    U = U.copy()
    value = float(np.prod(body.widths(U)))
    for _ in range(max_passes):
        start = value
        for i in range(n):
            for k in range(i + 1, n):
                C = body.candidates(U[i], U[k])
                if len(C) == 0:
                    continue
                E1 = C[:, 0, None] * U[i] + C[:, 1, None] * U[k]
                E2 = -C[:, 1, None] * U[i] + C[:, 0, None] * U[k]
                prods = body.widths(E1) * body.widths(E2)
                j = int(np.argmin(prods))
                cur = float(body.widths(U[[i, k]]).prod())
                if prods[j] < cur:
                    U[i], U[k] = E1[j], E2[j]
        # keep the frame orthonormal to machine precision
        Q, Rm = np.linalg.qr(U.T)
        U = (Q * np.sign(np.diag(Rm))).T
        value = float(np.prod(body.widths(U)))
        if start - value <= tol * start:
            break
    return U, value


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "heuristic"
    tau: Fraction | None = None
    delta: Fraction | None = None
    nu: Fraction | None = None
    restarts: int = 32
    sweep_tol: float = 1e-12
    seed: int = 0
    workers: int = 1
    budget: int | None = None


@dataclass(frozen=True)
class HeuristicResult:
    frame: Frame
    psi: float
    lam: float
    certified: SearchResult


def _restart(args):
    G, U0, tol = args
    return _sweep(_ZonotopeWidths(G), U0, tol)


def _sweep_restarts(body_G: np.ndarray, n: int, config: SearchConfig) -> tuple[np.ndarray, float]:
    seqs = np.random.SeedSequence(config.seed).spawn(config.restarts)
    starts = [random_frame(n, s).vectors for s in seqs]
    args = [(body_G, U0, config.sweep_tol) for U0 in starts]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_restart, args))
    else:
        results = [_restart(a) for a in args]
    # lowest value, earliest restart on ties
    best = min(range(len(results)), key=lambda r: (results[r][1], r))
    return results[best]


def _round_frame(U: np.ndarray, bits: int = 40) -> list[VecQ]:
    scale_ = 1 << bits
    W = [tuple(Fraction(int(round(x * scale_)), scale_) for x in u) for u in U]
    return gram_schmidt(W)


def certify_frame(P: Polytope, U: np.ndarray, bits: int = 40) -> SearchResult:
    """Exact lower bound on the LW-constant from a float frame.

    The frame is rounded to denominators ``2^bits`` and orthogonalized exactly;
    its exact LW-ratio is a valid lower bound for ``Lambda(P)``.
    """
    W = _round_frame(U, bits)
    lam = lambda_ratio_exact(P, W)
    psi_w = volume(P) ** (P.n - 1) / lam
    return SearchResult(mode="heuristic", psi=psi_w, lambda_lower=lam, tau=None, frame=tuple(W))


def heuristic_search(P: Polytope, config: SearchConfig | None = None) -> HeuristicResult:
    """Multi-start plane sweep for a small box around the projection body.

    Each sweep step rotates a pair of frame vectors inside their plane to the
    exact optimum for the planar projection of the zonotope, whose minimal
    rectangles have a side parallel to a projected generator.
    """
    config = config or SearchConfig()
    t0 = time.perf_counter()
    n = P.n
    G = projection_body(P).float_generators()
    U, box = _sweep_restarts(G, n, config)
    frame = Frame(U)
    value = psi(P, frame)
    lam = float(volume(P)) ** (n - 1) / value
    cert = certify_frame(P, U)
    cert.wall_ms = int((time.perf_counter() - t0) * 1000)
    cert.extra = {"psi_float": value, "lambda_float": lam, "restarts": config.restarts, "seed": config.seed}
    return HeuristicResult(frame=frame, psi=value, lam=lam, certified=cert)


# ---------------------------------------------------------------------------
# minimal boxes

@dataclass(frozen=True)
class BoxResult:
    mode: str
    frame: tuple
    box_volume: float | Fraction
    value: float | Fraction        # Phi for mode "phi", Psi for mode "psi"
    exact: bool


def min_box(body: Polytope | Zonotope, mode: str = "phi", config: SearchConfig | None = None) -> BoxResult:
    """Smallest box around ``body`` (mode "phi") or around its projection body (mode "psi").

    ``Phi = vol(P)/vol(B)``; ``Psi = vol(B)/2^n`` for the box around the
    projection body. Exact in the plane, plane-sweep heuristic otherwise.
    """
    config = config or SearchConfig()
    if mode not in ("phi", "psi"):
        raise ValueError("mode must be 'phi' or 'psi'")
    n = body.n
    if isinstance(body, Zonotope):
        if mode != "phi":
            raise ValueError("mode 'psi' needs a polytope")
        Z = body
        target_vol = None
    else:
        Z = projection_body(body) if mode == "psi" else None
        target_vol = volume(body)
    if n == 2:
        if Z is not None:
            g, area = min_rect_zonogon(Z)
            frame = (g, _perp(g))
            value = area / 4 if mode == "psi" else (
                target_vol / area if target_vol is not None else None)
            return BoxResult(mode, frame, area, value, True)
        planar = lw_exact_2d(body)
        v = planar.direction
        return BoxResult(mode, (v, _perp(v)), planar.rect_area, planar.lam, True)
    if Z is not None:
        widths = _ZonotopeWidths(Z.float_generators())
    else:
        widths = _PointWidths(np.array([[float(x) for x in v] for v in as_v(body).vertices]))
    seqs = np.random.SeedSequence(config.seed).spawn(config.restarts)
    results = [_sweep(widths, random_frame(n, s).vectors, config.sweep_tol) for s in seqs]
    best = min(range(len(results)), key=lambda r: (results[r][1], r))
    U, box = results[best]
    if mode == "psi":
        value = box / 2 ** n
    else:
        value = float(target_vol) / box if target_vol is not None else None
    return BoxResult(mode, tuple(map(tuple, U)), box, value, False)
