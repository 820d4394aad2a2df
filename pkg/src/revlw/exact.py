"""Exact rational arithmetic: parsing, square-root enclosures, linear algebra
and a small simplex solver over :class:`fractions.Fraction`.

Everything here works on plain tuples/lists of ``Fraction`` so the geometry
modules never touch floating point on their exact paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

VecQ = tuple  # tuple[Fraction, ...]


class RationalParseError(ValueError):
    """Raised when a value cannot be read as an exact rational."""


def to_fraction(value, where: str = "") -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are rejected: they would silently inject rounding into exact paths.
    """
    if isinstance(value, bool):
        raise RationalParseError(f"{where}: boolean is not a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise RationalParseError(f"{where}: cannot parse rational {value!r}") from exc
    raise RationalParseError(f"{where}: unsupported rational type {type(value).__name__}")


def fmt(q: Fraction) -> str:
    """Serialize a Fraction as ``"p/q"`` (or ``"p"`` for integers)."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def vec(values: Iterable) -> VecQ:
    return tuple(to_fraction(v) for v in values)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sub(u, v) -> VecQ:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u) -> VecQ:
    return tuple(c * a for a in u)


def lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to the coprime integer vector with the same direction."""
    den = lcm(Fraction(x).denominator for x in v)
    ints = [int(Fraction(x) * den) for x in v]
    g = reduce(math.gcd, ints, 0)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


# ---------------------------------------------------------------------------
# square roots and e

@dataclass(frozen=True)
class Enclosure:
    """Rational interval ``lo <= value <= hi``."""

    lo: Fraction
    hi: Fraction

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def scaled(self, c: Fraction) -> "Enclosure":
        if c < 0:
            return Enclosure(c * self.hi, c * self.lo)
        return Enclosure(c * self.lo, c * self.hi)


def sqrt_enclosure(q: Fraction, rel_width_bits: int = 60) -> Enclosure:
    """Bracket sqrt(q) by rationals with relative width at most 2**-rel_width_bits.

    Perfect squares come back as a degenerate interval.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError("square root of a negative rational")
    if q == 0:
        return Enclosure(Fraction(0), Fraction(0))
    p, r = q.numerator, q.denominator
    sp, sr = math.isqrt(p), math.isqrt(r)
    if sp * sp == p and sr * sr == r:
        root = Fraction(sp, sr)
        return Enclosure(root, root)
    # sqrt(p/r) = sqrt(p*r)/r; scale by 4**k until isqrt carries enough bits
    pr = p * r
    k = max(0, rel_width_bits + 2 - pr.bit_length() // 2)
    s = math.isqrt(pr << (2 * k))
    den = r << k
    return Enclosure(Fraction(s, den), Fraction(s + 1, den))


def inv_e_lower(terms: int = 24) -> Fraction:
    """A rational lower bound of 1/e, relative slack below 2**-60 for the default."""
    partial = sum((Fraction(1, math.factorial(k)) for k in range(terms + 1)), Fraction(0))
    # tail of the series is below 1/(terms * terms!)
    e_upper = partial + Fraction(1, terms * math.factorial(terms))
    return 1 / e_upper


# ---------------------------------------------------------------------------
# linear algebra

def _echelon(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rows, pivot columns)."""
    M = [list(r) for r in rows]
    if not M:
        return M, []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    rows = [[Fraction(x) for x in r] for r in rows]
    return len(_echelon(rows)[1])


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of ``points`` (-1 for the empty set)."""
    if not points:
        return -1
    p0 = points[0]
    return rank([sub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def nullspace(rows: Sequence[Sequence], n: int) -> list[VecQ]:
    """Basis of {x in Q^n : r.x = 0 for all r in rows}."""
    rows = [[Fraction(x) for x in r] for r in rows if any(x != 0 for x in r)]
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    R, pivots = _echelon(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            x[pc] = -row[f]
        basis.append(tuple(x))
    return basis


def det(M: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(M)
    if n == 0:
        return Fraction(1)
    den = lcm(Fraction(x).denominator for r in M for x in r)
    A = [[int(Fraction(x) * den) for x in r] for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return Fraction(sign * A[n - 1][n - 1], den ** n)


def int_det(A: Sequence[Sequence[int]]) -> int:
    """Bareiss determinant of an integer matrix."""
    n = len(A)
    if n == 0:
        return 1
    A = [list(r) for r in A]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        akk = A[k][k]
        rowk = A[k]
        for i in range(k + 1, n):
            aik = A[i][k]
            rowi = A[i]
            for j in range(k + 1, n):
                rowi[j] = (rowi[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * A[n - 1][n - 1]


def gram_schmidt(vectors: Sequence[Sequence]) -> list[VecQ]:
    """Exactly orthogonal rational vectors spanning the same space (no normalization)."""
    out: list[VecQ] = []
    for v in vectors:
        w = tuple(Fraction(x) for x in v)
        for u in out:
            c = dot(w, u) / dot(u, u)
            w = tuple(a - c * b for a, b in zip(w, u))
        if any(x != 0 for x in w):
            out.append(w)
    return out


def solve(M: Sequence[Sequence], rhs: Sequence) -> VecQ:
    """Solve a nonsingular square system exactly."""
    n = len(M)
    rows = [[Fraction(x) for x in r] + [Fraction(rhs[i])] for i, r in enumerate(M)]
    R, pivots = _echelon(rows)
    if pivots != list(range(n)):
        raise ValueError("singular system")
    return tuple(r[n] for r in R)


# ---------------------------------------------------------------------------
# linear programming

class LPInfeasible(ValueError):
    pass


class LPUnbounded(ValueError):
    pass


@dataclass(frozen=True)
class LPSolution:
    value: Fraction
    x: VecQ


def lp_maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPSolution:
    """Maximize ``c.x`` subject to ``A x <= b`` with ``x`` free, exactly.

    Two-phase tableau simplex with Bland's rule, so it always terminates.
    Raises LPInfeasible / LPUnbounded.
    """
    n = len(c)
    m = len(A)
    c = [Fraction(x) for x in c]
    # columns: x+ (n), x- (n), slack (m), artificial (one per negative rhs)
    neg_rows = [i for i in range(m) if Fraction(b[i]) < 0]
    n_art = len(neg_rows)
    ncols = 2 * n + m + n_art
    T: list[list[Fraction]] = []
    basis: list[int] = []
    art_of = {i: 2 * n + m + k for k, i in enumerate(neg_rows)}
    for i in range(m):
        a = [Fraction(x) for x in A[i]]
        row = a + [-x for x in a] + [Fraction(int(k == i)) for k in range(m)] + [Fraction(0)] * n_art
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-x for x in row]
            rhs = -rhs
            row[art_of[i]] = Fraction(1)
            basis.append(art_of[i])
        else:
            basis.append(2 * n + i)
        T.append(row + [rhs])

    def pivot(r: int, col: int) -> None:
        inv = 1 / T[r][col]
        T[r] = [x * inv for x in T[r]]
        for i in range(len(T)):
            if i != r and T[i][col] != 0:
                f = T[i][col]
                T[i] = [a - f * p for a, p in zip(T[i], T[r])]
        basis[r] = col

    def run(obj: list[Fraction], allowed: int) -> None:
        # obj: reduced-cost row for maximization, obj[-1] = -value
        while True:
            col = next((j for j in range(allowed) if obj[j] > 0), None)
            if col is None:
                return
            best = None
            for i in range(len(T)):
                if T[i][col] > 0:
                    ratio = T[i][-1] / T[i][col]
                    if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                raise LPUnbounded("objective unbounded")
            r = best[1]
            pivot(r, col)
            f = obj[col]
            obj[:] = [a - f * p for a, p in zip(obj, T[r])]

    def reduced(costs: list[Fraction]) -> list[Fraction]:
        obj = costs + [Fraction(0)]
        for i, bcol in enumerate(basis):
            if obj[bcol] != 0:
                f = obj[bcol]
                obj = [a - f * p for a, p in zip(obj, T[i])]
        return obj

    if n_art:
        costs = [Fraction(0)] * ncols
        for i in neg_rows:
            costs[art_of[i]] = Fraction(-1)
        obj = reduced(costs)
        run(obj, ncols)
        if obj[-1] != 0:
            raise LPInfeasible("constraints infeasible")
        # drive remaining artificials out of the basis
        for r, bcol in enumerate(basis):
            if bcol >= 2 * n + m:
                col = next((j for j in range(2 * n + m) if T[r][j] != 0), None)
                if col is not None:
                    pivot(r, col)
    costs = c + [-x for x in c] + [Fraction(0)] * (m + n_art)
    obj = reduced(costs)
    run(obj, 2 * n + m)
    x = [Fraction(0)] * (2 * n)
    for i, bcol in enumerate(basis):
        if bcol < 2 * n:
            x[bcol] = T[i][-1]
    sol = tuple(x[k] - x[n + k] for k in range(n))
    return LPSolution(value=dot(c, sol), x=sol)
