"""Independent oracles and a battery of inequality checks.

Every check returns :class:`BoundsEntry` records. Sides computed in exact
arithmetic are compared exactly; float sides use a fixed tolerance and Monte
Carlo sides a 3-sigma rule with a three-valued verdict.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exact import dot, fmt, to_fraction
from .frames import (
    Frame,
    SearchConfig,
    heuristic_search,
    lambda_ratio,
    lw_exact_2d,
    random_frame,
)
from .polytope import (
    OriginNotInteriorError,
    Polytope,
    as_h,
    facets,
    longest_chord,
    section_volume,
    volume,
)
from .zonotope import projection_area_rational, projection_body, zhang_check

LW_TOL = 1e-9
HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive"

__all__ = [
    "BoundsEntry", "BoundsReport", "random_frame", "brute_force_psi", "check_lw", "check_meyer",
    "check_universal_lower_bound", "check_simplex_bounds", "check_petty_identity",
    "chord_identity_check", "check_zhang", "universal_lower_bound", "run_battery",
]


def _enc(x, kind: str) -> str:
    if kind == "exact":
        return fmt(Fraction(x))
    return format(float(x), ".17g")


def _dec(s: str, kind: str):
    return Fraction(s) if kind == "exact" else float(s)


@dataclass(frozen=True)
class BoundsEntry:
    """One inequality instance: ``lhs`` compared with ``rhs``."""

    name: str
    body: str
    lhs: Fraction | float
    rhs: Fraction | float
    slack: Fraction | float
    verdict: str
    lhs_kind: str = "exact"       # exact | float | mc
    rhs_kind: str = "exact"
    ci95: float | None = None
    note: str = ""

    @property
    def slack_kind(self) -> str:
        return "exact" if self.lhs_kind == self.rhs_kind == "exact" else "float"

    def to_dict(self) -> dict:
        return {
            "name": self.name, "body": self.body,
            "lhs": _enc(self.lhs, self.lhs_kind), "rhs": _enc(self.rhs, self.rhs_kind),
            "slack": _enc(self.slack, self.slack_kind), "verdict": self.verdict,
            "lhs_kind": self.lhs_kind, "rhs_kind": self.rhs_kind,
            "ci95": None if self.ci95 is None else format(self.ci95, ".17g"),
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundsEntry":
        lk, rk = d["lhs_kind"], d["rhs_kind"]
        sk = "exact" if lk == rk == "exact" else "float"
        ci = d.get("ci95")
        return cls(
            name=d["name"], body=d["body"], lhs=_dec(d["lhs"], lk), rhs=_dec(d["rhs"], rk),
            slack=_dec(d["slack"], sk), verdict=d["verdict"], lhs_kind=lk, rhs_kind=rk,
            ci95=None if ci in (None, "") else float(ci), note=d.get("note", ""),
        )


CSV_FIELDS = ["name", "body", "lhs", "rhs", "slack", "verdict", "lhs_kind", "rhs_kind", "ci95", "note"]


@dataclass
class BoundsReport:
    entries: list[BoundsEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.verdict == HOLDS for e in self.entries)

    def extend(self, items: Iterable[BoundsEntry]) -> None:
        self.entries.extend(items)

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "entries": [e.to_dict() for e in self.entries]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BoundsReport":
        return cls([BoundsEntry.from_dict(d) for d in json.loads(text)["entries"]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for e in self.entries:
            row = e.to_dict()
            row["ci95"] = row["ci95"] or ""
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BoundsReport":
        return cls([BoundsEntry.from_dict(r) for r in csv.DictReader(io.StringIO(text))])


# ---------------------------------------------------------------------------
# oracles

def brute_force_psi(P: Polytope, trials: int, seed: int) -> tuple[float, Frame]:
    """Smallest projection average over ``trials`` seeded random frames."""
    n = P.n
    fd = facets(P)
    A = np.array([[float(x) for x in a] for a in fd.a])
    w = np.array([float(x) for x in fd.omega])
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((trials, n, n)))
    Q = Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]
    U = np.swapaxes(Q, 1, 2)                       # rows are frame vectors
    areas = 0.5 * (np.abs(U @ A.T) @ w)            # trials x n
    vals = areas.prod(axis=1)
    k = int(np.argmin(vals))
    return float(vals[k]), Frame(U[k])


def universal_lower_bound(n: int) -> Fraction:
    return Fraction(math.comb(2 * n, n), (2 * n) ** n)


def _verdict(ok: bool) -> str:
    return HOLDS if ok else VIOLATED


# ---------------------------------------------------------------------------
# checks

def check_lw(P: Polytope, frames: Sequence[Frame], body: str = "") -> BoundsEntry:
    """LW-ratio of every frame is at most 1."""
    worst = max(lambda_ratio(P, F) for F in frames)
    return BoundsEntry("lw_upper", body, worst, 1.0, 1.0 - worst, _verdict(worst <= 1 + LW_TOL),
                       "float", "exact", note=f"{len(frames)} frames")


def check_meyer(P: Polytope, body: str = "") -> BoundsEntry:
    """``vol^(n-1) >= (n-1)!/n^(n-1) * prod_i vol_{n-1}(P & e_i^perp)``, exactly."""
    H = as_h(P)
    if any(b <= 0 for b in H.b):
        raise OriginNotInteriorError("the origin must be an interior point")
    n = H.n
    lhs = volume(H) ** (n - 1)
    rhs = Fraction(math.factorial(n - 1), n ** (n - 1))
    for i in range(n):
        rhs *= section_volume(H, i)
    note = "equality" if lhs == rhs else "strict"
    return BoundsEntry("meyer", body, lhs, rhs, lhs - rhs, _verdict(lhs >= rhs), note=note)


def check_universal_lower_bound(P: Polytope, lam, delta=None, body: str = "") -> BoundsEntry:
    """``(1 + delta) Lambda_found >= binom(2n, n) / (2n)^n``."""
    bound = universal_lower_bound(P.n)
    if isinstance(lam, Fraction):
        lhs = lam * (1 + (to_fraction(delta) if delta is not None else 0))
        return BoundsEntry("universal_lower", body, lhs, bound, lhs - bound, _verdict(lhs >= bound))
    lhs = float(lam) * (1 + float(delta or 0))
    return BoundsEntry("universal_lower", body, lhs, bound, lhs - float(bound),
                       _verdict(lhs >= float(bound) - LW_TOL), "float", "exact")


def check_simplex_bounds(S: Polytope, lam, delta=None, body: str = "") -> list[BoundsEntry]:
    """``(n-1)!/(2^(n-2) n^(n-1)) < (1+delta) Lambda`` and ``Lambda <= (n-1)!/n^(n-1)``."""
    n = S.n
    if n < 3:
        raise ValueError("simplex bounds are stated for n >= 3")
    if facets(S).m != n + 1:
        raise ValueError("body is not a simplex")
    upper = Fraction(math.factorial(n - 1), n ** (n - 1))
    lower = upper / 2 ** (n - 2)
    grow = 1 + (to_fraction(delta) if delta is not None else 0)
    if isinstance(lam, Fraction):
        lo = BoundsEntry("simplex_lower", body, lam * grow, lower, lam * grow - lower,
                         _verdict(lam * grow > lower))
        hi = BoundsEntry("simplex_upper", body, upper, lam, upper - lam, _verdict(lam <= upper))
        return [lo, hi]
    lamf = float(lam) * float(grow)
    lo = BoundsEntry("simplex_lower", body, lamf, lower, lamf - float(lower),
                     _verdict(lamf > float(lower)), "float", "exact")
    hi = BoundsEntry("simplex_upper", body, upper, float(lam), float(upper) - float(lam),
                     _verdict(float(lam) <= float(upper) + LW_TOL), "exact", "float")
    return [lo, hi]


def check_petty_identity(P: Polytope, W: Sequence[Sequence], body: str = "") -> BoundsEntry:
    """Box around the projection body along ``W`` versus ``2^n`` times the projection product.

    Both sides carry the same factor ``prod |w_i|`` and are compared without it.
    The box side takes support values from the vertices of the zonotope, the
    other side from the facet formula.
    """
    W = [tuple(to_fraction(x) for x in w) for w in W]
    n = P.n
    if len(W) != n or any(dot(W[i], W[k]) != 0 for i in range(n) for k in range(i)):
        raise ValueError("need n exactly orthogonal rational directions")
    Z = projection_body(P).merged()
    if Z.m > 16:
        raise ValueError("too many distinct generators for vertex enumeration")
    verts = Z.vertices().vertices
    box = Fraction(1)
    prod = Fraction(1)
    for w in W:
        vals = [dot(w, v) for v in verts]
        box *= max(vals) - min(vals)
        prod *= projection_area_rational(P, w)
    rhs = 2 ** n * prod
    return BoundsEntry("petty_box", body, box, rhs, box - rhs, _verdict(box == rhs))


def chord_identity_check(S: Polytope, directions: Sequence[Sequence], body: str = "") -> BoundsEntry:
    """``vol = (l(v)/n) * vol_{n-1}(S | v^perp)`` for every direction.

    With ``t`` the longest chord parameter and ``A`` the unnormalized
    projection value, the right side equals ``t A / n`` exactly, so float
    directions are taken at their exact binary value and nothing is rounded.
    """
    n = S.n
    vol = volume(S)
    worst, worst_rhs = Fraction(0), vol
    for v in directions:
        v = tuple(Fraction(x) if isinstance(x, float) else to_fraction(x) for x in v)
        rhs = longest_chord(S, v) * projection_area_rational(S, v) / n
        if abs(vol - rhs) >= abs(worst):
            worst, worst_rhs = vol - rhs, rhs
    ok = abs(worst) <= Fraction(LW_TOL)
    return BoundsEntry("chord_identity", body, vol, worst_rhs, worst, _verdict(ok),
                       note=f"{len(directions)} directions")


def check_zhang(P: Polytope, samples: int, seed: int, expect: str = "ge", workers: int = 1,
                body: str = "") -> BoundsEntry:
    """Monte Carlo ratio ``vol^(n-1) n^n vol(polar) / binom(2n, n)`` against 1.

    ``expect``: "ge" (inequality), "eq" (equality case) or "gt" (strict).
    """
    rep = zhang_check(P, samples, seed, workers)
    sigma = rep.ratio_sigma
    d = rep.ratio - 1.0
    if expect == "ge":
        verdict = VIOLATED if d < -3 * sigma else HOLDS
    elif expect == "eq":
        verdict = HOLDS if abs(d) <= 3 * sigma else VIOLATED
    elif expect == "gt":
        verdict = HOLDS if d > 3 * sigma else (VIOLATED if d < -3 * sigma else INCONCLUSIVE)
    else:
        raise ValueError("expect must be 'ge', 'eq' or 'gt'")
    return BoundsEntry(f"zhang_{expect}", body, rep.ratio, 1.0, d, verdict, "mc", "exact",
                       ci95=rep.ratio_ci95, note=f"samples={samples} seed={seed}")


# ---------------------------------------------------------------------------
# batch

def _is_simplex(P: Polytope) -> bool:
    return facets(P).m == P.n + 1


def _axis_frame(n: int) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(int(i == k)) for k in range(n)) for i in range(n)]


def _battery_for(name: str, P: Polytope, samples: int, seed: int, restarts: int) -> list[BoundsEntry]:
    n = P.n
    out = []
    frames = [Frame(np.eye(n))] + [random_frame(n, np.random.SeedSequence([seed, k])) for k in range(16)]
    if n == 2:
        lam = lw_exact_2d(P).lam
    else:
        h = heuristic_search(P, SearchConfig(restarts=restarts, seed=seed))
        frames.append(h.frame)
        lam = h.certified.lambda_lower
    out.append(check_lw(P, frames, name))
    out.append(check_universal_lower_bound(P, lam, body=name))
    if _is_simplex(P):
        if n >= 3:
            out += check_simplex_bounds(P, lam, body=name)
        dirs = _axis_frame(n) + [tuple(1 for _ in range(n))]
        out.append(chord_identity_check(P, dirs, name))
    if all(b > 0 for b in as_h(P).b):
        out.append(check_meyer(P, name))
    if projection_body(P).merged().m <= 16:
        out.append(check_petty_identity(P, _axis_frame(n), name))
    if n <= 3 and samples > 0:
        expect = "eq" if _is_simplex(P) else "ge"
        out.append(check_zhang(P, samples, seed, expect, body=name))
    return out


def run_battery(bodies: dict[str, Polytope], samples: int = 10 ** 5, seed: int = 0,
                workers: int = 1, restarts: int = 32) -> BoundsReport:
    """All applicable checks for every body; order follows ``bodies``, not completion."""
    items = list(bodies.items())

    def task(item):
        return _battery_for(item[0], item[1], samples, seed, restarts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, items))
    else:
        parts = [task(it) for it in items]
    report = BoundsReport()
    for p in parts:
        report.extend(p)
    return report
