from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from revlw.exact import dot
from revlw.fixtures import zoo_names
from revlw.frames import Frame, SearchConfig, heuristic_search, near_normal_basis, structured_search
from revlw.oracles import (
    HOLDS,
    VIOLATED,
    BoundsEntry,
    BoundsReport,
    brute_force_psi,
    check_lw,
    check_meyer,
    check_petty_identity,
    check_simplex_bounds,
    check_universal_lower_bound,
    check_zhang,
    chord_identity_check,
    random_frame,
    run_battery,
    universal_lower_bound,
)
from revlw.polytope import HPolytope, OriginNotInteriorError, scale_to_unit_surface, volume

F = Fraction


def test_zoo_contents():
    assert {"triangle", "square", "rhombus_1_4", "rhombus_1_2", "rhombus_3_4", "cube",
            "regular_tetrahedron", "standard_simplex", "crosspolytope_3", "crosspolytope_4",
            "box_simplex_124", "crosspolytope_123"} <= set(zoo_names())


def test_brute_force_cube(zoo):
    val, frame = brute_force_psi(zoo("unit_cube"), 1000, 0)
    assert 1 <= val < 1.5
    assert isinstance(frame, Frame)
    # the first 1000 draws are shared, so more trials can only get closer to 1
    more, _ = brute_force_psi(zoo("unit_cube"), 20_000, 0)
    assert 1 <= more <= val


def test_brute_force_triangle(zoo):
    # exact value vol / Lambda = (1/2) / (1/2) = 1 from the planar solver
    val, _ = brute_force_psi(zoo("triangle"), 10_000, 1)
    assert 1 <= val <= 1.02


def test_brute_force_above_certified(zoo):
    _, Ps = scale_to_unit_surface(zoo("rhombus_1_2"))
    r = structured_search(Ps, F(1, 10))
    val, _ = brute_force_psi(Ps, 2000, 2)
    assert val >= float(r.psi - r.tau)


def test_check_lw(zoo):
    e = check_lw(zoo("cube"), [random_frame(3, s) for s in range(20)], "cube")
    assert e.verdict == HOLDS and e.slack >= 0
    e = check_lw(zoo("triangle"), [Frame(np.eye(2))], "triangle")
    assert e.slack == pytest.approx(0.5, abs=1e-15)


def test_meyer(zoo):
    e = check_meyer(zoo("crosspolytope_123"))
    assert e.verdict == HOLDS and e.slack == 0 and e.note == "equality"
    # vol = 8 and the three sections are squares of area 8, 18 and 72: (2/9) * 8 * 18 * 72 = 64
    assert e.lhs == 64 and e.rhs == 64
    e = check_meyer(zoo("cube"))
    assert e.lhs == 64 and e.rhs == F(2, 9) * 64 and e.slack == F(448, 9)
    with pytest.raises(OriginNotInteriorError):
        check_meyer(zoo("unit_cube"))


def test_universal_bound_values(zoo):
    assert universal_lower_bound(2) == F(3, 8)
    assert universal_lower_bound(3) == F(5, 54)
    assert universal_lower_bound(2) < F(1, 2)
    assert check_universal_lower_bound(zoo("triangle"), F(1, 2)).verdict == HOLDS
    assert check_universal_lower_bound(zoo("cube"), 0.05).verdict == VIOLATED


def test_simplex_bounds(zoo):
    lo, hi = check_simplex_bounds(zoo("regular_tetrahedron"), F(2, 9))
    # 2! / (2^1 * 3^2)
    assert lo.rhs == F(1, 9)
    assert hi.verdict == HOLDS and hi.slack == 0
    lam = heuristic_search(zoo("box_simplex_124"), SearchConfig(restarts=8)).certified.lambda_lower
    lo, hi = check_simplex_bounds(zoo("box_simplex_124"), lam)
    assert lo.verdict == HOLDS and hi.verdict == HOLDS and hi.slack > 0
    with pytest.raises(ValueError):
        check_simplex_bounds(zoo("cube"), F(1, 2))
    with pytest.raises(ValueError):
        check_simplex_bounds(zoo("triangle"), F(1, 2))


def test_petty_axis(zoo):
    e = check_petty_identity(zoo("square"), [(1, 0), (0, 1)])
    assert e.lhs == 4 and e.rhs == 4
    e = check_petty_identity(zoo("unit_cube"), [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert e.lhs == 8 and e.rhs == 8


@given(st.tuples(*[st.integers(-6, 6)] * 3).filter(any))
def test_petty_random_directions(v):
    from revlw.fixtures import load_zoo
    W = near_normal_basis([v], 3) + [v]
    assert all(dot(W[i], W[k]) == 0 for i in range(3) for k in range(i))
    e = check_petty_identity(load_zoo("regular_tetrahedron"), W)
    assert e.verdict == HOLDS and e.slack == 0


def test_chord_identity(zoo):
    rng = np.random.default_rng(4)
    e = chord_identity_check(zoo("regular_tetrahedron"), rng.standard_normal((100, 3)))
    assert e.verdict == HOLDS and e.slack == 0
    e = chord_identity_check(zoo("unit_cube"), [(1, 0, 0)])
    assert e.verdict == VIOLATED and e.slack == F(2, 3)
    e = chord_identity_check(zoo("standard_simplex"), [(1, 0, 0)])
    assert e.slack == 0


def test_zhang_entries(zoo):
    e = check_zhang(zoo("regular_tetrahedron"), 200_000, 0, "eq")
    assert e.verdict == HOLDS and e.lhs_kind == "mc"
    e = check_zhang(zoo("unit_cube"), 200_000, 0, "gt")
    assert e.verdict == HOLDS


entries = st.builds(
    BoundsEntry,
    name=st.sampled_from(["lw_upper", "meyer"]),
    body=st.text(st.characters(min_codepoint=32, max_codepoint=0x2FFF), min_size=1, max_size=8),
    lhs=st.fractions(max_denominator=10 ** 6),
    rhs=st.floats(allow_nan=False, allow_infinity=False),
    slack=st.floats(allow_nan=False, allow_infinity=False),
    verdict=st.sampled_from(["holds", "violated", "inconclusive"]),
    lhs_kind=st.just("exact"),
    rhs_kind=st.just("float"),
    ci95=st.none() | st.floats(min_value=0, allow_infinity=False),
    note=st.text(st.characters(min_codepoint=32, max_codepoint=0x2FFF), max_size=10),
)


@given(st.lists(entries, max_size=5))
def test_report_round_trip(items):
    r = BoundsReport(items)
    assert BoundsReport.from_json(r.to_json()).entries == items
    assert BoundsReport.from_csv(r.to_csv()).entries == items


def test_battery_deterministic(zoo):
    bodies = {k: zoo(k) for k in ("triangle", "standard_simplex", "crosspolytope_3")}
    a = run_battery(bodies, samples=20_000, seed=5, workers=1, restarts=4)
    b = run_battery(bodies, samples=20_000, seed=5, workers=3, restarts=4)
    assert a.to_json() == b.to_json()
    assert a.ok


def test_translated_body_skips_meyer_in_battery():
    H = HPolytope([[1, 0], [-1, 0], [0, 1], [0, -1]], [3, -1, 3, -1])
    r = run_battery({"box": H}, samples=0, restarts=2)
    assert "meyer" not in {e.name for e in r.entries}
    assert volume(H) == 4
