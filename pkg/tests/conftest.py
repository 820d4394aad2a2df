import pytest
from hypothesis import settings, HealthCheck
from hypothesis import strategies as st

from revlw.fixtures import load_zoo
from revlw.polytope import DegeneratePolytopeError, VPolytope
from revlw.exact import affine_rank

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def zoo():
    return load_zoo


def _points(n, lo=-4, hi=4, min_size=None, max_size=9):
    pt = st.tuples(*[st.integers(lo, hi)] * n)
    return st.lists(pt, min_size=min_size or n + 1, max_size=max_size, unique=True)


@st.composite
def polytopes(draw, n=3, max_size=9):
    """Random full-dimensional lattice polytope given by its vertices."""
    pts = draw(_points(n, max_size=max_size).filter(lambda p: affine_rank(p) == n))
    try:
        return VPolytope.from_points(pts)
    except DegeneratePolytopeError:  # pragma: no cover - filtered above
        from hypothesis import reject
        reject()


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    # keep the call-phase report on the item so fixtures can read the outcome
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep
