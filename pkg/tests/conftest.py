import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dsloc.geometry import Point

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_int = st.integers(min_value=-20, max_value=20)
coord = st.builds(lambda n, d: mpq(n, d), st.integers(-64, 64), st.integers(1, 8))
points = st.builds(Point, coord, coord)


def P(x, y):
    return Point(mpq(x), mpq(y))


@pytest.fixture(scope="session")
def two_island_structure():
    from dsloc import fixtures as fx
    from dsloc.partition_tree import build_structure
    G = fx.two_islands()
    return build_structure(G, fx.island_heavy(G, "faceA"))
