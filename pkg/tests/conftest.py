import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from buoyancy_lab import zoo

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def polytopes(draw, d=3, min_vertices=6, max_vertices=24):
    """Random polytope: hull of Philox-seeded points on an anisotropic sphere."""
    n = draw(st.integers(min_vertices, max_vertices))
    seed = draw(st.integers(0, 2**32 - 1))
    body = zoo.make_random_polytope(n, seed, d)
    scale = np.array(draw(st.lists(st.floats(0.5, 2.0), min_size=d, max_size=d)))
    shift = np.array(draw(st.lists(st.floats(-3.0, 3.0), min_size=d, max_size=d)))
    return body.transformed(np.diag(scale), shift)


@st.composite
def unit_vectors(draw, d=3):
    v = np.array(draw(st.lists(st.floats(-1, 1), min_size=d, max_size=d)))
    if np.linalg.norm(v) < 1e-3:
        v = np.eye(d)[0]
    return v / np.linalg.norm(v)


def rotation(rng, d=3):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


@pytest.fixture(scope="session")
def cube():
    return zoo.make_box(1, 1, 1, centered=False)


@pytest.fixture(scope="session")
def ball():
    """Unit ball mesh with 2396 triangular facets."""
    return zoo.make_ball(1.0, N=1200)


@pytest.fixture(scope="session")
def small_ball():
    return zoo.make_ball(1.0, N=400)


@pytest.fixture(scope="session")
def ellipsoid():
    return zoo.make_ellipsoid(2, 1, 1, N=1200)


@pytest.fixture(scope="session")
def disk():
    return zoo.make_disk(1.0, N=4096)


@pytest.fixture(scope="session")
def square():
    return zoo.make_box(1, 1, centered=False)


# ----------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run

ACCEPTANCE_LINES = []


def _criterion_number(line):
    return int(line.split("criterion ", 1)[1].split(":", 1)[0])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_criterion_number):
            terminalreporter.write_line(line)
