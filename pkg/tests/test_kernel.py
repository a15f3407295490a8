import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import Delaunay

from buoyancy_lab import zoo
from buoyancy_lab.exceptions import DegenerateBodyError, EmptySectionError, GeometryError
from buoyancy_lab.kernel import (ConvexBody, HalfSpace, centroid, clip, cut_moments,
                                 moment_about_axis, second_moment, section, section_frame,
                                 volume)

from conftest import polytopes, rotation, unit_vectors


# ----------------------------------------------------------------------
# independent oracles: Delaunay tetrahedralisation and brute-force clipping


def delaunay_moments(points):
    """Volume and centroid of conv(points) from a Delaunay decomposition."""
    pts = np.asarray(points, dtype=float)
    tri = Delaunay(pts)
    d = pts.shape[1]
    simp = pts[tri.simplices]
    vols = np.abs(np.linalg.det(simp[:, 1:] - simp[:, :1])) / np.prod(np.arange(1, d + 1))
    return vols.sum(), (vols[:, None] * simp.mean(axis=1)).sum(axis=0) / vols.sum()


def brute_clip_points(points, normal, offset):
    """Kept vertices plus crossings of *every* vertex pair with the plane."""
    s = points @ normal - offset
    keep = points[s <= 0]
    i, j = np.triu_indices(len(points), 1)
    hit = s[i] * s[j] < 0
    lam = (s[i][hit] / (s[i][hit] - s[j][hit]))[:, None]
    cross = points[i][hit] + lam * (points[j][hit] - points[i][hit])
    return np.vstack([keep, cross])


# ----------------------------------------------------------------------
# exact values


def test_unit_cube_volume_and_centroid(cube):
    assert cube.volume == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(cube.centroid, [0.5, 0.5, 0.5], atol=1e-14)
    assert len(cube.facets) == 6


def test_simplex_volume_is_determinant_over_factorial():
    for d in (2, 3, 4):
        s = zoo.make_simplex(d)
        fact = np.prod(np.arange(1, d + 1))
        assert s.volume == pytest.approx(1.0 / fact, rel=1e-12)
        np.testing.assert_allclose(s.centroid, np.full(d, 1.0 / (d + 1)), atol=1e-12)


def test_simplex_clip_exact_and_monte_carlo():
    # removing the corner x >= 1/2 of conv{0, e1, e2, e3} removes a copy scaled by 1/2
    s = zoo.make_simplex(3)
    part = clip(s, HalfSpace([1.0, 0, 0], 0.5))
    assert part.volume == pytest.approx(7.0 / 48.0, rel=1e-12)
    rng = np.random.Generator(np.random.Philox(12345))
    x = rng.random((1_000_000, 3))
    inside = (x.sum(axis=1) <= 1) & (x[:, 0] <= 0.5)
    p = inside.mean()
    sigma = np.sqrt(p * (1 - p) / len(x))
    assert abs(part.volume - p) < 5 * sigma


def test_box_second_moment_closed_form():
    box = zoo.make_box(2.0, 1.0, 0.5)
    expected = np.diag([2.0 ** 2, 1.0, 0.25]) / 12.0 * box.volume
    np.testing.assert_allclose(second_moment(box), expected, atol=1e-14)


def test_ball_hemisphere_centroid(ball):
    lower = clip(ball, HalfSpace([0, 0, 1.0], 0.0))
    assert lower.volume == pytest.approx(ball.volume / 2, rel=1e-12)
    # solid hemisphere: centroid at 3r/8 from the flat face (mesh within 1%)
    assert -lower.centroid[2] == pytest.approx(3 / 8, rel=1e-2)


def test_cut_moments_matches_clip_and_delaunay(cube):
    n = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    vol, first = cut_moments(cube, n, 1.5 / np.sqrt(3))
    assert vol == pytest.approx(0.5, rel=1e-12)
    np.testing.assert_allclose(first / vol, clip(cube, HalfSpace(n, 1.5 / np.sqrt(3))).centroid,
                               atol=1e-12)
    ref_vol, ref_c = delaunay_moments(brute_clip_points(cube.vertices, n, 0.9))
    vol, first = cut_moments(cube, n, 0.9)
    assert vol == pytest.approx(ref_vol, rel=1e-12)
    np.testing.assert_allclose(first / vol, ref_c, atol=1e-12)


def test_cut_moments_outside_range(cube):
    vol, first = cut_moments(cube, [0, 0, 1.0], -1.0)
    assert vol == 0.0 and np.all(first == 0)
    vol, first = cut_moments(cube, [0, 0, 1.0], 2.0)
    assert vol == pytest.approx(1.0)
    np.testing.assert_allclose(first, [0.5, 0.5, 0.5], atol=1e-14)


def test_clip_returns_none_and_body():
    box = zoo.make_box(1, 1, 1)
    assert clip(box, HalfSpace([0, 0, 1.0], -0.5)) is None
    assert clip(box, HalfSpace([0, 0, 1.0], 0.5)) is box


def test_higher_dimensional_generic_path():
    box = zoo.make_box(1, 1, 1, 1, centered=False)
    n = np.full(4, 0.5)
    vol, first = cut_moments(box, n, 1.0)
    assert vol == pytest.approx(0.5, rel=1e-10)
    ref_vol, ref_c = delaunay_moments(brute_clip_points(box.vertices, n, 0.7))
    vol, first = cut_moments(box, n, 0.7)
    assert vol == pytest.approx(ref_vol, rel=1e-10)
    np.testing.assert_allclose(first / vol, ref_c, atol=1e-10)


# ----------------------------------------------------------------------
# sections


def test_cube_section_moments(cube):
    sec = section(cube, HalfSpace([0, 0, 1.0], 0.5))
    assert sec.area == pytest.approx(1.0)
    np.testing.assert_allclose(sec.moment, np.eye(2) / 12.0, atol=1e-14)
    np.testing.assert_allclose(sec.centroid, [0.5, 0.5, 0.5], atol=1e-14)
    assert moment_about_axis(sec, np.array([1.0, 0, 0])) == pytest.approx(1 / 12)


def test_cube_diagonal_section_is_hexagon(cube):
    n = np.ones(3) / np.sqrt(3)
    sec = section(cube, HalfSpace(n, 1.5 / np.sqrt(3)))
    assert len(sec.vertices) == 6
    # regular hexagon with side 1/sqrt(2): area 3 sqrt(3)/2 s^2, moment 5 sqrt(3)/16 s^4 I
    s = 1 / np.sqrt(2)
    assert sec.area == pytest.approx(3 * np.sqrt(3) / 2 * s ** 2, rel=1e-12)
    np.testing.assert_allclose(sec.moment, 5 * np.sqrt(3) / 16 * s ** 4 * np.eye(2), atol=1e-13)


def test_disk_equator_moment(ball):
    sec = section(ball, HalfSpace([0, 0, 1.0], 0.0))
    np.testing.assert_allclose(sec.moment, np.pi / 4 * np.eye(2), rtol=1e-2, atol=1e-3)


def test_section_radial_function(cube):
    sec = section(cube, HalfSpace([0, 0, 1.0], 0.5))
    w = np.array([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])
    np.testing.assert_allclose(sec.radial(w), [0.5, np.sqrt(0.5)], rtol=1e-12)


def test_planar_section_is_chord(disk):
    sec = section(disk, HalfSpace([0, 1.0], 0.0))
    assert sec.area == pytest.approx(2.0, rel=1e-6)
    assert sec.moment[0, 0] == pytest.approx(8 / 12, rel=1e-5)


def test_section_frame_orthonormal():
    rng = np.random.Generator(np.random.Philox(3))
    for _ in range(50):
        xi = rng.standard_normal(3)
        xi /= np.linalg.norm(xi)
        f = section_frame(xi)
        np.testing.assert_allclose(f @ f.T, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(f @ xi, 0, atol=1e-12)


def test_section_frame_deterministic():
    xi = np.array([0.6, 0.0, 0.8])
    np.testing.assert_array_equal(section_frame(xi), section_frame(xi.copy()))


# ----------------------------------------------------------------------
# errors


def test_degenerate_inputs():
    with pytest.raises(DegenerateBodyError, match="degenerate body"):
        ConvexBody.from_points([[0, 0, 0], [1, 1, 1], [2, 2, 2], [3, 3, 3]])
    with pytest.raises(DegenerateBodyError):
        ConvexBody.from_points([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0.5, 0.5, 0]])
    with pytest.raises(GeometryError):
        ConvexBody.from_points([1, 2, 3])


def test_halfspace_requires_unit_normal():
    with pytest.raises(GeometryError):
        HalfSpace([1.0, 1.0, 0.0], 0.0)


def test_empty_section(cube):
    with pytest.raises(EmptySectionError, match="empty section"):
        section(cube, HalfSpace([0, 0, 1.0], 2.0))
    with pytest.raises(EmptySectionError):
        section(cube, HalfSpace([0, 0, 1.0], 1.0))  # touches a face only


def test_arrays_are_read_only(cube):
    with pytest.raises(ValueError):
        cube.vertices[0, 0] = 5.0


# ----------------------------------------------------------------------
# properties


@given(polytopes(), unit_vectors(), st.floats(0.05, 0.95))
def test_clip_complementarity_and_mass_balance(body, xi, q):
    h = body.vertices @ xi
    t = h.min() + q * (h.max() - h.min())
    lo = clip(body, HalfSpace(xi, t))
    hi = clip(body, HalfSpace(-xi, -t))
    vl = 0.0 if lo is None else lo.volume
    vh = 0.0 if hi is None else hi.volume
    assert vl + vh == pytest.approx(body.volume, rel=1e-10)
    if lo is not None and hi is not None:
        mass = vl * lo.centroid + vh * hi.centroid
        np.testing.assert_allclose(mass / body.volume, body.centroid,
                                   atol=1e-10 * body.diameter)


@given(polytopes(), unit_vectors(), st.floats(0.05, 0.95))
def test_fast_cut_matches_delaunay_oracle(body, xi, q):
    h = body.vertices @ xi
    t = h.min() + q * (h.max() - h.min())
    vol, first = cut_moments(body, xi, t)
    ref_vol, ref_c = delaunay_moments(brute_clip_points(body.vertices, xi, t))
    assert vol == pytest.approx(ref_vol, rel=1e-10)
    np.testing.assert_allclose(first / vol, ref_c, atol=1e-10 * body.diameter)


@given(polytopes(), unit_vectors(), st.floats(0.1, 0.9), st.integers(0, 2**32 - 1))
def test_rigid_motion_equivariance(body, xi, q, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    R = rotation(rng)
    b = rng.standard_normal(3)
    moved = body.transformed(R, b)
    assert moved.volume == pytest.approx(body.volume, rel=1e-10)
    np.testing.assert_allclose(moved.centroid, R @ body.centroid + b, atol=1e-10 * body.diameter)
    h = body.vertices @ xi
    t = h.min() + q * (h.max() - h.min())
    v0, f0 = cut_moments(body, xi, t)
    v1, f1 = cut_moments(moved, R @ xi, t + (R @ xi) @ b)
    assert v1 == pytest.approx(v0, rel=1e-10)
    np.testing.assert_allclose(f1 / v1, R @ (f0 / v0) + b, atol=1e-10 * body.diameter)


@given(polytopes(), st.floats(0.2, 5.0))
def test_scaling_laws(body, lam):
    scaled = body.transformed(lam * np.eye(3))
    assert scaled.volume == pytest.approx(lam ** 3 * body.volume, rel=1e-10)
    np.testing.assert_allclose(scaled.centroid, lam * body.centroid,
                               atol=1e-10 * scaled.diameter)
    np.testing.assert_allclose(second_moment(scaled), lam ** 5 * second_moment(body),
                               rtol=1e-10, atol=1e-12 * lam ** 5)


@given(polytopes(), unit_vectors(), st.floats(0.2, 0.8))
def test_volume_derivative_is_section_area(body, xi, q):
    h = body.vertices @ xi
    t = h.min() + q * (h.max() - h.min())
    eps = 1e-6 * (h.max() - h.min())
    deriv = (cut_moments(body, xi, t + eps)[0] - cut_moments(body, xi, t - eps)[0]) / (2 * eps)
    assert deriv == pytest.approx(section(body, HalfSpace(xi, t)).area, rel=1e-5)


@given(polytopes(d=2), unit_vectors(d=2), st.floats(0.05, 0.95))
def test_planar_cut_matches_clip(body, xi, q):
    h = body.vertices @ xi
    t = h.min() + q * (h.max() - h.min())
    vol, first = cut_moments(body, xi, t)
    part = clip(body, HalfSpace(xi, t))
    assert vol == pytest.approx(part.volume, rel=1e-10)
    np.testing.assert_allclose(first / vol, part.centroid, atol=1e-10 * body.diameter)


@given(polytopes())
def test_body_invariants(body):
    assert body.volume > 0
    assert np.all(body.contains(body.centroid[None]))
    np.testing.assert_allclose(np.linalg.norm(body.normals, axis=1), 1.0, atol=1e-12)
    assert np.all(body.vertices @ body.normals.T <= body.offsets + body.eps)
    assert volume(body) == pytest.approx(delaunay_moments(body.vertices)[0], rel=1e-10)
    np.testing.assert_allclose(centroid(body), delaunay_moments(body.vertices)[1],
                               atol=1e-10 * body.diameter)
