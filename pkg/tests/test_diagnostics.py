import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq
from scipy.spatial import ConvexHull

from buoyancy_lab import zoo
from buoyancy_lab.diagnostics import (FAIL, PASS, ball_limit_test, chord_power_sums,
                                      equichordal_test, floating_body, hausdorff_distance,
                                      isotropy_on_equators_test, mesh_tolerance,
                                      principal_moment_test, radial_function, radial_power)
from buoyancy_lab.directions import circle_directions, direction_grid, fibonacci_sphere
from buoyancy_lab.exceptions import GeometryError, SymmetryRequiredError
from buoyancy_lab.flotation import find_waterline, sample_surface_of_centers
from buoyancy_lab.kernel import HalfSpace, section

from conftest import polytopes

DIRS = fibonacci_sphere(60)


# ----------------------------------------------------------------------
# section moments


def test_ball_principal_moments(ball):
    delta = ball.volume / 2
    res = principal_moment_test(ball, delta, DIRS)
    assert res.verdict == PASS
    assert res.constant == pytest.approx(np.pi / 4, rel=1e-2)
    assert res.implied_radius == pytest.approx(3 / 8, rel=1e-2)
    # (d+1) delta R = pi for the unit ball
    assert res.target == pytest.approx(np.pi, rel=2e-2)
    fit = sample_surface_of_centers(ball, delta, DIRS)
    assert res.implied_radius == pytest.approx(fit.mean_radius, rel=1e-2)
    assert res.max_diagonal_deviation >= 0 and res.max_off_diagonal >= 0


def test_ellipsoid_principal_moments_fail(ellipsoid):
    res = principal_moment_test(ellipsoid, ellipsoid.volume / 2, DIRS)
    assert res.verdict == FAIL
    assert res.max_diagonal_deviation > 10 * res.tol


def test_cube_axis_sections_isotropic_but_grid_fails(cube):
    axes = principal_moment_test(cube, 0.5, np.eye(3))
    assert axes.verdict == PASS
    assert axes.constant == pytest.approx(1 / 12, rel=1e-12)
    assert principal_moment_test(cube, 0.5, DIRS).verdict == FAIL


# ----------------------------------------------------------------------
# equichordal sections


def test_ball_equichordal(ball):
    rep = equichordal_test(ball, ball.volume / 2, DIRS)
    assert rep.verdict == PASS
    assert rep.constant == pytest.approx(2.0, rel=2e-2)  # 2 r^(d+1)


def test_ellipse_section_chord_sums(ellipsoid):
    sec = section(ellipsoid, HalfSpace(np.array([0, 0, 1.0]), 0.0))
    sums = chord_power_sums(sec, 4, 8)
    # semi-axes 2 (first frame axis) and 1: 2 * 2^4 and 2 * 1^4
    assert sums[0] == pytest.approx(32.0, rel=1e-2)
    assert sums[4] == pytest.approx(2.0, rel=1e-2)
    assert equichordal_test(ellipsoid, ellipsoid.volume / 2, DIRS).verdict == FAIL


def test_equichordal_needs_enough_chords(cube):
    with pytest.raises(ValueError):
        equichordal_test(cube, 0.5, DIRS, n_chords=4)


def test_square_sections_not_equichordal(cube):
    assert equichordal_test(cube, 0.5, np.eye(3)).verdict == FAIL


def _isotropy_gap(J):
    lam = np.linalg.eigvalsh(J)
    return (lam[-1] - lam[0]) / lam.mean()


@given(polytopes(min_vertices=8, max_vertices=40), st.floats(0.2, 0.8))
@settings(max_examples=20)
def test_equichordal_implies_isotropic_sections(body, q):
    # even part of rho^4 constant => isotropic second moments; quantitatively
    # the anisotropy is bounded by about 4/pi times the chord-sum deviation
    delta = q * body.volume
    for xi in fibonacci_sphere(12):
        wl = find_waterline(body, xi, delta)
        sec = section(body, HalfSpace(wl.xi, wl.t))
        sums = chord_power_sums(sec, 4, 512)
        dev = np.abs(sums - np.median(sums)).max() / np.median(sums)
        assert _isotropy_gap(sec.moment) <= 2.0 * dev + 1e-9


def test_equichordal_implication_on_ball(ball):
    for xi in DIRS[:10]:
        wl = find_waterline(ball, xi, ball.volume / 2)
        sec = section(ball, HalfSpace(wl.xi, wl.t))
        sums = chord_power_sums(sec, 4, 512)
        dev = np.abs(sums - np.median(sums)).max() / np.median(sums)
        assert _isotropy_gap(sec.moment) <= 2.0 * dev + 1e-9


# ----------------------------------------------------------------------
# equator isotropy


def test_ball_equators_isotropic(ball):
    rep = isotropy_on_equators_test(radial_power(ball), DIRS)
    assert rep.verdict == PASS
    # int cos^2 over a unit circle
    assert rep.constant == pytest.approx(np.pi, rel=2e-2)


def test_ellipsoid_equators_not_isotropic(ellipsoid):
    rep = isotropy_on_equators_test(radial_power(ellipsoid), np.eye(3))
    assert rep.verdict == FAIL


def test_isotropy_scaling_by_constant(ellipsoid, ball):
    for body in (ellipsoid, ball):
        f = radial_power(body)
        base = isotropy_on_equators_test(f, DIRS)
        scaled = isotropy_on_equators_test(lambda w: 3.5 * f(w), DIRS)
        assert scaled.verdict == base.verdict
        assert scaled.constant == pytest.approx(3.5 * base.constant, rel=1e-12)


def test_isotropy_requires_symmetry():
    body = zoo.make_random_polytope(20, seed=3)
    with pytest.raises(SymmetryRequiredError, match="requires central symmetry"):
        radial_power(body)
    with pytest.raises(SymmetryRequiredError):
        radial_power(zoo.make_simplex(3).transformed(shift=-np.full(3, 0.25)))


def test_radial_function_of_box():
    box = zoo.make_box(2.0, 2.0, 2.0)
    w = np.array([[1.0, 0, 0], np.ones(3) / np.sqrt(3)])
    np.testing.assert_allclose(radial_function(box, w), [1.0, np.sqrt(3)], rtol=1e-12)


def test_isotropy_exact_quadrature():
    # constant f: M = pi I exactly for the trapezoid rule on a circle
    rep = isotropy_on_equators_test(lambda w: np.ones(len(w)), DIRS, n_nodes=16)
    assert rep.verdict == PASS
    assert rep.constant == pytest.approx(np.pi, rel=1e-14)
    assert rep.max_deviation < 1e-12


# ----------------------------------------------------------------------
# convex floating body


def test_ball_floating_body_radius_half(ball):
    # a cap of height 1/2 holds 5 pi / 24
    fb = floating_body(ball, 5 * np.pi / 24, fibonacci_sphere(300))
    assert not fb.empty
    dirs = direction_grid(3, 2000)
    assert np.abs(fb.polytope.support(dirs) - 0.5).max() < 1e-2
    assert fb.dupin_coincident()


def _polygon_clip_area(poly, n, t):
    """Area of a convex polygon below the line ``p . n = t`` (Sutherland-Hodgman)."""
    out = []
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        sa, sb = a @ n - t, b @ n - t
        if sa <= 0:
            out.append(a)
        if sa * sb < 0:
            out.append(a + sa / (sa - sb) * (b - a))
    if len(out) < 3:
        return 0.0
    p = np.array(out)
    return 0.5 * abs(np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1]))


def test_square_floating_body_matches_chord_solver(square):
    delta, dirs = 0.02, circle_directions(64)
    unit_sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    ts = np.array([brentq(lambda t: _polygon_clip_area(unit_sq, xi, t) - delta,
                          (unit_sq @ xi).min(), (unit_sq @ xi).max(), xtol=1e-15)
                   for xi in dirs])
    # brute force: all pairwise line intersections feasible for every half-plane
    pts = []
    for i in range(len(dirs)):
        for j in range(i + 1, len(dirs)):
            A = np.array([dirs[i], dirs[j]])
            if abs(np.linalg.det(A)) < 1e-12:
                continue
            p = np.linalg.solve(A, [ts[i], ts[j]])
            if np.all(dirs @ p >= ts - 1e-11) and np.all((p >= -1e-12) & (p <= 1 + 1e-12)):
                pts.append(p)
    pts = np.array(pts)
    ref = pts[ConvexHull(pts).vertices]

    fb = floating_body(square, delta, dirs)
    np.testing.assert_allclose(fb.offsets, ts, atol=1e-9)
    got = fb.polytope.vertices
    assert len(got) == len(ref)
    d = np.linalg.norm(got[:, None] - ref[None], axis=2)
    assert d.min(axis=1).max() < 1e-8
    # corner cut along the diagonal: x^2 / 2 = 0.02
    diag = np.array([1.0, 1.0]) / np.sqrt(2)
    assert fb.polytope.support(-diag) == pytest.approx(-0.2 / np.sqrt(2), abs=1e-8)


def test_cube_floating_body_corner_depth(cube):
    delta = 1e-3
    fb = floating_body(cube, delta, fibonacci_sphere(200))
    # deepest cut is across a corner: tetrahedron s^3 / 6 = delta at distance s / sqrt(3)
    depth = (6 * delta) ** (1 / 3) / np.sqrt(3)
    dist = hausdorff_distance(cube, fb.polytope)
    assert 0.98 * depth <= dist <= depth * (1 + 1e-9)


def test_floating_body_monotone_in_delta(small_ball):
    dirs = fibonacci_sphere(80)
    outer = floating_body(small_ball, 0.05 * small_ball.volume, dirs)
    inner = floating_body(small_ball, 0.2 * small_ball.volume, dirs)
    assert np.all(outer.polytope.contains(inner.polytope.vertices, tol=1e-9))
    assert np.all(small_ball.contains(outer.polytope.vertices, tol=1e-9))


def test_floating_body_refinement_shrinks(small_ball):
    coarse = floating_body(small_ball, 0.1 * small_ball.volume, fibonacci_sphere(40))
    both = np.vstack([fibonacci_sphere(40), fibonacci_sphere(90)])
    fine = floating_body(small_ball, 0.1 * small_ball.volume, both)
    assert np.all(coarse.polytope.contains(fine.polytope.vertices, tol=1e-9))


def test_floating_body_symmetric_grid():
    box = zoo.make_box(1.0, 2.0, 3.0)
    g = fibonacci_sphere(50)
    fb = floating_body(box, 0.05 * box.volume, np.vstack([g, -g]))
    w = fibonacci_sphere(500)
    np.testing.assert_allclose(fb.polytope.support(w), fb.polytope.support(-w), atol=1e-9)


def test_floating_body_shrinks_to_centre(small_ball):
    dirs = fibonacci_sphere(60)
    near = floating_body(small_ball, 0.49 * small_ball.volume, dirs)
    assert near.empty or np.abs(near.polytope.vertices).max() < 0.05
    mid = floating_body(small_ball, 0.3 * small_ball.volume, dirs)
    assert not mid.empty and np.abs(mid.polytope.vertices).max() > 0.1


def test_floating_body_facets_on_planes(square):
    fb = floating_body(square, 0.02, circle_directions(64))
    assert fb.facet_cut_error < 1e-6
    assert fb.supporting_fraction == 1.0
    # a single direction leaves three facets on the boundary of the square
    sparse = floating_body(square, 0.02, np.array([[0.0, 1.0]]))
    assert sparse.facet_cut_error == pytest.approx(1.0)
    assert not sparse.dupin_coincident()


# ----------------------------------------------------------------------
# Hausdorff distance


def test_hausdorff_concentric_and_translated():
    b1 = zoo.make_ball(1.0, N=300)
    b2 = zoo.make_ball(0.5, N=300)
    # same vertex directions, so |h1 - h2| = h1 / 2 <= 1/2
    assert hausdorff_distance(b1, b2) == pytest.approx(0.5, rel=1e-5)
    v = np.array([0.3, -0.1, 0.2])
    assert hausdorff_distance(b1, b1.transformed(shift=v)) == pytest.approx(
        np.linalg.norm(v), rel=1e-3)


def test_hausdorff_dimension_mismatch(cube, square):
    with pytest.raises(GeometryError, match="dimension"):
        hausdorff_distance(cube, square)


@given(polytopes(), polytopes(), polytopes())
@settings(max_examples=20)
def test_hausdorff_metric(a, b, c):
    dab = hausdorff_distance(a, b, 500)
    assert dab == hausdorff_distance(b, a, 500)
    assert hausdorff_distance(a, a, 500) == 0.0
    assert dab <= hausdorff_distance(a, c, 500) + hausdorff_distance(c, b, 500) + 1e-12


# ----------------------------------------------------------------------
# vanishing delta


def test_ball_limit_report(small_ball):
    deltas = small_ball.volume * np.array([0.25, 0.125, 0.0625])
    rep = ball_limit_test(small_ball, deltas, n_dirs=60)
    assert rep.floats_all
    assert rep.ball_distances_decrease and rep.floating_body_distances_decrease
    radii = [s.radius for s in rep.steps]
    assert np.all(np.diff(radii) > 0)
    assert rep.tol == pytest.approx(2 * mesh_tolerance(small_ball))


def test_ball_limit_ellipsoid_never_floats():
    body = zoo.make_ellipsoid(2, 1, 1, N=400)
    rep = ball_limit_test(body, body.volume * np.array([0.5, 0.25]), n_dirs=40)
    assert not any(s.floats for s in rep.steps)
    assert rep.verdict == FAIL


def test_zindler_floats_but_is_not_certified():
    z = zoo.make_zindler(amplitude=0.25, N=1024)
    rep = ball_limit_test(z, [z.volume / 2], n_dirs=64)
    assert rep.floats_all
    assert not rep.ball_certified


def test_ball_limit_requires_decreasing(small_ball):
    with pytest.raises(ValueError):
        ball_limit_test(small_ball, [0.1, 0.2])
