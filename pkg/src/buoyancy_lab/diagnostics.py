"""Characterisation tests built on section moments and radial functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .directions import circle_directions, direction_grid
from .exceptions import DegenerateBodyError, GeometryError, SymmetryRequiredError
from .flotation import check_delta, default_tol_eq, equilibrium_scan, find_waterline, fit_sphere
from .kernel import ConvexBody, HalfSpace, cut_moments, section, section_frame

PASS, FAIL = "PASS", "FAIL"


def _verdict(ok):
    return PASS if ok else FAIL


# ----------------------------------------------------------------------
# equal principal moments of the waterline sections


@dataclass(frozen=True)
class MomentRecord:
    xi: np.ndarray
    t: float
    moment: np.ndarray
    eigenvalues: np.ndarray
    off_diagonal: float
    trace: float


@dataclass(frozen=True)
class MomentTestResult:
    records: list = field(repr=False)
    constant: float
    implied_radius: float
    target: float
    max_diagonal_deviation: float
    max_off_diagonal: float
    tol: float
    verdict: str


def _moment_record(body, delta, xi):
    wl = find_waterline(body, xi, delta)
    sec = section(body, HalfSpace(wl.xi, wl.t))
    J = sec.moment
    off = np.abs(J - np.diag(np.diag(J))).max() if len(J) > 1 else 0.0
    return MomentRecord(wl.xi, wl.t, J, np.linalg.eigvalsh(J), float(off), float(np.trace(J)))


def principal_moment_test(body, delta, directions, tol=0.02, mapper=map) -> MomentTestResult:
    """Are all waterline sections' moment matrices one common multiple of the identity?

    ``constant`` is the median diagonal entry over all sections (in the
    deterministic section frames).  PASS iff every diagonal entry is within
    ``tol`` of it relatively and every off-diagonal entry is within
    ``tol * constant``.  ``implied_radius = constant / delta`` is the radius
    the surface of centres must have; ``target = (d + 1) * delta * R`` is
    the common value of the weighted radial integrals.
    """
    delta = check_delta(body, delta)
    recs = list(mapper(partial(_moment_record, body, delta), list(np.atleast_2d(directions))))
    diag = np.concatenate([np.diag(r.moment) for r in recs])
    c = float(np.median(diag))
    dev = float(np.abs(diag - c).max() / c)
    off = float(max(r.off_diagonal for r in recs) / c)
    R = c / delta
    ok = dev <= tol and off <= tol
    return MomentTestResult(recs, c, R, (body.dimension + 1) * delta * R, dev, off, tol, _verdict(ok))


# ----------------------------------------------------------------------
# (d+1)-equichordal sections


@dataclass(frozen=True)
class EquichordalReport:
    sums: np.ndarray
    constant: float
    max_deviation: float
    tol: float
    verdict: str


def chord_power_sums(sec, power, n_chords):
    """``rho^p(w) + rho^p(-w)`` about the section centroid for sampled ``w``.

    For a 2-dimensional section ``w`` runs over ``n_chords`` angles in
    ``[0, pi)``; for a segment there is a single chord.
    """
    k = sec.frame.shape[0]
    if k == 1:
        w = np.array([[1.0]])
    elif k == 2:
        w = circle_directions(2 * n_chords)[:n_chords]
    else:
        raise GeometryError("equichordal test supports sections of dimension 1 and 2")
    if np.any(sec.equations[:, -1] <= 0):
        raise GeometryError("internal error: centroid outside section")
    return sec.radial(w) ** power + sec.radial(-w) ** power


def equichordal_test(body, delta, directions, n_chords=64, tol=0.02) -> EquichordalReport:
    """Is ``rho^(d+1)(w) + rho^(d+1)(-w)`` constant over chords and sections?

    ``rho`` is the radial function of each waterline section about its
    centroid.  The statistic is the relative deviation from the median.
    """
    if n_chords < 8:
        raise ValueError("n_chords must be at least 8")
    delta = check_delta(body, delta)
    p = body.dimension + 1
    sums = []
    for xi in np.atleast_2d(directions):
        wl = find_waterline(body, xi, delta)
        sums.append(chord_power_sums(section(body, HalfSpace(wl.xi, wl.t)), p, n_chords))
    sums = np.array(sums)
    c = float(np.median(sums))
    dev = float(np.abs(sums - c).max() / c)
    return EquichordalReport(sums, c, dev, tol, _verdict(dev <= tol))


# ----------------------------------------------------------------------
# isotropy of a function restricted to equators


@dataclass(frozen=True)
class IsotropyReport:
    matrices: np.ndarray
    first_moments: np.ndarray
    constant: float
    max_deviation: float
    tol: float
    verdict: str


def check_central_symmetry(body, tol=None, n_dirs=2000):
    """Raise unless ``h_K(w) = h_K(-w)`` (symmetry about the origin) on a grid.

    ``tol`` defaults to the residual tolerance of the body times its
    diameter, so inscribed meshes of symmetric bodies are accepted.
    """
    tol = default_tol_eq(body) * body.diameter if tol is None else tol
    if np.linalg.norm(body.centroid) > tol:
        raise SymmetryRequiredError("requires central symmetry (centroid not at origin)")
    w = direction_grid(body.dimension, n_dirs)
    if np.abs(body.support(w) - body.support(-w)).max() > tol:
        raise SymmetryRequiredError("requires central symmetry")


def radial_function(body, directions):
    """``rho_K(w) = max{s : s w in K}`` about the origin (must be interior)."""
    w = np.atleast_2d(np.asarray(directions, dtype=float))
    proj = w @ body.normals.T
    with np.errstate(divide="ignore"):
        r = np.where(proj > 0, body.offsets / proj, np.inf)
    return r.min(axis=1)


def radial_power(body, power=None):
    """``f = rho_K^power`` as a callable, ``power`` defaulting to ``d + 1``.

    Requires an origin-symmetric body.
    """
    check_central_symmetry(body)
    p = body.dimension + 1 if power is None else power
    return lambda w: radial_function(body, w) ** p


def isotropy_on_equators_test(f, directions, n_nodes=64, tol=0.02) -> IsotropyReport:
    """Second-moment matrices of ``f`` on the great circles orthogonal to ``directions``.

    ``f`` maps an ``(n, 3)`` array of unit vectors to values.  For each
    direction ``xi`` the equator is parametrised in the section frame of
    ``xi`` and ``M_jk = int w_j w_k f(w) dw`` is computed with the
    trapezoid rule on ``n_nodes`` equally spaced nodes.  PASS iff every
    ``M`` is within ``tol`` (relative) of ``c * I`` for one global ``c``.
    """
    if n_nodes < 8:
        raise ValueError("n_nodes must be at least 8")
    circle = circle_directions(n_nodes)
    weight = 2 * np.pi / n_nodes
    mats, firsts = [], []
    for xi in np.atleast_2d(directions):
        frame = section_frame(xi)
        if len(frame) != 2:
            raise GeometryError("equator isotropy needs d = 3")
        vals = np.asarray(f(circle @ frame), dtype=float)
        mats.append(weight * np.einsum("n,nj,nk->jk", vals, circle, circle))
        firsts.append(weight * vals @ circle)
    mats, firsts = np.array(mats), np.array(firsts)
    diag = np.concatenate([np.diag(m) for m in mats])
    c = float(np.median(diag))
    off = np.abs(mats[:, 0, 1]).max()
    dev = float(max(np.abs(diag - c).max(), off, np.abs(firsts).max()) / abs(c))
    return IsotropyReport(mats, firsts, c, dev, tol, _verdict(dev <= tol))


# ----------------------------------------------------------------------
# convex floating body and Hausdorff distance


@dataclass(frozen=True)
class FloatingBody:
    """Convex floating body on a direction grid.

    ``normals``/``offsets`` are the sampled cutting planes ``p . xi = t``;
    the body lies in ``p . xi >= t``.  ``polytope`` is ``None`` when the
    intersection has no interior.  ``facet_cut_error`` is the largest
    relative deviation from ``delta`` of the volume cut off by the plane of
    any facet of the polytope; it is small exactly when every facet lies on
    a cutting plane (coincidence with the Dupin body on this grid).
    """
    delta: float
    normals: np.ndarray
    offsets: np.ndarray
    polytope: ConvexBody | None
    supporting_fraction: float = float("nan")
    facet_cut_error: float = float("nan")

    @property
    def empty(self):
        return self.polytope is None

    def dupin_coincident(self, tol=1e-6):
        return (not self.empty) and self.facet_cut_error <= tol


def floating_body(body, delta, directions, tol=1e-10, offsets=None) -> FloatingBody:
    """Intersection of the upper half-spaces ``{p . xi >= t(xi)}`` over ``directions``.

    The result is clipped to ``body`` and is empty when the half-spaces
    leave no interior.  ``offsets`` may pass precomputed waterline offsets
    ``t(xi)``.  ``supporting_fraction`` is the share of sampled planes
    that touch the result (the others are redundant on this grid).
    """
    delta = check_delta(body, delta)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if offsets is None:
        ts = np.array([find_waterline(body, xi, delta, tol).t for xi in dirs])
    else:
        ts = np.asarray(offsets, dtype=float)
    # as {p : A p <= b}
    A = np.vstack([-dirs, body.normals])
    b = np.concatenate([-ts, body.offsets])
    poly = _halfspace_polytope(A, b, body.eps)
    frac = err = float("nan")
    if poly is not None:
        h = poly.support(-dirs)
        frac = float(np.mean(np.abs(h + ts) <= 1e-7 * body.diameter))
        # a facet on the boundary of the body cuts off nothing and counts as a miss
        cut = np.array([cut_moments(body, -n, -off)[0]
                        for n, off in zip(poly.normals, poly.offsets)])
        err = float(np.abs(cut - delta).max() / delta)
        poly.meta.update(generator="floating_body", delta=delta)
    return FloatingBody(delta, dirs, ts, poly, frac, err)


def _halfspace_polytope(A, b, eps):
    d = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    # Chebyshev centre: max r s.t. A x + r |a| <= b
    res = linprog(np.r_[np.zeros(d), -1.0], A_ub=np.column_stack([A, norms]), b_ub=b,
                  bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= eps:
        return None
    center = res.x[:d]
    hs = HalfspaceIntersection(np.column_stack([A, -b]), center)
    try:
        return ConvexBody.from_points(hs.intersections)
    except DegenerateBodyError:
        return None


def hausdorff_distance(A, B, n_dirs=4000):
    """``sup |h_A - h_B|`` over a deterministic direction grid."""
    if A.dimension != B.dimension:
        raise GeometryError("dimension mismatch")
    dirs = direction_grid(A.dimension, n_dirs)
    return float(np.abs(A.support(dirs) - B.support(dirs)).max())


def hausdorff_to_ball(body, center, radius, n_dirs=4000):
    dirs = direction_grid(body.dimension, n_dirs)
    h_ball = dirs @ np.asarray(center, dtype=float) + radius
    return float(np.abs(body.support(dirs) - h_ball).max())


# ----------------------------------------------------------------------
# vanishing-delta limit


@dataclass(frozen=True)
class BallLimitStep:
    delta: float
    floats: bool
    max_residual: float
    radius: float
    fit_deviation: float
    center: np.ndarray
    floating_body_distance: float
    ball_distance: float


@dataclass(frozen=True)
class BallLimitReport:
    """``floats_all``: every scan floats.  ``ball_certified``: additionally the
    distances to ``K`` shrink as required, so the verdict is PASS."""
    steps: list
    floats_all: bool
    ball_distances_decrease: bool
    floating_body_distances_decrease: bool
    final_distance: float
    tol: float
    verdict: str

    @property
    def ball_certified(self):
        return self.verdict == PASS


def mesh_tolerance(body, n_dirs=4000):
    """Hausdorff distance from the body to the sphere fitted to its vertices."""
    c, r = fit_sphere(body.vertices)
    return hausdorff_to_ball(body, c, r, n_dirs)


def ball_limit_test(body, deltas, n_dirs=200, tol_eq=None, tol=None, mapper=map) -> BallLimitReport:
    """Floating in every direction for a decreasing sequence of ``delta``.

    Per step: equilibrium scan on ``n_dirs`` grid directions, sphere fit of
    the buoyancy centres (``r_n``, fit centre ``c_n``), the convex floating
    body ``K_n`` on the same grid, and the Hausdorff distances
    ``d(K_n, K)`` (NaN when ``K_n`` is empty) and ``d(B(c_n, r_n), K)``.

    PASS iff every scan floats, both distance sequences decrease, and the
    last ``d(K_n, K)`` is at most ``tol`` (default: twice
    :func:`mesh_tolerance`).
    """
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) >= 0):
        raise ValueError("deltas must be strictly decreasing")
    tol = 2.0 * mesh_tolerance(body) if tol is None else float(tol)
    steps = []
    for delta in deltas:
        scan = equilibrium_scan(body, delta, n_dirs, tol_eq, refine=False, mapper=mapper)
        centers = np.array([rec.center for rec in scan.records])
        c, r = fit_sphere(centers)
        dev = float(np.abs(np.linalg.norm(centers - c, axis=1) - r).max() / r)
        dirs = np.array([rec.xi for rec in scan.records])
        fb = floating_body(body, delta, dirs, offsets=[rec.t for rec in scan.records])
        dk = float("nan") if fb.empty else hausdorff_distance(fb.polytope, body)
        steps.append(BallLimitStep(float(delta), scan.floats, scan.max_residual, r, dev, c,
                                   dk, hausdorff_to_ball(body, c, r)))
    floats_all = all(s.floats for s in steps)
    ball = np.array([s.ball_distance for s in steps])
    dist = np.array([s.floating_body_distance for s in steps])
    dist = dist[~np.isnan(dist)]
    ball_dec = bool(np.all(np.diff(ball) < 0))
    fb_dec = bool(len(dist) > 0 and np.all(np.diff(dist) < 0))
    final = float(dist[-1]) if len(dist) else float("nan")
    ok = floats_all and ball_dec and fb_dec and final <= tol
    return BallLimitReport(steps, floats_all, ball_dec, fb_dec, final, tol, _verdict(ok))
