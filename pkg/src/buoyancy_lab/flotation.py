"""Waterlines, buoyancy centres, the surface of centres and equilibrium scans."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.spatial import cKDTree

from .directions import check_direction, direction_grid, grid_spacing, unit
from .exceptions import DegenerateBuoyancyLineError, DensityOutOfRangeError
from .kernel import ConvexBody, cut_moments, section_frame

FLOATS = "FLOATS_ALL_DIRECTIONS"
NO = "NO"

#: tolerance on equilibrium residuals for exact (non-meshed) polytopes
TOL_EQ_EXACT = 1e-6
#: residual scale for meshed smooth bodies: tol_eq = MESH_TOL_FACTOR / n_facets
MESH_TOL_FACTOR = 4.0


@dataclass(frozen=True)
class Waterline:
    xi: np.ndarray
    t: float
    delta: float
    volume: float


@dataclass(frozen=True)
class BuoyancyRecord:
    xi: np.ndarray
    t: float
    volume: float
    center: np.ndarray
    body_centroid: np.ndarray
    residual: float


@dataclass(frozen=True)
class SurfaceOfCenters:
    directions: np.ndarray
    centers: np.ndarray
    center: np.ndarray
    mean_radius: float
    max_deviation: float
    body_centroid: np.ndarray

    @property
    def radii(self):
        return np.linalg.norm(self.centers - self.center, axis=1)

    @property
    def center_offset(self):
        """Distance between the fitted centre and the body centroid."""
        return float(np.linalg.norm(self.center - self.body_centroid))


@dataclass(frozen=True)
class ScanResult:
    records: list = field(repr=False)
    verdict: str
    max_residual: float
    tol_eq: float
    equilibrium_directions: np.ndarray
    equilibrium_residuals: np.ndarray

    @property
    def floats(self):
        return self.verdict == FLOATS


def check_delta(body, delta):
    vol = body.volume
    if not (0.0 < delta < vol):
        raise DensityOutOfRangeError(
            f"density out of range: delta={delta!r} must lie in (0, {vol!r})")
    return float(delta)


def delta_from_density(body, density):
    """Submerged volume for a relative density ``D`` in (0, 1)."""
    if not (0.0 < density < 1.0):
        raise DensityOutOfRangeError(f"density out of range: {density!r} not in (0, 1)")
    return density * body.volume


def default_tol_eq(body):
    """Residual tolerance: fixed for exact polytopes, ~1/n_facets for meshes."""
    n = body.meta.get("mesh_facets")
    if n:
        return MESH_TOL_FACTOR / n
    return TOL_EQ_EXACT


def find_waterline(body: ConvexBody, xi, delta, tol=1e-10) -> Waterline:
    """Offset ``t`` with ``vol(body cap {p . xi <= t}) = delta``.

    Bisection between the extreme vertex heights.  Stops once the volume
    error is below ``tol * vol(body)``, or when the bracket can no longer be
    halved in floating point (``tol=0`` asks for exactly that).
    """
    xi = check_direction(xi, body.dimension)
    delta = check_delta(body, delta)
    target = tol * body.volume
    h = body.vertices @ xi
    lo, hi = float(h.min()), float(h.max())
    vol_lo, vol_hi = 0.0, body.volume
    t, vol = lo, vol_lo
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # bracket exhausted: keep the closer end
            if abs(vol_lo - delta) < abs(vol_hi - delta):
                t, vol = lo, vol_lo
            else:
                t, vol = hi, vol_hi
            break
        vol = cut_moments(body, xi, mid)[0]
        t = mid
        err = vol - delta
        if abs(err) <= target and target > 0:
            break
        if err == 0:
            break
        if err < 0:
            lo, vol_lo = mid, vol
        else:
            hi, vol_hi = mid, vol
    return Waterline(xi, t, delta, vol)


def _angle_to(xi, v):
    along = v @ xi
    across = np.linalg.norm(v - along * xi)
    return float(np.arctan2(across, along))


def buoyancy_center(body, xi, delta, tol=1e-10) -> BuoyancyRecord:
    """Centroid of the submerged part for the waterline in direction ``xi``."""
    wl = find_waterline(body, xi, delta, tol)
    vol, first = cut_moments(body, wl.xi, wl.t)
    center = first / vol
    gap = body.centroid - center
    if np.linalg.norm(gap) <= body.eps:
        raise DegenerateBuoyancyLineError("degenerate buoyancy line")
    return BuoyancyRecord(wl.xi, wl.t, vol, center, body.centroid, _angle_to(wl.xi, gap))


def equilibrium_residual(body, xi, delta, tol=1e-10) -> float:
    """Angle (radians) between ``xi`` and the line from the buoyancy centre to the centroid.

    Zero means the body floats in equilibrium in direction ``xi``.
    """
    return buoyancy_center(body, xi, delta, tol).residual


def fit_sphere(points):
    """Algebraic least-squares sphere (Coope): returns ``(center, mean_radius)``.

    Solves ``|x|^2 = 2 c . x + k`` linearly.  Works in any dimension.
    """
    P = np.asarray(points, dtype=float)
    shift = P.mean(axis=0)
    Q = P - shift
    A = np.column_stack([2 * Q, np.ones(len(Q))])
    sol, *_ = np.linalg.lstsq(A, (Q * Q).sum(axis=1), rcond=None)
    center = sol[:-1] + shift
    return center, float(np.linalg.norm(P - center, axis=1).mean())


def _record_for(body, delta, tol, xi):
    return buoyancy_center(body, xi, delta, tol)


def buoyancy_records(body, delta, directions, tol=1e-10, mapper=map):
    """Records for each direction, in input order.  ``mapper`` may be a pool's map."""
    dirs = np.asarray(directions, dtype=float)
    return list(mapper(partial(_record_for, body, delta, tol), list(dirs)))


def surface_from_records(body, records) -> SurfaceOfCenters:
    dirs = np.array([r.xi for r in records])
    centers = np.array([r.center for r in records])
    if len(records) >= body.dimension + 1:
        center, rbar = fit_sphere(centers)
    else:
        center = body.centroid
        rbar = float(np.linalg.norm(centers - center, axis=1).mean())
    radii = np.linalg.norm(centers - center, axis=1)
    dev = float(np.abs(radii - rbar).max() / rbar)
    return SurfaceOfCenters(dirs, centers, center, rbar, dev, body.centroid)


def sample_surface_of_centers(body, delta, directions, tol=1e-10, mapper=map) -> SurfaceOfCenters:
    """Buoyancy centres over ``directions`` with a sphere fit.

    With fewer than ``d + 1`` directions the body centroid is used as the
    centre instead of a fit.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if len(dirs) == 0:
        raise ValueError("directions must be non-empty")
    for xi in dirs:
        check_direction(xi, body.dimension)
    return surface_from_records(body, buoyancy_records(body, delta, dirs, tol, mapper))


# ----------------------------------------------------------------------
# scans


def _neighbours(dirs, k):
    tree = cKDTree(dirs)
    _, idx = tree.query(dirs, k=k + 1)
    return idx[:, 1:]


def _grid_minima(dirs, res, d):
    n = len(dirs)
    if d == 2:
        left, right = np.roll(res, 1), np.roll(res, -1)
        return np.flatnonzero((res <= left) & (res <= right))
    nb = _neighbours(dirs, min(8, n - 1))
    return np.flatnonzero(np.all(res[:, None] <= res[nb], axis=1))


def refine_direction(body, delta, xi, step, tol=1e-10, min_step=1e-7, max_evals=400):
    """Projected coordinate descent of the residual on the sphere.

    Works in the tangent chart ``xi(u) = unit(xi0 + u @ frame)`` of the
    starting direction.  Each axis keeps its own step: a move of ``+-step``
    is taken on improvement, otherwise that axis' step is halved.  Returns
    ``(xi, residual)``.
    """
    xi0 = np.asarray(xi, dtype=float)
    frame = section_frame(xi0)
    u = np.zeros(len(frame))
    steps = np.full(len(frame), float(step))
    best = equilibrium_residual(body, xi0, delta, tol)
    evals = 1
    while steps.max() >= min_step and evals < max_evals:
        for k in range(len(frame)):
            if steps[k] < min_step:
                continue
            for sgn in (1.0, -1.0):
                cand = u.copy()
                cand[k] += sgn * steps[k]
                r = equilibrium_residual(body, unit(xi0 + cand @ frame), delta, tol)
                evals += 1
                if r < best:
                    u, best = cand, r
                    break
            else:
                steps[k] *= 0.5
    return unit(xi0 + u @ frame), best


def _cluster(dirs, res, radius):
    order = np.argsort(res)
    kept = []
    for i in order:
        if all(np.arccos(np.clip(dirs[i] @ dirs[j], -1, 1)) > radius for j in kept):
            kept.append(i)
    return np.array(kept, dtype=int)


def equilibrium_scan(body, delta, n_dirs=200, tol_eq=None, tol=1e-10,
                     refine=True, max_refine=64, mapper=map) -> ScanResult:
    """Residuals on a deterministic direction grid plus local refinement.

    The verdict is ``FLOATS_ALL_DIRECTIONS`` iff every grid residual is at
    most ``tol_eq``.  Otherwise grid-local minima (up to ``max_refine`` of
    the lowest) are refined by :func:`refine_direction`; refined directions
    with residual ``<= tol_eq`` are merged within one grid spacing and
    reported as ``equilibrium_directions``.
    """
    d = body.dimension
    if n_dirs < (8 if d == 2 else 12):
        raise ValueError("n_dirs must be >= 8 (d=2) or >= 12 (d=3)")
    tol_eq = default_tol_eq(body) if tol_eq is None else float(tol_eq)
    dirs = direction_grid(d, n_dirs)
    records = buoyancy_records(body, delta, dirs, tol, mapper)
    res = np.array([r.residual for r in records])
    max_res = float(res.max())
    verdict = FLOATS if max_res <= tol_eq else NO

    eq_dirs = np.zeros((0, d))
    eq_res = np.zeros(0)
    if verdict == NO:
        spacing = grid_spacing(d, n_dirs)
        minima = _grid_minima(dirs, res, d)
        minima = minima[np.argsort(res[minima])][:max_refine]
        if refine and len(minima):
            # the step floor sits well below the residual tolerance
            fn = partial(_refine_job, body, delta, 0.5 * spacing, tol, 0.1 * tol_eq)
            out = list(mapper(fn, list(dirs[minima])))
            cand = np.array([o[0] for o in out])
            cres = np.array([o[1] for o in out])
        else:
            cand, cres = dirs[minima], res[minima]
        ok = cres <= tol_eq
        if ok.any():
            keep = _cluster(cand[ok], cres[ok], spacing)
            eq_dirs, eq_res = cand[ok][keep], cres[ok][keep]
    return ScanResult(records, verdict, max_res, tol_eq, eq_dirs, eq_res)


def _refine_job(body, delta, step, tol, min_step, xi):
    return refine_direction(body, delta, xi, step, tol, min_step)
