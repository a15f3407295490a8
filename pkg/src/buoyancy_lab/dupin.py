"""Numerical checks of the three Dupin theorems and the planar curvature formula.

All checks work on one body, one submerged volume ``delta`` and one base
direction ``xi``.  Buoyancy centres are computed with the waterline solved
to floating point resolution, since finite differences at ``h = 1e-3``
resolve displacements of order ``h^2``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .directions import check_direction, rotate_towards, unit
from .exceptions import CurvatureUndefinedError, GeometryError
from .flotation import buoyancy_center, find_waterline
from .kernel import HalfSpace, cut_moments, moment_about_axis, section, section_frame

#: waterline tolerance for finite differences: bisect to float resolution
FD_TOL = 0.0


def _center(body, xi, delta):
    return buoyancy_center(body, xi, delta, FD_TOL).center


def _tangent(xi, v, d):
    v = np.asarray(v, dtype=float)
    if len(v) != d:
        raise GeometryError(f"direction must have length {d}")
    v = v - (v @ xi) * xi
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise GeometryError("direction must not be parallel to xi")
    return v / n


# ----------------------------------------------------------------------
# D1: the tangent plane of the surface of centres is parallel to the waterline


@dataclass(frozen=True)
class Dupin1Report:
    xi: np.ndarray
    probes: np.ndarray
    heights: np.ndarray
    worst: float
    tol: float

    @property
    def passed(self):
        return self.worst >= -self.tol


def check_dupin1(body, delta, xi, probe_angles, n_azimuths=4, tol=None):
    """Support property of the surface of centres at ``C(xi)``.

    For every probe ``eta`` tilted from ``xi`` by each angle in
    ``probe_angles`` (at ``n_azimuths`` azimuths), the height
    ``(C(eta) - C(xi)) . xi`` must be ``>= -tol``.  ``worst`` is the
    smallest height found; ``tol`` defaults to ``1e-8 * diam``.
    """
    xi = check_direction(xi, body.dimension)
    tol = 1e-8 * body.diameter if tol is None else tol
    frame = section_frame(xi)
    if body.dimension == 2:
        az = np.array([frame[0], -frame[0]])
    else:
        a = 2 * np.pi * np.arange(n_azimuths) / n_azimuths
        az = np.cos(a)[:, None] * frame[0] + np.sin(a)[:, None] * frame[1]
    c0 = _center(body, xi, delta)
    probes, heights = [], []
    for ang in np.atleast_1d(probe_angles):
        for w in az:
            eta = unit(rotate_towards(xi, w, ang))
            probes.append(eta)
            heights.append(0.0 if ang == 0 else (_center(body, eta, delta) - c0) @ xi)
    heights = np.array(heights)
    return Dupin1Report(xi, np.array(probes), heights, float(heights.min()), tol)


def support_violation(body, delta, xi, eta, tol=1e-10):
    """``(C(eta) - C(xi)) . xi`` for one pair; non-negative when D1 holds."""
    c_xi = buoyancy_center(body, xi, delta, tol).center
    c_eta = buoyancy_center(body, eta, delta, tol).center
    return float((c_eta - c_xi) @ np.asarray(xi, dtype=float))


# ----------------------------------------------------------------------
# D2: the limit rotation axis passes through the section centroid


@dataclass(frozen=True)
class Dupin2Report:
    xi: np.ndarray
    eta: np.ndarray
    h: np.ndarray
    centroid_change: np.ndarray
    offset: float
    offset_change: np.ndarray
    predicted_offset_change: np.ndarray
    centroid_order: float
    offset_order: float
    volume: float

    def passed(self, min_order=1.9, order_tol=0.1, rounding=1e-12):
        """Second order through the centroid (or a change lost in rounding,
        as for symmetric bodies) and first order off it."""
        flat = np.abs(self.centroid_change).max() <= rounding * self.volume
        second = flat or self.centroid_order >= min_order
        return bool(second and abs(self.offset_order - 1.0) <= order_tol)


def tilted_volume(body, xi, eta, h, pivot):
    """Volume below the plane through ``pivot`` with normal rotated by ``h`` toward ``eta``."""
    n = rotate_towards(xi, eta, h)
    n = n / np.linalg.norm(n)
    return cut_moments(body, n, float(pivot @ n))[0]


def _order(h, change):
    h, change = np.abs(np.asarray(h)), np.abs(np.asarray(change))
    if len(h) < 2 or np.any(change[:2] == 0):
        return float("nan")
    return float(np.log(change[0] / change[1]) / np.log(h[0] / h[1]))


def check_dupin2(body, delta, xi, eta, h=(1e-2, 1e-3), offset=0.2):
    """Volume change when the waterline is tilted about an axis in the section.

    The axis is the (d-2)-dimensional line through the section centroid
    orthogonal to ``eta`` inside the waterline plane; the contrast axis is
    the same line shifted by ``offset`` along ``eta``.  Through the centroid
    the change is second order in ``h``; off it, it is ``h * offset * area``
    to first order.  ``*_order`` are log-log slopes between the first two
    ``h`` values.
    """
    xi = check_direction(xi, body.dimension)
    eta = _tangent(xi, eta, body.dimension)
    hs = np.atleast_1d(np.asarray(h, dtype=float))
    wl = find_waterline(body, xi, delta, FD_TOL)
    sec = section(body, HalfSpace(xi, wl.t))
    c = sec.centroid
    shifted = c + offset * eta
    at_c = np.array([tilted_volume(body, xi, eta, hh, c) - wl.volume if hh else 0.0
                     for hh in hs])
    at_s = np.array([tilted_volume(body, xi, eta, hh, shifted) - wl.volume if hh else 0.0
                     for hh in hs])
    return Dupin2Report(xi, eta, hs, at_c, float(offset), at_s,
                        np.tan(hs) * offset * sec.area,
                        _order(hs, at_c), _order(hs, at_s), body.volume)


# ----------------------------------------------------------------------
# D3: metacentric radius = I / delta


@dataclass(frozen=True)
class MetacenterEstimate:
    xi: np.ndarray
    zeta: np.ndarray
    tilt: np.ndarray
    h: float
    R_fd: float
    R_pred: float
    R_fd_2h: float

    @property
    def rel_gap(self):
        return abs(self.R_fd - self.R_pred) / self.R_pred

    @property
    def richardson_gap(self):
        """Relative change of the estimate between steps ``h`` and ``2h``."""
        return abs(self.R_fd_2h - self.R_fd) / self.R_pred

    def to_dict(self):
        return {"xi": self.xi.tolist(), "zeta": self.zeta.tolist(), "h": self.h,
                "R_fd": self.R_fd, "R_pred": self.R_pred, "rel_gap": self.rel_gap}


def circumradius(p0, p1, p2):
    """Radius of the circle through three planar points."""
    a = np.linalg.norm(p1 - p0)
    b = np.linalg.norm(p2 - p1)
    c = np.linalg.norm(p2 - p0)
    u, v = p1 - p0, p2 - p0
    area2 = abs(u[0] * v[1] - u[1] * v[0])
    if area2 <= 1e-14 * max(a, b, c) ** 2:
        raise CurvatureUndefinedError("curvature undefined at this resolution")
    return a * b * c / (2.0 * area2)


def _fd_radius(body, delta, xi, tilt, h, c0):
    pts = []
    for s in (-h, h):
        c = _center(body, unit(rotate_towards(xi, tilt, s)), delta) - c0
        pts.append(np.array([c @ tilt, c @ xi]))
    return circumradius(pts[0], np.zeros(2), pts[1])


def metacentric_radius_fd(body, delta, xi, zeta=None, h=1e-3, tilt=None):
    """Finite-difference metacentric radius against ``I / delta``.

    The waterline normal is rotated by ``+-h`` in the plane
    ``span(xi, tilt)``.  ``tilt`` can be given directly, or derived from a
    tangent direction ``zeta`` of the surface of centres as the tilt that
    moves the buoyancy centre along ``zeta`` (``tilt ~ J^-1 zeta`` with
    ``J`` the section moment matrix).

    ``R_fd`` is the radius of the circle through the three buoyancy centres
    projected onto the plane ``span(xi, tilt)``: the distance from ``C(xi)``
    to where the projected buoyancy lines meet.  ``R_pred`` is the moment of
    inertia of the waterline section about the centroid axis orthogonal to
    ``tilt``, divided by ``delta``.
    """
    d = body.dimension
    xi = check_direction(xi, d)
    if not (0 < h <= 0.2):
        raise GeometryError("h must lie in (0, 0.2]")
    wl = find_waterline(body, xi, delta, FD_TOL)
    sec = section(body, HalfSpace(xi, wl.t))
    if tilt is None:
        if zeta is None:
            zeta = section_frame(xi)[0]
        zeta = _tangent(xi, zeta, d)
        J = sec.moment
        if np.linalg.eigvalsh(J).min() <= 1e-12 * np.trace(J):
            raise CurvatureUndefinedError("curvature undefined at this resolution")
        tilt = np.linalg.solve(J, sec.frame @ zeta) @ sec.frame
        tilt = tilt / np.linalg.norm(tilt)
    else:
        tilt = _tangent(xi, tilt, d)
        a = sec.frame @ tilt
        zeta = unit((sec.moment @ a) @ sec.frame)
    I = moment_about_axis(sec, tilt)
    if I <= 0:
        raise CurvatureUndefinedError("curvature undefined at this resolution")
    c0 = _center(body, xi, delta)
    R_fd = _fd_radius(body, delta, xi, tilt, h, c0)
    R_2h = _fd_radius(body, delta, xi, tilt, 2 * h, c0) if 2 * h <= 0.2 else R_fd
    return MetacenterEstimate(xi, zeta, tilt, float(h), float(R_fd), I / wl.volume, float(R_2h))


@dataclass(frozen=True)
class DavidovReport:
    xi: np.ndarray
    chord: float
    delta: float
    R_pred: float
    R_fd: float

    @property
    def rel_gap(self):
        return abs(self.R_fd - self.R_pred) / self.R_pred

    def to_dict(self):
        out = {k: v for k, v in asdict(self).items()}
        out["xi"] = self.xi.tolist()
        out["rel_gap"] = self.rel_gap
        return out


def davidov_2d_check(body2d, delta, xi, h=1e-3):
    """Planar case: curvature radius of the curve of centres is ``L^3 / (12 delta)``.

    ``L`` is the waterline chord length.
    """
    if body2d.dimension != 2:
        raise GeometryError("davidov_2d_check needs a 2-dimensional body")
    est = metacentric_radius_fd(body2d, delta, xi, tilt=section_frame(xi)[0], h=h)
    wl = find_waterline(body2d, est.xi, delta, FD_TOL)
    L = section(body2d, HalfSpace(est.xi, wl.t)).area
    return DavidovReport(est.xi, L, wl.volume, L ** 3 / (12.0 * wl.volume), est.R_fd)
