"""Exact primitives on convex polytopes.

A :class:`ConvexBody` is stored both as a vertex set and as an oriented
triangulation of its boundary (``simplices``).  Volumes, centroids and
second moments are computed by coning boundary simplices from a reference
point, so every quantity is exact up to floating point rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import factorial

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import pdist

from .exceptions import DegenerateBodyError, EmptySectionError, GeometryError

#: relative geometric tolerance, multiplied by the body diameter
EPS_GEOM = 1e-9


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


class ConvexBody:
    """A full-dimensional convex polytope in R^d.

    Build one with :meth:`from_points`; the constructor expects an already
    consistent hull description.

    Attributes
    ----------
    vertices : ndarray (n, d)
        Extreme points.
    normals, offsets : ndarray (m, d), (m,)
        Facet inequalities ``normals @ p <= offsets`` with unit normals.
        Coplanar hull triangles are merged into one facet.
    facets : tuple of tuple of int
        Vertex incidence per facet.
    simplices : ndarray (k, d) of int
        Boundary triangulation, each simplex ordered so that the cone from
        any interior point has positive signed volume.
    meta : dict
        Free-form provenance (generator name, mesh size).  Not used by
        the geometry.
    """

    def __init__(self, vertices, normals, offsets, facets, simplices, meta=None):
        self.vertices = _readonly(vertices)
        self.normals = _readonly(normals)
        self.offsets = _readonly(offsets)
        self.facets = tuple(tuple(int(i) for i in f) for f in facets)
        self.simplices = np.asarray(simplices, dtype=np.intp)
        self.simplices.setflags(write=False)
        self.meta = dict(meta or {})

    @classmethod
    def from_points(cls, points, meta=None):
        """Convex hull of ``points`` as a :class:`ConvexBody`.

        Raises
        ------
        DegenerateBodyError
            If the points do not span a full-dimensional body.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 2:
            raise GeometryError("points must be an (n, d) array with d >= 2")
        n, d = pts.shape
        if n < d + 1:
            raise DegenerateBodyError("degenerate body: fewer than d+1 points")
        try:
            hull = ConvexHull(pts)
        except Exception as exc:  # qhull raises QhullError for flat input
            raise DegenerateBodyError(f"degenerate body: {exc}") from None
        if hull.volume <= 0:
            raise DegenerateBodyError("degenerate body: zero volume")

        keep = np.asarray(hull.vertices)
        remap = -np.ones(n, dtype=np.intp)
        remap[keep] = np.arange(len(keep))
        verts = pts[keep]
        simp = remap[hull.simplices]
        eqs = hull.equations  # n . p + b <= 0, unit n
        normals = eqs[:, :d]
        offsets = -eqs[:, d]

        simp = _orient(verts, simp)

        diam = float(np.ptp(verts, axis=0).max()) or 1.0
        # merge coplanar triangles into facets: hull planes closer than the
        # tolerance in (normal, offset / diam) space are one facet
        key = np.column_stack([normals, offsets / diam])
        pairs = cKDTree(key).query_pairs(1e-9 * np.sqrt(d + 1), output_type="ndarray")
        graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                           shape=(len(eqs), len(eqs)))
        _, label = connected_components(graph, directed=False)
        _, reps = np.unique(label, return_index=True)
        facets = [tuple(np.unique(simp[label == label[r]]).tolist()) for r in reps]
        return cls(verts, normals[reps], offsets[reps], facets, simp, meta=meta)

    # ------------------------------------------------------------------
    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def diameter(self) -> float:
        if len(self.vertices) > 4000:
            return float(np.linalg.norm(np.ptp(self.vertices, axis=0)))
        return float(pdist(self.vertices).max())

    @property
    def eps(self) -> float:
        return EPS_GEOM * self.diameter

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique vertex pairs of the boundary triangulation.

        Includes diagonals of non-simplicial facets, which is harmless for
        clipping: their crossings lie inside the clipped body.
        """
        d = self.dimension
        pairs = [self.simplices[:, [i, j]] for i in range(d) for j in range(i + 1, d)]
        e = np.sort(np.concatenate(pairs), axis=1)
        return np.unique(e, axis=0)

    @cached_property
    def _triangle_terms(self):
        return _TriangleTerms(self)

    @cached_property
    def volume(self) -> float:
        return volume(self)

    @cached_property
    def centroid(self) -> np.ndarray:
        return centroid(self)

    def support(self, directions) -> np.ndarray:
        """Support function ``h(x) = max_v v.x`` for one or many directions."""
        return np.max(np.asarray(directions, dtype=float) @ self.vertices.T, axis=-1)

    def contains(self, points, tol=None) -> np.ndarray:
        tol = self.eps if tol is None else tol
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(p @ self.normals.T <= self.offsets + tol, axis=1)

    def transformed(self, matrix=None, shift=None) -> "ConvexBody":
        """Image under ``p -> matrix @ p + shift`` (matrix must be invertible)."""
        v = self.vertices
        if matrix is not None:
            v = v @ np.asarray(matrix, dtype=float).T
        if shift is not None:
            v = v + np.asarray(shift, dtype=float)
        return ConvexBody.from_points(v, meta=self.meta)

    def __repr__(self):
        return (f"ConvexBody(d={self.dimension}, n_vertices={len(self.vertices)}, "
                f"n_facets={len(self.facets)})")


def _orient(verts, simp):
    # positive cone volume from an interior point
    apex = verts.mean(axis=0)
    sign = np.linalg.det(verts[simp] - apex)
    simp = simp.copy()
    flip = sign < 0
    simp[flip, 0], simp[flip, 1] = simp[flip, 1], simp[flip, 0].copy()
    return simp


@dataclass(frozen=True)
class HalfSpace:
    """``{p : p . normal <= offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise GeometryError("half-space normal must be a unit vector")
        object.__setattr__(self, "normal", _readonly(n))
        object.__setattr__(self, "offset", float(self.offset))

    def flipped(self) -> "HalfSpace":
        """The closed complement ``{p : p . normal >= offset}``."""
        return HalfSpace(-self.normal, -self.offset)


# ----------------------------------------------------------------------
# volume and centroid


def _cone_moments(body: ConvexBody):
    v = body.vertices
    apex = v.mean(axis=0)
    s = v[body.simplices] - apex  # (k, d, d)
    vols = np.linalg.det(s) / factorial(body.dimension)
    first = vols[:, None] * s.sum(axis=1) / (body.dimension + 1)
    return apex, vols, first


def volume(body: ConvexBody) -> float:
    """Exact d-volume by coning the boundary triangulation from the vertex mean."""
    _, vols, _ = _cone_moments(body)
    return float(abs(vols.sum()))


def centroid(body: ConvexBody) -> np.ndarray:
    apex, vols, first = _cone_moments(body)
    total = vols.sum()
    if abs(total) <= (body.eps ** 2) * body.diameter ** (body.dimension - 2):
        raise DegenerateBodyError("degenerate body")
    return apex + first.sum(axis=0) / total


def second_moment(body: ConvexBody, about=None) -> np.ndarray:
    """``int (x - about)(x - about)^T dx`` over the body (default: about the centroid)."""
    apex, vols, _ = _cone_moments(body)
    about = body.centroid if about is None else np.asarray(about, dtype=float)
    d = body.dimension
    tips = body.vertices[body.simplices] - about
    corners = np.concatenate([np.broadcast_to(apex - about, (len(tips), 1, d)), tips], axis=1)
    return _simplex_second_moments(corners, vols).sum(axis=0)


def _simplex_second_moments(corners, vols):
    """Closed-form ``int x x^T`` of simplices with given corners and signed volumes."""
    n = corners.shape[1] - 1
    s = corners.sum(axis=1)
    outer = np.einsum("kij,kil->kjl", corners, corners) + np.einsum("kj,kl->kjl", s, s)
    return vols[:, None, None] * outer / ((n + 1) * (n + 2))


# ----------------------------------------------------------------------
# clipping


def clip(body: ConvexBody, hs: HalfSpace):
    """``body`` intersected with ``hs``; ``None`` when the result has no volume."""
    xi = hs.normal
    v = body.vertices
    raw = v @ xi - hs.offset
    on = np.abs(raw) <= body.eps
    s = np.where(on, 0.0, raw)
    if np.all(s >= 0):
        return None
    if np.all(s <= 0):
        return body
    v_snap = v - np.outer(np.where(on, raw, 0.0), xi)
    keep = v_snap[s <= 0]
    cross = _edge_crossings(v, s, body.edges)
    pts = np.vstack([keep, cross])
    try:
        out = ConvexBody.from_points(pts, meta=body.meta)
    except DegenerateBodyError:
        return None
    return out


def _edge_crossings(v, s, edges):
    sa, sb = s[edges[:, 0]], s[edges[:, 1]]
    hit = (sa * sb) < 0
    a, b = v[edges[hit, 0]], v[edges[hit, 1]]
    sa, sb = sa[hit], sb[hit]
    lam = (sa / (sa - sb))[:, None]
    return a + lam * (b - a)


def cut_moments(body: ConvexBody, normal, offset):
    """Volume and first moment of ``body`` intersected with ``{p . normal <= offset}``.

    Fast path for d = 2, 3: clips the oriented boundary simplices and cones
    them from a point on the cutting plane, so the cap contributes nothing.
    Returns ``(volume, first_moment)``; the centroid is their ratio.
    """
    xi = np.asarray(normal, dtype=float)
    d = body.dimension
    if d == 3:
        return _cut_moments_3d(body, xi, float(offset))
    if d == 2:
        return _cut_moments_2d(body, xi, float(offset))
    part = clip(body, HalfSpace(xi, offset))
    if part is None:
        return 0.0, np.zeros(d)
    vol = part.volume
    return vol, vol * part.centroid


def _plane_point(body, xi, t):
    g = body.vertices.mean(axis=0)
    return g - (g @ xi - t) * xi


def _cut_moments_2d(body, xi, t):
    p0 = _plane_point(body, xi, t)
    v = body.vertices - p0
    seg = body.simplices
    s = v @ xi - (t - p0 @ xi)
    sa, sb = s[seg[:, 0]], s[seg[:, 1]]
    a, b = v[seg[:, 0]], v[seg[:, 1]]
    ina, inb = sa <= 0, sb <= 0
    part = ina ^ inb
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.where(part, sa / (sa - sb), 0.0)[:, None]
    x = a + lam * (b - a)
    a2 = np.where(ina[:, None], a, x)
    b2 = np.where(inb[:, None], b, x)
    live = ina | inb
    a2, b2 = a2[live], b2[live]
    area = 0.5 * (a2[:, 0] * b2[:, 1] - a2[:, 1] * b2[:, 0])
    vol = area.sum()
    first = (area[:, None] * (a2 + b2)).sum(axis=0) / 3.0
    return float(vol), first + vol * p0


_ROLL = np.array([[0, 1, 2], [1, 2, 0], [2, 0, 1]])


class _TriangleTerms:
    """Per-triangle sums that make whole-triangle cone terms linear in the apex.

    With coordinates relative to ``origin``, the cone from apex ``p`` over a
    triangle ``(a, b, c)`` has ``6 vol = det(a, b, c) - p . n`` where
    ``n = b x c + c x a + a x b``.
    """

    def __init__(self, body):
        self.origin = body.vertices.mean(axis=0)
        self.v = body.vertices - self.origin
        T = self.v[body.simplices]
        self.T = T
        self.det = np.einsum("ij,ij->i", T[:, 0], np.cross(T[:, 1], T[:, 2]))
        self.n = (np.cross(T[:, 1], T[:, 2]) + np.cross(T[:, 2], T[:, 0])
                  + np.cross(T[:, 0], T[:, 1]))
        s = T.sum(axis=1)
        sn = np.einsum("ki,kj->kij", s, self.n).reshape(len(T), 9)
        # columns: det | n (3) | det * s (3) | s n^T (9)
        self.stack = np.column_stack([self.det, self.n, self.det[:, None] * s, sn])
        self.center = self.v.mean(axis=0)


def _cut_moments_3d(body, xi, t):
    terms = body._triangle_terms
    v = terms.v
    t = t - terms.origin @ xi
    p = terms.center - (terms.center @ xi - t) * xi
    s_all = v @ xi - t
    tri = body.simplices
    s = s_all[tri]
    inside = s <= 0
    n_in = inside.sum(axis=1)

    agg = (n_in == 3).astype(float) @ terms.stack
    D, N = agg[0], agg[1:4]
    pN = p @ N
    vol = (D - pN) / 6.0
    first = (p * (D - pN) + agg[4:7] - agg[7:].reshape(3, 3) @ p) / 24.0

    pieces = []
    one = n_in == 1
    if one.any():
        k = np.argmax(inside[one], axis=1)
        order = np.take_along_axis(tri[one], _ROLL[k], axis=1)
        so = np.take_along_axis(s[one], _ROLL[k], axis=1)
        a, b, c = v[order[:, 0]], v[order[:, 1]], v[order[:, 2]]
        ab = a + (so[:, 0] / (so[:, 0] - so[:, 1]))[:, None] * (b - a)
        ac = a + (so[:, 0] / (so[:, 0] - so[:, 2]))[:, None] * (c - a)
        pieces.append(np.stack([a, ab, ac], axis=1))

    two = n_in == 2
    if two.any():
        k = np.argmin(inside[two], axis=1)  # the outside vertex
        order = np.take_along_axis(tri[two], _ROLL[(k + 1) % 3], axis=1)
        so = np.take_along_axis(s[two], _ROLL[(k + 1) % 3], axis=1)
        a, b, c = v[order[:, 0]], v[order[:, 1]], v[order[:, 2]]
        bc = b + (so[:, 1] / (so[:, 1] - so[:, 2]))[:, None] * (c - b)
        ca = a + (so[:, 0] / (so[:, 0] - so[:, 2]))[:, None] * (c - a)
        pieces.append(np.stack([a, b, bc], axis=1))
        pieces.append(np.stack([a, bc, ca], axis=1))

    if pieces:
        T = np.concatenate(pieces) - p
        vols = np.einsum("ij,ij->i", T[:, 0], np.cross(T[:, 1], T[:, 2])) / 6.0
        pv = vols.sum()
        vol += pv
        first = first + (vols[:, None] * T.sum(axis=1)).sum(axis=0) / 4.0 + pv * p
    return float(vol), first + vol * terms.origin


# ----------------------------------------------------------------------
# sections


def section_frame(xi) -> np.ndarray:
    """Orthonormal basis of the complement of ``xi``, shape (d-1, d).

    Gram-Schmidt on the standard basis with the coordinate of largest
    ``|xi_k|`` dropped, so the frame is a deterministic function of ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    d = len(xi)
    drop = int(np.argmax(np.abs(xi)))
    basis = [xi]
    for j in range(d):
        if j == drop:
            continue
        e = np.zeros(d)
        e[j] = 1.0
        for b in basis:
            e = e - (e @ b) * b
        basis.append(e / np.linalg.norm(e))
    return np.array(basis[1:])


@dataclass(frozen=True)
class Section:
    """A hyperplane section ``K cap {p . xi = t}``.

    ``vertices`` and ``equations`` are in frame coordinates centred at the
    section centroid: a point ``p`` maps to ``frame @ (p - centroid)``.
    ``equations`` rows ``[n, b]`` describe the section as ``n . u <= b``.
    """

    xi: np.ndarray
    t: float
    frame: np.ndarray
    vertices: np.ndarray
    equations: np.ndarray
    centroid: np.ndarray
    area: float
    moment: np.ndarray = field(repr=False)

    def to_ambient(self, u) -> np.ndarray:
        return self.centroid + np.asarray(u, dtype=float) @ self.frame

    def radial(self, w) -> np.ndarray:
        """Radial function about the centroid for frame-coordinate directions ``w``."""
        w = np.atleast_2d(np.asarray(w, dtype=float))
        n, b = self.equations[:, :-1], self.equations[:, -1]
        proj = w @ n.T
        with np.errstate(divide="ignore"):
            r = np.where(proj > 0, b / proj, np.inf)
        return r.min(axis=1)


def section(body: ConvexBody, hs: HalfSpace) -> Section:
    """The (d-1)-dimensional section of ``body`` by the boundary plane of ``hs``.

    Raises
    ------
    EmptySectionError
        When the plane misses the interior of the body.
    """
    xi, t = hs.normal, hs.offset
    v = body.vertices
    s = v @ xi - t
    eps = body.eps
    if s.min() >= -eps or s.max() <= eps:
        raise EmptySectionError("empty section")
    on = np.abs(s) <= eps
    pts = np.vstack([v[on] - np.outer(s[on], xi),
                     _edge_crossings(v, np.where(on, 0.0, s), body.edges)])
    frame = section_frame(xi)
    origin = pts.mean(axis=0)
    u = (pts - origin) @ frame.T
    k = body.dimension - 1
    if k == 1:
        lo, hi = u[:, 0].min(), u[:, 0].max()
        length = hi - lo
        if length <= eps:
            raise EmptySectionError("empty section")
        mid = 0.5 * (lo + hi)
        c = origin + mid * frame[0]
        half = 0.5 * length
        verts = np.array([[-half], [half]])
        eqs = np.array([[1.0, half], [-1.0, half]])
        J = np.array([[length ** 3 / 12.0]])
        return Section(xi, t, frame, verts, eqs, c, float(length), J)

    try:
        hull = ConvexHull(u)
    except Exception:
        raise EmptySectionError("empty section") from None
    if k == 2:
        poly = u[hull.vertices]  # counter-clockwise
        area, cu, J = _polygon_moments(poly)
    else:
        area, cu, J = _fan_moments(u, hull)
    if area <= eps ** 2:
        raise EmptySectionError("empty section")
    verts = u[hull.vertices] - cu
    eqs = hull.equations.copy()
    normals = eqs[:, :-1]
    eqs = np.column_stack([normals, -(eqs[:, -1] + normals @ cu)])
    c = origin + cu @ frame
    return Section(xi, t, frame, verts, eqs, c, float(area), J)


def _polygon_moments(poly):
    """Area, centroid and centred second moments of a ccw polygon."""
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    area = cr.sum() / 2.0
    cx = ((x + xn) * cr).sum() / (6.0 * area)
    cy = ((y + yn) * cr).sum() / (6.0 * area)
    sxx = (cr * (x * x + x * xn + xn * xn)).sum() / 12.0
    syy = (cr * (y * y + y * yn + yn * yn)).sum() / 12.0
    sxy = (cr * (x * yn + 2 * x * y + 2 * xn * yn + xn * y)).sum() / 24.0
    J = np.array([[sxx - area * cx * cx, sxy - area * cx * cy],
                  [sxy - area * cx * cy, syy - area * cy * cy]])
    return float(area), np.array([cx, cy]), J


def _fan_moments(u, hull):
    k = u.shape[1]
    apex = u[hull.vertices].mean(axis=0)
    corners = np.concatenate(
        [np.broadcast_to(apex, (len(hull.simplices), 1, k)), u[hull.simplices]], axis=1)
    vols = np.abs(np.linalg.det(corners[:, 1:] - corners[:, :1])) / factorial(k)
    area = vols.sum()
    c = (vols[:, None] * corners.mean(axis=1)).sum(axis=0) / area
    J = _simplex_second_moments(corners - c, vols).sum(axis=0)
    return float(area), c, J


def moment_about_axis(sec: Section, eta) -> float:
    """Moment of inertia ``int (u . eta)^2 du`` of a section.

    This is the moment about the (d-2)-dimensional axis through the section
    centroid that is orthogonal to ``eta`` inside the section plane.
    """
    eta = np.asarray(eta, dtype=float)
    if abs(eta @ sec.xi) > 1e-9 or abs(np.linalg.norm(eta) - 1.0) > 1e-9:
        raise GeometryError("axis direction must be a unit vector orthogonal to xi")
    a = sec.frame @ eta
    return float(a @ sec.moment @ a)
