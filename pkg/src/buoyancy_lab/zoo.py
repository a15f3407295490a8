"""Deterministic generators for test bodies.

Smooth bodies are returned as inscribed polytopes; ``body.meta`` records
the generator and the mesh size so tolerances can be scaled to it.
"""
import os

import numpy as np
from scipy.integrate import cumulative_simpson

from .directions import circle_directions, fibonacci_sphere
from .exceptions import DegenerateBodyError, GeometryError
from .kernel import ConvexBody

#: numpy's Philox4x64-10 counter-based generator is used for every seeded body
PRNG = "Philox4x64-10"
SEED_ENV = "BUOYANCY_LAB_SEED"


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def _meshed(points, name, **meta):
    body = ConvexBody.from_points(points, meta={"generator": name, **meta})
    body.meta["mesh_facets"] = len(body.simplices)
    return body


def make_ball(r=1.0, N=1000, d=3, center=None):
    """Inscribed polytope of the ball of radius ``r``.

    ``N`` Fibonacci-lattice vertices for ``d == 3``, a regular ``N``-gon for
    ``d == 2``.
    """
    if r <= 0:
        raise GeometryError("radius must be positive")
    if d == 3:
        if N < 12:
            raise GeometryError("N must be at least 12")
        pts = r * fibonacci_sphere(N)
    elif d == 2:
        if N < 3:
            raise GeometryError("N must be at least 3")
        pts = r * circle_directions(N)
    else:
        raise GeometryError("make_ball supports d = 2, 3")
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return _meshed(pts, "ball", r=r, N=N, d=d)


def make_disk(r=1.0, N=4096):
    return make_ball(r, N, d=2)


def make_ellipsoid(a, b, c=None, N=1000):
    """Linear image of :func:`make_ball`; ``c=None`` gives a 2-D ellipse."""
    axes = [a, b] if c is None else [a, b, c]
    if min(axes) <= 0:
        raise GeometryError("semi-axes must be positive")
    d = len(axes)
    pts = (fibonacci_sphere(N) if d == 3 else circle_directions(N)) * np.asarray(axes)
    return _meshed(pts, "ellipsoid", axes=list(axes), N=N)


def make_box(*sides, centered=True):
    """Axis-aligned box; ``make_box(1, 1, 1, centered=False)`` is the unit cube."""
    sides = np.asarray(sides, dtype=float)
    if sides.ndim != 1 or len(sides) < 2 or np.any(sides <= 0):
        raise GeometryError("box sides must be positive")
    d = len(sides)
    corners = np.array(np.meshgrid(*[[0.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
    pts = corners * sides
    if centered:
        pts = pts - sides / 2
    return ConvexBody.from_points(pts, meta={"generator": "box", "sides": sides.tolist()})


def make_simplex(d=3):
    """``conv{0, e_1, ..., e_d}``."""
    pts = np.vstack([np.zeros(d), np.eye(d)])
    return ConvexBody.from_points(pts, meta={"generator": "simplex", "d": d})


def resolve_seed(seed):
    env = os.environ.get(SEED_ENV)
    return int(env) if env is not None else int(seed)


def make_random_polytope(n_vertices=30, seed=0, d=3):
    """Hull of ``n_vertices`` uniform points on the unit sphere (Philox stream).

    A degenerate hull is regenerated with ``seed + 1``, and so on; the seed
    actually used is stored in ``meta["seed"]``.
    """
    if n_vertices < d + 1:
        raise GeometryError("need at least d + 1 vertices")
    for bump in range(100):
        g = _rng(seed + bump).standard_normal((n_vertices, d))
        pts = g / np.linalg.norm(g, axis=1, keepdims=True)
        try:
            body = ConvexBody.from_points(pts)
        except DegenerateBodyError:
            continue
        if body.volume > 1e-6:
            body.meta.update(generator="random_polytope", n_vertices=n_vertices,
                             seed=seed + bump, prng=PRNG)
            return body
    raise DegenerateBodyError("could not generate a full-dimensional polytope")


def make_revolution(profile, N_angular=64):
    """Solid of revolution about the z axis.

    ``profile`` is a list of ``(radius, height)`` pairs ordered by height.
    Rings of ``N_angular`` points are placed at each height (a zero radius
    gives a single apex point).
    """
    prof = np.asarray(profile, dtype=float)
    if prof.ndim != 2 or prof.shape[1] != 2 or len(prof) < 2:
        raise GeometryError("profile must be a list of (radius, height) pairs")
    if np.any(prof[:, 0] < 0) or np.any(np.diff(prof[:, 1]) <= 0):
        raise GeometryError("profile radii must be >= 0 and heights increasing")
    _check_concave_profile(prof)
    ring = circle_directions(N_angular)
    pts = []
    for r, z in prof:
        if r == 0:
            pts.append([[0.0, 0.0, z]])
        else:
            pts.append(np.column_stack([r * ring, np.full(N_angular, z)]))
    return _meshed(np.vstack(pts), "revolution", profile=prof.tolist(), N=N_angular)


def _check_concave_profile(prof):
    r, z = prof[:, 0], prof[:, 1]
    for i in range(1, len(prof) - 1):
        # r must lie on or above the chord of its neighbours
        w = (z[i] - z[i - 1]) / (z[i + 1] - z[i - 1])
        chord = (1 - w) * r[i - 1] + w * r[i + 1]
        if r[i] < chord - 1e-12 * max(1.0, r.max()):
            raise GeometryError(f"non-convex profile at point {i}")


def make_cylinder(body2d, height=1.0):
    """Prism ``body2d x [0, height]``."""
    if body2d.dimension != 2:
        raise GeometryError("cylinder base must be 2-dimensional")
    v = body2d.vertices
    pts = np.vstack([np.column_stack([v, np.zeros(len(v))]),
                     np.column_stack([v, np.full(len(v), float(height))])])
    return ConvexBody.from_points(pts, meta={"generator": "cylinder", "base": body2d.meta})


# ----------------------------------------------------------------------
# Zindler curves


def zindler_curve(chord=2.0, amplitude=0.25, N=4096, harmonic=3, oversample=8):
    """Points of a Zindler curve with all halving chords of length ``chord``.

    The chord at angle ``phi`` joins ``m(phi) +- (chord/2) u(phi)`` where
    ``u = (cos phi, sin phi)`` and the midpoint curve moves along the chord:
    ``m'(phi) = amplitude * cos(harmonic * phi) * u(phi)``.  An odd
    ``harmonic >= 3`` makes ``m`` pi-periodic so the curve closes.  ``m`` is
    obtained by numerical quadrature of that constraint.

    Returns the ``(N, 2)`` boundary points at ``phi_j = 2 pi j / N``, so
    ``p[j]`` and ``p[j + N/2]`` are the two ends of one chord.
    """
    if N % 2:
        raise GeometryError("N must be even so every chord has both endpoints")
    if harmonic < 3 or harmonic % 2 == 0:
        raise GeometryError("harmonic must be an odd integer >= 3")
    M = N * oversample
    phi = 2 * np.pi * np.arange(M + 1) / M
    u = np.column_stack([np.cos(phi), np.sin(phi)])
    speed = amplitude * np.cos(harmonic * phi)
    m = np.column_stack([
        cumulative_simpson(speed * u[:, 0], x=phi, initial=0.0),
        cumulative_simpson(speed * u[:, 1], x=phi, initial=0.0),
    ])
    half = M // 2
    closure = np.abs(m[half] - m[0]).max()
    if closure > 1e-9 * chord:
        raise GeometryError(f"midpoint curve does not close (gap {closure:.3g})")
    m = m - m[:M].mean(axis=0)
    pts = m[:M] + 0.5 * chord * u[:M]
    return pts[::oversample]


def _zindler_curvature(chord, amplitude, harmonic, phi):
    """Unit tangent and curvature of the Zindler curve at ``phi``."""
    u = np.column_stack([np.cos(phi), np.sin(phi)])
    u_perp = np.column_stack([-np.sin(phi), np.cos(phi)])
    lam = amplitude * np.cos(harmonic * phi)
    dlam = -harmonic * amplitude * np.sin(harmonic * phi)
    d1 = lam[:, None] * u + 0.5 * chord * u_perp
    speed = np.linalg.norm(d1, axis=1)
    kappa = (lam ** 2 + 0.25 * chord ** 2 - 0.5 * chord * dlam) / speed ** 3
    return d1 / speed[:, None], kappa


def make_zindler(chord=2.0, amplitude=0.25, N=4096, harmonic=3, area_matched=True):
    """2-D Zindler body.  ``amplitude=0`` gives the disk of diameter ``chord``.

    Convexity holds for ``amplitude < chord / (2 harmonic)``; outside that
    range the construction is rejected by the checks below rather than by a
    formula.

    With ``area_matched`` each vertex is pushed outward by ``kappa h^2 / 12``
    (``h`` the local edge length) so every edge cuts off as much area
    outside the curve as it leaves inside.  Plain inscribed sampling loses
    unequal area on the two sides of a chord, which shows up as an
    O(h^2) equilibrium residual.

    The output is validated: a strictly convex, simple polygon whose
    underlying curve has constant antipodal chords.
    """
    if chord <= 0 or amplitude < 0:
        raise GeometryError("chord must be positive and amplitude non-negative")
    pts = zindler_curve(chord, amplitude, N, harmonic)
    lengths = np.linalg.norm(pts - np.roll(pts, N // 2, axis=0), axis=1)
    if np.abs(lengths - chord).max() > 1e-9 * chord:
        raise GeometryError("chord lengths are not constant")

    phi = 2 * np.pi * np.arange(N) / N
    tangent, kappa = _zindler_curvature(chord, amplitude, harmonic, phi)
    if np.any(kappa <= 0):
        raise GeometryError(f"non-convex Zindler curve at vertex {int(np.argmax(kappa <= 0))}")
    if area_matched:
        e = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        h2 = 0.5 * (e ** 2 + np.roll(e, 1) ** 2)
        outward = np.column_stack([tangent[:, 1], -tangent[:, 0]])
        pts = pts + (kappa * h2 / 12.0)[:, None] * outward

    edges = np.roll(pts, -1, axis=0) - pts
    nxt = np.roll(edges, -1, axis=0)
    turn = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    if np.any(turn <= 0):
        raise GeometryError(f"non-convex Zindler curve at vertex {int(np.argmax(turn <= 0)) + 1}")
    winding = np.sum(np.arctan2(turn, np.einsum("ij,ij->i", edges, nxt)))
    if abs(winding - 2 * np.pi) > 1e-6:
        raise GeometryError("self-intersecting Zindler curve")
    body = ConvexBody.from_points(pts, meta={"generator": "zindler", "chord": chord,
                                             "amplitude": amplitude, "N": N,
                                             "harmonic": harmonic})
    if len(body.vertices) != N:
        raise GeometryError("non-convex Zindler curve: some points are not extreme")
    body.meta["mesh_facets"] = N
    return body


GENERATORS = {
    "ball": make_ball,
    "disk": make_disk,
    "ellipsoid": make_ellipsoid,
    "box": lambda sides=(1, 1, 1), centered=True: make_box(*sides, centered=centered),
    "cube": lambda: make_box(1, 1, 1, centered=False),
    "simplex": make_simplex,
    "random_polytope": lambda n_vertices=30, seed=0, d=3: make_random_polytope(
        n_vertices, resolve_seed(seed), d),
    "revolution": make_revolution,
    "zindler": make_zindler,
}


def generate(name, params=None):
    """Build a body from a generator name and keyword parameters."""
    try:
        fn = GENERATORS[name]
    except KeyError:
        raise GeometryError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}") from None
    return fn(**(params or {}))
