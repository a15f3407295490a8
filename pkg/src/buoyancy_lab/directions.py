"""Deterministic direction grids on the unit sphere."""
import numpy as np

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(n):
    """``n`` nearly uniform unit vectors in R^3 (Fibonacci lattice).

    Points sit at heights ``z_i = 1 - (2i + 1)/n`` and azimuths
    ``i * golden_angle``.
    """
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = i * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def circle_directions(n, phase=0.0):
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(theta), np.sin(theta)])


def direction_grid(d, n):
    if d == 2:
        return circle_directions(n)
    if d == 3:
        return fibonacci_sphere(n)
    raise ValueError(f"no deterministic grid for d={d}")


def grid_spacing(d, n):
    """Typical angular distance between neighbouring grid directions."""
    if d == 2:
        return 2.0 * np.pi / n
    return np.sqrt(4.0 * np.pi / n)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def rotate_towards(xi, eta, angle):
    """``cos(angle) xi + sin(angle) eta`` for orthonormal ``xi``, ``eta``."""
    return np.cos(angle) * np.asarray(xi) + np.sin(angle) * np.asarray(eta)


def check_direction(xi, d=None, tol=1e-9):
    """Validate a unit direction and return it as a float array."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or (d is not None and len(xi) != d):
        raise ValueError(f"direction must be a vector of length {d}")
    if abs(np.linalg.norm(xi) - 1.0) > tol:
        raise ValueError("direction must be a unit vector")
    return xi
