"""scikit-learn style front end.

A body is "fitted" once (volume, centroid, submerged volume); direction
arrays of shape ``(n_directions, d)`` are then transformed row by row.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .flotation import (FLOATS, NO, buoyancy_records, check_delta, default_tol_eq,
                        delta_from_density, find_waterline)
from .kernel import ConvexBody, HalfSpace, section


def check_body(body):
    if not isinstance(body, ConvexBody):
        raise TypeError(f"expected a ConvexBody, got {type(body).__name__}")
    return body


def check_directions(X, d, tol=1e-9):
    """2-D float array of unit row vectors in R^d."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] != d:
        raise ValueError(f"directions have {X.shape[1]} columns, the body has dimension {d}")
    norms = np.linalg.norm(X, axis=1)
    if np.abs(norms - 1).max() > tol:
        raise ValueError("directions must be unit vectors")
    return X


class _BodyEstimator(BaseEstimator):
    """Shared ``fit``: ``delta`` or ``density`` (default 0.5) selects the waterline volume."""

    def _fit_body(self, body):
        body = check_body(body)
        if self.delta is not None and self.density is not None:
            raise ValueError("give exactly one of delta and density")
        density = 0.5 if self.density is None else self.density
        self.delta_ = (check_delta(body, self.delta) if self.delta is not None
                       else delta_from_density(body, density))
        self.body_ = body
        self.n_features_in_ = body.dimension
        self.volume_ = body.volume
        self.centroid_ = body.centroid
        return self


class BuoyancyAnalyzer(TransformerMixin, _BodyEstimator):
    """Buoyancy centres and equilibrium residuals of a fitted body.

    ``transform`` maps directions to buoyancy centres, ``predict`` to the
    equilibrium residual angle and ``classify`` to a floats/does-not-float
    verdict string.
    """

    def __init__(self, delta=None, density=None, tol=1e-10, tol_eq=None):
        self.delta = delta
        self.density = density
        self.tol = tol
        self.tol_eq = tol_eq

    def fit(self, body, y=None):
        self._fit_body(body)
        self.tol_eq_ = default_tol_eq(body) if self.tol_eq is None else float(self.tol_eq)
        return self

    def _records(self, X):
        check_is_fitted(self, "body_")
        X = check_directions(X, self.n_features_in_)
        return buoyancy_records(self.body_, self.delta_, X, self.tol)

    def transform(self, X):
        return np.array([r.center for r in self._records(X)])

    def predict(self, X):
        return np.array([r.residual for r in self._records(X)])

    def classify(self, X):
        return FLOATS if self.predict(X).max() <= self.tol_eq_ else NO

    def score(self, X, y=None):
        """Negated worst residual, so larger is closer to floating everywhere."""
        return -float(self.predict(X).max())


class SectionMomentTransformer(TransformerMixin, _BodyEstimator):
    """Waterline section moments: each direction maps to the flattened matrix ``J``.

    ``J`` is taken about the section centroid in the deterministic frame of
    the direction; for d = 3 a row is ``(J11, J12, J21, J22)``.
    """

    def __init__(self, delta=None, density=None, tol=1e-10):
        self.delta = delta
        self.density = density
        self.tol = tol

    def fit(self, body, y=None):
        return self._fit_body(body)

    def transform(self, X):
        check_is_fitted(self, "body_")
        X = check_directions(X, self.n_features_in_)
        out = []
        for xi in X:
            wl = find_waterline(self.body_, xi, self.delta_, self.tol)
            out.append(section(self.body_, HalfSpace(wl.xi, wl.t)).moment.ravel())
        return np.array(out)
