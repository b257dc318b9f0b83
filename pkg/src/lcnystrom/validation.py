"""Input validation helpers for the public estimator surface."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def check_points(X, name="X"):
    """Coerce to a float (m, 3) array of points."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        if X.shape != (3,):
            raise ValueError(f"{name} must have shape (3,) or (m, 3)")
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError(f"{name} must have shape (m, 3), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_on_surface(surface, X, tol=1e-8, name="X"):
    """Require each point to lie on the surface to the given residual."""
    X = check_points(X, name)
    res = np.abs(surface.implicit(X))
    if res.max() > tol:
        bad = int(np.argmax(res))
        raise DomainError(
            f"{name}[{bad}] is off the surface (residual {res[bad]:.3e})")
    return X


def check_field(f, name="f"):
    """Require a vectorized callable field on (m, 3) point arrays."""
    if not callable(f):
        raise TypeError(f"{name} must be callable on (m, 3) point arrays")
    return f
