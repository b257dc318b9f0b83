"""Kernel pairs: a smooth completion term G and a weakly singular H.

H factors as u(x,y)/|x-y|**(2-mu) with bounded u.  The shipped singular
kernel is the scalar Laplace double layer (mu = 1); a custom-u kernel exists
for tests and negative controls.  All evaluations are vectorized over the
source points y and stateless.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, KernelRegularityError
from .geometry import chart_point, from_polar

FOUR_PI = 4.0 * np.pi


class LaplaceDoubleLayer:
    """H(x,y) = nu(y).(x-y) / (4 pi |x-y|^3); the classic double layer.

    With this sign the flux identity reads integral_Gamma H(x,y) dA_y = -1/2
    for x on any closed smooth surface.
    """

    mu = 1.0
    needs_normals = True
    analytic_flux = -0.5

    def h_values(self, x, Y, nu_Y):
        rel = np.asarray(x, dtype=float) - np.asarray(Y, dtype=float)
        r2 = np.sum(rel * rel, axis=-1)
        if np.any(r2 == 0.0):
            raise DomainError("double-layer kernel evaluated on the diagonal")
        return np.sum(rel * nu_Y, axis=-1) / (FOUR_PI * r2 * np.sqrt(r2))

    def u_values(self, x, Y, nu_Y):
        rel = np.asarray(x, dtype=float) - np.asarray(Y, dtype=float)
        r2 = np.sum(rel * rel, axis=-1)
        if np.any(r2 == 0.0):
            raise DomainError("double-layer kernel evaluated on the diagonal")
        return np.sum(rel * nu_Y, axis=-1) / (FOUR_PI * r2)


class CustomUKernel:
    """H = u(x, Y) / |x-y|**(2-mu) for a caller-supplied smooth factor u.

    Used for synthetic kernels in tests, e.g. u = 1 (pure 1/r) or the odd
    factor that violates the evenness condition.
    """

    needs_normals = False
    analytic_flux = None

    def __init__(self, u, mu=1.0):
        if not 0.0 < mu <= 1.0:
            raise DomainError("weak-singularity exponent must be in (0, 1]")
        self._u = u
        self.mu = float(mu)

    def h_values(self, x, Y, nu_Y=None):
        rel = np.asarray(x, dtype=float) - np.asarray(Y, dtype=float)
        r = np.linalg.norm(rel, axis=-1)
        if np.any(r == 0.0):
            raise DomainError("singular kernel evaluated on the diagonal")
        return self._u(x, Y) / r ** (2.0 - self.mu)

    def u_values(self, x, Y, nu_Y=None):
        return self._u(x, Y)


class OnesCompletion:
    """Rank-one completion G(x,y) = 1."""

    def g_values(self, x, Y):
        return np.ones(np.asarray(Y).shape[0])


class NoCompletion:
    """Disabled completion, G = 0."""

    def g_values(self, x, Y):
        return np.zeros(np.asarray(Y).shape[0])


class KernelPair:
    """The operator data (G, H, c) of the second-kind equation."""

    def __init__(self, singular, completion, c=1.0):
        if c == 0.0:
            raise DomainError("equation constant c must be nonzero")
        self.singular = singular
        self.completion = completion
        self.c = float(c)


def make_kernels(kernel="laplace_dl", completion="ones", c=1.0):
    if kernel != "laplace_dl":
        raise DomainError(f"unknown kernel type {kernel!r}")
    if completion == "ones":
        comp = OnesCompletion()
    elif completion == "none":
        comp = NoCompletion()
    else:
        raise DomainError(f"unknown completion {completion!r}")
    return KernelPair(LaplaceDoubleLayer(), comp, c)


def u_polar_at_zero(surface, kernel, x0, frame, xi_hat,
                    rho_fractions=(1e-2, 5e-3, 2.5e-3)):
    """Diagonal limit of the smooth factor along a tangent direction.

    Evaluates u(x0, psi_{x0}(rho * xi_hat)) at three geometrically shrinking
    radii and Richardson-extrapolates assuming a regular expansion in rho.
    Raises if the extrapolation residuals grow instead of contracting.
    """
    if kernel.mu != 1.0:
        raise DomainError("polar limit extrapolation requires mu = 1")
    rhos = surface.lyapunov_radius * np.asarray(rho_fractions, dtype=float)
    xi = from_polar(rhos, np.asarray(xi_hat, dtype=float)[None, :])
    pts = chart_point(surface, x0, frame, xi)
    nu = surface.normal(pts) if kernel.needs_normals else None
    u = kernel.u_values(x0, pts, nu)
    # successive differences must shrink toward the diagonal; growth means
    # the factor diverges and no limit exists (the floor absorbs roundoff
    # noise on near-constant factors)
    if abs(u[2] - u[1]) > 1.2 * abs(u[1] - u[0]) + 1e-10 * max(1.0, abs(u[1])):
        raise KernelRegularityError(
            "polar limit extrapolation diverging; kernel factor not regular")
    first = 2.0 * u[1:] - u[:-1]            # removes the O(rho) term
    return (4.0 * first[1] - first[0]) / 3.0   # removes the O(rho^2) term
