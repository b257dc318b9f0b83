"""Closed analytic surfaces with cube-face charts and tangent-plane coordinates.

A surface is the image of the unit sphere under a smooth map together with an
implicit function whose zero set is the surface.  Everything the rest of the
package needs reduces to four primitives: evaluate a chart, differentiate a
chart, evaluate the implicit function, and differentiate the implicit
function.  All operations are vectorized over trailing point axes and all
objects are immutable after construction, so concurrent reads are safe.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, OutsidePatchError

# Equiangular cube-face charts: the parameter square [-1,1]^2 maps to a face
# of the cube through tan(pi/4 * t), then radially to the unit sphere.
_EQUIANGLE = np.pi / 4.0

# face -> (axis, sign); the two free cube coordinates follow cyclically.
_FACES = ((0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0), (2, 1.0), (2, -1.0))

NUM_FACES = 6

ON_SURFACE_TOL = 1e-10


def _cube_point(face, u, v):
    """Cube point and its u,v derivatives for parameters in [-1,1]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    axis, sign = _FACES[face]
    i, j = (axis + 1) % 3, (axis + 2) % 3
    shape = np.broadcast(u, v).shape
    c = np.empty(shape + (3,))
    du = np.zeros(shape + (3,))
    dv = np.zeros(shape + (3,))
    c[..., axis] = sign
    c[..., i] = np.tan(_EQUIANGLE * u)
    c[..., j] = np.tan(_EQUIANGLE * v)
    du[..., i] = _EQUIANGLE / np.cos(_EQUIANGLE * u) ** 2
    dv[..., j] = _EQUIANGLE / np.cos(_EQUIANGLE * v) ** 2
    return c, du, dv


def _normalize(vec):
    return vec / np.linalg.norm(vec, axis=-1, keepdims=True)


def _sphere_dirs(face, u, v):
    """Unit directions sigma(u,v) and their parameter derivatives."""
    c, du, dv = _cube_point(face, u, v)
    nrm = np.linalg.norm(c, axis=-1, keepdims=True)
    sigma = c / nrm
    # d(c/|c|) = (I - sigma sigma^T) dc / |c|
    dsu = (du - sigma * np.sum(sigma * du, axis=-1, keepdims=True)) / nrm
    dsv = (dv - sigma * np.sum(sigma * dv, axis=-1, keepdims=True)) / nrm
    return sigma, dsu, dsv


class Surface:
    """Base class; concrete surfaces fill in the map from the unit sphere.

    Attributes
    ----------
    kind : str
        One of ``sphere``, ``ellipsoid``, ``perturbed_sphere``.
    lyapunov_radius : float
        Radius d of the balls within which the surface is a graph over the
        tangent plane.
    """

    kind = "abstract"

    def __init__(self, lyapunov_radius):
        if lyapunov_radius <= 0:
            raise DomainError("lyapunov_radius must be positive")
        self.lyapunov_radius = float(lyapunov_radius)

    # -- primitives supplied by subclasses ---------------------------------

    def _from_sphere(self, sigma):
        raise NotImplementedError

    def _from_sphere_jac(self, sigma, dsig):
        """Directional derivative of the sphere->surface map."""
        raise NotImplementedError

    def implicit(self, pts):
        """Signed residual, approximately a distance; zero on the surface."""
        raise NotImplementedError

    def implicit_grad(self, pts):
        raise NotImplementedError

    # -- shared operations ---------------------------------------------------

    def chart(self, face, u, v):
        """Map parameters in [-1,1]^2 on one cube face to surface points."""
        sigma, _, _ = _sphere_dirs(face, u, v)
        return self._from_sphere(sigma)

    def chart_tangents(self, face, u, v):
        """Surface point plus tangent vectors dy/du, dy/dv."""
        sigma, dsu, dsv = _sphere_dirs(face, u, v)
        y = self._from_sphere(sigma)
        tu = self._from_sphere_jac(sigma, dsu)
        tv = self._from_sphere_jac(sigma, dsv)
        return y, tu, tv

    def area_element(self, face, u, v):
        _, tu, tv = self.chart_tangents(face, u, v)
        return np.linalg.norm(np.cross(tu, tv), axis=-1)

    def normal(self, pts):
        """Outward unit normal at on-surface points."""
        return _normalize(self.implicit_grad(np.asarray(pts, dtype=float)))

    def on_surface(self, pts, tol=ON_SURFACE_TOL):
        return np.all(np.abs(self.implicit(pts)) <= tol)

    def require_on_surface(self, pts, tol=ON_SURFACE_TOL):
        res = np.max(np.abs(self.implicit(pts)))
        if res > tol:
            raise DomainError(
                f"point not on surface ({self.kind}): residual {res:.3e} > {tol:.1e}"
            )

    def random_points(self, rng, m):
        """m points on the surface from isotropic random directions."""
        dirs = rng.standard_normal((m, 3))
        return self._from_sphere(_normalize(dirs))

    def project_normal(self, base, direction, max_iter=50, tol=1e-13,
                       max_offset=None):
        """Root of the implicit function along ``base + s*direction``.

        Safeguarded Newton starting at s=0; the offset is clamped to
        ``max_offset`` (default twice the Lyapunov radius).  Returns the
        surface points; raises OutsidePatchError if any point fails.
        """
        base = np.atleast_2d(np.asarray(base, dtype=float))
        direction = np.broadcast_to(
            np.asarray(direction, dtype=float), base.shape)
        if max_offset is None:
            max_offset = 2.0 * self.lyapunov_radius
        s = np.zeros(base.shape[0])
        pts = base.copy()
        for _ in range(max_iter):
            res = self.implicit(pts)
            active = np.abs(res) > tol
            if not active.any():
                return pts
            grad = self.implicit_grad(pts)
            slope = np.sum(grad * direction, axis=-1)
            with np.errstate(invalid="ignore", divide="ignore"):
                step = -res / slope
            step[~active] = 0.0
            if not np.isfinite(step).all():
                raise OutsidePatchError(
                    "normal ray tangent to surface; outside Lyapunov patch")
            s = np.clip(s + step, -max_offset, max_offset)
            pts = base + s[:, None] * direction
        res = self.implicit(pts)
        if np.max(np.abs(res)) > tol:
            raise OutsidePatchError(
                f"chart solve did not converge in {max_iter} iterations "
                f"(worst residual {np.max(np.abs(res)):.3e}); "
                "outside Lyapunov patch")
        return pts


class UnitSphere(Surface):
    kind = "sphere"

    def __init__(self, lyapunov_radius=0.9):
        super().__init__(lyapunov_radius)

    def _from_sphere(self, sigma):
        return sigma

    def _from_sphere_jac(self, sigma, dsig):
        return dsig

    def implicit(self, pts):
        return np.linalg.norm(np.asarray(pts, dtype=float), axis=-1) - 1.0

    def implicit_grad(self, pts):
        return _normalize(np.asarray(pts, dtype=float))

    @property
    def area(self):
        return 4.0 * np.pi


class Ellipsoid(Surface):
    kind = "ellipsoid"

    def __init__(self, semi_axes, lyapunov_radius=None):
        axes = np.asarray(semi_axes, dtype=float)
        if axes.shape != (3,) or np.any(axes <= 0):
            raise DomainError("semi_axes must be three positive numbers")
        if lyapunov_radius is None:
            lyapunov_radius = 0.5 * float(axes.min())
        super().__init__(lyapunov_radius)
        self.semi_axes = axes

    def _from_sphere(self, sigma):
        return sigma * self.semi_axes

    def _from_sphere_jac(self, sigma, dsig):
        return dsig * self.semi_axes

    def implicit(self, pts):
        scaled = np.asarray(pts, dtype=float) / self.semi_axes
        return np.linalg.norm(scaled, axis=-1) - 1.0

    def implicit_grad(self, pts):
        scaled = np.asarray(pts, dtype=float) / self.semi_axes
        q = np.linalg.norm(scaled, axis=-1, keepdims=True)
        return scaled / (self.semi_axes * q)


def _triple_product_bump(sigma):
    """Default perturbation shape s(w) = w1*w2*w3 and its ambient gradient."""
    s = sigma[..., 0] * sigma[..., 1] * sigma[..., 2]
    grad = np.stack(
        [sigma[..., 1] * sigma[..., 2],
         sigma[..., 0] * sigma[..., 2],
         sigma[..., 0] * sigma[..., 1]], axis=-1)
    return s, grad


class PerturbedSphere(Surface):
    """Radial graph r(sigma) = 1 + eps * s(sigma) over the unit sphere."""

    kind = "perturbed_sphere"

    def __init__(self, eps=0.1, lyapunov_radius=0.4, shape=None):
        if abs(eps) > 0.2:
            raise DomainError("perturbation amplitude above supported range")
        super().__init__(lyapunov_radius)
        self.eps = float(eps)
        self._shape = shape if shape is not None else _triple_product_bump

    def _radius(self, sigma):
        s, grad = self._shape(sigma)
        return 1.0 + self.eps * s, self.eps * grad

    def _from_sphere(self, sigma):
        r, _ = self._radius(sigma)
        return sigma * r[..., None]

    def _from_sphere_jac(self, sigma, dsig):
        r, g = self._radius(sigma)
        dr = np.sum(g * dsig, axis=-1)
        return dsig * r[..., None] + sigma * dr[..., None]

    def implicit(self, pts):
        pts = np.asarray(pts, dtype=float)
        nrm = np.linalg.norm(pts, axis=-1)
        sigma = pts / nrm[..., None]
        r, _ = self._radius(sigma)
        return nrm - r

    def implicit_grad(self, pts):
        pts = np.asarray(pts, dtype=float)
        nrm = np.linalg.norm(pts, axis=-1, keepdims=True)
        sigma = pts / nrm
        _, g = self._radius(sigma)
        # gradient of s(x/|x|) is the tangential part of grad s over |x|
        gt = (g - sigma * np.sum(sigma * g, axis=-1, keepdims=True)) / nrm
        return sigma - gt


def make_surface(kind, semi_axes=(1.0, 1.0, 1.0), eps=0.1,
                 lyapunov_radius=None):
    """Factory used by the config layer and the estimator."""
    if kind == "sphere":
        return UnitSphere(lyapunov_radius if lyapunov_radius else 0.9)
    if kind == "ellipsoid":
        return Ellipsoid(semi_axes, lyapunov_radius)
    if kind == "perturbed_sphere":
        return PerturbedSphere(eps, lyapunov_radius if lyapunov_radius else 0.4)
    raise DomainError(f"unknown surface kind: {kind!r}")


class TangentFrame:
    """Right-handed orthonormal frame (t1, t2, nu) at a surface point."""

    __slots__ = ("x", "t1", "t2", "nu")

    def __init__(self, x, t1, t2, nu):
        self.x = np.asarray(x, dtype=float)
        self.t1 = np.asarray(t1, dtype=float)
        self.t2 = np.asarray(t2, dtype=float)
        self.nu = np.asarray(nu, dtype=float)

    def rotated(self, angle):
        ca, sa = np.cos(angle), np.sin(angle)
        return TangentFrame(self.x,
                            ca * self.t1 + sa * self.t2,
                            -sa * self.t1 + ca * self.t2,
                            self.nu)


def tangent_frame(surface, x):
    """Deterministic frame at x; t1 is built from the least-aligned axis."""
    x = np.asarray(x, dtype=float)
    surface.require_on_surface(x[None, :])
    nu = surface.normal(x[None, :])[0]
    k = int(np.argmin(np.abs(nu)))
    e = np.zeros(3)
    e[k] = 1.0
    t1 = e - nu[k] * nu
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(nu, t1)
    return TangentFrame(x, t1, t2, nu)


def local_cartesian(x0, frame, y):
    """Tangent-plane coordinates xi_alpha = (y - x0) . t_alpha."""
    y = np.asarray(y, dtype=float)
    rel = y - np.asarray(x0, dtype=float)
    return np.stack([rel @ frame.t1, rel @ frame.t2], axis=-1)


def local_polar(xi):
    """(rho, xi_hat) with the fixed representative (1,0) at the origin."""
    xi = np.asarray(xi, dtype=float)
    rho = np.linalg.norm(xi, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        xi_hat = xi / rho[..., None]
    sentinel = np.zeros_like(xi)
    sentinel[..., 0] = 1.0
    xi_hat = np.where(rho[..., None] > 0.0, xi_hat, sentinel)
    return rho, xi_hat


def from_polar(rho, xi_hat):
    return np.asarray(rho, dtype=float)[..., None] * np.asarray(xi_hat, dtype=float)


def chart_point(surface, x0, frame, xi, max_iter=50, tol=1e-13):
    """The graph map psi_{x0}: tangent coordinates to surface points.

    Solves for the offset along nu(x0) with safeguarded Newton.  ``xi`` may
    be a single pair or an (m, 2) array.
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xi2 = np.atleast_2d(xi)
    base = (np.asarray(x0, dtype=float)
            + np.outer(xi2[:, 0], frame.t1) + np.outer(xi2[:, 1], frame.t2))
    pts = surface.project_normal(base, frame.nu, max_iter=max_iter, tol=tol)
    return pts[0] if single else pts
