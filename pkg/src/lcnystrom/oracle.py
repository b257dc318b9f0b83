"""Reference evaluation of the continuous operator and manufactured data.

The reference path is deliberately independent of the production moment
machinery: it splits the singular integral with an internal C-infinity
window, uses unaligned graded polar panels on the cap, and refined element
rules elsewhere, escalating both until two refinements agree.  Known
closed forms on the unit sphere (flux = -1/2, double-layer eigenvalues
-1/(2(2n+1))) keep manufactured data analytic where possible.
"""

from __future__ import annotations

import numpy as np

from .errors import OracleError
from .geometry import tangent_frame
from .singular import (face_grid, graded_radial_breaks, polar_grid,
                       smooth_window, uniform_theta_breaks)


class OracleConfig:
    """Knobs for the reference quadrature."""

    def __init__(self, cap_fraction=0.5, theta_panels=12, radial_panels=12,
                 q=10, outer_subdiv=32, q_outer=6, max_escalations=3):
        self.cap_fraction = cap_fraction
        self.theta_panels = theta_panels
        self.radial_panels = radial_panels
        self.q = q
        self.outer_subdiv = outer_subdiv
        self.q_outer = q_outer
        self.max_escalations = max_escalations


def apply_singular(surface, kernel, phi, x, tol=1e-8, config=None):
    """(H phi)(x) by cap-polar plus windowed element quadrature."""
    cfg = config or OracleConfig()
    d = surface.lyapunov_radius
    r_out = cfg.cap_fraction * d
    r_in = 0.5 * r_out
    x = np.asarray(x, dtype=float)
    frame = tangent_frame(surface, x)

    def evaluate(tp, rp, sub):
        grid = polar_grid(surface, kernel, x, frame,
                          uniform_theta_breaks(tp),
                          graded_radial_breaks(r_out, rp), cfg.q)
        win = smooth_window(grid.chord, r_in, r_out)
        cap = grid.integrate(win * phi(grid.y))
        pts, ws = face_grid(surface, sub, cfg.q_outer)
        r = np.linalg.norm(x - pts, axis=-1)
        keep = r > 1e-14
        pts, ws, r = pts[keep], ws[keep], r[keep]
        nu = surface.normal(pts) if kernel.needs_normals else None
        h = kernel.h_values(x, pts, nu)
        outer = float(np.sum(ws * (1.0 - smooth_window(r, r_in, r_out))
                             * h * phi(pts)))
        return cap + outer

    coarse = evaluate(cfg.theta_panels, cfg.radial_panels, cfg.outer_subdiv)
    tp, rp, sub = cfg.theta_panels, cfg.radial_panels, cfg.outer_subdiv
    for _ in range(cfg.max_escalations):
        tp, rp, sub = 2 * tp, 2 * rp, 2 * sub
        fine = evaluate(tp, rp, sub)
        if abs(fine - coarse) <= tol:
            return fine
        coarse = fine
    raise OracleError(
        f"singular operator oracle did not reach tol {tol:.1e} at {x} "
        f"(last change {abs(fine - coarse):.3e})")


def apply_smooth(surface, completion, phi, x, tol=1e-8, config=None):
    """(G phi)(x) by globally refined element quadrature."""
    cfg = config or OracleConfig()
    x = np.asarray(x, dtype=float)
    sub = cfg.outer_subdiv
    pts, ws = face_grid(surface, sub, cfg.q_outer)
    coarse = float(np.sum(ws * completion.g_values(x, pts) * phi(pts)))
    for _ in range(cfg.max_escalations):
        sub *= 2
        pts, ws = face_grid(surface, sub, cfg.q_outer)
        fine = float(np.sum(ws * completion.g_values(x, pts) * phi(pts)))
        if abs(fine - coarse) <= tol:
            return fine
        coarse = fine
    raise OracleError(
        f"smooth operator oracle did not reach tol {tol:.1e} at {x}")


def oracle_apply(surface, kernels, phi, x, tol=1e-8, config=None):
    """(A phi)(x) = (G phi)(x) + (H phi)(x) to the requested tolerance."""
    return (apply_smooth(surface, kernels.completion, phi, x, tol / 2, config)
            + apply_singular(surface, kernels.singular, phi, x, tol / 2,
                             config))


def brute_polar_moment(surface, kernel, x, eta, beta, radial_panels=64,
                       angular_panels=32, q=10, r_cap=None):
    """Dense graded polar rule for one cutoff moment; test oracle only.

    No alignment with the cutoff-ramp radii: accuracy comes from panel
    count.  ``eta`` is a callable of chordal distance.
    """
    from .correction import monomial_values

    x = np.asarray(x, dtype=float)
    frame = tangent_frame(surface, x)
    if r_cap is None:
        r_cap = 0.5 * surface.lyapunov_radius
    grid = polar_grid(surface, kernel, x, frame,
                      uniform_theta_breaks(angular_panels),
                      graded_radial_breaks(r_cap * 1.05, radial_panels), q)
    vals = eta(grid.chord)
    V = monomial_values(grid.xi, [tuple(beta)], 1.0)[:, 0]
    return grid.integrate(vals * V)


def double_layer_eigenvalue(n):
    """Spectrum of the Laplace double layer on the unit sphere."""
    return -1.0 / (2.0 * (2 * n + 1))


# -- manufactured problems --------------------------------------------------


def field_one(pts):
    return np.ones(np.atleast_2d(pts).shape[0])


def field_y1(pts):
    return np.atleast_2d(pts)[:, 2]


def field_y2(pts):
    z = np.atleast_2d(pts)[:, 2]
    return 0.5 * (3.0 * z * z - 1.0)


NAMED_FIELDS = {"one": field_one, "y1": field_y1, "y2": field_y2}

_HARMONIC_DEGREE = {"one": 0, "y1": 1, "y2": 2}


class Problem:
    """Surface, operator data, exact solution, and the matching data f."""

    def __init__(self, surface, kernels, phi, f, label=""):
        self.surface = surface
        self.kernels = kernels
        self.phi = phi
        self.f = f
        self.label = label


class _OracleField:
    """Pointwise-manufactured data with memoization at repeated points."""

    def __init__(self, surface, kernels, phi, tol=1e-9, config=None):
        self.surface = surface
        self.kernels = kernels
        self.phi = phi
        self.tol = tol
        self.config = config
        self._cache = {}

    def _one(self, x):
        key = np.asarray(x).tobytes()
        if key not in self._cache:
            self._cache[key] = (
                self.kernels.c * float(np.asarray(self.phi(x[None, :]))[0])
                - oracle_apply(self.surface, self.kernels, self.phi, x,
                               self.tol, self.config))
        return self._cache[key]

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.array([self._one(x) for x in pts])


def manufacture(surface, kernels, phi, mode="auto", surface_area=None,
                tol=1e-9, config=None):
    """Data field f = c*phi - A(phi) matching a chosen exact solution.

    ``phi`` may be a named spherical harmonic ("one", "y1", "y2") or a
    callable.  Named harmonics on the unit sphere get analytic data from the
    double-layer spectrum; anything else falls back to the pointwise oracle
    unless mode forbids it.
    """
    if isinstance(phi, str):
        name = phi
        phi = NAMED_FIELDS[name]
    else:
        name = None

    analytic_ok = (mode in ("auto", "analytic") and name is not None
                   and surface.kind == "sphere"
                   and kernels.singular.analytic_flux == -0.5)
    if analytic_ok:
        c = kernels.c
        lam = double_layer_eigenvalue(_HARMONIC_DEGREE[name])
        from .kernels import OnesCompletion

        if isinstance(kernels.completion, OnesCompletion):
            area = surface_area if surface_area is not None else 4.0 * np.pi
            comp = (lambda pts: area * np.ones(np.atleast_2d(pts).shape[0])) \
                if name == "one" else (lambda pts: 0.0)
        else:
            comp = lambda pts: 0.0

        def f(pts):
            pts2 = np.atleast_2d(pts)
            base = (c - lam) * phi(pts2)
            extra = comp(pts2)
            return base - extra

        return phi, f
    if mode == "analytic":
        raise OracleError("no analytic manufactured data for this problem")
    return phi, _OracleField(surface, kernels, phi, tol, config)


def make_problem(surface, kernels, solution="y1", mode="auto", tol=1e-9):
    phi, f = manufacture(surface, kernels, solution, mode=mode, tol=tol)
    label = solution if isinstance(solution, str) else "custom"
    return Problem(surface, kernels, phi, f, label)
