"""Local polynomial corrections determined by moment conditions.

For each evaluation point x, a degree-p polynomial R_x in tangent-plane
coordinates is fit so that the corrected nodal sum reproduces the exact
action of the singular operator on all local polynomials up to degree p,
localized by the cutoff function.  The nodal values R_x(x_b) then act as
generalized quadrature weights near the singularity:

    H_b(x) = zeta_b(x) H(x, x_b) W_b + zeta_hat_b(x) R_x(x_b),

with the first term defined as zero when x coincides with the node.

Degree 0 takes the cutoff as unity so the required moment is the flux
integral of H over the whole surface (known analytically for the Laplace
double layer).  Higher degrees compute the moments over the cutoff cap in
local polar coordinates with radial panels split exactly at the cutoff-ramp
radii, which keeps the integrand piecewise analytic.
"""

from __future__ import annotations

import csv

import numpy as np
from scipy.spatial import cKDTree

from .errors import MomentAccuracyError, MomentSystemError
from .geometry import local_cartesian, tangent_frame
from .pou import Cutoff, cutoff_profile, required_support
from .singular import (face_grid, graded_radial_breaks, polar_grid,
                       smooth_window, solve_chord_radius,
                       uniform_theta_breaks)

SIGMA_MIN_REL = 1e-10  # solvability gate: min eigenvalue vs trace


def monomial_exponents(p):
    """Degree-graded exponent pairs (i, j) with i + j <= p."""
    return [(deg - j, j) for deg in range(p + 1) for j in range(deg + 1)]


def monomial_values(xi, exps, scale=1.0):
    """Vandermonde block V[m, k] = (xi1/scale)^i (xi2/scale)^j."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float)) / scale
    V = np.empty((xi.shape[0], len(exps)))
    for k, (i, j) in enumerate(exps):
        V[:, k] = xi[:, 0] ** i * xi[:, 1] ** j
    return V


def rotate_moment_vector(moments, angle, p):
    """Exact transform of monomial moments under a tangent-frame rotation.

    If the new basis is (t1, t2) rotated by ``angle``, the new coordinates
    are xi~1 = c xi1 + s xi2, xi~2 = -s xi1 + c xi2; monomial moments of any
    fixed measure recombine linearly within each total degree.
    """
    exps = monomial_exponents(p)
    index = {e: k for k, e in enumerate(exps)}
    c, s = np.cos(angle), np.sin(angle)
    out = np.zeros_like(np.asarray(moments, dtype=float))
    for k, (i, j) in enumerate(exps):
        # expand (c x + s y)^i (-s x + c y)^j over monomials
        coeffs = {(0, 0): 1.0}
        for _ in range(i):
            nxt = {}
            for (a, b), v in coeffs.items():
                nxt[(a + 1, b)] = nxt.get((a + 1, b), 0.0) + v * c
                nxt[(a, b + 1)] = nxt.get((a, b + 1), 0.0) + v * s
            coeffs = nxt
        for _ in range(j):
            nxt = {}
            for (a, b), v in coeffs.items():
                nxt[(a + 1, b)] = nxt.get((a + 1, b), 0.0) + v * (-s)
                nxt[(a, b + 1)] = nxt.get((a, b + 1), 0.0) + v * c
            coeffs = nxt
        out[k] = sum(v * moments[index[e]] for e, v in coeffs.items())
    return out


class LocalPolynomial:
    """Degree-p polynomial in scaled tangent coordinates at a point."""

    __slots__ = ("x", "frame", "scale", "coeffs", "exps", "p")

    def __init__(self, x, frame, scale, coeffs, p):
        self.x = np.asarray(x, dtype=float)
        self.frame = frame
        self.scale = float(scale)
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.exps = monomial_exponents(p)
        self.p = int(p)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        xi = local_cartesian(self.x, self.frame, np.atleast_2d(z))
        vals = monomial_values(xi, self.exps, self.scale) @ self.coeffs
        return float(vals[0]) if single else vals


def moment_matrix(pou, cutoff, x, frame, p, scale):
    """M[alpha, beta] = sum_b zeta_hat_b(x) eta(x_b) xi^alpha xi^beta at the
    nodes, in the scaled monomial basis; symmetric positive semidefinite."""
    exps = monomial_exponents(p)
    zeta = pou.zeta_all(x)
    w = (1.0 - zeta) * (cutoff(pou.points) if cutoff is not None else 1.0)
    idx = np.flatnonzero(w > 0.0)
    xi = local_cartesian(x, frame, pou.points[idx])
    V = monomial_values(xi, exps, scale)
    M = V.T @ (w[idx, None] * V)
    return 0.5 * (M + M.T), idx, w[idx]


class MomentEngine:
    """Computes singular moment integrals against the cutoff at a point."""

    def __init__(self, surface, kernel, cutoff_radii, accuracy=1e-9,
                 theta_panels=6, inner_panels=2, outer_panels=2, qpanel=8,
                 max_escalations=3):
        self.surface = surface
        self.kernel = kernel
        self.r_in, self.r_out = cutoff_radii
        self.accuracy = float(accuracy)
        self.theta_panels = theta_panels
        self.inner_panels = inner_panels
        self.outer_panels = outer_panels
        self.qpanel = qpanel
        self.max_escalations = max_escalations

    def _aligned_breaks(self, x, frame, k_in, k_out):
        """Radial panel edges split at the cutoff-ramp radii, per angle."""
        r_in, r_out = self.r_in, self.r_out

        def breaks(theta):
            rho_in = solve_chord_radius(self.surface, x, frame,
                                        np.full_like(theta, r_in), theta)
            rho_out = solve_chord_radius(self.surface, x, frame,
                                         np.full_like(theta, r_out), theta)
            grade = np.linspace(0.0, 1.0, k_in + 1) ** 2.0
            ramp = np.linspace(0.0, 1.0, k_out + 1)[1:]
            inner = rho_in[:, None] * grade[None, :]
            outer = rho_in[:, None] + (rho_out - rho_in)[:, None] * ramp[None, :]
            return np.concatenate([inner, outer], axis=1)

        return breaks

    def _grid(self, x, frame, factor_theta=1, factor_radial=1):
        theta_breaks = uniform_theta_breaks(self.theta_panels * factor_theta)
        radial = self._aligned_breaks(x, frame,
                                      self.inner_panels * factor_radial,
                                      self.outer_panels * factor_radial)
        return polar_grid(self.surface, self.kernel, x, frame,
                          theta_breaks, radial, self.qpanel)

    def _moments_on(self, grid, exps, scale):
        eta = cutoff_profile(grid.chord, self.r_in, self.r_out)
        V = monomial_values(grid.xi, exps, scale)
        return (grid.w_sing * grid.u * eta) @ V

    def moments(self, x, frame, p, scale):
        """Cutoff-weighted singular moments for all |beta| <= p at x.

        Returns (values, estimated error).  Escalates the panel counts until
        two refinement levels agree to the requested accuracy.
        """
        exps = monomial_exponents(p)
        coarse = self._moments_on(self._grid(x, frame), exps, scale)
        factor = 2
        for _ in range(self.max_escalations):
            fine = self._moments_on(
                self._grid(x, frame, factor, factor), exps, scale)
            est = float(np.max(np.abs(fine - coarse)))
            if est <= self.accuracy:
                return fine, est
            coarse, factor = fine, factor * 2
        raise MomentAccuracyError(
            f"singular moments at {x} reached estimate {est:.3e} "
            f"> accuracy {self.accuracy:.1e}", achieved=est)


def flux_integral(surface, kernel, x, accuracy=1e-8, cap_fraction=0.5,
                  theta_panels=8, radial_panels=8, qpanel=10, subdiv0=24,
                  qouter=4, max_escalations=3):
    """Whole-surface integral of H(x, .) by a split into cap and remainder.

    Uses an internal C-infinity window (not the moment cutoff), a graded
    polar rule on the cap, and a refined element rule outside; both halves
    are escalated together until the total stabilizes.
    """
    d = surface.lyapunov_radius
    r_out = cap_fraction * d
    r_in = 0.5 * r_out
    frame = tangent_frame(surface, x)

    def total(tp, rp, sub):
        grid = polar_grid(surface, kernel, x, frame,
                          uniform_theta_breaks(tp),
                          graded_radial_breaks(r_out, rp), qpanel)
        win = smooth_window(grid.chord, r_in, r_out)
        cap = grid.integrate(win)
        pts, ws = face_grid(surface, sub, qouter)
        rel = np.asarray(x) - pts
        r = np.linalg.norm(rel, axis=-1)
        keep = r > 1e-14
        win_out = 1.0 - smooth_window(r[keep], r_in, r_out)
        nu = surface.normal(pts[keep]) if kernel.needs_normals else None
        h = kernel.h_values(np.asarray(x, dtype=float), pts[keep], nu)
        outer = float(np.sum(ws[keep] * win_out * h))
        return cap + outer

    coarse = total(theta_panels, radial_panels, subdiv0)
    tp, rp, sub = theta_panels, radial_panels, subdiv0
    for _ in range(max_escalations):
        tp, rp, sub = 2 * tp, 2 * rp, 2 * sub
        fine = total(tp, rp, sub)
        if abs(fine - coarse) <= accuracy:
            return fine
        coarse = fine
    raise MomentAccuracyError(
        f"flux integral at {x} did not stabilize to {accuracy:.1e}",
        achieved=abs(fine - coarse))


def select_cutoff_radii(surface, nodes, p, min_extra=2, grow=1.25,
                        cap_fraction=0.85):
    """Cutoff radii (r_in, r_out), starting at (d/4, d/2).

    On coarse meshes the fixed cap may contain too few nodes for the moment
    system to be solvable; the radii then grow geometrically (capped at a
    fraction of the Lyapunov radius) until every node sees enough effective
    support.  In the refinement regime the default radii are returned.
    """
    d = surface.lyapunov_radius
    r_out = 0.5 * d
    need = required_support(p) + min_extra
    tree = cKDTree(nodes.points)
    while True:
        # count nodes whose cutoff value is not negligibly small
        r_eff = 0.9 * r_out
        counts = np.array([len(tree.query_ball_point(pt, r_eff))
                           for pt in nodes.points])
        if counts.min() >= need:
            return 0.5 * r_out, r_out
        if r_out >= cap_fraction * d:
            raise MomentSystemError(
                f"cannot find {need} nodes within the cutoff cap at "
                f"{nodes.points[int(np.argmin(counts))]}; refine the mesh")
        r_out = min(r_out * grow, cap_fraction * d)


class LocalCorrector:
    """Builds and evaluates the local polynomial R_x and corrected weights."""

    def __init__(self, surface, nodes, pou, kernels, p, accuracy=1e-9,
                 analytic_flux=True, engine_opts=None, cutoff_radii=None):
        self.surface = surface
        self.nodes = nodes
        self.pou = pou
        self.kernels = kernels
        self.p = int(p)
        self.accuracy = float(accuracy)
        self.analytic_flux = bool(analytic_flux)
        self.exps = monomial_exponents(p)
        if p == 0:
            # cutoff taken as unity; the single moment is the flux integral
            self.cutoff_radii = None
            self.scale = 1.0
            self.engine = None
        else:
            if cutoff_radii is None:
                cutoff_radii = select_cutoff_radii(surface, nodes, p)
            self.cutoff_radii = cutoff_radii
            self.scale = self.cutoff_radii[1]
            self.engine = MomentEngine(surface, kernels.singular,
                                       self.cutoff_radii, accuracy,
                                       **(engine_opts or {}))
        self._flux_cache = {}

    # -- pieces ------------------------------------------------------------

    def cutoff_at(self, x):
        if self.cutoff_radii is None:
            return None
        return Cutoff(x, *self.cutoff_radii)

    def eta_values(self, x, pts):
        cut = self.cutoff_at(x)
        return np.ones(pts.shape[0]) if cut is None else cut(pts)

    def flux_at(self, x):
        """integral of H(x, .) over the whole surface (the p = 0 moment)."""
        if self.analytic_flux and self.kernels.singular.analytic_flux is not None:
            return self.kernels.singular.analytic_flux
        key = tuple(np.round(np.asarray(x), 14))
        if key not in self._flux_cache:
            self._flux_cache[key] = flux_integral(
                self.surface, self.kernels.singular, x,
                accuracy=self.accuracy * 10)
        return self._flux_cache[key]

    def kernel_row(self, x, skip=None):
        """H(x, x_b) for all nodes b, with coincident nodes zeroed."""
        x = np.asarray(x, dtype=float)
        pts = self.nodes.points
        r2 = np.sum((x - pts) ** 2, axis=-1)
        coincident = r2 <= 1e-28
        if skip is not None:
            coincident = coincident.copy()
            coincident[skip] = True
        kern = self.kernels.singular
        nu = self.nodes.normals if kern.needs_normals else None
        if not coincident.any():
            return kern.h_values(x, pts, nu)
        vals = np.zeros(pts.shape[0])
        good = ~coincident
        vals[good] = kern.h_values(x, pts[good],
                                   nu[good] if nu is not None else None)
        return vals

    def singular_moment(self, x, beta, frame=None):
        """Single cutoff-weighted moment integral (module surface for tests)."""
        if frame is None:
            frame = tangent_frame(self.surface, x)
        if self.p == 0 and beta == (0, 0):
            return self.flux_at(x)
        vals, _ = self.engine.moments(x, frame, self.p, self.scale)
        k = self.exps.index(tuple(beta))
        return vals[k] * self.scale ** sum(beta)

    def moment_rhs(self, x, frame, skip=None):
        """Delta vector: exact moments minus the gated plain-quadrature sums."""
        if self.p == 0:
            integrals = np.array([self.flux_at(x)])
        else:
            integrals, _ = self.engine.moments(x, frame, self.p, self.scale)
        zeta = self.pou.zeta_all(x)
        eta = self.eta_values(x, self.nodes.points)
        hrow = self.kernel_row(x, skip=skip)
        gate = zeta * eta * hrow * self.nodes.weights
        idx = np.flatnonzero(gate != 0.0)
        if idx.size:
            xi = local_cartesian(x, frame, self.nodes.points[idx])
            V = monomial_values(xi, self.exps, self.scale)
            discrete = gate[idx] @ V
        else:
            discrete = np.zeros(len(self.exps))
        return integrals - discrete

    def solve_at(self, x, frame=None, skip=None):
        """Local polynomial R_x from the moment system at x."""
        x = np.asarray(x, dtype=float)
        if frame is None:
            frame = tangent_frame(self.surface, x)
        M, _, _ = moment_matrix(self.pou, self.cutoff_at(x), x, frame,
                                self.p, self.scale)
        if self.p == 0 and M[0, 0] <= 1e-12:
            # all zeta_hat weights vanish at x, so the correction never
            # enters the corrected sum; the zero polynomial is exact
            return LocalPolynomial(x, frame, self.scale, np.zeros(1), 0)
        eigs = np.linalg.eigvalsh(M)
        if eigs[0] < SIGMA_MIN_REL * np.trace(M):
            raise MomentSystemError(
                f"moment system singular at {x}: min eigenvalue "
                f"{eigs[0]:.3e} below gate {SIGMA_MIN_REL * np.trace(M):.3e}")
        delta = self.moment_rhs(x, frame, skip=skip)
        coeffs = np.linalg.solve(M, delta)
        resid = np.linalg.norm(M @ coeffs - delta)
        if resid > 1e-10 * max(np.linalg.norm(delta), 1e-300):
            coeffs, *_ = np.linalg.lstsq(M, delta, rcond=None)
        return LocalPolynomial(x, frame, self.scale, coeffs, self.p)

    def solve_all_nodes(self):
        """R_{x_a} for every quadrature node (the assembly precomputation)."""
        return [self.solve_at(self.nodes.points[a], skip=a)
                for a in range(self.nodes.n)]

    def corrected_row(self, x, poly, skip=None):
        """H_b(x) for all b: gated plain weights plus the local correction."""
        zeta = self.pou.zeta_all(x)
        hrow = self.kernel_row(x, skip=skip)
        row = zeta * hrow * self.nodes.weights
        zhat = 1.0 - zeta
        idx = np.flatnonzero(zhat > 0.0)
        if idx.size:
            row[idx] += zhat[idx] * poly(self.nodes.points[idx])
        return row

    def corrected_weight(self, x, b, poly):
        return self.corrected_row(x, poly)[b]


def write_moment_diagnostics(corrector, path):
    """Per-node CSV: Delta^0, min eigenvalue of M_x, max |R_x(x_b)|."""
    nodes = corrector.nodes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "delta0", "min_eig", "max_correction"])
        for a in range(nodes.n):
            x = nodes.points[a]
            frame = tangent_frame(corrector.surface, x)
            M, _, _ = moment_matrix(corrector.pou, corrector.cutoff_at(x),
                                    x, frame, corrector.p, corrector.scale)
            delta = corrector.moment_rhs(x, frame, skip=a)
            poly = corrector.solve_at(x, frame=frame, skip=a)
            support = corrector.pou.support_set(x)
            rmax = np.max(np.abs(poly(nodes.points[support]))) \
                if support.size else 0.0
            writer.writerow([a, f"{delta[0]:.17g}",
                             f"{np.linalg.eigvalsh(M)[0]:.17g}",
                             f"{rmax:.17g}"])
