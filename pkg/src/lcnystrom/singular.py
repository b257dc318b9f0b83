"""Low-level quadrature over the weakly singular patch.

The patch around an evaluation point x is parameterized in local polar
coordinates (rho, theta).  For kernels H = u/|x-y|**(2-mu) the polar area
element cancels the singularity: the pulled-back integrand carries the
bounded factor u * rho / |x-y|**(2-mu).  This module builds such grids with
caller-supplied radial breakpoints (per angle), plus a plain refined
element rule for the smooth remainder away from the singularity.
"""

from __future__ import annotations

import numpy as np

from .geometry import NUM_FACES
from .quadrature import gauss_rule, panel_rule, tensor_grid


class PolarGrid:
    """Flattened polar quadrature data around one surface point."""

    __slots__ = ("y", "xi", "chord", "u", "w_sing", "normals")

    def __init__(self, y, xi, chord, u, w_sing, normals):
        self.y = y            # (M,3) surface points
        self.xi = xi          # (M,2) tangent coordinates
        self.chord = chord    # (M,) |x - y|
        self.u = u            # (M,) smooth kernel factor
        self.w_sing = w_sing  # (M,) weight * rho * J / chord**(2-mu)
        self.normals = normals

    def integrate(self, factor):
        """Sum of H * factor over the patch; factor shaped (M,)."""
        return float(np.sum(self.w_sing * self.u * factor))


def solve_chord_radius(surface, x, frame, targets, theta, tol=1e-12,
                       max_iter=30):
    """Radii rho(theta) where the chordal distance reaches given targets.

    The chordal distance is monotone in rho on the Lyapunov patch, so Newton
    from rho = target converges quickly.  ``targets`` is broadcast against
    ``theta``; returns an array of the broadcast shape.
    """
    theta = np.asarray(theta, dtype=float)
    targets = np.broadcast_to(np.asarray(targets, dtype=float), theta.shape)
    ct, st = np.cos(theta), np.sin(theta)
    t_hat = ct[:, None] * frame.t1 + st[:, None] * frame.t2
    rho = targets.copy()
    for _ in range(max_iter):
        y = surface.project_normal(
            np.asarray(x) + rho[:, None] * t_hat, frame.nu)
        rel = y - np.asarray(x)
        chord = np.linalg.norm(rel, axis=-1)
        res = chord - targets
        if np.max(np.abs(res)) <= tol:
            return rho
        grad = surface.implicit_grad(y)
        sp = -np.sum(grad * t_hat, axis=-1) / np.sum(grad * frame.nu, axis=-1)
        yprime = t_hat + sp[:, None] * frame.nu
        dchord = np.sum(rel * yprime, axis=-1) / chord
        rho = rho - res / dchord
    return rho


def polar_grid(surface, kernel, x, frame, theta_breaks, radial_breaks, q):
    """Polar quadrature grid with per-angle radial panels.

    ``theta_breaks`` is a 1-D array of angular panel edges covering
    [0, 2*pi]; ``radial_breaks`` maps the flat array of theta Gauss nodes to
    an array of radial panel edges, shape (T, P+1), starting at 0.
    """
    g, w = gauss_rule(q)
    tmid = 0.5 * (theta_breaks[1:] + theta_breaks[:-1])
    thalf = 0.5 * (theta_breaks[1:] - theta_breaks[:-1])
    theta = (tmid[:, None] + thalf[:, None] * g[None, :]).ravel()
    wtheta = (thalf[:, None] * w[None, :]).ravel()

    rbreaks = radial_breaks(theta)            # (T, P+1)
    rmid = 0.5 * (rbreaks[:, 1:] + rbreaks[:, :-1])
    rhalf = 0.5 * (rbreaks[:, 1:] - rbreaks[:, :-1])
    rho = rmid[:, :, None] + rhalf[:, :, None] * g[None, None, :]
    wrho = rhalf[:, :, None] * w[None, None, :]

    T, P, Q = rho.shape
    theta_full = np.repeat(theta, P * Q)
    wt_full = np.repeat(wtheta, P * Q)
    rho = rho.reshape(-1)
    wrho = wrho.reshape(-1)

    ct, st = np.cos(theta_full), np.sin(theta_full)
    xi = np.stack([rho * ct, rho * st], axis=1)
    t_hat = ct[:, None] * frame.t1 + st[:, None] * frame.t2
    base = np.asarray(x, dtype=float) + rho[:, None] * t_hat
    y = surface.project_normal(base, frame.nu)

    rel = y - np.asarray(x, dtype=float)
    chord = np.linalg.norm(rel, axis=-1)
    grad = surface.implicit_grad(y)
    gn = np.sum(grad * frame.nu, axis=-1)
    s1 = -np.sum(grad * frame.t1, axis=-1) / gn
    s2 = -np.sum(grad * frame.t2, axis=-1) / gn
    jac = np.sqrt(1.0 + s1 * s1 + s2 * s2)

    normals = surface.normal(y) if kernel.needs_normals else None
    u = kernel.u_values(np.asarray(x, dtype=float), y, normals)
    w_sing = wt_full * wrho * rho * jac / chord ** (2.0 - kernel.mu)
    return PolarGrid(y, xi, chord, u, w_sing, normals)


def uniform_theta_breaks(panels):
    return np.linspace(0.0, 2.0 * np.pi, panels + 1)


def graded_radial_breaks(r_cap, panels, power=2.0):
    """Theta-independent radial edges on [0, r_cap], clustered at 0."""
    edges = r_cap * np.linspace(0.0, 1.0, panels + 1) ** power

    def breaks(theta):
        return np.broadcast_to(edges, theta.shape + edges.shape).copy()

    return breaks


def smooth_window(r, r_in, r_out):
    """C-infinity cutoff: 1 below r_in, 0 above r_out (mollifier blend)."""
    r = np.asarray(r, dtype=float)
    t = np.clip((r - r_in) / (r_out - r_in), 0.0, 1.0)
    with np.errstate(over="ignore", divide="ignore"):
        f1 = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
        f0 = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    return f1 / (f0 + f1)


def face_grid(surface, subdiv, q):
    """Global refined element rule: points, weights over all cube faces."""
    edges = np.linspace(-1.0, 1.0, subdiv + 1)
    un, uw = panel_rule(edges, q)
    pts_all, w_all = [], []
    for face in range(NUM_FACES):
        uu, vv, ww = tensor_grid(un, uw, un, uw)
        jac = surface.area_element(face, uu, vv)
        pts_all.append(surface.chart(face, uu, vv))
        w_all.append(ww * jac)
    return np.concatenate(pts_all), np.concatenate(w_all)
