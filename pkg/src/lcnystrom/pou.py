"""Complementary nodal partition-of-unity pairs and the moment cutoff.

Each quadrature node a carries a pair (zeta_a, zeta_hat_a) with
zeta_a + zeta_hat_a = 1.  zeta_a vanishes at least quadratically at the node
and equals one beyond the node radius r_a, so zeta_hat_a is supported in the
ball of radius r_a.  Radii are nearest-neighbor based for degree 0 (giving
the nodal property zeta_hat_a(x_b) = delta_ab) and proportional to the mesh
size for degree >= 1.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import SupportAuditError

RAMPS = ("quadratic", "quintic")


def _smoothstep(w):
    """C^2 quintic ramp 0 -> 1 on [0, 1]."""
    w = np.clip(w, 0.0, 1.0)
    return w * w * w * (10.0 + w * (-15.0 + 6.0 * w))


def _ramp(t, kind):
    """zeta profile against t = |x - x_a| / r_a, clamped to 1 for t >= 1.

    "quadratic" is min(1, t^2): it satisfies the unit-constant quadratic
    bound exactly and matches the Voronoi-style construction.  "quintic" is
    the C^2 smoothstep in t; it vanishes cubically at the node but crosses
    above t^2 in the middle of the ramp (constant ~2), so the quadratic
    bound then holds with a fitted constant instead of 1.
    """
    if kind == "quadratic":
        return np.minimum(1.0, t * t)
    if kind == "quintic":
        return _smoothstep(t)
    raise ValueError(f"unknown ramp {kind!r}")


def required_support(p):
    """Monomial count (p+1)(p+2)/2: nodes needed for a solvable moment fit."""
    return (p + 1) * (p + 2) // 2


class PartitionOfUnity:
    """Radius-based complementary pair over a fixed node set."""

    def __init__(self, points, radii, p, ramp="quadratic"):
        if ramp not in RAMPS:
            raise ValueError(f"ramp must be one of {RAMPS}")
        self.points = points
        self.radii = np.asarray(radii, dtype=float)
        self.p = int(p)
        self.ramp = ramp
        self.max_radius = float(self.radii.max())
        self.min_overlap = None
        self.overlap_below_half = None
        self._tree = cKDTree(points)

    @property
    def n(self):
        return self.points.shape[0]

    def zeta(self, a, x):
        """zeta_a evaluated at points x (shape (...,3) or (3,))."""
        x = np.asarray(x, dtype=float)
        d = np.linalg.norm(x - self.points[a], axis=-1)
        return _ramp(d / self.radii[a], self.ramp)

    def zeta_hat(self, a, x):
        return 1.0 - self.zeta(a, x)

    def zeta_all(self, x):
        """zeta_b(x) for every node b; shape (n,)."""
        d = np.linalg.norm(self.points - np.asarray(x, dtype=float), axis=-1)
        return _ramp(d / self.radii, self.ramp)

    def support_set(self, x):
        """J_x = indices b with zeta_hat_b(x) > 0, i.e. |x - x_b| < r_b."""
        x = np.asarray(x, dtype=float)
        cand = self._tree.query_ball_point(x, self.max_radius)
        cand = np.asarray(cand, dtype=int)
        if cand.size == 0:
            return cand
        d = np.linalg.norm(self.points[cand] - x, axis=-1)
        return cand[d < self.radii[cand]]

    def support_counts(self, xs):
        return np.array([self.support_set(x).size for x in np.atleast_2d(xs)])


def build_pou(nodes, p, h, theta=0.99, kappa_scale=1.5, ramp="quadratic",
              surface=None, audit_rng=None, audit_points=1000,
              max_radius=None):
    """Construct the pair and audit its support coverage.

    Degree 0 uses r_a = theta * (nearest-neighbor distance), which gives the
    nodal property exactly.  Degree >= 1 uses a shrinking, spacing-
    proportional radius r_a = kappa_scale*(p+1)*s with s the median node
    spacing, so a support of O(h) diameter sees enough nodes at every
    refinement; ``max_radius`` (normally a fraction of the moment-cutoff
    cap) clamps coarse meshes so the local polynomial is never evaluated
    outside the region its moments control.  The audit checks every node
    plus (when a surface is given) a random sample of off-node surface
    points, and raises naming the worst point on failure.
    """
    if p < 0:
        raise ValueError("correction degree p must be nonnegative")
    if p == 0:
        radii = theta * nodes.nearest_neighbor_distances()
    else:
        spacing = float(np.median(nodes.nearest_neighbor_distances()))
        r = kappa_scale * (p + 1) * spacing
        if max_radius is not None:
            r = min(r, max_radius)
        radii = np.full(nodes.n, r)
    pou = PartitionOfUnity(nodes.points, radii, p, ramp)

    if audit_rng is None:
        audit_rng = np.random.default_rng(0)
    if surface is not None:
        sample = surface.random_points(audit_rng, audit_points)
    else:
        sample = nodes.points[:0]

    if p == 0:
        # Nodal property: every other node lies at or beyond the radius.
        nn = nodes.nearest_neighbor_distances()
        if np.any(radii >= nn):
            raise SupportAuditError("degree-0 radii reach a neighboring node")
        # The minimum off-node overlap sum(zeta_hat) is recorded rather than
        # enforced: tensor-Gauss layouts leave small pockets (element
        # centers) where all nodes sit near the radius, so the Voronoi-style
        # 1/2 floor is unattainable for a radius-based pair.  The degree-0
        # correction stays bounded there regardless (its weighted sum is the
        # moment defect), and interpolation drops it where the weights
        # vanish identically.
        if sample.size:
            overlaps = np.array([float(np.sum(1.0 - pou.zeta_all(x)))
                                 for x in sample])
            pou.min_overlap = float(overlaps.min())
            pou.overlap_below_half = float((overlaps < 0.5).mean())
    else:
        need = required_support(p)
        counts = pou.support_counts(nodes.points)
        if counts.min() < need:
            worst = nodes.points[int(np.argmin(counts))]
            raise SupportAuditError(
                f"support set has {counts.min()} < {need} nodes at {worst}")
        if sample.size:
            counts = pou.support_counts(sample)
            if counts.min() < need:
                worst = sample[int(np.argmin(counts))]
                raise SupportAuditError(
                    f"support set has {counts.min()} < {need} nodes at {worst}")
    return pou


def cutoff_profile(r, r_in, r_out):
    """C^2 quintic profile of chordal distance: 1 below r_in, 0 above r_out."""
    w = (r_out - np.asarray(r, dtype=float)) / (r_out - r_in)
    return _smoothstep(w)


class Cutoff:
    """C^2 radial cutoff in chordal distance: 1 inside r_in, 0 beyond r_out."""

    def __init__(self, center, r_in, r_out):
        if not 0.0 < r_in < r_out:
            raise ValueError("need 0 < r_in < r_out")
        self.center = np.asarray(center, dtype=float)
        self.r_in = float(r_in)
        self.r_out = float(r_out)

    def __call__(self, y):
        return self.of_distance(
            np.linalg.norm(np.asarray(y, dtype=float) - self.center, axis=-1))

    def of_distance(self, r):
        return cutoff_profile(r, self.r_in, self.r_out)


def eta(cutoff, y):
    """Functional form of the cutoff evaluation."""
    return cutoff(y)
