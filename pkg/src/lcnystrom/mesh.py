"""Cube-face surface meshes with uniform refinement and open Gauss nodes.

Elements are parameter rectangles on the six equiangular cube-face charts,
refined 4-to-1 per level, so level L has 6*4**L elements.  Quadrature nodes
are tensor Gauss-Legendre points mapped through the chart with the area
element folded into the weights.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import ConfigError
from .geometry import NUM_FACES
from .quadrature import CLOSED_SIMPSON, gauss_rule, tensor_grid

DEFAULT_MAX_LEVEL = 7

_EDGE_SAMPLES = 8  # boundary samples per element edge for diameter estimates


class SurfaceMesh:
    """Element decomposition of a surface at one refinement level."""

    def __init__(self, surface, level, face, lo, size, areas, diameters):
        self.surface = surface
        self.level = int(level)
        self.face = face            # (E,) chart id
        self.lo = lo                # (E, 2) lower parameter corner
        self.size = size            # (E,) parameter-square side
        self.areas = areas          # (E,)
        self.diameters = diameters  # (E,)
        self.h = float(diameters.max())

    @property
    def n_elements(self):
        return self.face.shape[0]

    @property
    def total_area(self):
        return float(self.areas.sum())


class NodeSet:
    """Quadrature nodes, weights, and normals over a mesh."""

    def __init__(self, points, weights, normals, element, local_index, q,
                 ref_nodes):
        self.points = points
        self.weights = weights
        self.normals = normals
        self.element = element
        self.local_index = local_index
        self.q = int(q)
        self.ref_nodes = ref_nodes  # 1-D reference coordinates of the rule

    def interior_margin(self):
        """Distance from the reference nodes to the reference-square edge.

        Positive for open rules; zero when a closed rule was injected."""
        return float(1.0 - np.max(np.abs(self.ref_nodes)))

    @property
    def n(self):
        return self.points.shape[0]

    def min_pair_distance(self):
        from scipy.spatial import cKDTree

        tree = cKDTree(self.points)
        dist, _ = tree.query(self.points, k=2)
        return float(dist[:, 1].min())

    def nearest_neighbor_distances(self):
        from scipy.spatial import cKDTree

        tree = cKDTree(self.points)
        dist, _ = tree.query(self.points, k=2)
        return dist[:, 1]


def element_integral(surface, face, lo, size, f=None, q=8, subdiv=1):
    """Integrate ``f`` (or the area element for f=None) over one element."""
    g, w = gauss_rule(q)
    total = 0.0
    step = size / subdiv
    for i in range(subdiv):
        for j in range(subdiv):
            u0 = lo[0] + i * step
            v0 = lo[1] + j * step
            uu, vv, ww = tensor_grid(
                u0 + 0.5 * step * (g + 1.0), 0.5 * step * w,
                v0 + 0.5 * step * (g + 1.0), 0.5 * step * w)
            jac = surface.area_element(face, uu, vv)
            if f is None:
                total += np.sum(ww * jac)
            else:
                pts = surface.chart(face, uu, vv)
                total += np.sum(ww * jac * f(pts))
    return total


def _element_diameters(surface, face, lo, size):
    """Max pairwise distance between sampled element-boundary points."""
    t = np.linspace(0.0, 1.0, _EDGE_SAMPLES)
    loops_u = np.concatenate([t, np.ones_like(t), t[::-1], np.zeros_like(t)])
    loops_v = np.concatenate([np.zeros_like(t), t, np.ones_like(t), t[::-1]])
    diam = np.empty(face.shape[0])
    for e in range(face.shape[0]):
        u = lo[e, 0] + size[e] * loops_u
        v = lo[e, 1] + size[e] * loops_v
        pts = surface.chart(face[e], u, v)
        diff = pts[:, None, :] - pts[None, :, :]
        diam[e] = np.sqrt(np.max(np.sum(diff * diff, axis=-1)))
    return diam


def build_mesh(surface, level, max_level=DEFAULT_MAX_LEVEL, area_q=10):
    """Uniform 4-to-1 refinement of the six cube-face charts."""
    if level < 0:
        raise ConfigError("mesh level must be nonnegative")
    if level > max_level:
        raise ConfigError(
            f"mesh level {level} exceeds the dense-solver budget "
            f"(max_level={max_level})")
    k = 2 ** level
    size = 2.0 / k
    edges = -1.0 + size * np.arange(k)
    face = np.repeat(np.arange(NUM_FACES), k * k)
    uu, vv = np.meshgrid(edges, edges, indexing="ij")
    lo = np.tile(np.stack([uu.ravel(), vv.ravel()], axis=1), (NUM_FACES, 1))
    sizes = np.full(face.shape[0], size)

    subdiv = 2 if level <= 1 else 1
    areas = np.array([
        element_integral(surface, face[e], lo[e], sizes[e], q=area_q,
                         subdiv=subdiv)
        for e in range(face.shape[0])])
    diameters = _element_diameters(surface, face, lo, sizes)
    return SurfaceMesh(surface, level, face, lo, sizes, areas, diameters)


def quadrature_nodes(surface, mesh, q, rule="gauss"):
    """Open tensor quadrature nodes over all elements of the mesh.

    ``rule="closed_simpson"`` injects a closed Newton-Cotes rule; it exists
    only so the invariant suite can demonstrate the interior-node check
    failing, and is not valid for production solves.
    """
    if q < 1:
        raise ConfigError("quadrature order q must be at least 1")
    if rule == "gauss":
        g, w = gauss_rule(q)
    elif rule == "closed_simpson":
        g, w = CLOSED_SIMPSON
    else:
        raise ConfigError(f"unknown quadrature rule {rule!r}")
    nq = g.shape[0]
    E = mesh.n_elements
    points = np.empty((E * nq * nq, 3))
    weights = np.empty(E * nq * nq)
    element = np.repeat(np.arange(E), nq * nq)
    local_index = np.tile(np.arange(nq * nq), E)
    for e in range(E):
        half = 0.5 * mesh.size[e]
        un = mesh.lo[e, 0] + half * (g + 1.0)
        vn = mesh.lo[e, 1] + half * (g + 1.0)
        uu, vv, ww = tensor_grid(un, half * w, vn, half * w)
        jac = surface.area_element(mesh.face[e], uu, vv)
        sl = slice(e * nq * nq, (e + 1) * nq * nq)
        points[sl] = surface.chart(mesh.face[e], uu, vv)
        weights[sl] = ww * jac
    normals = surface.normal(points)
    return NodeSet(points, weights, normals, element, local_index, nq, g)


def local_truncation(surface, mesh, e, f, q, ref_subdiv=4, ref_extra=6):
    """Normalized truncation error of the element rule against a refined one."""
    g, w = gauss_rule(q)
    half = 0.5 * mesh.size[e]
    un = mesh.lo[e, 0] + half * (g + 1.0)
    vn = mesh.lo[e, 1] + half * (g + 1.0)
    uu, vv, ww = tensor_grid(un, half * w, vn, half * w)
    jac = surface.area_element(mesh.face[e], uu, vv)
    pts = surface.chart(mesh.face[e], uu, vv)
    approx = np.sum(ww * jac * f(pts))
    ref = element_integral(surface, mesh.face[e], mesh.lo[e], mesh.size[e],
                           f=f, q=q + ref_extra, subdiv=ref_subdiv)
    area = mesh.areas[e]
    return abs(ref - approx) / area


def max_local_truncation(surface, mesh, f, q, **kw):
    return max(local_truncation(surface, mesh, e, f, q, **kw)
               for e in range(mesh.n_elements))


def write_nodes_csv(nodes, path):
    """Dump nodes as: node id, element id, x, y, z, weight."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "element", "x", "y", "z", "weight"])
        for a in range(nodes.n):
            x, y, z = nodes.points[a]
            writer.writerow([a, int(nodes.element[a]),
                             f"{x:.17g}", f"{y:.17g}", f"{z:.17g}",
                             f"{nodes.weights[a]:.17g}"])
