"""Gauss-Legendre panel rules shared by the mesh, moment, and oracle code."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_rule(q):
    """Nodes and weights on [-1, 1]; nodes are strictly interior (open rule)."""
    if q < 1:
        raise ValueError("need at least one Gauss point per direction")
    nodes, weights = np.polynomial.legendre.leggauss(q)
    return nodes, weights


# Closed Newton-Cotes (Simpson) on [-1,1]; only used as a negative control
# for the open-rule requirement.
CLOSED_SIMPSON = (np.array([-1.0, 0.0, 1.0]), np.array([1.0, 4.0, 1.0]) / 3.0)


def panel_rule(breaks, q):
    """Composite Gauss rule over consecutive panels given by ``breaks``."""
    g, w = gauss_rule(q)
    breaks = np.asarray(breaks, dtype=float)
    mid = 0.5 * (breaks[1:] + breaks[:-1])
    half = 0.5 * (breaks[1:] - breaks[:-1])
    nodes = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_breaks(a, b, panels, power=2.0):
    """Panel breakpoints on [a, b] clustered toward ``a`` by t**power."""
    t = np.linspace(0.0, 1.0, panels + 1) ** power
    return a + (b - a) * t


def tensor_grid(xnodes, xweights, ynodes, yweights):
    """Flattened tensor-product nodes and weights."""
    xx, yy = np.meshgrid(xnodes, ynodes, indexing="ij")
    ww = np.outer(xweights, yweights)
    return xx.ravel(), yy.ravel(), ww.ravel()
