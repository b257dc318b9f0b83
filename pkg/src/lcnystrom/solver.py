"""Dense nodal systems for the corrected Nystrom discretization.

The nodal equations are

    c phi(x_a) - sum_b G(x_a,x_b) W_b phi(x_b) - sum_b H_b(x_a) phi(x_b)
        = f(x_a),

with the corrected weights H_b from the correction module.  Solutions carry
enough state to evaluate the continuous extension at arbitrary surface
points.  A singularity-subtraction fast path assembles the algebraically
identical degree-0 system without building local polynomials per row.
"""

from __future__ import annotations

import csv

import numpy as np
import scipy.linalg

from .correction import flux_integral
from .errors import InterpolationError, SolverError

RESIDUAL_REL = 1e-10


class NystromSystem:
    """Dense matrix form of the nodal equations."""

    def __init__(self, matrix, rhs, nodes, polys, context):
        self.matrix = matrix
        self.rhs = rhs
        self.nodes = nodes
        self.polys = polys
        self.context = context  # dict: surface, mesh, pou, kernels, corrector, f

    @property
    def n(self):
        return self.rhs.shape[0]


class NystromSolution:
    """Nodal values plus the closure needed for interpolation."""

    def __init__(self, values, system):
        self.values = values
        self.system = system
        self.nodes = system.nodes
        self.context = system.context

    def __call__(self, x):
        return interpolate(self, x)


def assemble(surface, mesh, nodes, pou, kernels, corrector, f, polys=None):
    """Build the dense system; ``f`` is a vectorized field on points."""
    if polys is None:
        polys = corrector.solve_all_nodes()
    n = nodes.n
    A = np.empty((n, n))
    for a in range(n):
        x = nodes.points[a]
        grow = kernels.completion.g_values(x, nodes.points) * nodes.weights
        hrow = corrector.corrected_row(x, polys[a], skip=a)
        A[a] = -(grow + hrow)
        A[a, a] += kernels.c
    rhs = np.asarray(f(nodes.points), dtype=float)
    if not np.all(np.isfinite(A)):
        raise SolverError("assembled matrix contains non-finite entries")
    context = dict(surface=surface, mesh=mesh, pou=pou, kernels=kernels,
                   corrector=corrector, f=f)
    return NystromSystem(A, rhs, nodes, polys, context)


RCOND_MIN = 1e-14


def solve(system):
    """Dense LU solve with condition and residual guards."""
    try:
        lu, piv = scipy.linalg.lu_factor(system.matrix)
        anorm = np.linalg.norm(system.matrix, ord=1)
        rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
        if info != 0 or not np.isfinite(rcond) or rcond < RCOND_MIN:
            raise SolverError(
                f"nodal system is numerically singular (rcond {rcond:.2e}); "
                "the constant c may be near a discrete eigenvalue")
        values = scipy.linalg.lu_solve((lu, piv), system.rhs)
    except scipy.linalg.LinAlgError as exc:
        raise SolverError(
            "nodal system is numerically singular; the constant c may be "
            "near a discrete eigenvalue") from exc
    resid = np.linalg.norm(system.matrix @ values - system.rhs)
    scale = (np.linalg.norm(system.matrix, ord=np.inf)
             * np.linalg.norm(values) + np.linalg.norm(system.rhs))
    if not np.isfinite(resid) or resid > RESIDUAL_REL * max(scale, 1e-300):
        raise SolverError(
            f"solve residual {resid:.3e} exceeds {RESIDUAL_REL:.1e} * {scale:.3e}")
    return NystromSolution(values, system)


def interpolate(solution, x):
    """Continuous extension phi_h(x); x a single point or an (m, 3) array."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        return np.array([interpolate(solution, xi) for xi in x])
    ctx = solution.context
    kernels, corrector, f = ctx["kernels"], ctx["corrector"], ctx["f"]
    if corrector is None:
        raise InterpolationError(
            "solution lacks correction context; fast-path systems must be "
            "given the partition of unity and corrector before interpolating")
    nodes = solution.nodes
    try:
        poly = corrector.solve_at(x)
    except Exception as exc:
        raise InterpolationError(f"moment system failed at {x}: {exc}") from exc
    hrow = corrector.corrected_row(x, poly)
    grow = kernels.completion.g_values(x, nodes.points) * nodes.weights
    fx = float(np.asarray(f(x[None, :]))[0])
    return (fx + float(grow @ solution.values)
            + float(hrow @ solution.values)) / kernels.c


def p0_fast_path(surface, mesh, nodes, kernels, f, gamma_mode="analytic",
                 flux_accuracy=1e-8):
    """Singularity-subtraction assembly for the degree-0 nodal system.

    Algebraically identical to the general degree-0 assembly under the
    nodal partition of unity; the diagonal carries
    gamma(x_a) = c - flux(x_a) and the kernel acts on differences.
    """
    n = nodes.n
    if gamma_mode == "analytic":
        if kernels.singular.analytic_flux is None:
            raise SolverError("kernel has no analytic flux; use numeric mode")
        flux = np.full(n, kernels.singular.analytic_flux)
    elif gamma_mode == "numeric":
        flux = np.array([
            flux_integral(surface, kernels.singular, nodes.points[a],
                          accuracy=flux_accuracy)
            for a in range(n)])
    else:
        raise SolverError(f"unknown gamma_mode {gamma_mode!r}")
    A = np.empty((n, n))
    for a in range(n):
        x = nodes.points[a]
        rel = x - nodes.points
        r2 = np.sum(rel * rel, axis=-1)
        hw = np.zeros(n)
        off = r2 > 1e-28
        nu = nodes.normals[off] if kernels.singular.needs_normals else None
        hw[off] = kernels.singular.h_values(x, nodes.points[off], nu) \
            * nodes.weights[off]
        grow = kernels.completion.g_values(x, nodes.points) * nodes.weights
        A[a] = -(grow + hw)
        A[a, a] += kernels.c - flux[a] + hw.sum()
    rhs = np.asarray(f(nodes.points), dtype=float)
    context = dict(surface=surface, mesh=mesh, pou=None, kernels=kernels,
                   corrector=None, f=f)
    return NystromSystem(A, rhs, nodes, None, context)


def write_solution_csv(solution, path):
    """Dump nodal values as: node id, x, y, z, phi."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "x", "y", "z", "phi"])
        for a in range(solution.nodes.n):
            x, y, z = solution.nodes.points[a]
            writer.writerow([a, f"{x:.17g}", f"{y:.17g}", f"{z:.17g}",
                             f"{solution.values[a]:.17g}"])
