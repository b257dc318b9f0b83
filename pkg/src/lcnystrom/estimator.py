"""Scikit-learn style front end for the corrected Nystrom solver.

``NystromSolver`` is a BaseEstimator: constructor arguments are plain
hyperparameters (surface, refinement level, quadrature and correction
orders, kernel choices), ``fit`` takes the boundary data field and solves
the dense nodal system, and ``predict`` evaluates the continuous extension
at points on the surface.  ``get_params``/``set_params``/``clone`` work the
usual way, so refinement studies are parameter sweeps.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .correction import LocalCorrector, select_cutoff_radii
from .geometry import make_surface
from .kernels import make_kernels
from .mesh import build_mesh, quadrature_nodes
from .pou import build_pou
from .solver import assemble, interpolate, p0_fast_path, solve
from .validation import check_field, check_on_surface, check_points

CUTOFF_CLAMP = 0.9  # PoU radii stay inside this fraction of the moment cap


def build_components(surface, level, q, p, kernels, theta=0.99,
                     kappa_scale=1.5, ramp="quadratic", moment_accuracy=1e-9,
                     analytic_flux=True, max_level=7, rng=None):
    """Mesh, nodes, partition of unity, and corrector, consistently ordered.

    For p >= 1 the moment-cutoff cap is chosen first (it may grow on coarse
    meshes to keep the moment systems solvable) and the partition-of-unity
    radii are clamped inside it, so local polynomials are only ever
    evaluated where their moments constrain them.
    """
    mesh = build_mesh(surface, level, max_level=max_level)
    nodes = quadrature_nodes(surface, mesh, q)
    if p >= 1:
        cutoff_radii = select_cutoff_radii(surface, nodes, p)
        max_radius = CUTOFF_CLAMP * cutoff_radii[1]
    else:
        cutoff_radii = None
        max_radius = None
    pou = build_pou(nodes, p, mesh.h, theta=theta, kappa_scale=kappa_scale,
                    ramp=ramp, surface=surface, audit_rng=rng,
                    max_radius=max_radius)
    corrector = LocalCorrector(surface, nodes, pou, kernels, p,
                               accuracy=moment_accuracy,
                               analytic_flux=analytic_flux,
                               cutoff_radii=cutoff_radii)
    return mesh, nodes, pou, corrector


class NystromSolver(BaseEstimator):
    """Solve c*phi - A(phi) = f on a closed surface; predict phi anywhere.

    Parameters mirror the config file keys.  ``fit(f)`` assembles and
    factorizes the nodal system for the boundary data field ``f`` (a
    vectorized callable on (m, 3) arrays); ``predict(X)`` evaluates the
    Nystrom interpolant at surface points X.
    """

    def __init__(self, surface="sphere", semi_axes=(1.0, 1.0, 1.0), eps=0.1,
                 lyapunov_radius=None, level=3, q=2, p=0,
                 kernel="laplace_dl", completion="ones", c=1.0,
                 theta=0.99, kappa_scale=1.5, ramp="quadratic",
                 moment_accuracy=1e-9, analytic_flux=True, path="general",
                 max_level=7):
        self.surface = surface
        self.semi_axes = semi_axes
        self.eps = eps
        self.lyapunov_radius = lyapunov_radius
        self.level = level
        self.q = q
        self.p = p
        self.kernel = kernel
        self.completion = completion
        self.c = c
        self.theta = theta
        self.kappa_scale = kappa_scale
        self.ramp = ramp
        self.moment_accuracy = moment_accuracy
        self.analytic_flux = analytic_flux
        self.path = path
        self.max_level = max_level

    def _make_surface(self):
        return make_surface(self.surface, self.semi_axes, self.eps,
                            self.lyapunov_radius)

    def fit(self, f, y=None):
        """Assemble and solve the nodal system for the data field ``f``."""
        f = check_field(f)
        surface = self._make_surface()
        kernels = make_kernels(self.kernel, self.completion, self.c)
        mesh, nodes, pou, corrector = build_components(
            surface, self.level, self.q, self.p, kernels,
            theta=self.theta, kappa_scale=self.kappa_scale, ramp=self.ramp,
            moment_accuracy=self.moment_accuracy,
            analytic_flux=self.analytic_flux, max_level=self.max_level)
        if self.path == "p0_fast":
            if self.p != 0:
                raise ValueError("the fast path requires p = 0")
            system = p0_fast_path(
                surface, mesh, nodes, kernels, f,
                gamma_mode="analytic" if self.analytic_flux else "numeric")
            # interpolation still goes through the general closure
            system.context.update(pou=pou, corrector=corrector)
        else:
            system = assemble(surface, mesh, nodes, pou, kernels, corrector, f)
        solution = solve(system)

        self.surface_ = surface
        self.kernels_ = kernels
        self.mesh_ = mesh
        self.nodes_ = nodes
        self.pou_ = pou
        self.corrector_ = corrector
        self.system_ = system
        self.solution_ = solution
        self.values_ = solution.values
        self.n_ = nodes.n
        self.h_ = mesh.h
        return self

    def predict(self, X):
        """Evaluate the continuous extension at surface points X."""
        check_is_fitted(self, "solution_")
        X = check_on_surface(self.surface_, check_points(X))
        return interpolate(self.solution_, X)

    def nodal_values(self):
        check_is_fitted(self, "solution_")
        return self.values_.copy()

    def score(self, X, y):
        """Negative max abs error against reference values y at X."""
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y))))
