"""Locally corrected Nystrom method for weakly singular surface integrals.

Solves second-kind Fredholm equations c*phi - A(phi) = f on closed smooth
surfaces, where A combines a smooth completion kernel with a weakly singular
one (the Laplace double layer ships by default).  Near the singularity the
quadrature weights are replaced through a degree-p local polynomial
correction determined by moment conditions, which restores convergence and
gives rates set by the correction degree and quadrature order.
"""

from .convergence import ConvergenceReport, run_convergence
from .correction import (LocalCorrector, LocalPolynomial, flux_integral,
                         monomial_exponents, rotate_moment_vector)
from .errors import (ConfigError, DomainError, InterpolationError, LcnError,
                     KernelRegularityError, MomentAccuracyError,
                     MomentSystemError, OracleError, OutsidePatchError,
                     SolverError, SupportAuditError)
from .estimator import NystromSolver, build_components
from .geometry import (Ellipsoid, PerturbedSphere, Surface, TangentFrame,
                       UnitSphere, chart_point, from_polar, local_cartesian,
                       local_polar, make_surface, tangent_frame)
from .invariants import run_invariants
from .kernels import (CustomUKernel, KernelPair, LaplaceDoubleLayer,
                      NoCompletion, OnesCompletion, make_kernels,
                      u_polar_at_zero)
from .mesh import (NodeSet, SurfaceMesh, build_mesh, local_truncation,
                   max_local_truncation, quadrature_nodes)
from .oracle import (OracleConfig, Problem, double_layer_eigenvalue,
                     make_problem, manufacture, oracle_apply)
from .pou import Cutoff, PartitionOfUnity, build_pou, required_support
from .solver import (NystromSolution, NystromSystem, assemble, interpolate,
                     p0_fast_path, solve)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceReport", "run_convergence",
    "LocalCorrector", "LocalPolynomial", "flux_integral",
    "monomial_exponents", "rotate_moment_vector",
    "ConfigError", "DomainError", "InterpolationError", "LcnError",
    "KernelRegularityError", "MomentAccuracyError", "MomentSystemError",
    "OracleError", "OutsidePatchError", "SolverError", "SupportAuditError",
    "NystromSolver", "build_components",
    "Ellipsoid", "PerturbedSphere", "Surface", "TangentFrame", "UnitSphere",
    "chart_point", "from_polar", "local_cartesian", "local_polar",
    "make_surface", "tangent_frame",
    "run_invariants",
    "CustomUKernel", "KernelPair", "LaplaceDoubleLayer", "NoCompletion",
    "OnesCompletion", "make_kernels", "u_polar_at_zero",
    "NodeSet", "SurfaceMesh", "build_mesh", "local_truncation",
    "max_local_truncation", "quadrature_nodes",
    "OracleConfig", "Problem", "double_layer_eigenvalue", "make_problem",
    "manufacture", "oracle_apply",
    "Cutoff", "PartitionOfUnity", "build_pou", "required_support",
    "NystromSolution", "NystromSystem", "assemble", "interpolate",
    "p0_fast_path", "solve",
    "__version__",
]
