import numpy as np
import pytest

from lcnystrom import (SolverError, assemble, interpolate, make_kernels,
                       make_problem, p0_fast_path, solve)
from lcnystrom.solver import write_solution_csv


@pytest.fixture(scope="module")
def p0_setup(sphere, kernels, discretization):
    mesh, nodes, pou, corr = discretization(sphere, 2, 2, 0, kernels)
    prob = make_problem(sphere, kernels, "y1")
    system = assemble(sphere, mesh, nodes, pou, kernels, corr, prob.f)
    return mesh, nodes, pou, corr, prob, system


def test_identity_limit(sphere, kernels, discretization):
    # with G and H off the matrix reduces to c*I
    from lcnystrom import CustomUKernel, KernelPair, NoCompletion

    mesh, nodes, pou, _ = discretization(sphere, 1, 2, 0, kernels)
    zero = KernelPair(
        CustomUKernel(lambda x, Y: np.zeros(np.atleast_2d(Y).shape[0])),
        NoCompletion(), c=2.5)
    from lcnystrom import LocalCorrector

    corr = LocalCorrector(sphere, nodes, pou, zero, p=0, analytic_flux=False)
    corr._flux_cache = {}
    # zero kernel: flux integrals vanish, so bypass the numeric path
    corr.flux_at = lambda x: 0.0
    system = assemble(sphere, mesh, nodes, pou, zero, corr,
                      lambda pts: np.zeros(np.atleast_2d(pts).shape[0]))
    assert np.allclose(system.matrix, 2.5 * np.eye(nodes.n), atol=1e-15)


def test_matrix_row_action_on_constants(p0_setup):
    mesh, nodes, pou, corr, prob, system = p0_setup
    action = system.matrix @ np.ones(nodes.n)
    # c - sum G W - sum H_b: the H row sums are exactly -1/2 by the moment
    # condition, and the completion term is the quadrature area
    area = nodes.weights.sum()
    expect = 1.0 - area + 0.5
    assert np.max(np.abs(action - expect)) <= 1e-10


def test_h_block_row_sums(sphere, kernels, discretization):
    mesh, nodes, pou, corr = discretization(sphere, 3, 2, 0, kernels)
    worst = 0.0
    for a in range(0, nodes.n, 37):
        x = nodes.points[a]
        poly = corr.solve_at(x, skip=a)
        row = corr.corrected_row(x, poly, skip=a)
        worst = max(worst, abs(row.sum() + 0.5))
    assert worst <= 1e-8


def test_manufactured_constant_exact_without_completion(sphere,
                                                        discretization):
    kernels = make_kernels("laplace_dl", "none", 1.0)
    mesh, nodes, pou, corr = discretization(sphere, 2, 2, 0,
                                            make_kernels())
    from lcnystrom import LocalCorrector

    corr = LocalCorrector(sphere, nodes, pou, kernels, p=0)
    prob = make_problem(sphere, kernels, "one")
    sol = solve(assemble(sphere, mesh, nodes, pou, kernels, corr, prob.f))
    assert np.max(np.abs(sol.values - 1.0)) <= 1e-12


def test_manufactured_constant_with_completion(p0_setup, sphere, kernels,
                                               discretization):
    # with G = 1 the area quadrature error enters at discretization order
    mesh, nodes, pou, corr = discretization(sphere, 2, 2, 0, kernels)
    prob = make_problem(sphere, kernels, "one")
    sol = solve(assemble(sphere, mesh, nodes, pou, kernels, corr, prob.f))
    assert np.max(np.abs(sol.values - 1.0)) <= 1e-4


def test_zero_data_zero_solution(p0_setup, sphere, kernels):
    mesh, nodes, pou, corr, prob, system = p0_setup
    import copy

    zero_sys = copy.copy(system)
    zero_sys.rhs = np.zeros(nodes.n)
    sol = solve(zero_sys)
    assert np.max(np.abs(sol.values)) == 0.0


def test_linearity(p0_setup, sphere, kernels):
    mesh, nodes, pou, corr, prob, system = p0_setup
    import copy

    rng = np.random.default_rng(0)
    f1 = rng.standard_normal(nodes.n)
    f2 = rng.standard_normal(nodes.n)
    def with_rhs(r):
        s2 = copy.copy(system)
        s2.rhs = r
        return solve(s2).values
    lhs = with_rhs(f1 + f2)
    rhs = with_rhs(f1) + with_rhs(f2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_solution_residual_invariant(p0_setup):
    *_, system = p0_setup
    sol = solve(system)
    resid = np.linalg.norm(system.matrix @ sol.values - system.rhs)
    scale = (np.linalg.norm(system.matrix, ord=np.inf)
             * np.linalg.norm(sol.values) + np.linalg.norm(system.rhs))
    assert resid <= 1e-10 * scale


def test_solution_accuracy(p0_setup, sphere):
    *_, prob, system = p0_setup
    sol = solve(system)
    err = np.abs(sol.values - prob.phi(sol.nodes.points)).max()
    assert err <= 5e-4  # level-2 degree-0 accuracy, frozen from the study


def test_interpolation_at_nodes_exact(p0_setup):
    *_, system = p0_setup
    sol = solve(system)
    for a in [0, 33, 170, 383]:
        assert abs(interpolate(sol, sol.nodes.points[a])
                   - sol.values[a]) <= 1e-12


def test_interpolation_tracks_nodal_error(sphere, kernels, discretization):
    # frozen from the convergence study: off-node error within 5x nodal
    mesh, nodes, pou, corr = discretization(sphere, 2, 2, 2, kernels)
    prob = make_problem(sphere, kernels, "y1")
    sol = solve(assemble(sphere, mesh, nodes, pou, kernels, corr, prob.f))
    pts = sphere.random_points(np.random.default_rng(123), 100)
    ierr = np.abs(interpolate(sol, pts) - prob.phi(pts)).max()
    nerr = np.abs(sol.values - prob.phi(nodes.points)).max()
    assert ierr <= 5.0 * nerr


def test_fast_path_matrix_equality(p0_setup, sphere, kernels):
    mesh, nodes, pou, corr, prob, system = p0_setup
    fast = p0_fast_path(sphere, mesh, nodes, kernels, prob.f)
    assert np.max(np.abs(system.matrix - fast.matrix)) <= 1e-12
    assert np.max(np.abs(system.rhs - fast.rhs)) == 0.0
    sol_g = solve(system)
    sol_f = solve(fast)
    assert np.max(np.abs(sol_g.values - sol_f.values)) <= 1e-10


def test_fast_path_gamma_on_sphere(sphere, kernels, discretization):
    mesh, nodes, _, _ = discretization(sphere, 1, 2, 0, kernels)
    fast = p0_fast_path(sphere, mesh, nodes, kernels,
                        lambda pts: np.zeros(np.atleast_2d(pts).shape[0]))
    # diagonal = gamma - G W_a + sum_{b!=a} H W; reconstruct gamma
    for a in [0, 50]:
        x = nodes.points[a]
        hw = np.zeros(nodes.n)
        off = np.arange(nodes.n) != a
        hw[off] = kernels.singular.h_values(
            x, nodes.points[off], nodes.normals[off]) * nodes.weights[off]
        gamma = fast.matrix[a, a] + nodes.weights[a] - hw.sum()
        assert abs(gamma - 1.5) <= 1e-12


def test_fast_path_solution_needs_context_for_interp(sphere, kernels,
                                                     discretization):
    from lcnystrom import InterpolationError

    mesh, nodes, _, _ = discretization(sphere, 1, 2, 0, kernels)
    f = lambda pts: np.atleast_2d(pts)[:, 2]
    sol = solve(p0_fast_path(sphere, mesh, nodes, kernels, f))
    with pytest.raises(InterpolationError):
        interpolate(sol, nodes.points[0])


def test_fast_path_numeric_gamma(sphere, kernels, discretization):
    mesh, nodes, _, _ = discretization(sphere, 1, 2, 0, kernels)
    f = lambda pts: np.atleast_2d(pts)[:, 2]
    analytic = p0_fast_path(sphere, mesh, nodes, kernels, f,
                            gamma_mode="analytic")
    numeric = p0_fast_path(sphere, mesh, nodes, kernels, f,
                           gamma_mode="numeric", flux_accuracy=1e-8)
    assert np.max(np.abs(analytic.matrix - numeric.matrix)) <= 1e-6


def test_singular_constant_raises(sphere, kernels, discretization):
    # set c to an exact eigenvalue of the discrete operator block: the
    # matrix c*I - K is then singular and the solve must refuse
    from lcnystrom import KernelPair, LaplaceDoubleLayer, LocalCorrector, \
        NoCompletion

    mesh, nodes, pou, _ = discretization(sphere, 1, 2, 0, kernels)
    bad = KernelPair(LaplaceDoubleLayer(), NoCompletion(), c=1.0)
    corr = LocalCorrector(sphere, nodes, pou, bad, p=0)
    ones = lambda pts: np.ones(np.atleast_2d(pts).shape[0])
    system = assemble(sphere, mesh, nodes, pou, bad, corr, ones)
    K = bad.c * np.eye(nodes.n) - system.matrix
    eigs = np.linalg.eigvals(K)
    real = eigs[np.abs(eigs.imag) < 1e-10].real
    c_bad = float(real[np.argmin(np.abs(real + 0.5))])
    import copy

    singular = copy.copy(system)
    singular.matrix = c_bad * np.eye(nodes.n) - K
    with pytest.raises(SolverError):
        solve(singular)


def test_solution_csv(p0_setup, tmp_path):
    *_, system = p0_setup
    sol = solve(system)
    path = tmp_path / "solution.csv"
    write_solution_csv(sol, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "node,x,y,z,phi"
    assert len(lines) == sol.nodes.n + 1
