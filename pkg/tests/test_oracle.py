import numpy as np
import pytest

from lcnystrom import (CustomUKernel, OracleError, double_layer_eigenvalue,
                       make_problem, manufacture, oracle_apply)
from lcnystrom.oracle import (OracleConfig, apply_singular, field_one,
                              field_y1, field_y2)

FOUR_PI = 4.0 * np.pi


def test_flux_identity(sphere, kernels, rng):
    for x in sphere.random_points(rng, 5):
        val = apply_singular(sphere, kernels.singular, field_one, x, tol=1e-8)
        assert abs(val + 0.5) <= 1e-8


def test_inverse_distance_integral(sphere, rng):
    # u = 1 test kernel: integral of 1/|x-y| over the unit sphere is 4 pi
    k = CustomUKernel(lambda x, Y: np.ones(np.atleast_2d(Y).shape[0]), mu=1.0)
    x = sphere.random_points(rng, 1)[0]
    val = apply_singular(sphere, k, field_one, x, tol=1e-8)
    assert abs(val - FOUR_PI) <= 1e-8


def test_degree_one_eigenvalue(sphere, kernels, rng):
    # frozen fixture: the double layer maps z to -z/6 on the unit sphere
    assert double_layer_eigenvalue(1) == -1.0 / 6.0
    for x in sphere.random_points(rng, 3):
        val = apply_singular(sphere, kernels.singular, field_y1, x, tol=1e-8)
        assert abs(val - (-x[2] / 6.0)) <= 1e-6


def test_degree_two_eigenvalue(sphere, kernels, rng):
    x = sphere.random_points(rng, 1)[0]
    val = apply_singular(sphere, kernels.singular, field_y2, x, tol=1e-8)
    expect = double_layer_eigenvalue(2) * field_y2(x[None, :])[0]
    assert abs(val - expect) <= 1e-6


def test_full_operator_on_constants(sphere, kernels, rng):
    x = sphere.random_points(rng, 1)[0]
    val = oracle_apply(sphere, kernels, field_one, x, tol=1e-8)
    assert abs(val - (FOUR_PI - 0.5)) <= 1e-8


def test_self_consistency_under_refinement(sphere, kernels, rng):
    x = sphere.random_points(rng, 1)[0]
    a = apply_singular(sphere, kernels.singular, field_y1, x, tol=1e-7)
    b = apply_singular(sphere, kernels.singular, field_y1, x, tol=1e-7,
                       config=OracleConfig(theta_panels=20, radial_panels=20,
                                           outer_subdiv=56))
    assert abs(a - b) <= 1e-7


def test_unreachable_tolerance_raises(sphere, kernels, rng):
    x = sphere.random_points(rng, 1)[0]
    tiny = OracleConfig(theta_panels=2, radial_panels=2, q=2, outer_subdiv=2,
                        q_outer=2, max_escalations=1)
    with pytest.raises(OracleError):
        apply_singular(sphere, kernels.singular, field_y1, x, tol=1e-13,
                       config=tiny)


def test_manufactured_constant(sphere, kernels):
    phi, f = manufacture(sphere, kernels, "one")
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    expect = 1.0 + 0.5 - FOUR_PI
    assert np.allclose(f(pts), expect, atol=1e-14)


def test_manufactured_harmonic(sphere, kernels):
    phi, f = manufacture(sphere, kernels, "y1")
    pts = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])
    assert np.allclose(f(pts), (1.0 + 1.0 / 6.0) * pts[:, 2], atol=1e-14)


def test_manufactured_zero(sphere, kernels):
    phi, f = manufacture(sphere, kernels,
                         lambda pts: np.zeros(np.atleast_2d(pts).shape[0]),
                         tol=1e-6)
    pts = np.array([[0.0, 0.0, 1.0]])
    assert abs(f(pts)[0]) <= 1e-6


def test_oracle_fallback_matches_analytic(sphere, kernels):
    # a named harmonic forced through the pointwise oracle must agree with
    # the analytic manufactured data
    phi_a, f_a = manufacture(sphere, kernels, "y1")
    phi_o, f_o = manufacture(sphere, kernels, field_y1, tol=1e-8)
    pts = sphere.random_points(np.random.default_rng(3), 3)
    assert np.max(np.abs(f_a(pts) - f_o(pts))) <= 1e-7


def test_oracle_field_memoizes(sphere, kernels):
    calls = []

    def phi(pts):
        calls.append(1)
        return np.atleast_2d(pts)[:, 2]

    _, f = manufacture(sphere, kernels, phi, tol=1e-6)
    x = np.array([[0.0, 0.0, 1.0]])
    f(x)
    first = len(calls)
    f(x)
    assert len(calls) == first  # repeated point served from the cache


def test_problem_bundle(sphere, kernels):
    prob = make_problem(sphere, kernels, "y1")
    assert prob.label == "y1"
    pts = np.array([[0.0, 0.0, 1.0]])
    assert abs(prob.phi(pts)[0] - 1.0) == 0.0
