import numpy as np
import pytest

from lcnystrom import (Cutoff, SupportAuditError, build_mesh, build_pou,
                       quadrature_nodes, required_support)
from lcnystrom.pou import cutoff_profile


@pytest.fixture(scope="module")
def level2(sphere):
    mesh = build_mesh(sphere, 2)
    nodes = quadrature_nodes(sphere, mesh, 2)
    return mesh, nodes


def test_nodal_property(sphere, level2):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere)
    for a in [0, 17, 101, nodes.n - 1]:
        zhat = 1.0 - pou.zeta_all(nodes.points[a])
        expect = np.zeros(nodes.n)
        expect[a] = 1.0
        assert np.array_equal(zhat, expect)


def test_complementarity_exact(sphere, level2, rng):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere)
    for x in sphere.random_points(rng, 1000):
        z = pou.zeta_all(x)
        assert np.max(np.abs(z + (1.0 - z) - 1.0)) == 0.0


def test_zeta_profile_values(sphere, level2):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere)
    a = 7
    x_a = nodes.points[a]
    r = pou.radii[a]
    fr_dir = np.array([1.0, 0.0, 0.0])
    fr_dir -= np.dot(fr_dir, x_a) * x_a
    fr_dir /= np.linalg.norm(fr_dir)
    assert pou.zeta(a, x_a) == 0.0
    assert pou.zeta_hat(a, x_a) == 1.0
    # pure quadratic ramp: value 1/4 at half radius
    x_half = x_a + 0.5 * r * fr_dir
    assert abs(pou.zeta(a, x_half) - 0.25) <= 1e-12
    # beyond the radius: outside the support
    x_out = x_a + 1.001 * r * fr_dir
    assert pou.zeta(a, x_out) == 1.0
    assert pou.zeta_hat(a, x_out) == 0.0


def test_exact_radius_tie_break():
    # |x - x_a| equal to the radius counts as outside the support
    from lcnystrom import PartitionOfUnity

    pou = PartitionOfUnity(np.array([[0.0, 0.0, 0.0]]), np.array([0.5]), 0)
    x = np.array([0.5, 0.0, 0.0])
    assert pou.zeta(0, x) == 1.0
    assert pou.zeta_hat(0, x) == 0.0
    assert pou.support_set(x).size == 0


def test_quadratic_bound_exact(sphere, level2, rng):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere)
    for x in sphere.random_points(rng, 500):
        d = np.linalg.norm(pou.points - x, axis=-1)
        t2 = (d / pou.radii) ** 2
        z = pou.zeta_all(x)
        good = t2 > 0
        assert np.all(z[good] <= t2[good] * (1.0 + 1e-12))


def test_quintic_ramp_is_c2_alternative(sphere, level2):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere, ramp="quintic")
    a = 3
    x_a = nodes.points[a]
    assert pou.zeta_hat(a, x_a) == 1.0
    zhat = 1.0 - pou.zeta_all(nodes.points[10])
    assert zhat[10] == 1.0 and np.sum(zhat > 0) == 1


def test_support_set_nodal(sphere, level2):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere)
    assert pou.support_set(nodes.points[42]).tolist() == [42]


def test_support_counts_p1(sphere, discretization, kernels, rng):
    mesh, nodes, pou, corr = discretization(sphere, 3, 2, 1, kernels)
    need = required_support(1)
    counts = pou.support_counts(nodes.points)
    assert counts.min() >= need
    # frozen from the audit run: node supports sit in the teens at level 3
    assert 10 <= counts.min() and counts.max() <= 40
    off = pou.support_counts(sphere.random_points(rng, 1000))
    assert off.min() >= need and off.max() <= 40


def test_overlap_diagnostics_recorded(sphere, level2):
    mesh, nodes = level2
    pou = build_pou(nodes, 0, mesh.h, surface=sphere)
    # the radius pair leaves low-overlap pockets; the build must expose them
    assert pou.min_overlap is not None
    assert 0.0 <= pou.min_overlap < 0.5
    assert pou.overlap_below_half < 0.15


def test_audit_failure_names_worst_point(sphere):
    mesh = build_mesh(sphere, 1)
    nodes = quadrature_nodes(sphere, mesh, 1)  # one node per element
    with pytest.raises(SupportAuditError):
        # tiny support radius cannot see required_support(2) = 6 nodes
        build_pou(nodes, 2, mesh.h, kappa_scale=0.05, surface=sphere)


def test_cutoff_plateau_support_and_midpoint(sphere):
    d = sphere.lyapunov_radius
    x = np.array([0.0, 0.0, 1.0])
    cut = Cutoff(x, d / 4, d / 2)
    rng = np.random.default_rng(0)
    pts = sphere.random_points(rng, 2000)
    dist = np.linalg.norm(pts - x, axis=1)
    vals = cut(pts)
    assert np.all(vals[dist <= d / 4] == 1.0)
    assert np.all(vals[dist >= d / 2] == 0.0)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert abs(cutoff_profile(3 * d / 8, d / 4, d / 2) - 0.5) <= 1e-15


def test_cutoff_is_c2_quintic():
    # symmetric quintic: integrates to half its width across the ramp
    r = np.linspace(0.25, 0.5, 100001)
    vals = cutoff_profile(r, 0.25, 0.5)
    assert abs(np.trapezoid(vals, r) - 0.125) <= 1e-10
