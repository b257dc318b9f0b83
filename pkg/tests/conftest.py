import numpy as np
import pytest

from lcnystrom import (Ellipsoid, UnitSphere, build_components, make_kernels,
                       make_problem)


@pytest.fixture(scope="session")
def sphere():
    return UnitSphere()


@pytest.fixture(scope="session")
def ellipsoid():
    return Ellipsoid((2.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def kernels():
    return make_kernels("laplace_dl", "ones", 1.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(42)


def _disc_cache():
    cache = {}

    def get(surface, level, q, p, kernels):
        key = (surface.kind, level, q, p)
        if key not in cache:
            cache[key] = build_components(surface, level, q, p, kernels)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def discretization(kernels):
    """Memoized (mesh, nodes, pou, corrector) builder shared across tests."""
    return _disc_cache()


@pytest.fixture(scope="session")
def y1_problem(sphere, kernels):
    return make_problem(sphere, kernels, "y1")


@pytest.fixture(scope="session")
def profile_problem(sphere, kernels):
    return make_problem(sphere, kernels, "one")
