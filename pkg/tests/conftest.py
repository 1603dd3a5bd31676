import numpy as np
import pytest

import basinreach as br


@pytest.fixture(scope="session")
def quad1():
    return br.make_builtin("quad", (1.0,))


@pytest.fixture(scope="session")
def quad14():
    return br.make_builtin("quad", (1.0, 4.0))


@pytest.fixture(scope="session")
def dw():
    return br.make_builtin("double_well")


@pytest.fixture(scope="session")
def himmelblau():
    return br.make_builtin("himmelblau")


def make_saddle_quad(box_half=5.0):
    """f(x, y) = x^2 - y^2 with its saddle at the origin; L = 2."""
    return br.ObjectiveFunction(
        dim=2,
        f=lambda p: float(p[0] ** 2 - p[1] ** 2),
        grad=lambda p: np.array([2.0 * p[0], -2.0 * p[1]]),
        hessian=lambda p: np.array([[2.0, 0.0], [0.0, -2.0]]),
        lipschitz_L=2.0,
        box=np.array([[-box_half, box_half], [-box_half, box_half]]),
        critical_points=(br.CriticalPoint(np.zeros(2), "saddle", 0.0),),
        name="saddle_quad",
    )


@pytest.fixture(scope="session")
def saddle_quad():
    return make_saddle_quad()


def make_linear_1d(box_half=3.0):
    """f(x) = x: constant gradient, L = 0."""
    return br.ObjectiveFunction(
        dim=1,
        f=lambda x: float(x[0]),
        grad=lambda x: np.array([1.0]),
        lipschitz_L=0.0,
        box=np.array([[-box_half, box_half]]),
        name="linear",
    )
