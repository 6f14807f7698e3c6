import math

import numpy as np
import pytest
from scipy.integrate import quad

from mwm.errors import QuadratureError
from mwm.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, gauss_kronrod_rule, integrate


def test_rule_constants():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert np.all(np.diff(NODES) > 0)
    # Kronrod part is exact to degree 22
    assert KRONROD_WEIGHTS @ NODES ** 22 == pytest.approx(2 / 23, rel=1e-14)


def test_scalar_integrals():
    assert integrate(np.sin, 0, math.pi, batch=0).value == pytest.approx(2.0, rel=1e-13)
    assert integrate(np.exp, 0, 1, batch=0).value == pytest.approx(math.e - 1, rel=1e-13)


def test_oscillatory_against_scipy():
    f = lambda x: np.cos(50 * x) * np.exp(-x)  # noqa: E731
    ref = quad(lambda x: math.cos(50 * x) * math.exp(-x), 0, 10, limit=500,
               epsabs=1e-14, epsrel=1e-13)[0]
    res = integrate(f, 0, 10, batch=0, rel_tol=1e-9, abs_tol=1e-15)
    assert res.value == pytest.approx(ref, rel=1e-9)
    assert res.error <= 1e-9 * abs(res.value)


def test_batched():
    k = np.array([1.0, 2.0, 3.0])

    def f(x):
        return np.cos(np.outer(k, x))

    res = integrate(f, 0, 1)
    assert np.allclose(res.value, np.sin(k) / k, rtol=1e-13)


def test_budget_exceeded():
    with pytest.raises(QuadratureError) as ei:
        integrate(lambda x: np.cos(400 * x), 0, 10, batch=0, max_panels=3, rel_tol=1e-12)
    assert ei.value.estimate is not None and ei.value.error is not None


def test_fixed_rule():
    rule = gauss_kronrod_rule(np.linspace(0, 2, 5))
    assert rule.integrate(rule.nodes ** 3) == pytest.approx(4.0, rel=1e-14)
