import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sci

from bisoliton.errors import QuadratureNonConvergence
from bisoliton.expr import differentiate, evaluate, mul, parse, Var
from bisoliton.quadrature import (
    G_WEIGHTS, K_WEIGHTS, NODES, QuadPolicy, antiderivative, cumulative_antiderivative, gk15, integrate,
)


def fn(src):
    e = parse(src, "t")
    return lambda x: evaluate(e, x)


def test_rule_tables():
    assert K_WEIGHTS.sum() == pytest.approx(2, abs=1e-15)
    assert G_WEIGHTS.sum() == pytest.approx(2, abs=1e-15)
    for k in range(14):  # Gauss 7-point is exact through degree 13
        exact = (1 - (-1) ** (k + 1)) / (k + 1)
        assert np.dot(G_WEIGHTS, NODES ** k) == pytest.approx(exact, abs=1e-14)
    for k in range(23):  # Kronrod 15-point through degree 22
        exact = (1 - (-1) ** (k + 1)) / (k + 1)
        assert np.dot(K_WEIGHTS, NODES ** k) == pytest.approx(exact, abs=1e-14)


def test_examples():
    assert antiderivative(fn("t^2"), 0, 1) == pytest.approx(1 / 3, abs=1e-10)
    assert antiderivative(fn("cos(t)"), 0, math.pi / 2) == pytest.approx(1, abs=1e-10)
    t = Var("t")
    integrand = mul(t, differentiate(parse("t^3", "t")))
    assert antiderivative(lambda x: evaluate(integrand, x), 0, 1) == pytest.approx(0.75, abs=1e-10)


def test_zero_width_and_antisymmetry():
    f = fn("exp(t)")
    assert integrate(f, 0.3, 0.3) == 0.0
    assert integrate(f, 1, -1) == -integrate(f, -1, 1)


@pytest.mark.parametrize("src, a, b", [
    ("exp(-t^2)", -3, 3), ("1/(1 + t^2)", -10, 10), ("sqrt(t)", 0, 1), ("log(1 + t)", 0, 5),
    ("sin(10*t)^2", 0, 3), ("t^4*cosh(t)", -1, 2), ("abs(t - 0.3)", -1, 1),
])
def test_against_scipy(src, a, b):
    f = fn(src)
    ref, _ = sci.quad(lambda x: float(f(np.array([x]))[0]), a, b, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert integrate(f, a, b) == pytest.approx(ref, abs=1e-9)


def test_non_convergence():
    with pytest.raises(QuadratureNonConvergence) as info:
        integrate(fn("sin(1/t)"), 1e-4, 1, QuadPolicy(abs_tol=1e-14, max_subdivisions=5))
    assert info.value.subdivisions == 5


def test_policy_validation():
    with pytest.raises(ValueError):
        QuadPolicy(abs_tol=0)
    with pytest.raises(ValueError):
        QuadPolicy(max_subdivisions=0)


def test_gk15_error_estimate_on_polynomial():
    k, err = gk15(lambda x: x ** 10, 0, 1)
    assert k == pytest.approx(1 / 11, abs=1e-15) and err < 1e-14


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=30), st.floats(-1, 1, allow_nan=False))
def test_cumulative_matches_direct(xs, a):
    f = fn("cos(t)*exp(t/3)")
    chained = cumulative_antiderivative(f, a, np.array(xs))
    direct = np.array([antiderivative(f, a, x) for x in xs])
    assert np.allclose(chained, direct, rtol=0, atol=1e-9)


def test_cumulative_shape_and_anchor():
    f = fn("t")
    xs = np.array([[0.0, 1.0], [2.0, -1.0]])
    out = cumulative_antiderivative(f, 0.0, xs)
    assert out.shape == (2, 2)
    assert np.allclose(out, xs ** 2 / 2, atol=1e-14)
    assert out[0, 0] == 0.0
