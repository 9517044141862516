import numpy as np
import pytest

from popstab.grid import cheb_grid, diff_ops
from popstab.quad import (
    ShapeMismatch,
    cc_weights,
    cubature_rect,
    cumulative_integrals,
    quadrature,
    tensor_rule,
)


def test_degree_two_weights():
    # solve the exactness conditions on 1, x, x^2 by hand: (1/3, 4/3, 1/3)
    rule = cc_weights(cheb_grid(-1.0, 1.0, 2))
    assert np.max(np.abs(rule.weights - np.array([1.0, 4.0, 1.0]) / 3.0)) <= 1e-15


def test_weights_sum_to_interval_length():
    for a, b, n in [(0.0, 1.0, 1), (0.0, 1.0, 9), (-3.0, 5.0, 24), (0.1, 0.2, 33)]:
        rule = cc_weights(cheb_grid(a, b, n))
        assert abs(np.sum(rule.weights) - (b - a)) <= 1e-13 * (b - a)


def test_weights_strictly_positive():
    for n in range(1, 40):
        rule = cc_weights(cheb_grid(-1.0, 1.0, n))
        assert np.all(rule.weights > 0)


@pytest.mark.parametrize("a,b,n", [(0.0, 1.0, 4), (-2.0, 1.0, 7), (0.0, 3.0, 10)])
def test_polynomial_exactness_up_to_degree(a, b, n):
    rule = cc_weights(cheb_grid(a, b, n))
    for k in range(n + 1):
        got = quadrature(rule, rule.nodes**k)
        exact = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
        scale = max(1.0, abs(exact), (b - a) * max(abs(a), abs(b)) ** k)
        assert abs(got - exact) <= 1e-12 * scale


def test_exponential_integral():
    rule = cc_weights(cheb_grid(0.0, 1.0, 8))
    assert abs(quadrature(rule, np.exp(rule.nodes)) - (np.e - 1.0)) <= 1e-9


def test_cubature_constant_and_bilinear():
    rule = tensor_rule(0.0, 1.0, 0.0, 1.0, 3, 3)
    ones = np.ones((4, 4))
    assert cubature_rect(rule, ones) == pytest.approx(1.0, abs=1e-12)
    rule2 = tensor_rule(0.0, 2.0, 0.0, 1.0, 1, 1)
    xs, ys = rule2.x_rule.nodes, rule2.y_rule.nodes
    vals = np.outer(xs, ys)
    assert cubature_rect(rule2, vals) == pytest.approx(1.0, abs=1e-13)


def test_cubature_total_weight_is_area():
    rule = tensor_rule(0.5, 1.5, 0.5, 2.0, 9, 13)
    area = 1.0 * 1.5
    assert abs(np.sum(rule.weights) - area) <= 1e-12 * area


def test_cubature_converges_to_oversampled_oracle():
    def f(a, b):
        return np.exp(a * a - b * b)

    def value(degree):
        rule = tensor_rule(0.5, 1.5, 0.5, 2.0, degree, degree)
        return cubature_rect(rule, f(rule.x_rule.nodes[:, None], rule.y_rule.nodes[None, :]))

    oracle = value(64)
    errs = [abs(value(d) - oracle) for d in (4, 8, 16, 32)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[3] <= 1e-12 * abs(oracle)


def test_cubature_of_x_only_function_matches_1d():
    rule = tensor_rule(0.0, 1.0, 2.0, 5.0, 8, 6)
    xs = rule.x_rule.nodes
    f = xs**2 + 1.0
    got = cubature_rect(rule, np.tile(f[:, None], (1, 7)))
    oned = quadrature(rule.x_rule, f)
    assert abs(got - 3.0 * oned) <= 1e-12 * abs(got)


def test_cubature_shape_mismatch():
    rule = tensor_rule(0.0, 1.0, 0.0, 1.0, 3, 3)
    with pytest.raises(ShapeMismatch):
        cubature_rect(rule, np.ones((3, 4)))
    with pytest.raises(ShapeMismatch):
        quadrature(rule.x_rule, np.ones(5))


def test_cumulative_of_ones():
    g = cheb_grid(0.0, 1.0, 2)
    ops = diff_ops(g)
    got = cumulative_integrals(ops.trimmed, np.ones(2))
    assert np.max(np.abs(got - np.array([0.5, 1.0]))) <= 1e-13


def test_cumulative_polynomial_exactness():
    g = cheb_grid(0.0, 1.0, 6)
    ops = diff_ops(g)
    inner = g.nodes[1:]
    got = cumulative_integrals(ops.trimmed, 2.0 * inner)
    assert np.max(np.abs(got - inner**2)) <= 1e-12


def test_cumulative_analytic_antiderivative():
    g = cheb_grid(0.0, np.pi / 2, 12)
    ops = diff_ops(g)
    inner = g.nodes[1:]
    got = cumulative_integrals(ops.trimmed, np.cos(inner))
    assert np.max(np.abs(got - np.sin(inner))) <= 1e-9


def test_double_cumulative_of_one():
    gx = cheb_grid(0.3, 2.1, 7)
    gy = cheb_grid(-1.0, 0.5, 5)
    dx, dy = diff_ops(gx), diff_ops(gy)
    along_x = cumulative_integrals(dx.trimmed, np.ones((7, 5)))
    both = cumulative_integrals(dy.trimmed, along_x.T).T
    expected = np.outer(gx.nodes[1:] - 0.3, gy.nodes[1:] + 1.0)
    assert np.max(np.abs(both - expected)) <= 1e-11


def test_cumulative_shape_mismatch():
    ops = diff_ops(cheb_grid(0.0, 1.0, 4))
    with pytest.raises(ShapeMismatch):
        cumulative_integrals(ops.trimmed, np.ones(5))
