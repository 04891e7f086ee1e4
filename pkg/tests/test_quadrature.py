import math

import numpy as np
import pytest

from cknlab.quadrature import (
    box_rule,
    gauss_rule,
    simplex_rule,
    simplex_volume,
    split_simplex_bary,
)


def unit_simplex_monomial(exponents):
    """Exact integral of prod x_i^{a_i} over the unit simplex."""
    k = len(exponents)
    num = 1
    for a in exponents:
        num *= math.factorial(a)
    return num / math.factorial(k + sum(exponents))


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("s,degree", [(1, 3), (2, 5)])
def test_simplex_rule_exactness(k, s, degree):
    corners = np.vstack([np.zeros(k), np.eye(k)])
    bary, wts = simplex_rule(k, s)
    pts = bary @ corners
    vol = simplex_volume(corners)
    rng = np.random.default_rng(k * 10 + s)
    for _ in range(12):
        exps = rng.integers(0, degree + 1, size=k)
        while exps.sum() > degree:
            exps = rng.integers(0, degree + 1, size=k)
        vals = np.prod(pts ** exps, axis=1)
        approx = vol * np.sum(wts * vals)
        assert approx == pytest.approx(unit_simplex_monomial(exps),
                                       rel=1e-12, abs=1e-15)


def test_simplex_rule_weights_sum_to_one():
    for k in (1, 2, 3):
        for s in (0, 1, 2):
            _, wts = simplex_rule(k, s)
            assert np.sum(wts) == pytest.approx(1.0, abs=1e-13)


def test_gauss_rule_exactness():
    x, w = gauss_rule(4)  # degree 7
    for a in range(8):
        assert np.sum(w * x ** a) == pytest.approx(1.0 / (a + 1), rel=1e-13)


def test_box_rule_tensor_exactness():
    pts, wts = box_rule(3, 3)  # degree 5 per axis
    val = np.sum(wts * pts[:, 0] ** 2 * pts[:, 1] ** 4 * pts[:, 2])
    assert val == pytest.approx((1 / 3) * (1 / 5) * (1 / 2), rel=1e-13)


def test_split_simplex_partitions_volume():
    for k in (1, 2):
        corners = np.vstack([np.zeros(k), np.eye(k)]) + 0.3
        corners[1] *= 2.0
        total = simplex_volume(corners)
        parts = sum(simplex_volume(mb @ corners)
                    for mb in split_simplex_bary(k))
        assert parts == pytest.approx(total, rel=1e-12)


def test_simplex_volume_triangle_in_3d():
    tri = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 3.0, 0.0]])
    assert simplex_volume(tri) == pytest.approx(3.0)
