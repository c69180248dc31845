import math

import numpy as np
import pytest

from slicestar.domains import NO_VIOLATION, VIOLATION, euclidean_ball
from slicestar.functions import Polynomial, builtin, random_polynomial
from slicestar.quat_core import UNIT_I, UNIT_J, Quaternion, sphere_sample
from slicestar.reg_check import (StencilLeavesDomain, check_cr, convergence_order, cr_ratio, cr_residual,
                                 cr_scan, slice_grid, verify_regular_closed_under_star)
from slicestar.slice_space import SlicePoint
from slicestar.stem import PointBacked

UNITS = sphere_sample(12, 0)


def truncated_exp(ball, terms=25):
    """``sum q^k / k!`` evaluated by Horner's rule on the slice coordinates."""
    def rule(q):
        z = complex(q.x[0], q.y[0])
        w = 0j
        for k in range(terms, -1, -1):
            w = w * z + 1 / math.factorial(k)
        out = Quaternion(w.real)
        return out if q.I is None else out + q.I.q * w.imag
    return PointBacked(rule, ball, "exp-series")


def test_square_small(ball):
    reports = cr_scan(builtin("square", ball), ball, UNITS)
    assert max(r.max_residual for r in reports) <= 1e-5
    assert max(r.max_residual for r in reports) <= 1e-10


def test_conj_residual_one(ball):
    r = cr_residual(builtin("conj", ball), ball, UNIT_J, slice_grid(ball, UNIT_J, 9))
    assert np.allclose(r.residuals, 1.0, atol=1e-9)


def test_constant_exact(ball):
    c = Polynomial([Quaternion(1, 2, 3, 4)], ball)
    assert check_cr(c, ball, UNITS).stats["max_residual"] == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cubic_truncation_law(seed, ball):
    # residual of q^3 a is h^2 |a| at every grid point (f''' / 6 = a)
    a = Quaternion(*np.random.default_rng(seed).normal(size=4))
    f = Polynomial([0, 0, 0, a], ball)
    h = 1e-3
    r = cr_residual(f, ball, UNIT_I, slice_grid(ball, UNIT_I, 7), h)
    assert np.allclose(r.residuals, h * h * a.norm(), rtol=1e-4)


def test_exp_ratio(ball):
    for f in (builtin("exp", ball), truncated_exp(ball)):
        ratio = cr_ratio(f, ball, UNITS[:4], 1e-3, 9)
        assert 3.5 <= ratio <= 4.5


def test_convergence_order():
    assert convergence_order(4e-6, 1e-6) == pytest.approx(2.0)
    assert math.isnan(convergence_order(0.0, 0.0))


def test_check_cr_flags_conj(ball):
    rep = check_cr(builtin("conj", ball), ball, UNITS[:2], size=5)
    assert rep.verdict == VIOLATION and rep.witnesses[0]["residual"] > 0.99


def test_stencil_skips_and_raises():
    ball = euclidean_ball(0, 1)
    r = cr_residual(builtin("square", ball), ball, UNIT_I, [([0.0], [0.0]), ([0.9995], [0.0])], 1e-3)
    assert len(r.points) == 1 and len(r.skipped) == 1
    with pytest.raises(StencilLeavesDomain):
        cr_residual(builtin("square", ball), ball, UNIT_I, [([0.9995], [0.0])], 1e-3)


def test_grid_inside_domain(ball):
    grid = slice_grid(ball, UNIT_J, 17)
    assert grid and all(ball.contains(SlicePoint(x, y, UNIT_J)) for x, y in grid)


def test_two_variable_residuals():
    ball2 = euclidean_ball(0, 1, n=2)
    f = Polynomial({(1, 1): Quaternion(0, 1, 0, 0), (0, 2): Quaternion(1)}, ball2)
    r = cr_residual(f, ball2, UNIT_J, slice_grid(ball2, UNIT_J, 5))
    assert r.residuals.shape[1] == 2 and r.max_residual < 1e-10


def test_product_regular(ball):
    qa = Polynomial([0, Quaternion(0.5, 1, 0, 0)], ball)
    qb = Polynomial([0, Quaternion(0, 0, 1, -0.5)], ball)
    rep = verify_regular_closed_under_star(qa, qb, ball, UNITS)
    assert rep.verdict == NO_VIOLATION and rep.stats["max_residual_h2"] <= 1e-8


def test_product_order(ball):
    rng = np.random.default_rng(1)
    f, g = random_polynomial(ball, 2, rng), random_polynomial(ball, 2, rng)
    rep = verify_regular_closed_under_star(f, g, ball, UNITS[:4], size=9)
    assert rep.verdict == NO_VIOLATION
    assert rep.stats["order"] == pytest.approx(2.0, abs=0.05)


def test_product_with_conj_fails(ball):
    rep = verify_regular_closed_under_star(builtin("conj", ball), builtin("one", ball), ball,
                                           UNITS[:2], size=7)
    assert rep.verdict == VIOLATION


def test_rows(ball):
    r = cr_residual(builtin("square", ball), ball, UNIT_I, slice_grid(ball, UNIT_I, 3))
    rows = list(r.rows())
    assert len(rows) == len(r.points) and rows[0][0] == [1.0, 0.0, 0.0]
