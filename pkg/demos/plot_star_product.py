"""
Stems and the star product
==========================

A right-linear polynomial restricted to a slice is determined by its stem, a
pair of quaternions attached to a path in the complex plane.  The star product
multiplies stems, not values, so it differs from the pointwise product as soon
as the coefficients fail to commute.
"""

import numpy as np

from slicestar.domains import euclidean_ball
from slicestar.functions import Polynomial, builtin
from slicestar.path_geom import segment
from slicestar.quat_core import QJ, UNIT_I, UNIT_J, Quaternion, sphere_sample
from slicestar.slice_space import SlicePoint
from slicestar.star import fn_star
from slicestar.stem import sub_stem

ball = euclidean_ball(0.0, 3.0)
units = sphere_sample(50, seed=0)

# the constant j and the identity q
f = Polynomial([QJ], ball)
g = builtin("identity", ball)

# stem of q along the segment 0 -> 1+2i: (x, y) in the real components
gamma = segment(0, 1 + 2j)
F = sub_stem(g, ball, gamma, units)
print("stem of q at 1+2i:", F)

q = SlicePoint([1.0], [2.0], UNIT_I)
fg = fn_star(f, g, assume_hypotheses=True, units=units)
print("(j * q)(1+2i)   =", fg(q))
print("j (1+2i)        =", f(q) * g(q))

# on another slice the two agree only when the unit commutes with j
qj = SlicePoint([1.0], [2.0], UNIT_J)
print("on C_j:", fg(qj), "vs", f(qj) * g(qj))

# star product of two monomials with quaternion coefficients
a, b = Quaternion(0.5, 1, -2, 0.25), Quaternion(-1, 0, 3, 1)
lhs = fn_star(Polynomial([0, a], ball), Polynomial([0, b], ball), assume_hypotheses=True, units=units)
rhs = Polynomial([0, 0, a * b], ball)
errs = [(lhs(p) - rhs(p)).norm() for p in (SlicePoint([x], [y], I)
        for x, y, I in zip(np.linspace(-1, 1, 5), np.linspace(0.1, 1, 5), units))]
print("max |(qa)*(qb) - q^2 ab| =", max(errs))
