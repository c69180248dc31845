"""
Cauchy-Riemann residuals
========================

Slice regularity means holomorphy on each slice.  A central-difference
residual measures it: products of degree two are exact, cubic terms leave
h^2 |a|, and a smooth function converges at second order.
"""

import numpy as np

from slicestar.domains import euclidean_ball
from slicestar.functions import Polynomial, builtin
from slicestar.quat_core import UNIT_I, Quaternion, sphere_sample
from slicestar.reg_check import cr_ratio, cr_residual, slice_grid, verify_regular_closed_under_star

ball = euclidean_ball(0.0, 1.0)
units = sphere_sample(6, seed=0)
grid = slice_grid(ball, UNIT_I, 9)

for name in ("square", "exp", "conj"):
    r = cr_residual(builtin(name, ball), ball, UNIT_I, grid, h=1e-3)
    print(f"{name:7s} max residual {r.max_residual:.3e}")

a = Quaternion(0.3, -1, 2, 0.5)
for h in (1e-2, 1e-3, 1e-4):
    r = cr_residual(Polynomial([0, 0, 0, a], ball), ball, UNIT_I, grid, h=h)
    print(f"q^3 a, h = {h:.0e}: {r.max_residual:.3e}  (h^2 |a| = {h * h * a.norm():.3e})")

print("exp ratio h : h/2 =", round(cr_ratio(builtin("exp", ball), ball, units, size=9), 4))

rng = np.random.default_rng(0)
qa = Polynomial([0, Quaternion(*rng.normal(size=4))], ball)
qb = Polynomial([0, Quaternion(*rng.normal(size=4))], ball)
rep = verify_regular_closed_under_star(qa, qb, ball, units, size=9)
print("(qa)*(qb) regular:", rep.verdict, f"residual {rep.stats['max_residual_h']:.1e}")
