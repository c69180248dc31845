"""
Domains that are not axially symmetric
======================================

Three domains of the slice cone.  The ball is symmetric under rotations of the
imaginary unit.  The union of a ball and a lens living on a single slice is not,
yet it still keeps enough units around every path to carry stems.  A thin tube
around one slice does not: most of its paths see only that slice.
"""

from slicestar.domains import (check_self_stem_preserving, check_weakly_axially_symmetric,
                               euclidean_ball, nonaxisym_union, recheck_witness, sample_points,
                               slice_tube)
from slicestar.path_geom import segment
from slicestar.quat_core import UNIT_I, UNIT_J, sphere_sample
from slicestar.slice_space import SlicePoint

units = sphere_sample(200, seed=7)
ball = euclidean_ball(0.0, 1.0)
union = nonaxisym_union()
tube = slice_tube(segment(-0.3, 1 + 1j), UNIT_J, 0.2)

for name, omega in [("ball", ball), ("union", union), ("tube", tube)]:
    rep = check_self_stem_preserving(omega, sample_points(omega, 20, seed=7), units, h=0.05)
    print(f"{name:6s} self-stem-preserving: {rep.verdict} ({len(rep.witnesses)} witnesses)")

# a witness from the tube can be replayed on its own
rep = check_self_stem_preserving(tube, sample_points(tube, 20, seed=7), units, h=0.05)
w = rep.witnesses[0]
print("first tube witness:", w["kind"], "replays:", recheck_witness(w, tube, units))

# the lens point 1+i lies in the union on C_i only
lens = [SlicePoint([1.0], [1.0], UNIT_I)]
ax = check_weakly_axially_symmetric(union, lens)
print("union axially symmetric:", ax.verdict)
