"""Path-slice functions of several quaternionic variables and their *-product.

Quaternion arithmetic, points of the slice cone, discretised paths and their
lifts, domain checkers, stem extraction, the *-product and finite-difference
regularity checks.
"""

from .domains import (INDETERMINATE, NO_VIOLATION, VIOLATION, CheckReport, Domain, PathPair,
                      check_real_path_connected, check_self_stem_preserving, check_stem_preserving,
                      check_weakly_axially_symmetric, euclidean_ball, halfspace, make_domain,
                      nonaxisym_union, sample_points, slice_tube, slice_units, union)
from .functions import Polynomial, builtin, poly_star_oracle, poly_stem
from .harness import Scenario, SuiteResult, load_scenario, run_suite, run_suites
from .path_geom import PathC, arc, conj_path, endpoint, lift, polyline, refine, segment, straight_path_to
from .quat_core import (ONE, UNIT_I, UNIT_J, UNIT_K, ZERO, Quaternion, UnitImaginary, ZeroDivisor,
                        q_conj, q_inv, q_mul, sphere_sample)
from .reg_check import (check_cr, convergence_order, cr_residual, slice_grid,
                        verify_regular_closed_under_star)
from .slice_space import ComplexPoint, SlicePoint, conj_point, embed, frak_I
from .star import fn_star, stem_star, verify_algebra
from .stem import (PathSliceFn, StemValue, extract_stem, point_stem, sub_stem, two_by_two_inverse,
                   verify_path_slice)

__version__ = "0.1.0"
