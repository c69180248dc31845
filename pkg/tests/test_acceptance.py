"""The ten acceptance criteria, one test each, at their stated tolerances.

Each test records a ``PASS``/``FAIL`` line (printed in the terminal summary
and on stdout) before asserting.  Run on its own with
``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import json
import shutil
import subprocess
import sys
from itertools import product

import numpy as np
import pytest

from conftest import record
from oracles import convolve, poly_eval, slice_quat
from slicestar.domains import (NO_VIOLATION, VIOLATION, build_corpus, check_self_stem_preserving,
                               check_weakly_axially_symmetric, euclidean_ball, nonaxisym_union,
                               recheck_witness, sample_points, slice_tube)
from slicestar.functions import Polynomial, builtin, random_polynomial
from slicestar.path_geom import segment
from slicestar.quat_core import QJ, QK, UNIT_I, UNIT_J, UNIT_K, Quaternion, sphere_sample
from slicestar.reg_check import check_cr, cr_ratio, verify_regular_closed_under_star
from slicestar.slice_space import SlicePoint
from slicestar.star import (StemCache, check_real_restriction, check_star_stem_closure, fn_star,
                            relative_error, verify_algebra)
from slicestar.stem import (check_pair_independence, check_stem_symmetries, sub_stem,
                            verify_path_slice)

SEED = 7
CORPUS_SIZE = 50


@pytest.fixture(scope="module")
def ball():
    return euclidean_ball(0.0, 1.0)


@pytest.fixture(scope="module")
def units():
    return sphere_sample(50, SEED)


@pytest.fixture(scope="module")
def corpus(ball, units):
    """Exactly 50 paths of the unit ball, at least 5 of them ending on the real axis."""
    probes = sample_points(ball, 40, seed=SEED)
    reals = [SlicePoint([x], [0.0]) for x in (-0.6, -0.3, 0.0, 0.25, 0.5, 0.7)]
    paths, _ = build_corpus(ball, probes + reals, units)
    real_end = [p for p in paths if abs(p.z[-1, 0].imag) < 1e-12]
    other = [p for p in paths if abs(p.z[-1, 0].imag) >= 1e-12]
    out = real_end[:6] + other[:CORPUS_SIZE - min(6, len(real_end))]
    assert len(out) == CORPUS_SIZE and len(real_end) >= 5
    return out


@pytest.fixture(scope="module")
def polys(ball):
    rng = np.random.default_rng(SEED)
    return [random_polynomial(ball, int(rng.integers(0, 5)), rng) for _ in range(20)]


@pytest.fixture(scope="module")
def ball_attestation(ball):
    return check_self_stem_preserving(ball, sample_points(ball, 30, seed=SEED), sphere_sample(200, SEED))


def test_criterion_01_representation_identity(ball, units, corpus, polys):
    worst = 0.0
    for f in polys:
        rep = verify_path_slice(f, ball, corpus, units, tol=1e-9)
        assert rep.stats["skipped_paths"] == 0
        worst = max(worst, rep.stats["max_residual"])
    ok = worst <= 1e-9
    record(1, ok, f"representation residual max {worst:.2e} <= 1e-9 "
                  f"({len(polys)} polynomials, {len(corpus)} paths, {len(units)} units)")
    assert ok


def test_criterion_02_pair_independence(ball, corpus, polys):
    pairs = [(UNIT_I, -UNIT_I), (UNIT_J, -UNIT_J), (UNIT_I, UNIT_K)]
    worst, compared = 0.0, 0
    for f in polys:
        rep = check_pair_independence(f, ball, corpus, pairs, tol=1e-9)
        worst = max(worst, rep.stats["max_deviation"])
        compared += rep.stats["paths_compared"]
    ok = worst <= 1e-9 and compared == len(polys) * len(corpus)
    record(2, ok, f"pairs (i,-i), (j,-j), (i,k) agree within {worst:.2e} on {compared} path stems")
    assert ok


def test_criterion_03_conjugation_and_real_endpoints(ball, units, corpus, polys):
    worst_conj = worst_real = 0.0
    real_ends = 0
    for f in polys:
        rep = check_stem_symmetries(f, ball, corpus, units, tol=1e-10)
        worst_conj = max(worst_conj, rep.stats["max_conjugation_residual"])
        worst_real = max(worst_real, rep.stats["max_real_endpoint_residual"],
                         rep.stats["max_real_point_stem_residual"])
        real_ends = rep.stats["real_endpoints"]
    ok = worst_conj <= 1e-10 and worst_real <= 1e-10 and real_ends >= 5
    record(3, ok, f"conjugation {worst_conj:.2e}, real endpoint {worst_real:.2e} <= 1e-10 "
                  f"({real_ends} real-endpoint paths)")
    assert ok


def test_criterion_04_star_oracle(ball, units):
    rng = np.random.default_rng(SEED + 1)
    pool = [random_polynomial(ball, int(rng.integers(0, 4)), rng) for _ in range(10)]
    probes = sample_points(ball, 1000, seed=SEED)
    cache = StemCache()
    kw = dict(assume_hypotheses=True, units=units, cache=cache)
    worst = 0.0
    for f, g in product(pool, pool):
        fg = fn_star(f, g, **kw)
        coeffs = convolve([c.to_list() for c in f.coeffs], [c.to_list() for c in g.coeffs])
        for q in probes:
            qa = slice_quat(q.x[0], q.y[0], q.I.to_list())
            expect = Quaternion(*poly_eval(coeffs, qa))
            worst = max(worst, relative_error(fg(q), expect))

    big = euclidean_ball(0.0, 3.0)
    q12 = SlicePoint([1.0], [2.0], UNIT_I)
    a, b = Quaternion(0.5, 1, -2, 0.25), Quaternion(-1, 0, 3, 1)
    ident = builtin("identity", big)
    specials = {
        "q*q = q^2": (fn_star(ident, ident, **kw), Polynomial([0, 0, 1], big)),
        "(qa)*(qb) = q^2 ab": (fn_star(Polynomial([0, a], big), Polynomial([0, b], big), **kw),
                               Polynomial([0, 0, a * b], big)),
    }
    special_err = max(max(relative_error(lhs(q), rhs(q)) for q in sample_points(big, 50, seed=1) + [q12])
                      for lhs, rhs in specials.values())
    jq = fn_star(Polynomial([QJ], big), ident, **kw)(q12)
    witness = (jq - (QJ + 2 * QK)).norm()
    ok = worst <= 1e-9 and special_err <= 1e-9 and witness <= 1e-12
    record(4, ok, f"fn_star vs convolution: max relative error {worst:.2e} over 100 pairs x "
                  f"{len(probes)} probes; identities {special_err:.2e}; j*q at 1+2i = j+2k ({witness:.1e})")
    assert ok


def test_criterion_05_real_restriction(ball, units, polys):
    probes = [SlicePoint([x], [0.0]) for x in np.linspace(-0.99, 0.99, 100)]
    worst = 0.0
    for f, g in zip(polys[::2], polys[1::2]):
        rep = check_real_restriction(f, g, probes, tol=1e-10, assume_hypotheses=True, units=units)
        assert rep.stats["real_probes"] == 100
        worst = max(worst, rep.stats["max_deviation"])
    ok = worst <= 1e-10
    record(5, ok, f"|(f*g)(q) - f(q)g(q)| max {worst:.2e} <= 1e-10 at 100 real probes (10 pairs)")
    assert ok


def test_criterion_06_algebra_laws(ball, units, ball_attestation):
    assert ball_attestation.verdict == NO_VIOLATION
    rng = np.random.default_rng(SEED + 2)
    probes = sample_points(ball, 15, seed=SEED + 2)
    assoc = unit = 0.0
    verdicts = set()
    for _ in range(10):
        fs = [random_polynomial(ball, int(rng.integers(0, 4)), rng) for _ in range(3)]
        rep = verify_algebra(fs, probes, tol=1e-9, unit_tol=1e-10, units=units,
                             attestation=ball_attestation)
        verdicts.add(rep.verdict)
        dev = rep.stats["max_deviation"]
        assoc = max(assoc, dev["associativity"])
        unit = max(unit, max(v for k, v in dev.items() if k != "associativity"))
    ok = verdicts == {NO_VIOLATION} and assoc <= 1e-9 and unit <= 1e-10
    record(6, ok, f"associativity {assoc:.2e} <= 1e-9; unit, bilinearity, distributivity {unit:.2e} <= 1e-10 "
                  f"(10 triples, attested ball)")
    assert ok


def test_criterion_07_product_closure(ball, units, corpus, polys, ball_attestation):
    worst_rep = worst_stem = 0.0
    verdicts = set()
    for f, g in zip(polys[:6], polys[14:20]):
        fg = fn_star(f, g, attestation=ball_attestation, units=units)
        rep = verify_path_slice(fg, ball, corpus, units, tol=1e-9)
        clo = check_star_stem_closure(f, g, corpus, tol=1e-9, attestation=ball_attestation, units=units)
        verdicts |= {rep.verdict, clo.verdict}
        worst_rep = max(worst_rep, rep.stats["max_residual"])
        worst_stem = max(worst_stem, clo.stats["max_stem_deviation"])
    ok = verdicts == {NO_VIOLATION} and worst_rep <= 1e-9 and worst_stem <= 1e-9
    record(7, ok, f"f*g path-slice (residual {worst_rep:.2e}); sub-stem of f*g = F*G within "
                  f"{worst_stem:.2e} (6 pairs, {len(corpus)} paths)")
    assert ok


def test_criterion_08_domain_checkers():
    units = sphere_sample(200, SEED)
    ball, union = euclidean_ball(0.0, 1.0), nonaxisym_union()
    lens = [SlicePoint([1.0], [1.0], UNIT_I), SlicePoint([1.2], [1.1], UNIT_I), SlicePoint([0.9], [1.3], UNIT_I)]
    v_ball = check_self_stem_preserving(ball, sample_points(ball, 30, seed=SEED), units, h=0.05).verdict
    union_probes = sample_points(union, 30, seed=SEED) + lens
    v_union = check_self_stem_preserving(union, union_probes, units, h=0.05).verdict

    tube = slice_tube(segment(-0.3, 1 + 1j), UNIT_J, 0.2)
    tube_probes = sample_points(tube, 20, seed=SEED)
    t1 = check_self_stem_preserving(tube, tube_probes, units, h=0.05)
    t2 = check_self_stem_preserving(tube, tube_probes, units, h=0.05)
    tube_ok = (t1.verdict == VIOLATION and t1.to_json() == t2.to_json()
               and all(recheck_witness(w, tube, units) for w in t1.witnesses))

    ax = check_weakly_axially_symmetric(union, union_probes)
    in_lens = [w for w in ax.witnesses if (w["probe"].components()[0] - Quaternion(1, 1)).norm() < 0.5]
    ax_ok = ax.verdict == VIOLATION and len(in_lens) == len(ax.witnesses) > 0

    ok = v_ball == NO_VIOLATION and v_union == NO_VIOLATION and tube_ok and ax_ok
    record(8, ok, f"ball: {v_ball}; nonaxisym_union: {v_union}; tube: {t1.verdict} "
                  f"({len(t1.witnesses)} re-checkable witnesses); union axisym: {ax.verdict} "
                  f"({len(in_lens)} witnesses in the lens)")
    assert ok


def test_criterion_09_slice_regularity(ball):
    units = sphere_sample(6, SEED)
    rng = np.random.default_rng(SEED + 3)
    a, b = Quaternion(0.5, 1, 0, 0), Quaternion(0, 0, 1, -0.5)
    ident = builtin("identity", ball)
    pairs = [(ident, ident), (Polynomial([0, a], ball), Polynomial([0, b], ball))]
    pairs += [(random_polynomial(ball, 1, rng), random_polynomial(ball, 1, rng)) for _ in range(3)]
    worst = 0.0
    for f, g in pairs:
        rep = verify_regular_closed_under_star(f, g, ball, units, size=11, h=1e-3, abs_tol=1e-8,
                                               assume_hypotheses=True)
        worst = max(worst, rep.stats["max_residual_h"])
    ratio = cr_ratio(builtin("exp", ball), ball, units, h=1e-3, size=11)
    ok = worst <= 1e-8 and 3.5 <= ratio <= 4.5
    record(9, ok, f"CR residual of f*g (total degree <= 2) {worst:.2e} <= 1e-8 at h = 1e-3; "
                  f"exp residual ratio h : h/2 = {ratio:.3f} in [3.5, 4.5]")
    assert ok


@pytest.mark.xfail(strict=True, reason="central-difference truncation h^2 |f'''| / 6 exceeds 1e-8 at h = 1e-3 "
                                       "for products of degree >= 3")
def test_criterion_09_all_polynomial_products(ball):
    units = sphere_sample(4, SEED)
    rng = np.random.default_rng(SEED + 4)
    f, g = random_polynomial(ball, 2, rng), random_polynomial(ball, 2, rng)
    fg = fn_star(f, g, assume_hypotheses=True, units=units)
    rep = check_cr(fg, ball, units, h=1e-3, tol=1e-8, size=9)
    record("9b", rep.verdict == NO_VIOLATION,
           f"(unattainable variant) CR residual of a degree-4 product {rep.stats['max_residual']:.2e} "
           f"vs 1e-8: expected failure")
    assert rep.verdict == NO_VIOLATION


def _cli():
    exe = shutil.which("slicestar")
    return [exe] if exe else [sys.executable, "-m", "slicestar"]


def test_criterion_10_determinism():
    cmd = _cli() + ["verify", "--seed", str(SEED), "--format", "json"]
    runs = [subprocess.run(cmd, capture_output=True, text=True, timeout=300) for _ in range(2)]
    same = runs[0].stdout == runs[1].stdout
    body = json.loads(runs[0].stdout)
    ok = same and all(r.returncode == 0 for r in runs) and not body["violation_found"] \
        and "timing" not in runs[0].stdout
    record(10, ok, f"`slicestar verify --seed 7` twice: identical JSON ({len(runs[0].stdout)} bytes), "
                   f"exit codes {[r.returncode for r in runs]}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
