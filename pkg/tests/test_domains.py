import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import units as unit_strategy
from slicestar.domains import (INDETERMINATE, NO_VIOLATION, VIOLATION, PathPair, UnknownDomain,
                               build_corpus, check_real_path_connected, check_self_stem_preserving,
                               check_stem_preserving, check_weakly_axially_symmetric, euclidean_ball,
                               find_path, grid_bfs_path, make_domain, nonaxisym_union, real_grid,
                               recheck_witness, robustly_inside, sample_points, slice_tube, slice_units,
                               union)
from slicestar.path_geom import l_path_to, lift, polyline, segment
from slicestar.quat_core import UNIT_I, UNIT_J, UNIT_K, Quaternion, UnitImaginary, sphere_sample
from slicestar.slice_space import SlicePoint, conj_point

TUBE_BASE = segment(0, 1 + 1j)


@pytest.fixture(scope="module")
def tube():
    return slice_tube(TUBE_BASE, UNIT_I, 0.1)


def shell_probes(radius, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        theta = rng.uniform(0, np.pi)
        u = UnitImaginary.from_vector(rng.normal(size=3))
        out.append(SlicePoint([radius * np.cos(theta)], [radius * np.sin(theta)], u))
    return out


def test_membership_examples(tube):
    assert euclidean_ball(0, 1).contains(SlicePoint([0.5], [0.5], UNIT_J))
    lens = nonaxisym_union()
    assert lens.contains(SlicePoint([1], [1], UNIT_I))
    assert not lens.contains(SlicePoint([1], [1], UNIT_K))
    assert tube.contains(SlicePoint([0.5], [0.5], UNIT_I))
    assert not tube.contains(SlicePoint([0.5], [0.5], UNIT_J))


def test_contains_both_representatives():
    omega = nonaxisym_union()
    a = SlicePoint([1.0], [1.0], UNIT_I)
    b = SlicePoint([1.0], [-1.0], -UNIT_I)
    assert a == b and omega.contains(a) and omega.contains(b)


def test_make_domain_registry():
    d = make_domain("euclidean_ball", {"center": 0.5, "radius": 2})
    assert d.contains(SlicePoint([2.0], [0.0]))
    assert make_domain("halfspace", {"c": 0}).contains(SlicePoint([-1], [5], UNIT_J))
    u = make_domain("union", {"parts": [{"name": "euclidean_ball"},
                                        {"name": "euclidean_ball", "params": {"center": 3}}]})
    assert u.contains(SlicePoint([3.2], [0])) and not u.contains(SlicePoint([2.0], [0]))
    with pytest.raises(UnknownDomain):
        make_domain("torus")


def test_ball_two_variables():
    d = euclidean_ball(0, 1, n=2)
    assert d.contains(SlicePoint([0.3, 0.1], [0.2, 0.4], UNIT_K))
    assert not d.contains(SlicePoint([0.8, 0.0], [0.0, 0.8], UNIT_K))


def test_slice_units_examples(units50):
    big = euclidean_ball(0, 2)
    assert slice_units(big, segment(0, 1 + 1j), units50) == units50
    assert slice_units(euclidean_ball(0, 1), segment(-0.5, 0.5), units50) == units50


@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(0.0, 0.3))
def test_ball_units_all_or_none(a, b, c):
    us = sphere_sample(30, 2)
    gamma = polyline([a, a + 1j * b, c + 1j * b])
    got = slice_units(euclidean_ball(0, 0.8), gamma, us)
    assert len(got) in (0, len(us))


@given(st.floats(0.4, 1.5), st.floats(0.3, 1.5))
def test_axisym_domain_negation_stable(x, y):
    us = sphere_sample(40, 5)
    omega = euclidean_ball(0, 1.2)
    got = slice_units(omega, segment(0.0, x + 1j * y), us)
    assert all(-u in got for u in got)


def test_rpc_ball_shell_straight():
    ball = euclidean_ball(0, 1)
    rep = check_real_path_connected(ball, shell_probes(0.5, 30, 1))
    assert rep.verdict == NO_VIOLATION
    assert rep.stats["by_strategy"] == {"straight": 30}


def test_rpc_disconnected_component():
    omega = union([euclidean_ball(0, 0.5), euclidean_ball([0, 3.0, 0, 0], 0.5)])
    probe = SlicePoint([0.0], [3.0], UNIT_I)
    rep = check_real_path_connected(omega, [probe])
    assert rep.verdict == VIOLATION
    assert rep.witnesses[0]["kind"] == "unreachable-probe"
    assert recheck_witness(rep.witnesses[0], omega)


def test_rpc_real_probe_constant_path():
    rep = check_real_path_connected(euclidean_ball(0, 1), [SlicePoint([0.2], [0])])
    assert rep.verdict == NO_VIOLATION
    path = rep.found["paths"][SlicePoint([0.2], [0])]
    assert np.all(path.z == 0.2)


def test_bfs_reaches_lens():
    omega = nonaxisym_union()
    q = SlicePoint([1.3], [1.2], UNIT_I)
    p = find_path(omega, q)
    assert p is not None and p.label == "grid-bfs"
    assert p.z[-1, 0] == 1.3 + 1.2j and p.z[0, 0].imag == 0
    assert all(omega.contains(s) for s in lift(p, UNIT_I))
    assert grid_bfs_path(omega, SlicePoint([1.3], [1.2], UNIT_K)) is None


def test_real_grid():
    g = real_grid(euclidean_ball(0, 1), 0.25)
    assert np.allclose(sorted(g[:, 0]), [-0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75])


def test_stem_preserving_ball(ball, units50, ball_corpus):
    paths, pairs = ball_corpus
    rep = check_stem_preserving(ball, ball, paths, pairs, units50)
    assert rep.verdict == NO_VIOLATION
    assert rep.stats["min_admissible_units"] == len(units50)


def test_stem_preserving_containment(ball, units50, ball_corpus):
    big = euclidean_ball(0, 1.5)
    rep = check_stem_preserving(ball, big, *ball_corpus, units50)
    assert rep.verdict == NO_VIOLATION
    assert rep.stats["paths_contained_in_omega2_class"] == rep.stats["paths_checked"]


def test_single_slice_tube_violation(tube):
    us = sphere_sample(200, 7)
    probes = sample_points(tube, 20, seed=3)
    rep = check_self_stem_preserving(tube, probes, us)
    assert rep.verdict == VIOLATION
    kinds = {w["kind"] for w in rep.witnesses}
    assert "fewer-than-two-units" in kinds
    for w in rep.witnesses:
        if w["kind"] == "fewer-than-two-units":
            assert recheck_witness(w, tube, us)
            assert all(u in (UNIT_I, -UNIT_I) for u in w["admissible"])


def test_tube_witness_reproducible(tube):
    us = sphere_sample(200, 7)
    probes = sample_points(tube, 20, seed=3)
    a = check_self_stem_preserving(tube, probes, us).to_json()
    b = check_self_stem_preserving(tube, probes, us).to_json()
    assert a == b


def test_pair_condition_single_shared_unit(units50):
    # both paths live only in the i-slice of the tube: they share exactly one unit
    omega1 = euclidean_ball(0, 2)
    alpha = segment(0, 0.5 + 0.5j)
    beta = polyline([0.1, 0.1 + 0.2j, 0.5 + 0.5j])
    tube_pair = slice_tube(polyline([0, 0.5 + 0.5j]), UNIT_I, 0.2)
    rep = check_stem_preserving(omega1, tube_pair, [], [PathPair(alpha, beta)], units50,
                                refine_angles=())
    assert rep.verdict == VIOLATION
    w = rep.witnesses[0]
    assert w["kind"] == "exactly-one-shared-unit" and recheck_witness(w, tube_pair, units50)


def test_self_stem_preserving_ball_and_union():
    us = sphere_sample(200, 7)
    for omega in (euclidean_ball(0, 1), nonaxisym_union()):
        probes = sample_points(omega, 25, seed=1)
        rep = check_self_stem_preserving(omega, probes, us)
        assert rep.verdict == NO_VIOLATION, rep.witnesses[:2]


def test_axisym_checker():
    probes = sample_points(nonaxisym_union(), 300, seed=2)
    probes += [SlicePoint([1.0], [1.2], UNIT_I)]
    assert check_weakly_axially_symmetric(euclidean_ball(0, 1), probes).verdict == NO_VIOLATION
    real = [SlicePoint([x], [0]) for x in np.linspace(-1, 1, 9)]
    assert check_weakly_axially_symmetric(euclidean_ball(0, 1), real).verdict == NO_VIOLATION
    omega = nonaxisym_union()
    rep = check_weakly_axially_symmetric(omega, probes)
    assert rep.verdict == VIOLATION
    lens_centre = Quaternion(1, 1)
    for w in rep.witnesses:
        assert recheck_witness(w, omega)
        assert (w["probe"].components()[0] - lens_centre).norm() < 0.5
        assert w["conjugate"] == conj_point(w["probe"])


def test_robustly_inside_rejects_grazing():
    omega = nonaxisym_union()
    q = SlicePoint([0.6], [1.3], UNIT_I)
    grazing = l_path_to(q, 0.0)
    assert not robustly_inside(omega, grazing, UNIT_I)
    assert robustly_inside(omega, segment(0, 0.3 + 0.3j), UNIT_I)


@given(unit_strategy)
def test_robustly_inside_thin_slice(I):
    tube = slice_tube(TUBE_BASE, I, 0.1)
    assert robustly_inside(tube, segment(0, 0.5 + 0.5j), I)


def test_build_corpus(ball, units50, ball_corpus):
    paths, pairs = ball_corpus
    assert len(paths) >= 50
    assert sum(np.all(np.abs(p.z[-1].imag) < 1e-12) for p in paths) >= 5
    for pair in pairs:
        assert np.array_equal(pair.alpha.z[-1], pair.beta.z[-1])
        assert not np.array_equal(pair.alpha.z[0], pair.beta.z[0]) or len(pair.alpha) != len(pair.beta)


def test_pathpair_requires_shared_end():
    with pytest.raises(ValueError):
        PathPair(segment(0, 1j), segment(0, 2j))


def test_report_json_is_plain(tube):
    import json
    rep = check_self_stem_preserving(tube, sample_points(tube, 5, seed=3), sphere_sample(50, 7))
    text = json.dumps(rep.to_json())
    assert rep.verdict in (VIOLATION, NO_VIOLATION, INDETERMINATE) and "witnesses" in text
