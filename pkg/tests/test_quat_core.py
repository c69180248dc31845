import numpy as np
import pytest
from hypothesis import given

from conftest import quaternions, units
from oracles import qmul as mat_qmul
from slicestar.quat_core import (QI, QJ, QK, UNIT_I, UNIT_J, UNIT_K, Quaternion, UnitImaginary,
                                 ZeroDivisor, q_conj, q_inv, q_mul, qmul_array, sphere_sample)


def close(a, b, tol=1e-12):
    return np.allclose(np.asarray(list(a), float), np.asarray(list(b), float), atol=tol)


def test_defining_relations():
    assert q_mul(QI, QJ) == QK
    assert q_mul(QJ, QK) == QI
    assert q_mul(QK, QI) == QJ
    assert q_mul(QJ, QI) == -QK
    for e in (QI, QJ, QK):
        assert q_mul(e, e) == Quaternion(-1)


def test_product_example():
    assert (Quaternion(1, 1) * Quaternion(1, 0, 1)).to_list() == [1, 1, 1, 1]


def test_inverse_examples():
    q = Quaternion(2, 3, 0, -1)
    assert (q * q_inv(q)).is_close(Quaternion(1))
    assert q_inv(Quaternion(2)) == Quaternion(0.5)
    assert q_inv(QI - QJ).is_close((QJ - QI) / 2)
    with pytest.raises(ZeroDivisor):
        q_inv(Quaternion())


def test_conj_examples():
    assert q_conj(Quaternion(1, 2)) == Quaternion(1, -2)
    assert q_conj(q_mul(QI, QJ)) == q_mul(q_conj(QJ), q_conj(QI)) == -QK


@given(quaternions, quaternions)
def test_product_matches_matrix_oracle(p, q):
    assert close(q_mul(p, q), mat_qmul(p, q), 1e-9)


@given(quaternions, quaternions, quaternions)
def test_associative(p, q, r):
    assert close((p * q) * r, p * (q * r), 1e-8)


@given(quaternions, quaternions)
def test_norm_multiplicative(p, q):
    assert (p * q).norm() == pytest.approx(p.norm() * q.norm(), rel=1e-12, abs=1e-12)


@given(quaternions, quaternions)
def test_conj_anti_homomorphism(p, q):
    assert close(q_conj(p * q), q_conj(q) * q_conj(p), 1e-9)
    assert q_conj(q_conj(p)) == p


@given(quaternions)
def test_inverse_property(q):
    if q.norm() < 1e-3:
        return
    assert close(q * q_inv(q), [1, 0, 0, 0], 1e-10)
    assert close(q_inv(q) * q, [1, 0, 0, 0], 1e-10)


@given(units)
def test_unit_imaginary_squares_to_minus_one(I):
    assert close(I.q * I.q, [-1, 0, 0, 0], 1e-12)


def test_unit_imaginary_rejects_non_unit():
    with pytest.raises(ValueError):
        UnitImaginary(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        UnitImaginary.from_vector([0, 0, 0])


def test_qmul_array_broadcasts():
    rng = np.random.default_rng(3)
    P, Q = rng.normal(size=(5, 4)), rng.normal(size=(5, 4))
    out = qmul_array(P, Q)
    for p, q, r in zip(P, Q, out):
        assert close(r, mat_qmul(p, q), 1e-12)


def test_sphere_sample_base_set():
    assert sphere_sample(6, 123) == [UNIT_I, -UNIT_I, UNIT_J, -UNIT_J, UNIT_K, -UNIT_K]
    assert len(sphere_sample(2)) == 6


@pytest.mark.parametrize("count", [7, 50, 101, 200])
def test_sphere_sample_shape(count):
    s = sphere_sample(count, 7)
    assert len(s) == max(6, count + count % 2)
    arr = np.array([u.to_list() for u in s])
    assert np.allclose(np.linalg.norm(arr, axis=1), 1.0)
    # negation closed, pairs adjacent
    assert np.allclose(arr[0::2], -arr[1::2])
    assert len({tuple(np.round(a, 12)) for a in arr}) == len(s)


def test_sphere_sample_deterministic():
    assert sphere_sample(100, 7) == sphere_sample(100, 7)
    assert sphere_sample(100, 7) != sphere_sample(100, 8)


def test_sphere_sample_quasi_uniform():
    arr = np.array([u.to_list() for u in sphere_sample(400, 1)])
    # covering radius: every direction is near a sample
    rng = np.random.default_rng(0)
    probe = rng.normal(size=(2000, 3))
    probe /= np.linalg.norm(probe, axis=1, keepdims=True)
    nearest = np.min(np.linalg.norm(probe[:, None] - arr[None], axis=-1), axis=1)
    assert nearest.max() < 0.25
    assert np.linalg.norm(arr.mean(axis=0)) < 1e-12
