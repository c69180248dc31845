"""Reference computations that share no code with the package.

Quaternions are represented as 2x2 complex matrices
``w + x i + y j + z k -> [[w + x i, y + z i], [-y + z i, w - x i]]``, so their
products come from ``numpy.matmul``; stems of polynomials come from Python
complex powers.
"""

import numpy as np


def to_mat(q) -> np.ndarray:
    w, x, y, z = [float(c) for c in q]
    return np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]])


def from_mat(m) -> np.ndarray:
    return np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])


def qmul(*qs) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    for q in qs:
        out = out @ to_mat(q)
    return from_mat(out)


def qpow(q, k: int) -> np.ndarray:
    return from_mat(np.linalg.matrix_power(to_mat(q), k))


def slice_quat(x: float, y: float, unit) -> np.ndarray:
    """``x + y I`` as a ``[w, x, y, z]`` array."""
    return np.concatenate([[x], y * np.asarray(unit, dtype=float)])


def poly_eval(coeffs, q) -> np.ndarray:
    """``sum_k q^k a_k`` through the matrix representation."""
    total = np.zeros((2, 2), dtype=complex)
    for k, a in enumerate(coeffs):
        total = total + np.linalg.matrix_power(to_mat(q), k) @ to_mat(a)
    return from_mat(total)


def poly_stem(coeffs, z: complex):
    """``(sum Re(z^k) a_k, sum Im(z^k) a_k)`` as two ``[w, x, y, z]`` arrays."""
    F1 = sum((complex(z) ** k).real * np.asarray(a, float) for k, a in enumerate(coeffs))
    F2 = sum((complex(z) ** k).imag * np.asarray(a, float) for k, a in enumerate(coeffs))
    return np.asarray(F1, float), np.asarray(F2, float)


def convolve(a, b):
    """Coefficients of ``(sum q^m a_m) * (sum q^k b_k)``."""
    out = [np.zeros(4) for _ in range(len(a) + len(b) - 1)]
    for m, am in enumerate(a):
        for k, bk in enumerate(b):
            out[m + k] = out[m + k] + qmul(am, bk)
    return out
