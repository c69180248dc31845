"""Quaternion arithmetic and sampling of the imaginary unit sphere.

Scalar values are small immutable objects; the vectorised helpers at the
bottom operate on ``(..., 4)`` float arrays laid out as ``[w, x, y, z]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

#: default absolute tolerance for approximate equality
DEFAULT_TOL = 1e-9
#: quaternions with norm below this are treated as non-invertible
ZERO_EPS = 1e-15


class ZeroDivisor(ZeroDivisionError):
    """Raised when inverting a quaternion whose norm is below ``ZERO_EPS``."""


@dataclass(frozen=True, slots=True)
class Quaternion:
    """Quaternion ``w + x i + y j + z k``.

    Examples
    --------
    >>> i, j = Quaternion(0, 1), Quaternion(0, 0, 1)
    >>> i * j
    Quaternion(w=0.0, x=0.0, y=0.0, z=1.0)
    >>> (Quaternion(1, 1) * Quaternion(1, 0, 1)).to_list()
    [1.0, 1.0, 1.0, 1.0]
    """

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("w", "x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_list(cls, values) -> Quaternion:
        w, x, y, z = values
        return cls(w, x, y, z)

    @classmethod
    def real(cls, value: float) -> Quaternion:
        return cls(value)

    def to_list(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    def to_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def vector(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def __iter__(self):
        return iter((self.w, self.x, self.y, self.z))

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __add__(self, other) -> Quaternion:
        if isinstance(other, Real):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    __radd__ = __add__

    def __sub__(self, other) -> Quaternion:
        if isinstance(other, Real):
            return Quaternion(self.w - other, self.x, self.y, self.z)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __rsub__(self, other) -> Quaternion:
        return (-self) + other

    def __mul__(self, other) -> Quaternion:
        if isinstance(other, Real):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return q_mul(self, other)

    def __rmul__(self, other) -> Quaternion:
        # only reached for real scalars, which commute
        if isinstance(other, Real):
            return self * other
        return NotImplemented

    def __truediv__(self, other) -> Quaternion:
        if isinstance(other, Real):
            return Quaternion(self.w / other, self.x / other,
                              self.y / other, self.z / other)
        return NotImplemented

    def conj(self) -> Quaternion:
        return q_conj(self)

    def inv(self, eps: float = ZERO_EPS) -> Quaternion:
        return q_inv(self, eps)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def __abs__(self) -> float:
        return self.norm()

    def is_close(self, other: Quaternion, tol: float = DEFAULT_TOL) -> bool:
        return (self - other).norm() <= tol

    def is_real(self, tol: float = 1e-12) -> bool:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z) < tol


ZERO = Quaternion()
ONE = Quaternion(1.0)
QI = Quaternion(0.0, 1.0)
QJ = Quaternion(0.0, 0.0, 1.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)


def q_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product ``p q``."""
    return Quaternion(
        p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
        p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
        p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
        p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
    )


def q_conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def q_inv(q: Quaternion, eps: float = ZERO_EPS) -> Quaternion:
    """Multiplicative inverse ``conj(q) / |q|^2``.

    Raises
    ------
    ZeroDivisor
        If ``|q| < eps``.
    """
    n2 = q.norm2()
    if math.sqrt(n2) < eps:
        raise ZeroDivisor(f"quaternion {q.to_list()} is not invertible")
    return q_conj(q) / n2


@dataclass(frozen=True, slots=True)
class UnitImaginary:
    """Purely imaginary unit quaternion ``x i + y j + z k`` (so ``I^2 = -1``).

    The constructor checks the unit-norm invariant; use :meth:`from_vector`
    to normalise an arbitrary nonzero vector.
    """

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"not a unit vector: |({self.x}, {self.y}, {self.z})| = {n}")

    @classmethod
    def from_vector(cls, v) -> UnitImaginary:
        x, y, z = (float(c) for c in v)
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("cannot normalise the zero vector")
        return cls(x / n, y / n, z / n)

    @classmethod
    def from_list(cls, values) -> UnitImaginary:
        return cls.from_vector(values)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z]

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def q(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    def __neg__(self) -> UnitImaginary:
        return UnitImaginary(-self.x, -self.y, -self.z)

    def distance(self, other: UnitImaginary) -> float:
        return math.dist(self.to_list(), other.to_list())


UNIT_I = UnitImaginary(1.0, 0.0, 0.0)
UNIT_J = UnitImaginary(0.0, 1.0, 0.0)
UNIT_K = UnitImaginary(0.0, 0.0, 1.0)


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    # uniform random rotation via a normalised Gaussian quaternion
    a, b, c, d = rng.normal(size=4)
    n = math.sqrt(a * a + b * b + c * c + d * d)
    a, b, c, d = a / n, b / n, c / n, d / n
    return np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ])


def sphere_sample(count: int, seed: int | None = 0) -> list[UnitImaginary]:
    """Deterministic, negation-closed, quasi-uniform sample of the unit sphere.

    The result always starts with ``i, -i, j, -j, k, -k``; the remaining
    points come in ``(I, -I)`` pairs taken from a Fibonacci lattice on the
    upper hemisphere, rotated by a random rotation drawn from ``seed``
    (``seed=None`` keeps the bare lattice).  The returned length is
    ``max(6, count)`` rounded up to an even number.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    base = [UNIT_I, -UNIT_I, UNIT_J, -UNIT_J, UNIT_K, -UNIT_K]
    total = max(6, count + count % 2)
    m = (total - 6) // 2
    if m == 0:
        return base
    golden = (1 + math.sqrt(5)) / 2
    k = np.arange(m)
    z = 1.0 - (k + 0.5) / m          # strictly inside (0, 1]
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = 2 * math.pi * k / golden
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    if seed is not None:
        pts = pts @ _random_rotation(np.random.default_rng(seed)).T
    out = list(base)
    for p in pts:
        u = UnitImaginary.from_vector(p)
        out.extend((u, -u))
    return out


# -- vectorised helpers over (..., 4) arrays ---------------------------------

def qmul_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Broadcasting Hamilton product of ``[w, x, y, z]`` arrays."""
    pw, px, py, pz = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    qw, qx, qy, qz = np.moveaxis(np.asarray(q, dtype=float), -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def units_to_array(units) -> np.ndarray:
    """Stack unit imaginaries into a ``(U, 3)`` array."""
    return np.array([u.to_list() for u in units], dtype=float).reshape(-1, 3)
