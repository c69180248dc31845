"""Points of the slice cone ``H_s^n`` and the slice embedding ``x + yi -> x + yI``.

A :class:`SlicePoint` stores ``q_l = x_l + y_l I``.  The pair ``(y, I)`` is
only defined up to ``(y, I) ~ (-y, -I)``; every instance is canonicalised so
that the first non-real component has ``y > 0``.  The stored unit is then the
canonical unit of the point (see :func:`frak_I`) and equality is structural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quat_core import Quaternion, UnitImaginary

#: |y_l| below this counts as a real component
REAL_EPS = 1e-12
#: points with 0 < max|y| < NEAR_REAL_EPS are flagged, not asserted on
NEAR_REAL_EPS = 1e-8


def _as_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


@dataclass(frozen=True, slots=True)
class ComplexPoint:
    """A point of ``C^n`` stored as real and imaginary coordinate tuples."""

    re: tuple[float, ...]
    im: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "re", _as_tuple(self.re))
        object.__setattr__(self, "im", _as_tuple(self.im))
        if len(self.re) != len(self.im):
            raise ValueError("re and im must have equal length")

    @classmethod
    def from_complex(cls, z) -> ComplexPoint:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(z.real, z.imag)

    @property
    def n(self) -> int:
        return len(self.re)

    def to_complex(self) -> np.ndarray:
        return np.array(self.re) + 1j * np.array(self.im)

    def conj(self) -> ComplexPoint:
        return ComplexPoint(self.re, tuple(-v for v in self.im))

    def to_json(self) -> list[list[float]]:
        return [list(self.re), list(self.im)]

    @classmethod
    def from_json(cls, data) -> ComplexPoint:
        re, im = data
        return cls(re, im)


@dataclass(frozen=True, slots=True)
class SlicePoint:
    """Point ``(x_l + y_l I)_l`` of the slice cone, in canonical form.

    ``I`` is ``None`` exactly for real points, whose ``y`` is stored as zeros.
    """

    x: tuple[float, ...]
    y: tuple[float, ...]
    I: UnitImaginary | None = None

    def __post_init__(self):
        x, y = _as_tuple(self.x), _as_tuple(self.y)
        if len(x) != len(y):
            raise ValueError("x and y must have equal length")
        lead = next((v for v in y if abs(v) >= REAL_EPS), None)
        I = self.I
        if lead is None:
            y, I = (0.0,) * len(y), None
        elif I is None:
            raise ValueError("a non-real point needs an imaginary unit")
        elif lead < 0:
            y, I = tuple(-v for v in y), -I
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "I", I)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def is_real(self) -> bool:
        return self.I is None

    @property
    def near_real(self) -> bool:
        return self.I is not None and max(abs(v) for v in self.y) < NEAR_REAL_EPS

    def components(self) -> list[Quaternion]:
        """The quaternion coordinates ``q_1, ..., q_n``."""
        if self.I is None:
            return [Quaternion(v) for v in self.x]
        I = self.I
        return [Quaternion(a, b * I.x, b * I.y, b * I.z) for a, b in zip(self.x, self.y)]

    def to_array(self) -> np.ndarray:
        """Quaternion coordinates as an ``(n, 4)`` array."""
        return np.array([c.to_list() for c in self.components()])

    def complex_coords(self) -> ComplexPoint:
        """``x + y i`` in ``C^n``, i.e. the preimage under the embedding at ``I``."""
        return ComplexPoint(self.x, self.y)

    def coords_in(self, I: UnitImaginary) -> tuple[np.ndarray, np.ndarray]:
        """``(x, y)`` with ``q = x + y I`` for the given unit ``I``.

        ``I`` must be the stored unit or its negative (any unit for real points).
        """
        x, y = np.array(self.x), np.array(self.y)
        if self.I is None or self.I == I:
            return x, y
        if self.I == -I:
            return x, -y
        if np.allclose(self.I.to_array(), I.to_array(), atol=1e-12):
            return x, y
        if np.allclose(self.I.to_array(), -I.to_array(), atol=1e-12):
            return x, -y
        raise ValueError("point does not lie in the requested slice")

    def is_close(self, other: SlicePoint, tol: float = 1e-9) -> bool:
        if self.n != other.n:
            return False
        return bool(np.max(np.abs(self.to_array() - other.to_array())) <= tol)

    def to_json(self) -> dict:
        return {"x": list(self.x), "y": list(self.y),
                "I": None if self.I is None else self.I.to_list()}

    @classmethod
    def from_json(cls, data) -> SlicePoint:
        I = data.get("I")
        return cls(data["x"], data["y"], None if I is None else UnitImaginary.from_vector(I))

    @classmethod
    def from_quaternions(cls, qs, tol: float = 1e-9) -> SlicePoint:
        """Build a slice point from quaternion coordinates.

        Raises ``ValueError`` if the imaginary parts are not parallel, i.e. the
        tuple is not in the slice cone.
        """
        qs = [q if isinstance(q, Quaternion) else Quaternion.from_list(q) for q in qs]
        x = [q.w for q in qs]
        lead = next((q for q in qs if not q.is_real(REAL_EPS)), None)
        if lead is None:
            return cls(x, [0.0] * len(qs))
        I = UnitImaginary.from_vector(lead.vector)
        iv = I.to_array()
        y = []
        for q in qs:
            v = np.array(q.vector)
            b = float(v @ iv)
            if np.linalg.norm(v - b * iv) > tol:
                raise ValueError("imaginary parts are not parallel: point is not in the slice cone")
            y.append(b)
        return cls(x, y, I)


def embed(z: ComplexPoint, I: UnitImaginary) -> SlicePoint:
    """The slice embedding ``x + y i -> x + y I`` (result canonicalised)."""
    return SlicePoint(z.re, z.im, I)


def frak_I(q: SlicePoint) -> UnitImaginary | None:
    """Canonical imaginary unit of ``q``; ``None`` stands for 0 on real points.

    Computed from the quaternion coordinates: the normalised imaginary part of
    the first non-real component.
    """
    for c in q.components():
        v = c.vector
        nv = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
        if nv >= REAL_EPS:
            return UnitImaginary(v[0] / nv, v[1] / nv, v[2] / nv)
    return None


def conj_point(q: SlicePoint) -> SlicePoint:
    """Componentwise quaternionic conjugate ``x - y I``."""
    if q.I is None:
        return q
    return SlicePoint(q.x, q.y, -q.I)
