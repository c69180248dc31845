"""Discretised paths in ``C^n`` that start on ``R^n``, and their slice lifts."""

from __future__ import annotations

import math

import numpy as np

from .quat_core import UnitImaginary
from .slice_space import REAL_EPS, ComplexPoint, SlicePoint, embed

#: default sampling resolution for lifted-path membership
DEFAULT_MAX_STEP = 0.05


class PathC:
    """Polyline ``gamma: [0, 1] -> C^n`` with ``gamma(0)`` real.

    Samples are stored as a read-only complex array of shape ``(K, n)``;
    sample ``k`` sits at parameter ``k / (K - 1)``.  Paths compare and hash
    by identity, which is what the stem caches key on.
    """

    __slots__ = ("z", "label")

    def __init__(self, samples, label: str | None = None):
        if isinstance(samples, (list, tuple)) and samples and isinstance(samples[0], ComplexPoint):
            z = np.array([s.to_complex() for s in samples])
        else:
            z = np.asarray(samples, dtype=complex)
            if z.ndim == 1:
                z = z[:, None]
        if z.ndim != 2 or z.shape[0] < 2:
            raise ValueError("a path needs at least two samples of shape (K, n)")
        if np.any(np.abs(z[0].imag) >= REAL_EPS):
            raise ValueError("path must start in R^n")
        z = z.copy()
        z[0] = z[0].real
        z.setflags(write=False)
        self.z = z
        self.label = label

    @property
    def n(self) -> int:
        return self.z.shape[1]

    def __len__(self) -> int:
        return self.z.shape[0]

    @property
    def samples(self) -> list[ComplexPoint]:
        return [ComplexPoint.from_complex(row) for row in self.z]

    def max_gap(self) -> float:
        return float(np.max(np.linalg.norm(np.diff(self.z, axis=0), axis=1)))

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"<PathC{tag} n={self.n} K={len(self)} end={self.z[-1]}>"

    def to_json(self) -> dict:
        return {"n": self.n,
                "samples": [[list(row.real), list(row.imag)] for row in self.z]}

    @classmethod
    def from_json(cls, data) -> PathC:
        if "generator" in data:
            return path_from_generator(data)
        z = np.array([np.array(re) + 1j * np.array(im) for re, im in data["samples"]])
        return cls(z, label=data.get("label"))


def lift_array(gamma: PathC, units) -> np.ndarray:
    """Quaternion coordinates of the lifts at every unit.

    ``units`` is a unit, or a ``(U, 3)`` array / list of units; the result
    has shape ``(K, n, 4)`` or ``(U, K, n, 4)``.
    """
    single = isinstance(units, UnitImaginary)
    if single:
        uarr = units.to_array()[None, :]
    elif isinstance(units, np.ndarray):
        uarr = units.reshape(-1, 3)
    else:
        uarr = np.array([u.to_list() for u in units], dtype=float).reshape(-1, 3)
    x, y = gamma.z.real, gamma.z.imag
    out = np.empty((uarr.shape[0],) + x.shape + (4,))
    out[..., 0] = x
    out[..., 1:] = y[None, :, :, None] * uarr[:, None, None, :]
    return out[0] if single else out


def lift(gamma: PathC, I: UnitImaginary) -> list[SlicePoint]:
    """Pointwise embedding of the samples into the slice at ``I``."""
    return [embed(s, I) for s in gamma.samples]


def conj_path(gamma: PathC) -> PathC:
    return PathC(np.conj(gamma.z), label=None if gamma.label is None else f"conj({gamma.label})")


def endpoint(gamma: PathC) -> ComplexPoint:
    return ComplexPoint.from_complex(gamma.z[-1])


def refine(gamma: PathC, max_step: float = DEFAULT_MAX_STEP) -> PathC:
    """Linear subdivision so that consecutive samples are at most ``max_step`` apart."""
    if max_step <= 0:
        raise ValueError("max_step must be positive")
    z = gamma.z
    gaps = np.linalg.norm(np.diff(z, axis=0), axis=1)
    if np.all(gaps <= max_step * (1 + 1e-9)):
        return gamma
    pieces = [z[:1]]
    for a, b, d in zip(z[:-1], z[1:], gaps):
        m = max(1, math.ceil(d / max_step - 1e-9))
        t = np.arange(1, m + 1)[:, None] / m
        seg = a + t * (b - a)
        seg[-1] = b
        pieces.append(seg)
    return PathC(np.concatenate(pieces), label=gamma.label)


def polyline(points, max_step: float | None = DEFAULT_MAX_STEP, label: str | None = None) -> PathC:
    """Polyline through ``points`` (each a complex scalar or length-n vector)."""
    z = np.array([np.atleast_1d(np.asarray(p, dtype=complex)) for p in points])
    path = PathC(z, label=label)
    return refine(path, max_step) if max_step else path


def segment(start, end, max_step: float | None = DEFAULT_MAX_STEP, label: str | None = None) -> PathC:
    return polyline([start, end], max_step, label)


def arc(center, radius: float, theta0: float, theta1: float,
        max_step: float = DEFAULT_MAX_STEP, label: str | None = None) -> PathC:
    """Circular arc ``center + radius * exp(i theta)`` in every coordinate.

    ``center + radius * exp(i theta0)`` must be real.
    """
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    length = abs(theta1 - theta0) * abs(radius) * math.sqrt(center.size)
    k = max(2, math.ceil(length / max_step) + 1)
    theta = np.linspace(theta0, theta1, k)
    z = center[None, :] + radius * np.exp(1j * theta)[:, None]
    return PathC(z, label=label)


def straight_path_to(q: SlicePoint, max_step: float = DEFAULT_MAX_STEP) -> PathC:
    """The path ``t -> x + t y i`` for canonical ``q = x + y I``.

    Its lift at the canonical unit of ``q`` ends exactly at ``q``; for real
    ``q`` it is the constant path.
    """
    x, y = np.array(q.x), np.array(q.y)
    length = float(np.linalg.norm(y))
    k = max(2, math.ceil(length / max_step - 1e-9) + 1)
    t = np.linspace(0.0, 1.0, k)[:, None]
    z = x[None, :] + 1j * (t * y[None, :])
    return PathC(z, label="straight")


def l_path_to(q: SlicePoint, shift: float, max_step: float = DEFAULT_MAX_STEP) -> PathC:
    """Two-segment path ``x + s -> x + s + y i -> x + y i`` (real start shifted by ``s``)."""
    x, y = np.array(q.x), np.array(q.y)
    x0 = x + shift
    return polyline([x0, x0 + 1j * y, x + 1j * y], max_step, label=f"L{shift:+g}")


_GENERATORS = {
    "segment": lambda d, ms: segment(_cplx(d["start"]), _cplx(d["end"]), ms),
    "polyline": lambda d, ms: polyline([_cplx(p) for p in d["points"]], ms),
    "arc": lambda d, ms: arc(_cplx(d["center"]), d["radius"], d["theta0"], d["theta1"], ms),
}


def _cplx(value) -> np.ndarray:
    """Parse ``[re, im]`` pairs (or lists of them) into a complex vector."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1 and arr.size == 2:
        return np.array([arr[0] + 1j * arr[1]])
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 0:
        return np.array([complex(arr)])
    raise ValueError(f"cannot read complex coordinates from {value!r}")


def path_from_generator(spec: dict) -> PathC:
    """Build a path from ``{"generator": "segment" | "polyline" | "arc", ...}``.

    Complex coordinates are given as ``[re, im]`` (n = 1) or a list of such
    pairs (one per variable).
    """
    name = spec["generator"]
    if name not in _GENERATORS:
        raise ValueError(f"unknown path generator {name!r}")
    path = _GENERATORS[name](spec, spec.get("max_step", DEFAULT_MAX_STEP))
    path.label = spec.get("label", name)
    return path
