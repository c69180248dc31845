"""Concrete path-slice functions: right-coefficient polynomials and a few builtins."""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .domains import Domain
from .path_geom import PathC
from .quat_core import ONE, ZERO, Quaternion, q_mul
from .slice_space import ComplexPoint, SlicePoint
from .stem import PathSliceFn, PointBacked, StemValue


def _q(c) -> Quaternion:
    if isinstance(c, Quaternion):
        return c
    arr = np.atleast_1d(np.asarray(c, dtype=float))
    if arr.size == 1:
        return Quaternion(float(arr[0]))
    return Quaternion.from_list(arr)


def _qpow(q: Quaternion, k: int) -> Quaternion:
    out = ONE
    for _ in range(k):
        out = q_mul(out, q)
    return out


class Polynomial(PathSliceFn):
    """Right-coefficient polynomial ``sum_k q_1^{k_1} ... q_n^{k_n} a_k``.

    Parameters
    ----------
    coeffs : sequence or mapping
        A sequence ``[a_0, a_1, ...]`` (one variable) or a mapping from
        exponent tuples to coefficients.  Coefficients are quaternions or
        ``[w, x, y, z]`` lists.
    domain : Domain
        Where the function is considered.

    Points of the slice cone have commuting coordinates, so the ordering of
    the variables inside a monomial is immaterial.  Evaluation uses
    quaternion products only; :meth:`oracle_stem` uses complex powers.
    """

    name = "poly"

    def __init__(self, coeffs, domain: Domain, name: str | None = None):
        super().__init__(domain)
        if isinstance(coeffs, Mapping):
            terms = {tuple(int(e) for e in k): _q(v) for k, v in coeffs.items()}
        else:
            terms = {(k,) + (0,) * (domain.n - 1): _q(c) for k, c in enumerate(coeffs)}
        if any(len(k) != domain.n for k in terms):
            raise ValueError("exponent tuples must have one entry per variable")
        self.terms = dict(sorted(terms.items()))
        if name:
            self.name = name

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    @property
    def coeffs(self) -> list[Quaternion]:
        """Coefficient list (one variable only)."""
        if self.n != 1:
            raise ValueError("coefficient list is only defined for n = 1")
        out = [ZERO] * (self.degree + 1)
        for (k,), c in self.terms.items():
            out[k] = c
        return out

    def __call__(self, q: SlicePoint) -> Quaternion:
        comps = q.components()
        total = ZERO
        for exps, c in self.terms.items():
            m = ONE
            for qc, e in zip(comps, exps):
                if e:
                    m = q_mul(m, _qpow(qc, e))
            total = total + q_mul(m, c)
        return total

    def oracle_stem(self, gamma: PathC) -> StemValue:
        """Closed-form stem from complex monomials at the end point of ``gamma``."""
        return monomial_stem(self.terms, gamma.z[-1])

    def on(self, domain):
        return Polynomial(self.terms, domain, self.name)

    def __add__(self, other):
        if isinstance(other, Polynomial):
            terms = dict(self.terms)
            for k, c in other.terms.items():
                terms[k] = terms.get(k, ZERO) + c
            return Polynomial(terms, self.domain)
        return super().__add__(other)

    def __rmul__(self, lam):
        return Polynomial({k: c * float(lam) for k, c in self.terms.items()}, self.domain)

    def to_json(self) -> dict:
        if self.n == 1:
            return {"type": "polynomial", "coeffs": [c.to_list() for c in self.coeffs]}
        return {"type": "polynomial", "n": self.n,
                "terms": [{"exp": list(k), "coeff": c.to_list()} for k, c in self.terms.items()]}


def monomial_stem(terms: Mapping[tuple, Quaternion], z) -> StemValue:
    """``(sum alpha_k a_k, sum beta_k a_k)`` with ``z^k = alpha_k + i beta_k``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    F1, F2 = ZERO, ZERO
    for exps, c in terms.items():
        m = complex(np.prod([zl ** e for zl, e in zip(z, exps)]))
        F1 = F1 + c * m.real
        F2 = F2 + c * m.imag
    return StemValue(F1, F2)


def poly_stem(coeffs: Sequence, z) -> StemValue:
    """Stem of the one-variable polynomial ``sum q^k a_k`` at ``z`` in ``C``."""
    if isinstance(z, ComplexPoint):
        if z.n != 1:
            raise ValueError("poly_stem needs a one-dimensional point")
        z = z.to_complex()[0]
    return monomial_stem({(k,): _q(c) for k, c in enumerate(coeffs)}, complex(z))


def poly_star_oracle(a: Sequence, b: Sequence) -> list[Quaternion]:
    """Coefficients of ``(sum q^m a_m) * (sum q^k b_k)``: ``c_j = sum_{m+k=j} a_m b_k``."""
    a, b = [_q(c) for c in a], [_q(c) for c in b]
    out = [ZERO] * (len(a) + len(b) - 1)
    for m, am in enumerate(a):
        for k, bk in enumerate(b):
            out[m + k] = out[m + k] + q_mul(am, bk)
    return out


def random_polynomial(domain: Domain, degree: int, rng: np.random.Generator, scale: float = 1.0) -> Polynomial:
    """One-variable polynomial with ``degree + 1`` Gaussian quaternion coefficients."""
    return Polynomial([Quaternion(*rng.normal(scale=scale, size=4)) for _ in range(degree + 1)], domain)


# -- builtins ----------------------------------------------------------------------

def _slice_exp(q: SlicePoint) -> Quaternion:
    x, y = q.x[0], q.y[0]
    if q.I is None:
        return Quaternion(math.exp(x))
    e = math.exp(x)
    return Quaternion(e * math.cos(y)) + q.I.q * (e * math.sin(y))


def _conj(q: SlicePoint) -> Quaternion:
    return q.components()[0].conj()


def _i_component(q: SlicePoint) -> Quaternion:
    return Quaternion(q.components()[0].x)


def builtin(name: str, domain: Domain) -> PathSliceFn:
    """Named functions of one variable.

    ``identity``, ``square``, ``one``: polynomials; ``exp``: slice exponential
    ``e^x (cos y + I sin y)``; ``conj``: ``q -> q-bar`` (path-slice, not
    regular); ``i_component``: the real ``i``-coefficient (not path-slice).
    """
    if name == "identity":
        return Polynomial([0, 1], domain, "identity")
    if name == "square":
        return Polynomial([0, 0, 1], domain, "square")
    if name == "one":
        return Polynomial([1], domain, "one")
    rules = {"exp": _slice_exp, "conj": _conj, "i_component": _i_component}
    if name not in rules:
        raise KeyError(f"unknown builtin function {name!r}")
    if domain.n != 1:
        raise ValueError(f"builtin {name!r} is defined for n = 1 only")
    return PointBacked(rules[name], domain, name)


def function_from_json(data: dict, domain: Domain) -> PathSliceFn:
    """Parse ``{"type": "polynomial", "coeffs": [...]}``, the multi-variable
    ``{"type": "polynomial", "n": 2, "terms": [{"exp": [1, 0], "coeff": [...]}]}``
    or ``{"type": "builtin", "name": "exp"}``."""
    kind = data.get("type", "polynomial")
    if kind == "builtin":
        return builtin(data["name"], domain)
    if kind != "polynomial":
        raise ValueError(f"unknown function type {kind!r}")
    if "terms" in data:
        terms = {tuple(t["exp"]): t["coeff"] for t in data["terms"]}
        return Polynomial(terms, domain, data.get("name"))
    return Polynomial(data["coeffs"], domain, data.get("name"))
