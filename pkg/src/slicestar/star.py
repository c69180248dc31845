"""The *-product on ``H^{2x1}``, on stem functions and on path-slice functions.

On stems, ``p * q = (p1 1 + p2 sigma)(q1 1 + q2 sigma) e1`` with
``sigma = [[0, -1], [1, 0]]``; on functions,
``(f * g)(q) = (f(q), J(q) f(q)) G(q)`` where ``J(q)`` is the canonical unit
of ``q`` and ``G`` the point stem of ``g``.
"""

from __future__ import annotations

import threading
from typing import Callable, Sequence

from .domains import INDETERMINATE, NO_VIOLATION, VIOLATION, CheckReport, Domain
from .functions import Polynomial, poly_star_oracle
from .path_geom import PathC
from .quat_core import ONE, ZERO, Quaternion, UnitImaginary, sphere_sample
from .slice_space import SlicePoint
from .stem import (DELTA_MIN, MAX_WITNESSES, PathSliceFn, StemValue, admissible_units, point_stem,
                   sub_stem, verify_path_slice)

Matrix2 = tuple[tuple[Quaternion, Quaternion], tuple[Quaternion, Quaternion]]

IDENTITY: Matrix2 = ((ONE, ZERO), (ZERO, ONE))
SIGMA: Matrix2 = ((ZERO, -ONE), (ONE, ZERO))
E1 = (ONE, ZERO)


class HypothesisNotMet(ValueError):
    """The domain hypotheses of the *-product are neither attested nor assumed."""


def _scale(p: Quaternion, M: Matrix2) -> Matrix2:
    return tuple(tuple(p * m for m in row) for row in M)


def _add(A: Matrix2, B: Matrix2) -> Matrix2:
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_mul(A: Matrix2, B: Matrix2) -> Matrix2:
    return tuple(
        tuple(A[r][0] * B[0][c] + A[r][1] * B[1][c] for c in range(2)) for r in range(2)
    )


def stem_star(p: StemValue, q: StemValue) -> StemValue:
    """*-product of two stem values, evaluated through the 2x2 matrix form."""
    A = _add(_scale(p.F1, IDENTITY), _scale(p.F2, SIGMA))
    B = _add(_scale(q.F1, IDENTITY), _scale(q.F2, SIGMA))
    M = mat_mul(A, B)
    return StemValue(M[0][0] * E1[0] + M[0][1] * E1[1], M[1][0] * E1[0] + M[1][1] * E1[1])


def stem_fn_star(F: Callable[[PathC], StemValue], G: Callable[[PathC], StemValue]) -> Callable[[PathC], StemValue]:
    """Pointwise product ``(F * G)(gamma) = F(gamma) * G(gamma)``."""
    def FG(gamma: PathC) -> StemValue:
        return stem_star(F(gamma), G(gamma))
    return FG


class StemCache:
    """Memo for point stems keyed by ``(function, domain, point)``.

    Functions and domains hash by identity; readers never block and a lock
    serialises insertion.  Values do not depend on insertion order because
    each entry is a pure function of its key.
    """

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()
        self.hits = self.misses = 0

    def get(self, key, compute):
        try:
            value = self._data[key]
            self.hits += 1
            return value
        except KeyError:
            pass
        value = compute()
        with self._lock:
            self._data.setdefault(key, value)
            self.misses += 1
        return value

    def __len__(self):
        return len(self._data)


def _attested(attestation) -> bool:
    if attestation is None:
        return False
    reports = attestation if isinstance(attestation, (list, tuple)) else [attestation]
    return bool(reports) and all(isinstance(r, CheckReport) and r.ok for r in reports)


class StarProduct(PathSliceFn):
    """``f * g`` on ``omega1``, with both a point rule and a stem rule."""

    def __init__(self, f: PathSliceFn, g: PathSliceFn, omega1: Domain, units: Sequence[UnitImaginary],
                 pathfinder="auto", delta_min: float = DELTA_MIN, cache: StemCache | None = None,
                 metadata: dict | None = None):
        super().__init__(omega1)
        self.f, self.g = f, g
        self.units = tuple(units)
        self.pathfinder = pathfinder
        self.delta_min = delta_min
        self.cache = cache if cache is not None else StemCache()
        self.metadata = dict(metadata or {})
        self.name = f"({f.name} * {g.name})"

    def point_stem_of_g(self, q: SlicePoint) -> StemValue:
        return self.cache.get(
            (self.g, self.domain, q),
            lambda: point_stem(self.g, self.domain, q, self.units, self.pathfinder, self.delta_min,
                               attested=self.metadata.get("hypotheses") == "attested"),
        )

    def __call__(self, q: SlicePoint) -> Quaternion:
        fq = self.f(q)
        G = self.point_stem_of_g(q)
        if q.I is None:
            return fq * G.F1
        return fq * G.F1 + (q.I.q * fq) * G.F2

    def _stem_of(self, fn: PathSliceFn, gamma: PathC) -> StemValue:
        own = fn.stem(gamma)
        if own is not None:
            return own
        return sub_stem(fn, self.domain, gamma, self.units, self.delta_min)

    def stem(self, gamma: PathC) -> StemValue:
        """``F * F_g`` with ``F`` a stem of ``f`` and ``F_g`` the sub-stem of ``g`` on ``omega1``."""
        return stem_star(self._stem_of(self.f, gamma),
                         sub_stem(self.g, self.domain, gamma, self.units, self.delta_min))

    def on(self, domain):
        return StarProduct(self.f.on(domain), self.g, domain, self.units, self.pathfinder,
                           self.delta_min, self.cache, self.metadata)


def fn_star(f: PathSliceFn, g: PathSliceFn, omega1: Domain | None = None, omega2: Domain | None = None,
            attestation=None, assume_hypotheses: bool = False, units: Sequence[UnitImaginary] | None = None,
            pathfinder="auto", delta_min: float = DELTA_MIN, cache: StemCache | None = None) -> StarProduct:
    """The *-product ``f * g`` as a function on ``omega1``.

    ``omega1`` (default ``f.domain``) must be real-path-connected and ``omega2``
    (default ``g.domain``) ``omega1``-stem-preserving.  Pass passing
    :class:`CheckReport` objects as ``attestation``, or set
    ``assume_hypotheses``; the choice is recorded in ``result.metadata``.
    """
    omega1 = omega1 or f.domain
    if omega2 is not None and g.domain is not omega2:
        g = g.on(omega2)
    omega2 = g.domain
    if _attested(attestation):
        hyp = "attested"
    elif assume_hypotheses:
        hyp = "assumed"
    else:
        raise HypothesisNotMet("fn_star needs a passing CheckReport or assume_hypotheses=True")
    if f.domain is not omega1:
        f = f.on(omega1)
    units = tuple(units) if units is not None else tuple(sphere_sample(50, 0))
    return StarProduct(f, g, omega1, units, pathfinder, delta_min, cache,
                       {"hypotheses": hyp, "omega1": omega1.to_json(), "omega2": omega2.to_json()})


def constant_one(omega: Domain) -> Polynomial:
    """The unit ``1_omega``; its stem on every path is ``(1, 0)``."""
    return Polynomial([ONE], omega, "one")


def verify_algebra(fs: Sequence[PathSliceFn], probes: Sequence[SlicePoint],
                   domains: Domain | Sequence[Domain] | None = None, tol: float = 1e-9,
                   unit_tol: float = 1e-10, lam: float = 2.0, units: Sequence[UnitImaginary] | None = None,
                   cache: StemCache | None = None, attestation=None,
                   assume_hypotheses: bool | None = None, delta_min: float = DELTA_MIN) -> CheckReport:
    """Check the real-algebra laws of ``*`` on a triple ``(f, g, h)`` at the probes.

    Associativity is tested at ``tol``; unit laws, real bilinearity and
    distributivity at ``unit_tol``.  ``domains`` is one domain or a chain
    ``(omega1, omega2, omega3)`` on which ``f``, ``g``, ``h`` live.
    """
    f, g, h = fs
    if domains is not None:
        chain = [domains] * 3 if isinstance(domains, Domain) else list(domains)
        f, g, h = f.on(chain[0]), g.on(chain[1]), h.on(chain[2])
    cache = cache or StemCache()
    if assume_hypotheses is None:
        assume_hypotheses = attestation is None
    kw = dict(attestation=attestation, assume_hypotheses=assume_hypotheses, units=units, cache=cache,
              delta_min=delta_min)

    def star(a, b):
        return fn_star(a, b, **kw)

    one1 = constant_one(f.domain)
    laws: dict[str, tuple[Callable, Callable, float]] = {
        "associativity": (star(star(f, g), h), star(f, star(g, h)), tol),
        "left-unit": (star(one1, f), f, unit_tol),
        "right-unit": (star(f, constant_one(f.domain)), f, unit_tol),
        "left-scalar": (star(lam * f, g), lam * star(f, g), unit_tol),
        "right-scalar": (star(f, lam * g), lam * star(f, g), unit_tol),
        "left-distributive": (star(f, g + h.on(g.domain)), star(f, g) + star(f, h.on(g.domain)), unit_tol),
        "right-distributive": (star(f + g.on(f.domain), h), star(f, h) + star(g.on(f.domain), h), unit_tol),
    }
    worst = {k: 0.0 for k in laws}
    witnesses = []
    checked = skipped = 0
    for q in probes:
        if not f.domain.contains(q) or q.near_real:
            skipped += 1
            continue
        checked += 1
        for law, (lhs, rhs, t) in laws.items():
            d = (lhs(q) - rhs(q)).norm()
            worst[law] = max(worst[law], d)
            if d > t and len(witnesses) < MAX_WITNESSES:
                witnesses.append({"kind": law, "probe": q, "deviation": d})
    return CheckReport("algebra-laws", VIOLATION if witnesses else NO_VIOLATION, witnesses,
                       {"tol": tol, "unit_tol": unit_tol, "lambda": lam},
                       {"probes_checked": checked, "probes_skipped": skipped,
                        "max_deviation": worst})


def relative_error(a: Quaternion, b: Quaternion, floor: float = 1e-12) -> float:
    """``|a - b| / max(|b|, floor)``."""
    return (a - b).norm() / max(b.norm(), floor)


def check_star_oracle(pairs: Sequence[tuple[Polynomial, Polynomial]], probes: Sequence[SlicePoint],
                      tol: float = 1e-9, **star_kw) -> CheckReport:
    """``fn_star`` against coefficient convolution for polynomial pairs (relative error)."""
    witnesses, worst, checked = [], 0.0, 0
    for f, g in pairs:
        fg = fn_star(f, g, **star_kw)
        oracle = Polynomial(poly_star_oracle(f.coeffs, g.coeffs), f.domain)
        for q in probes:
            if not f.domain.contains(q):
                continue
            checked += 1
            e = relative_error(fg(q), oracle(q))
            worst = max(worst, e)
            if e > tol and len(witnesses) < MAX_WITNESSES:
                witnesses.append({"kind": "oracle-mismatch", "f": f.name, "g": g.name,
                                  "probe": q, "relative_error": e})
    return CheckReport("star-product-oracle", VIOLATION if witnesses else NO_VIOLATION, witnesses,
                       {"tol": tol, "pairs": len(pairs)},
                       {"evaluations": checked, "max_relative_error": worst})


def check_real_restriction(f: PathSliceFn, g: PathSliceFn, probes: Sequence[SlicePoint],
                           tol: float = 1e-10, **star_kw) -> CheckReport:
    """On real points ``(f * g)(q) = f(q) g(q)``."""
    fg = fn_star(f, g, **star_kw)
    witnesses, worst, checked = [], 0.0, 0
    for q in probes:
        if not q.is_real or not fg.domain.contains(q):
            continue
        checked += 1
        d = (fg(q) - f(q) * g(q)).norm()
        worst = max(worst, d)
        if d > tol and len(witnesses) < MAX_WITNESSES:
            witnesses.append({"kind": "real-restriction", "probe": q, "deviation": d})
    verdict = VIOLATION if witnesses else (NO_VIOLATION if checked else INDETERMINATE)
    return CheckReport("star-real-restriction", verdict, witnesses, {"tol": tol},
                       {"real_probes": checked, "max_deviation": worst})


def check_star_stem_closure(f: PathSliceFn, g: PathSliceFn, corpus: Sequence[PathC],
                            tol: float = 1e-9, **star_kw) -> CheckReport:
    """``f * g`` is path-slice, with sub-stem equal to the *-product of the sub-stems."""
    fg = fn_star(f, g, **star_kw)
    units = fg.units
    rep = verify_path_slice(fg, fg.domain, corpus, units, tol, fg.delta_min)
    witnesses = list(rep.witnesses)
    worst, checked = 0.0, 0
    for gamma in corpus:
        if len(admissible_units(fg.domain, gamma, units, fg.delta_min)) < 2:
            continue
        checked += 1
        lhs = sub_stem(fg, fg.domain, gamma, units, fg.delta_min)
        rhs = stem_star(sub_stem(f, fg.domain, gamma, units, fg.delta_min),
                        sub_stem(g, fg.domain, gamma, units, fg.delta_min))
        d = lhs.distance(rhs)
        worst = max(worst, d)
        if d > tol and len(witnesses) < MAX_WITNESSES:
            witnesses.append({"kind": "stem-of-product", "path": gamma, "deviation": d})
    return CheckReport("star-stem-closure", VIOLATION if witnesses else NO_VIOLATION, witnesses,
                       {"tol": tol, "units": len(units), "paths": len(corpus)},
                       {"representation": rep.stats, "paths_checked": checked,
                        "max_stem_deviation": worst})


__all__ = [
    "IDENTITY", "SIGMA", "E1", "HypothesisNotMet", "mat_mul", "stem_star", "stem_fn_star",
    "StemCache", "StarProduct", "fn_star", "constant_one", "verify_algebra", "relative_error",
    "check_star_oracle", "check_real_restriction", "check_star_stem_closure",
]
