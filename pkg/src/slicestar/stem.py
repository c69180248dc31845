"""Stem values in ``H^{2x1}`` and their extraction from slice evaluations.

A path-slice function ``f`` is reproduced on every admissible lift by a stem
``F(gamma) = (F1, F2)``::

    f(gamma^I(1)) = F1 + I F2

Two evaluations on distinct units ``I != J`` determine ``F`` through the
explicit inverse ``[[1, I], [1, J]]^{-1} = (I - J)^{-1} [[I, -J], [1, -1]]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domains import (DEFAULT_GRID_STEP, INDETERMINATE, NO_VIOLATION, REFINE_ANGLES, VIOLATION,
                      CheckReport, Domain, PathPair, find_path, in_path_class, nearby_units, slice_units)
from .path_geom import DEFAULT_MAX_STEP, PathC, conj_path, l_path_to
from .quat_core import ZERO, Quaternion, UnitImaginary, q_inv, units_to_array
from .slice_space import ComplexPoint, SlicePoint, embed

#: default lower bound on |I - J| for an extraction pair
DELTA_MIN = 0.5
#: at most this many witnesses are stored per report
MAX_WITNESSES = 20


class IllConditionedPair(ValueError):
    """The two units are too close for a well-conditioned extraction."""


class UnitsNotAdmissible(ValueError):
    """A unit does not lift the path into the function's domain."""


class InsufficientUnits(ValueError):
    """Fewer than two admissible units among the sampled ones."""


class NoPathFound(ValueError):
    """No lifted path from the real locus to the point was found."""


class NotPathSlice(ValueError):
    """Stems extracted from different unit pairs disagree."""


@dataclass(frozen=True)
class StemValue:
    """Column vector ``(F1, F2)`` of ``H^{2x1}``."""

    F1: Quaternion
    F2: Quaternion
    note: str | None = field(default=None, compare=False)

    def __add__(self, other: StemValue) -> StemValue:
        return StemValue(self.F1 + other.F1, self.F2 + other.F2)

    def __sub__(self, other: StemValue) -> StemValue:
        return StemValue(self.F1 - other.F1, self.F2 - other.F2)

    def scale(self, lam: float) -> StemValue:
        return StemValue(self.F1 * lam, self.F2 * lam)

    def flip(self) -> StemValue:
        """``diag(1, -1)`` applied to the stem."""
        return StemValue(self.F1, -self.F2)

    def distance(self, other: StemValue) -> float:
        return max((self.F1 - other.F1).norm(), (self.F2 - other.F2).norm())

    def is_close(self, other: StemValue, tol: float = 1e-9) -> bool:
        return self.distance(other) <= tol

    def to_json(self) -> dict:
        out = {"F1": self.F1.to_list(), "F2": self.F2.to_list()}
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_json(cls, data) -> StemValue:
        return cls(Quaternion.from_list(data["F1"]), Quaternion.from_list(data["F2"]))


def represent(F: StemValue, I: UnitImaginary | None) -> Quaternion:
    """``(1, I) F = F1 + I F2`` (``I = None`` stands for 0)."""
    if I is None:
        return F.F1
    return F.F1 + I.q * F.F2


class PathSliceFn:
    """A quaternion-valued function on a domain of the slice cone.

    Subclasses provide point evaluation via :meth:`__call__`; those that know
    a stem function (e.g. a *-product) also override :meth:`stem`.
    """

    name = "fn"

    def __init__(self, domain: Domain):
        self.domain = domain

    @property
    def n(self) -> int:
        return self.domain.n

    def __call__(self, q: SlicePoint) -> Quaternion:
        raise NotImplementedError

    def stem(self, gamma: PathC) -> StemValue | None:
        """A stem value on ``gamma`` if the function carries one, else ``None``."""
        return None

    def on(self, domain: Domain) -> PathSliceFn:
        """The same rule considered on another domain."""
        raise NotImplementedError

    def __add__(self, other: PathSliceFn) -> PathSliceFn:
        return SumFn(self, other)

    def __rmul__(self, lam: float) -> PathSliceFn:
        return ScaledFn(float(lam), self)

    def __neg__(self) -> PathSliceFn:
        return ScaledFn(-1.0, self)

    def __sub__(self, other: PathSliceFn) -> PathSliceFn:
        return SumFn(self, ScaledFn(-1.0, other))

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name} on {self.domain.name}>"


class PointBacked(PathSliceFn):
    """Function given by a point evaluation rule ``SlicePoint -> Quaternion``."""

    def __init__(self, rule: Callable[[SlicePoint], Quaternion], domain: Domain, name: str = "point-fn"):
        super().__init__(domain)
        self.rule = rule
        self.name = name

    def __call__(self, q):
        return self.rule(q)

    def on(self, domain):
        return PointBacked(self.rule, domain, self.name)


class StemBacked(PathSliceFn):
    """Function defined by a stem ``F`` through ``f(gamma^I(1)) = (1, I) F(gamma)``.

    Evaluation at ``q`` reads the stem on a path reaching ``q`` in its own
    slice; it is single-valued when the domain is self-stem-preserving.
    """

    def __init__(self, stem_fn: Callable[[PathC], StemValue], domain: Domain, name: str = "stem-fn",
                 pathfinder="auto"):
        super().__init__(domain)
        self.stem_fn = stem_fn
        self.name = name
        self.pathfinder = pathfinder

    def stem(self, gamma):
        return self.stem_fn(gamma)

    def __call__(self, q):
        gamma = find_path(self.domain, q, self.pathfinder)
        if gamma is None:
            raise NoPathFound(f"no path to {q} in {self.domain!r}")
        return represent(self.stem_fn(gamma), q.I)

    def on(self, domain):
        return StemBacked(self.stem_fn, domain, self.name, self.pathfinder)


class SumFn(PathSliceFn):
    def __init__(self, f: PathSliceFn, g: PathSliceFn):
        super().__init__(f.domain)
        self.f, self.g = f, g
        self.name = f"({f.name} + {g.name})"

    def __call__(self, q):
        return self.f(q) + self.g(q)

    def stem(self, gamma):
        a, b = self.f.stem(gamma), self.g.stem(gamma)
        return None if a is None or b is None else a + b

    def on(self, domain):
        return SumFn(self.f.on(domain), self.g.on(domain))


class ScaledFn(PathSliceFn):
    """Real multiple ``lam * f``."""

    def __init__(self, lam: float, f: PathSliceFn):
        super().__init__(f.domain)
        self.lam, self.f = lam, f
        self.name = f"{lam:g}*{f.name}"

    def __call__(self, q):
        return self.f(q) * self.lam

    def stem(self, gamma):
        a = self.f.stem(gamma)
        return None if a is None else a.scale(self.lam)

    def on(self, domain):
        return ScaledFn(self.lam, self.f.on(domain))


# -- extraction -----------------------------------------------------------------

Matrix2 = tuple[tuple[Quaternion, Quaternion], tuple[Quaternion, Quaternion]]


def two_by_two_inverse(I: UnitImaginary, J: UnitImaginary, delta_min: float = DELTA_MIN) -> Matrix2:
    """``[[1, I], [1, J]]^{-1}`` as ``(I - J)^{-1} [[I, -J], [1, -1]]``."""
    d = I.q - J.q
    if d.norm() < delta_min:
        raise IllConditionedPair(f"|I - J| = {d.norm():.3g} < {delta_min}")
    inv = q_inv(d)
    return ((inv * I.q, inv * (-J.q)), (inv, -inv))


def mat_vec(M: Matrix2, v: tuple[Quaternion, Quaternion]) -> tuple[Quaternion, Quaternion]:
    return (M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1])


def lifted_end(gamma: PathC, I: UnitImaginary) -> SlicePoint:
    """``gamma^I(1)``."""
    return embed(ComplexPoint.from_complex(gamma.z[-1]), I)


def extract_stem(f: Callable[[SlicePoint], Quaternion], omega2: Domain, gamma: PathC,
                 I: UnitImaginary, J: UnitImaginary, delta_min: float = DELTA_MIN,
                 check: bool = True) -> StemValue:
    """Stem of ``f`` on ``gamma`` from its values at ``gamma^I(1)`` and ``gamma^J(1)``.

    Raises
    ------
    UnitsNotAdmissible
        If ``gamma^I`` or ``gamma^J`` leaves ``omega2`` (only when ``check``).
    IllConditionedPair
        If ``|I - J| < delta_min``.
    """
    if check:
        for u in (I, J):
            if not omega2.lift_mask(gamma, u):
                raise UnitsNotAdmissible(f"unit {u.to_list()} lifts the path out of {omega2!r}")
    M = two_by_two_inverse(I, J, delta_min)
    F1, F2 = mat_vec(M, (f(lifted_end(gamma, I)), f(lifted_end(gamma, J))))
    return StemValue(F1, F2)


def choose_pair(units: Sequence[UnitImaginary], delta_min: float = DELTA_MIN) -> tuple[UnitImaginary, UnitImaginary]:
    """Best-conditioned pair: the first ``(I, -I)`` available, else the farthest pair."""
    units = list(units)
    if len(units) < 2:
        raise InsufficientUnits(f"{len(units)} admissible unit(s), need 2")
    arr = units_to_array(units)
    for a, u in enumerate(arr):
        hit = np.flatnonzero(np.max(np.abs(arr + u), axis=1) <= 1e-12)
        if hit.size:
            return units[a], units[int(hit[0])]
    d = np.linalg.norm(arr[:, None, :] - arr[None, :, :], axis=-1)
    a, b = np.unravel_index(int(np.argmax(d)), d.shape)
    if d[a, b] < delta_min:
        raise IllConditionedPair(f"widest admissible pair has |I - J| = {d[a, b]:.3g} < {delta_min}")
    return units[int(a)], units[int(b)]


def admissible_units(omega: Domain, gamma: PathC, units: Sequence[UnitImaginary],
                     delta_min: float = DELTA_MIN, refine_angles=REFINE_ANGLES) -> list[UnitImaginary]:
    """Sampled units lifting ``gamma`` into ``omega``, topped up with nearby units if needed.

    When fewer than two sampled units are admissible, or no admissible pair is
    ``delta_min`` apart, units at ``refine_angles`` around the admissible ones
    are added (largest angle first) until a well-conditioned pair exists.
    """
    adm = slice_units(omega, gamma, units)
    if not adm or not refine_angles or _has_pair(adm, delta_min):
        return adm
    out = list(adm)
    for angle in refine_angles:
        for I in adm:
            out += [J for J in nearby_units(I, (angle,)) if omega.lift_mask(gamma, J)]
        if _has_pair(out, delta_min):
            break
    return out


def _has_pair(units, delta_min) -> bool:
    try:
        choose_pair(units, delta_min)
        return True
    except (InsufficientUnits, IllConditionedPair):
        return False


def sub_stem(f: PathSliceFn, omega1: Domain | None, gamma: PathC, units: Sequence[UnitImaginary],
             delta_min: float = DELTA_MIN, verify: bool = False, tol: float = 1e-9) -> StemValue:
    """The sub-stem of ``f`` on a path ``gamma`` of ``omega1``.

    Admissible units are those lifting ``gamma`` into ``f.domain``.  With
    ``verify`` the path is checked to belong to ``omega1`` and the result is
    compared against every other well-conditioned admissible pair.
    """
    adm = admissible_units(f.domain, gamma, units, delta_min)
    if len(adm) < 2:
        raise InsufficientUnits(f"{len(adm)} admissible unit(s) for {gamma!r} in {f.domain!r}")
    I, J = choose_pair(adm, delta_min)
    F = extract_stem(f, f.domain, gamma, I, J, delta_min, check=False)
    if verify:
        if omega1 is not None and not in_path_class(omega1, gamma, units):
            raise UnitsNotAdmissible(f"{gamma!r} is not a path of {omega1!r} at this resolution")
        for a, b in itertools.combinations(adm, 2):
            if a.distance(b) < delta_min:
                continue
            G = extract_stem(f, f.domain, gamma, a, b, delta_min, check=False)
            if not F.is_close(G, tol):
                raise NotPathSlice(f"pairs disagree by {F.distance(G):.3g} on {gamma!r}")
    return F


def point_stem(g: PathSliceFn, omega1: Domain, q: SlicePoint, units: Sequence[UnitImaginary],
               pathfinder="auto", delta_min: float = DELTA_MIN, attested: bool = False,
               h: float = DEFAULT_GRID_STEP, max_step: float = DEFAULT_MAX_STEP) -> StemValue:
    """Stem of ``g`` read at a point ``q`` of ``omega1``.

    Real points give ``(g(q), 0)``; otherwise a path whose lift at the
    canonical unit of ``q`` stays in ``omega1`` and ends at ``q`` is found and
    the sub-stem taken on it.  Unless ``attested`` is set, the result carries
    the note ``"unverified well-definedness"``.
    """
    note = None if attested else "unverified well-definedness"
    if q.is_real:
        return StemValue(g(q), ZERO, note)
    gamma = find_path(omega1, q, pathfinder, h, max_step)
    if gamma is None:
        raise NoPathFound(f"no path reaches {q.to_json()} inside {omega1!r}")
    F = sub_stem(g, omega1, gamma, units, delta_min)
    return StemValue(F.F1, F.F2, note)


# -- verification -----------------------------------------------------------------

def _report(check: str, witnesses: list, resolution: dict, stats: dict,
            indeterminate: bool = False) -> CheckReport:
    if witnesses:
        verdict = VIOLATION
    elif indeterminate:
        verdict = INDETERMINATE
    else:
        verdict = NO_VIOLATION
    return CheckReport(check, verdict, witnesses[:MAX_WITNESSES], resolution, stats)


def verify_path_slice(f: PathSliceFn, omega: Domain, corpus: Sequence[PathC],
                      units: Sequence[UnitImaginary], tol: float = 1e-9,
                      delta_min: float = DELTA_MIN) -> CheckReport:
    """Check ``f(gamma^I(1)) = (1, I) F(gamma)`` for every admissible ``I`` on every path."""
    units = list(units)
    witnesses = []
    worst, skipped, evaluations = 0.0, 0, 0
    for gamma in corpus:
        adm = admissible_units(omega, gamma, units, delta_min)
        if len(adm) < 2:
            skipped += 1
            continue
        F = sub_stem(f, omega, gamma, adm, delta_min)
        for I in adm:
            r = (f(lifted_end(gamma, I)) - represent(F, I)).norm()
            evaluations += 1
            worst = max(worst, r)
            if r > tol:
                witnesses.append({"kind": "representation-residual", "path": gamma, "unit": I,
                                  "residual": r})
    return _report("path-slice-representation", witnesses,
                   {"units": len(units), "paths": len(corpus), "tol": tol},
                   {"max_residual": worst, "evaluations": evaluations, "skipped_paths": skipped,
                    "violations": len(witnesses)})


def check_pair_independence(f: PathSliceFn, omega: Domain, corpus: Sequence[PathC],
                            pairs: Sequence[tuple[UnitImaginary, UnitImaginary]],
                            tol: float = 1e-9, delta_min: float = DELTA_MIN) -> CheckReport:
    """Stems from each given unit pair agree on every path admitting the pair."""
    witnesses, worst, used = [], 0.0, 0
    for gamma in corpus:
        stems = []
        for I, J in pairs:
            if omega.lift_mask(gamma, I) and omega.lift_mask(gamma, J):
                stems.append(extract_stem(f, omega, gamma, I, J, delta_min, check=False))
        if len(stems) < 2:
            continue
        used += 1
        d = max(stems[0].distance(s) for s in stems[1:])
        worst = max(worst, d)
        if d > tol:
            witnesses.append({"kind": "pair-dependence", "path": gamma, "deviation": d})
    return _report("sub-stem-well-defined", witnesses,
                   {"pairs": [[a, b] for a, b in pairs], "tol": tol},
                   {"max_deviation": worst, "paths_compared": used},
                   indeterminate=used == 0)


def check_stem_symmetries(f: PathSliceFn, omega1: Domain, corpus: Sequence[PathC],
                          units: Sequence[UnitImaginary], tol: float = 1e-10,
                          delta_min: float = DELTA_MIN) -> CheckReport:
    """Conjugation symmetry, real-end-point degeneration and real point stems.

    * ``F(gamma) = diag(1, -1) F(conj gamma)``;
    * ``F(gamma) = (f(gamma(1)), 0)`` when ``gamma(1)`` is real;
    * the point stem at a real point equals ``(f(q), 0)`` and the sub-stem of
      any path ending there.
    """
    witnesses = []
    worst_conj = worst_real = worst_point = 0.0
    real_ends = checked = 0
    for gamma in corpus:
        if len(admissible_units(f.domain, gamma, units, delta_min)) < 2:
            continue
        checked += 1
        F = sub_stem(f, omega1, gamma, units, delta_min)
        Fc = sub_stem(f, omega1, conj_path(gamma), units, delta_min)
        r = F.distance(Fc.flip())
        worst_conj = max(worst_conj, r)
        if r > tol:
            witnesses.append({"kind": "conjugation", "path": gamma, "residual": r})
        end = gamma.z[-1]
        if np.all(np.abs(end.imag) < 1e-12):
            real_ends += 1
            q = SlicePoint(end.real, np.zeros(gamma.n))
            fq = f(q)
            r = max(F.F2.norm(), (F.F1 - fq).norm())
            worst_real = max(worst_real, r)
            if r > tol:
                witnesses.append({"kind": "real-endpoint", "path": gamma, "residual": r})
            P = point_stem(f, omega1, q, units, delta_min=delta_min, attested=True)
            r = max(P.distance(StemValue(fq, ZERO)), P.distance(F))
            worst_point = max(worst_point, r)
            if r > tol:
                witnesses.append({"kind": "real-point-stem", "point": q, "residual": r})
    return _report("stem-symmetries", witnesses, {"units": len(units), "tol": tol},
                   {"paths_checked": checked, "real_endpoints": real_ends,
                    "max_conjugation_residual": worst_conj,
                    "max_real_endpoint_residual": worst_real,
                    "max_real_point_stem_residual": worst_point})


def check_stem_coincidence(f: PathSliceFn, omega: Domain, pairs: Sequence[PathPair],
                           units: Sequence[UnitImaginary], tol: float = 1e-9,
                           delta_min: float = DELTA_MIN) -> CheckReport:
    """Paths with a common end point and two shared units carry the same stem.

    Pairs sharing exactly one sampled unit are reported as indeterminate.
    """
    units = list(units)
    witnesses, worst, compared, boundary = [], 0.0, 0, 0
    for pair in pairs:
        sa = omega.lift_mask(pair.alpha, units)
        sb = omega.lift_mask(pair.beta, units)
        shared = [units[k] for k in np.flatnonzero(sa & sb)]
        if len(shared) == 1:
            boundary += 1
            continue
        if len(shared) < 2:
            continue
        I, J = choose_pair(shared, delta_min)
        Fa = extract_stem(f, omega, pair.alpha, I, J, delta_min, check=False)
        Fb = extract_stem(f, omega, pair.beta, I, J, delta_min, check=False)
        Ga = sub_stem(f, omega, pair.alpha, units, delta_min)
        Gb = sub_stem(f, omega, pair.beta, units, delta_min)
        d = max(Fa.distance(Fb), Ga.distance(Gb))
        compared += 1
        worst = max(worst, d)
        if d > tol:
            witnesses.append({"kind": "stem-mismatch", "pair": pair, "deviation": d})
    return _report("stem-coincidence", witnesses, {"units": len(units), "tol": tol},
                   {"pairs_compared": compared, "pairs_single_shared_unit": boundary,
                    "max_deviation": worst},
                   indeterminate=boundary > 0 and compared == 0)


def check_stem_restriction(f: PathSliceFn, omega1: Domain, corpus: Sequence[PathC],
                           units: Sequence[UnitImaginary], tol: float = 1e-10,
                           delta_min: float = DELTA_MIN,
                           stem_fn: Callable[[PathC], StemValue] | None = None) -> CheckReport:
    """For a function carrying a stem ``F``: the sub-stem reproduces ``F`` on the corpus.

    ``stem_fn`` overrides ``f.stem`` (e.g. a closed-form oracle).
    """
    stem_fn = stem_fn or f.stem
    witnesses, worst, checked = [], 0.0, 0
    for gamma in corpus:
        G = stem_fn(gamma)
        if G is None or len(admissible_units(f.domain, gamma, units, delta_min)) < 2:
            continue
        checked += 1
        d = sub_stem(f, omega1, gamma, units, delta_min).distance(G)
        worst = max(worst, d)
        if d > tol:
            witnesses.append({"kind": "stem-restriction", "path": gamma, "deviation": d})
    return _report("sub-stem-equals-stem", witnesses, {"units": len(units), "tol": tol},
                   {"paths_checked": checked, "max_deviation": worst},
                   indeterminate=checked == 0)


def check_point_stem_paths(f: PathSliceFn, omega1: Domain, probes: Sequence[SlicePoint],
                           units: Sequence[UnitImaginary], tol: float = 1e-9,
                           shifts=(0.3, -0.3, 0.15, -0.15), delta_min: float = DELTA_MIN,
                           max_step: float = DEFAULT_MAX_STEP) -> CheckReport:
    """The point stem does not depend on the path: straight vs L-shaped paths agree."""
    witnesses, worst, compared, near = [], 0.0, 0, 0
    for q in probes:
        if q.is_real or not omega1.contains(q):
            continue
        if q.near_real:
            near += 1
            continue
        a = find_path(omega1, q, "auto", max_step=max_step)
        b = next((p for p in (l_path_to(q, s, max_step) for s in shifts)
                  if omega1.lift_mask(p, q.I)), None)
        if a is None or b is None:
            continue
        try:
            Fa = sub_stem(f, omega1, a, units, delta_min)
            Fb = sub_stem(f, omega1, b, units, delta_min)
        except (InsufficientUnits, IllConditionedPair):
            continue
        compared += 1
        d = Fa.distance(Fb)
        worst = max(worst, d)
        if d > tol:
            witnesses.append({"kind": "path-dependence", "probe": q, "deviation": d})
    return _report("point-stem-well-defined", witnesses, {"units": len(units), "tol": tol},
                   {"probes_compared": compared, "near_real_skipped": near, "max_deviation": worst},
                   indeterminate=compared == 0)


def check_unique_stem(f: PathSliceFn, g: PathSliceFn, probes: Sequence[SlicePoint],
                      tol: float = 1e-10) -> CheckReport:
    """Two functions known to share a stem agree at every probe of their domain."""
    witnesses, worst, checked = [], 0.0, 0
    for q in probes:
        if not f.domain.contains(q):
            continue
        checked += 1
        d = (f(q) - g(q)).norm()
        worst = max(worst, d)
        if d > tol:
            witnesses.append({"kind": "value-mismatch", "probe": q, "deviation": d})
    return _report("shared-stem-uniqueness", witnesses, {"tol": tol},
                   {"probes_checked": checked, "max_deviation": worst})


__all__ = [
    "StemValue", "PathSliceFn", "PointBacked", "StemBacked", "SumFn", "ScaledFn",
    "IllConditionedPair", "UnitsNotAdmissible", "InsufficientUnits", "NoPathFound", "NotPathSlice",
    "DELTA_MIN", "represent", "two_by_two_inverse", "mat_vec", "lifted_end", "extract_stem",
    "choose_pair", "admissible_units", "sub_stem", "point_stem", "verify_path_slice", "check_pair_independence",
    "check_stem_symmetries", "check_stem_coincidence", "check_stem_restriction",
    "check_point_stem_paths", "check_unique_stem",
]
