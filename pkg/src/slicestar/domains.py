"""Domains in the slice cone as vectorised membership predicates, plus checkers.

Every checker here is a falsifier: it either produces a re-checkable witness
of a violation or reports that none was found at the stated resolution
(number of units, path sampling step, grid step, refinement angles).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .path_geom import (DEFAULT_MAX_STEP, PathC, conj_path, l_path_to, lift_array,
                        path_from_generator, polyline, straight_path_to)
from .quat_core import UnitImaginary, sphere_sample, units_to_array
from .slice_space import SlicePoint, conj_point

VIOLATION = "violation-found"
NO_VIOLATION = "no-violation-found"
INDETERMINATE = "indeterminate"

#: angles (radians) tried when looking for a second admissible unit next to a known one
REFINE_ANGLES = (0.2, 0.1, 0.05, 0.02, 0.01, 1e-3)
DEFAULT_GRID_STEP = 0.05
_CHUNK = 200_000


class UnknownDomain(KeyError):
    pass


class EmptyRealTrace(ValueError):
    """No real point of the domain was found although non-real probes were given."""


class Domain:
    """A subset of ``H_s^n`` given by a pure, vectorised membership predicate.

    Parameters
    ----------
    n : int
        Number of quaternionic variables.
    mask : callable
        Maps an array of quaternion coordinates of shape ``(..., n, 4)`` to a
        boolean array of shape ``(...)``.
    name, params : str, dict
        Constructor name and JSON-serialisable parameters (see :func:`make_domain`).
    x_bounds : (array, array)
        Bounding box of the real parts, used for grid search and sampling.
    y_bound : array
        ``|y_l| <= y_bound[l]`` for every point ``x + y I`` of the domain.
    declared : dict
        Properties claimed by the constructor (``euclidean_open``, ``meets_real``,
        ``weakly_axially_symmetric``, ``self_stem_preserving``), cross-checked by
        the harness.
    unit_hints : sequence of UnitImaginary, optional
        Slices worth over-sampling (defaults to ``+-i, +-j, +-k``); thin or
        single-slice domains are invisible to uniformly random units.
    """

    def __init__(self, n: int, mask: Callable[[np.ndarray], np.ndarray], name: str,
                 params: dict, x_bounds, y_bound, declared: dict | None = None,
                 unit_hints=None):
        self.n = int(n)
        self._mask = mask
        self.name = name
        self.params = params
        lo, hi = x_bounds
        self.x_bounds = (np.broadcast_to(np.asarray(lo, float), (self.n,)).copy(),
                         np.broadcast_to(np.asarray(hi, float), (self.n,)).copy())
        self.y_bound = np.broadcast_to(np.asarray(y_bound, float), (self.n,)).copy()
        self.declared = dict(declared or {})
        self.unit_hints = units_to_array(unit_hints if unit_hints is not None else sphere_sample(6, None))

    def __repr__(self) -> str:
        return f"Domain({self.name!r}, n={self.n})"

    def mask(self, Q: np.ndarray) -> np.ndarray:
        Q = np.asarray(Q, dtype=float)
        if Q.shape[-2:] != (self.n, 4):
            raise ValueError(f"expected coordinates of shape (..., {self.n}, 4), got {Q.shape}")
        return np.asarray(self._mask(Q), dtype=bool)

    def contains(self, q: SlicePoint) -> bool:
        if q.n != self.n:
            raise ValueError("dimension mismatch")
        return bool(self.mask(q.to_array()))

    def lift_mask(self, gamma: PathC, units) -> np.ndarray:
        """For each unit, whether every lifted sample of ``gamma`` lies in the domain."""
        if gamma.n != self.n:
            raise ValueError("path and domain dimensions differ")
        if isinstance(units, UnitImaginary):
            return bool(np.all(self.mask(lift_array(gamma, units))))
        uarr = units if isinstance(units, np.ndarray) else units_to_array(units)
        if uarr.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        return np.all(self.mask(lift_array(gamma, uarr)), axis=1)

    def to_json(self) -> dict:
        return {"name": self.name, "params": self.params}


# -- constructors ------------------------------------------------------------

def _quat_center(center, n: int | None):
    c = np.asarray(center, dtype=float)
    if c.ndim == 0:
        c = np.array([[float(c), 0, 0, 0]])
    elif c.ndim == 1 and c.size == 4 and (n is None or n == 1):
        c = c[None, :]
    elif c.ndim == 1:
        c = np.stack([c, np.zeros_like(c), np.zeros_like(c), np.zeros_like(c)], axis=1)
    if n is not None and c.shape[0] == 1 and n > 1:
        c = np.repeat(c, n, axis=0)
    return c


def euclidean_ball(center=0.0, radius: float = 1.0, n: int | None = None) -> Domain:
    """Open Euclidean ball of ``H^n`` intersected with the slice cone.

    ``center`` is a real scalar, a real vector, one quaternion ``[w, x, y, z]``
    (n = 1) or a list of quaternions.
    """
    c = _quat_center(center, n)
    n = c.shape[0]
    r2 = float(radius) ** 2

    def mask(Q):
        return np.sum((Q - c) ** 2, axis=(-1, -2)) < r2

    ci = np.linalg.norm(c[:, 1:], axis=1)
    real_center = bool(np.all(ci == 0))
    return Domain(
        n, mask, "euclidean_ball",
        {"center": np.asarray(center, float).tolist(), "radius": float(radius)},
        (c[:, 0] - radius, c[:, 0] + radius), ci + radius,
        declared={"euclidean_open": True,
                  "meets_real": bool(np.sum(ci ** 2) < r2),
                  "weakly_axially_symmetric": real_center,
                  "self_stem_preserving": bool(np.sum(ci ** 2) < r2)},
    )


def union(parts: Sequence[Domain], name: str = "union", params: dict | None = None,
          declared: dict | None = None) -> Domain:
    parts = list(parts)
    n = parts[0].n
    if any(p.n != n for p in parts):
        raise ValueError("all parts must share n")

    def mask(Q):
        out = parts[0].mask(Q)
        for p in parts[1:]:
            out = out | p.mask(Q)
        return out

    lo = np.min([p.x_bounds[0] for p in parts], axis=0)
    hi = np.max([p.x_bounds[1] for p in parts], axis=0)
    yb = np.max([p.y_bound for p in parts], axis=0)
    if params is None:
        params = {"parts": [p.to_json() for p in parts]}
    return Domain(n, mask, name, params, (lo, hi), yb, declared)


def nonaxisym_union() -> Domain:
    """``B(0, 1.1)`` united with the off-axis lens ``B(1 + i, 0.5)`` in ``H``.

    Euclidean-open, slice-connected and meeting the real axis, but not closed
    under conjugation (the lens around ``1 - i`` is missing).
    """
    d = union([euclidean_ball(0.0, 1.1), euclidean_ball([1.0, 1.0, 0.0, 0.0], 0.5)],
              name="nonaxisym_union", params={},
              declared={"euclidean_open": True, "meets_real": True,
                        "weakly_axially_symmetric": False, "self_stem_preserving": True})
    return d


def _segment_distance(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distance from points ``P`` (..., d) to the segments ``[A_s, B_s]``; min over s."""
    AB = B - A                                   # (S, d)
    L2 = np.maximum(np.sum(AB ** 2, axis=1), 1e-300)
    AP = P[..., None, :] - A                     # (..., S, d)
    t = np.clip(np.sum(AP * AB, axis=-1) / L2, 0.0, 1.0)
    D = AP - t[..., None] * AB
    return np.sqrt(np.min(np.sum(D ** 2, axis=-1), axis=-1))


def slice_tube(base: PathC, unit: UnitImaginary, thickness: float, slice_tol: float = 1e-9) -> Domain:
    """Points of the single slice ``C_I^n`` within ``thickness`` of the lifted base path.

    Only points of ``C_I^n`` (up to ``slice_tol``) belong to the tube, so every
    non-real path inside it admits exactly one unit up to sampling: the
    standard counterexample to the stem-preserving property.
    """
    iv = unit.to_array()
    z = base.z
    pts = np.concatenate([z.real, z.imag], axis=1)   # (K, 2n)
    A, B = pts[:-1], pts[1:]
    if len(A) == 0:
        A, B = pts, pts
    n = base.n

    def mask(Q):
        v = Q[..., 1:]
        b = v @ iv                                    # (..., n)
        off = np.linalg.norm(v - b[..., None] * iv, axis=-1)
        in_slice = np.all(off <= slice_tol, axis=-1)
        P = np.concatenate([Q[..., 0], b], axis=-1)   # (..., 2n)
        return in_slice & (_segment_distance(P, A, B) < thickness)

    lo = z.real.min(axis=0) - thickness
    hi = z.real.max(axis=0) + thickness
    yb = np.abs(z.imag).max(axis=0) + thickness
    return Domain(n, mask, "slice_tube",
                  {"base": base.to_json(), "unit": unit.to_list(), "thickness": float(thickness)},
                  (lo, hi), yb,
                  declared={"euclidean_open": False, "meets_real": bool(np.any(np.abs(z[0].imag) < thickness)),
                            "weakly_axially_symmetric": False, "self_stem_preserving": False},
                  unit_hints=[unit, -unit])


def halfspace(c: float = 0.0, n: int = 1, extent: float = 2.0) -> Domain:
    """``{q : Re q_1 < c}``; ``extent`` bounds the box used for grid search."""
    def mask(Q):
        return Q[..., 0, 0] < c

    lo = np.full(n, -extent)
    hi = np.full(n, extent)
    hi[0] = min(c, extent)
    return Domain(n, mask, "halfspace", {"c": float(c), "n": n, "extent": float(extent)},
                  (lo, hi), np.full(n, extent),
                  declared={"euclidean_open": True, "meets_real": True,
                            "weakly_axially_symmetric": True, "self_stem_preserving": True})


def _ball_from_params(p: dict) -> Domain:
    return euclidean_ball(p.get("center", 0.0), p.get("radius", 1.0), p.get("n"))


def _tube_from_params(p: dict) -> Domain:
    base = p["base"]
    base = path_from_generator(base) if "generator" in base else PathC.from_json(base)
    return slice_tube(base, UnitImaginary.from_vector(p.get("unit", [1, 0, 0])),
                      p.get("thickness", 0.1), p.get("slice_tol", 1e-9))


_REGISTRY: dict[str, Callable[[dict], Domain]] = {
    "euclidean_ball": _ball_from_params,
    "nonaxisym_union": lambda p: nonaxisym_union(),
    "slice_tube": _tube_from_params,
    "halfspace": lambda p: halfspace(p.get("c", 0.0), p.get("n", 1), p.get("extent", 2.0)),
    "union": lambda p: union([make_domain(d["name"], d.get("params", {})) for d in p["parts"]]),
}


def make_domain(name: str, params: dict | None = None) -> Domain:
    """Build a bundled domain by name: ``euclidean_ball``, ``nonaxisym_union``,
    ``slice_tube``, ``halfspace`` or ``union``."""
    try:
        ctor = _REGISTRY[name]
    except KeyError:
        raise UnknownDomain(name) from None
    return ctor(dict(params or {}))


def domain_from_json(data: dict) -> Domain:
    return make_domain(data["name"], data.get("params", {}))


# -- reports -----------------------------------------------------------------

@dataclass
class CheckReport:
    """Outcome of one falsification check."""

    check: str
    verdict: str
    witnesses: list = field(default_factory=list)
    resolution: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    found: dict = field(default_factory=dict, repr=False)   # reusable artefacts, not serialised

    @property
    def ok(self) -> bool:
        return self.verdict != VIOLATION

    def to_json(self) -> dict:
        return {"check": self.check, "verdict": self.verdict,
                "witnesses": [jsonable(w) for w in self.witnesses],
                "resolution": jsonable(self.resolution), "stats": jsonable(self.stats)}


def combine(check: str, reports: Sequence[CheckReport], resolution: dict | None = None) -> CheckReport:
    """Conjunction of several reports."""
    verdicts = [r.verdict for r in reports]
    if VIOLATION in verdicts:
        verdict = VIOLATION
    elif INDETERMINATE in verdicts:
        verdict = INDETERMINATE
    else:
        verdict = NO_VIOLATION
    out = CheckReport(check, verdict, resolution=dict(resolution or {}))
    for r in reports:
        out.witnesses.extend(dict(w, check=r.check) for w in r.witnesses)
        out.stats[r.check] = r.stats
        out.found.update(r.found)
    return out


def jsonable(obj):
    """Convert report contents (paths, points, units, arrays) to plain JSON types."""
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, UnitImaginary):
        return obj.to_list()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- slice units and path pairs ------------------------------------------------

def slice_units(omega: Domain, gamma: PathC, units: Sequence[UnitImaginary]) -> list[UnitImaginary]:
    """The sampled part of ``S(omega, gamma)``: units whose lift stays in ``omega``."""
    units = list(units)
    keep = omega.lift_mask(gamma, units)
    return [u for u, k in zip(units, keep) if k]


@dataclass(frozen=True)
class PathPair:
    """Two paths with a common end point."""

    alpha: PathC
    beta: PathC

    def __post_init__(self):
        if np.max(np.abs(self.alpha.z[-1] - self.beta.z[-1])) > 1e-12:
            raise ValueError("paths in a pair must share their end point")

    def to_json(self) -> dict:
        return {"alpha": self.alpha.to_json(), "beta": self.beta.to_json()}


def _tangent_basis(I: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([1.0, 0.0, 0.0]) if abs(I[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(I, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(I, e1)


def nearby_units(I: UnitImaginary, angles=REFINE_ANGLES) -> list[UnitImaginary]:
    """Units at the given angular distances from ``I`` in four tangent directions."""
    v = I.to_array()
    e1, e2 = _tangent_basis(v)
    out = []
    for a in angles:
        for e in (e1, e2, -e1, -e2):
            out.append(UnitImaginary.from_vector(math.cos(a) * v + math.sin(a) * e))
    return out


def _second_unit(omega: Domain, paths: Sequence[PathC], I: UnitImaginary, angles) -> UnitImaginary | None:
    """A unit ``J != I`` near ``I`` admissible for every path, if one is found."""
    cands = nearby_units(I, angles)
    ok = np.ones(len(cands), dtype=bool)
    for p in paths:
        ok &= omega.lift_mask(p, cands)
    idx = np.flatnonzero(ok)
    return cands[idx[0]] if idx.size else None


# -- sampling helpers ----------------------------------------------------------

def random_units(count: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_points(omega: Domain, count: int, seed: int = 0, max_tries: int = 1000) -> list[SlicePoint]:
    """Rejection-sample ``count`` points of ``omega`` (uniform box coordinates).

    Half of the candidates use a uniformly random unit, the other half one of
    ``omega.unit_hints``.
    """
    rng = np.random.default_rng(seed)
    lo, hi = omega.x_bounds
    out: list[SlicePoint] = []
    for _ in range(max_tries):
        if len(out) >= count:
            break
        m = 4 * (count - len(out)) + 16
        x = rng.uniform(lo, hi, size=(m, omega.n))
        y = rng.uniform(-omega.y_bound, omega.y_bound, size=(m, omega.n))
        u = random_units(m, rng)
        hinted = rng.random(m) < 0.5
        u[hinted] = omega.unit_hints[rng.integers(len(omega.unit_hints), size=int(hinted.sum()))]
        Q = np.empty((m, omega.n, 4))
        Q[..., 0] = x
        Q[..., 1:] = y[..., None] * u[:, None, :]
        inside = omega.mask(Q)
        for k in np.flatnonzero(inside)[: count - len(out)]:
            out.append(SlicePoint(x[k], y[k], UnitImaginary.from_vector(u[k])))
    return out


def real_grid(omega: Domain, h: float = DEFAULT_GRID_STEP) -> np.ndarray:
    """Grid points of ``omega`` on ``R^n`` (step ``h``), shape ``(m, n)``."""
    lo, hi = omega.x_bounds
    axes = [h * np.arange(math.floor(a / h), math.ceil(b / h) + 1) for a, b in zip(lo, hi)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, omega.n)
    Q = np.zeros(X.shape + (4,))
    Q[..., 0] = X
    return X[omega.mask(Q)]


# -- path finding ---------------------------------------------------------------

def _grid_axes(omega: Domain, h: float) -> list[np.ndarray]:
    axes = []
    for l in range(omega.n):
        lo, hi = omega.x_bounds[0][l], omega.x_bounds[1][l]
        yb = omega.y_bound[l]
        axes.append(h * np.arange(math.floor(lo / h), math.ceil(hi / h) + 1))
        axes.append(h * np.arange(-math.ceil(yb / h), math.ceil(yb / h) + 1))
    return axes


def _grid_inside(omega: Domain, I: UnitImaginary, axes: list[np.ndarray]) -> np.ndarray:
    shape = tuple(len(a) for a in axes)
    total = int(np.prod(shape))
    iv = I.to_array()
    inside = np.empty(total, dtype=bool)
    for start in range(0, total, _CHUNK):
        idx = np.unravel_index(np.arange(start, min(total, start + _CHUNK)), shape)
        Q = np.empty((idx[0].size, omega.n, 4))
        for l in range(omega.n):
            Q[:, l, 0] = axes[2 * l][idx[2 * l]]
            Q[:, l, 1:] = axes[2 * l + 1][idx[2 * l + 1]][:, None] * iv
        inside[start:start + idx[0].size] = omega.mask(Q)
    return inside.reshape(shape)


def _dilate(front: np.ndarray) -> np.ndarray:
    out = front.copy()
    for ax in range(front.ndim):
        lo = [slice(None)] * front.ndim
        hi = [slice(None)] * front.ndim
        lo[ax], hi[ax] = slice(0, -1), slice(1, None)
        out[tuple(lo)] |= front[tuple(hi)]
        out[tuple(hi)] |= front[tuple(lo)]
    return out


def grid_bfs_path(omega: Domain, q: SlicePoint, h: float = DEFAULT_GRID_STEP,
                  max_step: float = DEFAULT_MAX_STEP) -> PathC | None:
    """Breadth-first search in the slice of ``q`` from ``omega`` ∩ ``R^n`` to ``q``.

    The search runs on a grid of step ``h`` in the ``(x_l, y_l)`` coordinates of
    the slice ``C_{I}^n``, ``I`` the canonical unit of ``q``, with face-adjacent
    moves.  Returns ``None`` when the component of ``q`` contains no real grid
    node.  Only ``n <= 2`` is supported.
    """
    if omega.n > 2:
        raise ValueError("grid search is limited to n <= 2")
    I = q.I
    axes = _grid_axes(omega, h)
    inside = _grid_inside(omega, I, axes)
    zero = tuple(int(np.argmin(np.abs(axes[2 * l + 1]))) for l in range(omega.n))
    seeds = np.zeros_like(inside)
    sl = [slice(None)] * inside.ndim
    for l in range(omega.n):
        sl[2 * l + 1] = zero[l]
    seeds[tuple(sl)] = inside[tuple(sl)]
    if not seeds.any():
        return None

    coords = np.empty(2 * omega.n)
    coords[0::2], coords[1::2] = q.x, q.y
    # candidate target nodes: corners of the grid cell around q
    cell = []
    for a, c in zip(axes, coords):
        k = int(np.clip(np.searchsorted(a, c) - 1, 0, len(a) - 2))
        cell.append((k, k + 1))
    targets = [t for t in itertools.product(*cell) if inside[t]]
    targets.sort(key=lambda t: sum((axes[d][t[d]] - coords[d]) ** 2 for d in range(len(t))))
    if not targets:
        return None

    dist = np.full(inside.shape, -1, dtype=np.int32)
    dist[seeds] = 0
    front, d = seeds, 0
    while front.any() and not any(dist[t] >= 0 for t in targets):
        d += 1
        front = _dilate(front) & inside & (dist < 0)
        dist[front] = d
    reached = [t for t in targets if dist[t] >= 0]
    if not reached:
        return None

    node = reached[0]
    nodes = [node]
    while dist[node] > 0:
        for ax in range(inside.ndim):
            for step in (-1, 1):
                nb = list(node)
                nb[ax] += step
                nb = tuple(nb)
                if 0 <= nb[ax] < inside.shape[ax] and dist[nb] == dist[node] - 1:
                    node = nb
                    break
            else:
                continue
            break
        nodes.append(node)
    nodes.reverse()
    pts = []
    for t in nodes:
        c = np.array([axes[d][t[d]] for d in range(len(t))])
        pts.append(c[0::2] + 1j * c[1::2])
    pts[0] = pts[0].real.astype(complex)
    pts.append(np.array(q.x) + 1j * np.array(q.y))
    path = polyline(pts, max_step, label="grid-bfs")
    return path if omega.lift_mask(path, I) else None


def _user_path(paths: Sequence[PathC], omega: Domain, q: SlicePoint) -> PathC | None:
    target = np.array(q.x) + 1j * np.array(q.y)
    for p in paths:
        if p.n != q.n:
            continue
        if np.max(np.abs(p.z[-1] - target)) <= 1e-12 and omega.lift_mask(p, q.I):
            return p
        if np.max(np.abs(p.z[-1] - np.conj(target))) <= 1e-12 and omega.lift_mask(p, -q.I):
            return conj_path(p)
    return None


def find_path(omega: Domain, q: SlicePoint, pathfinder="auto", h: float = DEFAULT_GRID_STEP,
              max_step: float = DEFAULT_MAX_STEP) -> PathC | None:
    """A path whose lift at the canonical unit of ``q`` stays in ``omega`` and ends at ``q``.

    ``pathfinder`` is ``"straight"``, ``"bfs"``, ``"auto"`` (straight, then BFS
    when ``n <= 2``) or a list of candidate paths.  Real ``q`` gets the
    constant path.
    """
    if q.is_real:
        return PathC(np.array([q.x, q.x], dtype=complex), label="constant")
    if not isinstance(pathfinder, str):
        return _user_path(pathfinder, omega, q)
    if pathfinder in ("straight", "auto"):
        p = straight_path_to(q, max_step)
        if omega.lift_mask(p, q.I):
            return p
        if pathfinder == "straight":
            return None
    if pathfinder in ("bfs", "auto") and omega.n <= 2:
        return grid_bfs_path(omega, q, h, max_step)
    if pathfinder not in ("straight", "bfs", "auto"):
        raise ValueError(f"unknown pathfinder {pathfinder!r}")
    return None


# -- checkers -------------------------------------------------------------------

def check_real_path_connected(omega: Domain, probes: Sequence[SlicePoint], pathfinder="auto",
                              h: float = DEFAULT_GRID_STEP, max_step: float = DEFAULT_MAX_STEP) -> CheckReport:
    """Try to reach every probe by a lifted path that starts on ``R^n``.

    Found paths are kept in ``report.found["paths"]`` (probe -> path) for reuse.
    """
    probes = [q for q in probes if omega.contains(q)]
    if any(not q.is_real for q in probes) and len(real_grid(omega, h)) == 0:
        raise EmptyRealTrace(f"no real points found in {omega!r} at grid step {h}")
    report = CheckReport("real-path-connected", NO_VIOLATION,
                         resolution={"grid_step": h, "max_step": max_step,
                                     "pathfinder": pathfinder if isinstance(pathfinder, str) else "user",
                                     "probes": len(probes)})
    found = {}
    near_real = 0
    for q in probes:
        near_real += q.near_real
        p = find_path(omega, q, pathfinder, h, max_step)
        if p is None:
            report.witnesses.append({"kind": "unreachable-probe", "probe": q, "unit": q.I})
        else:
            found[q] = p
    if report.witnesses:
        report.verdict = VIOLATION
    report.stats = {"reached": len(found), "unreached": len(report.witnesses),
                    "near_real_probes": near_real,
                    "by_strategy": _count_labels(found.values())}
    report.found["paths"] = found
    return report


def _count_labels(paths) -> dict:
    out: dict[str, int] = {}
    for p in paths:
        key = (p.label or "user").split("+")[0]
        key = "L" if key.startswith("L") else key
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


def in_path_class(omega: Domain, gamma: PathC, units) -> bool:
    """Whether some sampled unit lifts ``gamma`` into ``omega``."""
    return bool(np.any(omega.lift_mask(gamma, units)))


def check_stem_preserving(omega1: Domain, omega2: Domain, path_corpus: Sequence[PathC],
                          pair_corpus: Sequence[PathPair], units: Sequence[UnitImaginary],
                          refine_angles=REFINE_ANGLES) -> CheckReport:
    """Falsify "``omega2`` is ``omega1``-stem-preserving" on the given corpora.

    Condition (i): every path of ``omega1`` admits at least two units in
    ``omega2``.  Condition (ii): two paths of ``omega1`` with a common end
    point never share exactly one unit in ``omega2``.  When sampling finds a
    single unit, units next to it (``refine_angles``) are tried before a
    violation is declared; pass ``refine_angles=()`` to disable.
    """
    units = list(units)
    uarr = units_to_array(units)
    report = CheckReport("stem-preserving", NO_VIOLATION,
                         resolution={"units": len(units), "refine_angles": list(refine_angles),
                                     "paths": len(path_corpus), "pairs": len(pair_corpus)})
    skipped = refined = 0
    contained = 0
    counts = []
    cache: dict[int, np.ndarray] = {}

    def admissible(p):
        if id(p) not in cache:
            cache[id(p)] = omega2.lift_mask(p, uarr)
        return cache[id(p)]

    for gamma in path_corpus:
        if not in_path_class(omega1, gamma, uarr):
            skipped += 1
            continue
        adm = admissible(gamma)
        c = int(adm.sum())
        counts.append(c)
        if c == 1 and refine_angles:
            J = _second_unit(omega2, [gamma], units[int(np.flatnonzero(adm)[0])], refine_angles)
            if J is not None:
                refined += 1
                c = 2
        if c >= 1:
            contained += 1
        if c <= 1:
            report.witnesses.append({"kind": "fewer-than-two-units", "path": gamma,
                                     "admissible": [units[k] for k in np.flatnonzero(adm)]})
    pairs_checked = 0
    for pair in pair_corpus:
        a, b = pair.alpha, pair.beta
        if not (in_path_class(omega1, a, uarr) and in_path_class(omega1, b, uarr)):
            skipped += 1
            continue
        pairs_checked += 1
        shared = np.flatnonzero(admissible(a) & admissible(b))
        if shared.size == 1:
            I = units[int(shared[0])]
            if refine_angles and _second_unit(omega2, [a, b], I, refine_angles) is not None:
                refined += 1
                continue
            report.witnesses.append({"kind": "exactly-one-shared-unit", "pair": pair,
                                     "shared": [I]})
    if report.witnesses:
        report.verdict = VIOLATION
    report.stats = {"paths_checked": len(counts), "pairs_checked": pairs_checked,
                    "skipped_not_in_path_class": skipped, "resolved_by_refinement": refined,
                    "paths_contained_in_omega2_class": contained,
                    "min_admissible_units": min(counts) if counts else None}
    return report


def robustly_inside(omega: Domain, gamma: PathC, I: UnitImaginary, delta: float = 1e-7) -> bool:
    """``gamma^I`` stays in ``omega`` when shifted by ``+-delta`` and ``+-delta I`` in every variable.

    Rejects paths that only graze the boundary and are accepted through
    round-off.  The shifts stay inside the slice, so thin single-slice
    domains are unaffected.
    """
    Q = lift_array(gamma, I)
    shifts = np.zeros((4, 4))
    shifts[0, 0], shifts[1, 0] = delta, -delta
    shifts[2, 1:], shifts[3, 1:] = delta * I.to_array(), -delta * I.to_array()
    return bool(np.all(omega.mask(Q[None] + shifts[:, None, None, :])))


def build_corpus(omega: Domain, endpoints: Sequence[SlicePoint], units: Sequence[UnitImaginary] = (),
                 max_step: float = DEFAULT_MAX_STEP, shifts=(0.3, -0.3, 0.15, -0.15),
                 extra: dict | None = None) -> tuple[list[PathC], list[PathPair]]:
    """Path and pair corpora of ``omega`` from a list of end points.

    For each end point ``q`` the straight path and an L-shaped path from a
    shifted real start are tried in the slice of ``q``; paths whose lift
    leaves ``omega`` are dropped.  ``extra`` maps end points to additional
    paths (e.g. the ones found by :func:`check_real_path_connected`); these
    replace the straight path when it fails.  Real end points get "bump"
    paths that leave ``R^n`` and come back.
    """
    extra = extra or {}
    paths: list[PathC] = []
    pairs: list[PathPair] = []
    uarr = units_to_array(units) if len(units) else None
    for q in endpoints:
        if q.is_real:
            cands = [_bump_path(q, s, h, max_step) for s in shifts for h in (0.2, 0.1)]
            good = []
            for p in cands:
                adm = omega.lift_mask(p, uarr) if uarr is not None else np.zeros(0, bool)
                if adm.any() and robustly_inside(omega, p, units[int(np.flatnonzero(adm)[0])]):
                    good.append(p)
        else:
            first = straight_path_to(q, max_step)
            good = [first] if robustly_inside(omega, first, q.I) else []
            if not good and q in extra:
                good = [extra[q]]
            for s in shifts:
                p = l_path_to(q, s, max_step)
                if robustly_inside(omega, p, q.I):
                    good.append(p)
                    break
        paths.extend(good[:2])
        if len(good) >= 2:
            pairs.append(PathPair(good[0], good[1]))
    return paths, pairs


def _bump_path(q: SlicePoint, shift: float, height: float, max_step: float) -> PathC:
    x = np.array(q.x)
    x0 = x + shift
    return polyline([x0, x0 + 1j * height, x + 1j * height, x.astype(complex)], max_step,
                    label=f"bump{shift:+g}")


def check_self_stem_preserving(omega: Domain, probes: Sequence[SlicePoint], units: Sequence[UnitImaginary],
                               path_corpus: Sequence[PathC] | None = None,
                               pair_corpus: Sequence[PathPair] | None = None,
                               pathfinder="auto", h: float = DEFAULT_GRID_STEP,
                               max_step: float = DEFAULT_MAX_STEP,
                               refine_angles=REFINE_ANGLES) -> CheckReport:
    """Real-path-connectivity plus ``omega``-stem-preservation of ``omega``.

    Without explicit corpora, they are built from the probes with
    :func:`build_corpus`, reusing the paths found for the connectivity check.
    """
    rpc = check_real_path_connected(omega, probes, pathfinder, h, max_step)
    found = rpc.found.get("paths", {})
    inside = [q for q in probes if omega.contains(q)]
    paths, pairs = build_corpus(omega, inside, units, max_step, extra=found)
    paths = list(path_corpus or []) + paths
    pairs = list(pair_corpus or []) + pairs
    sp = check_stem_preserving(omega, omega, paths, pairs, units, refine_angles)
    out = combine("self-stem-preserving", [rpc, sp],
                  resolution={"units": len(units), "grid_step": h, "max_step": max_step,
                              "refine_angles": list(refine_angles)})
    out.found["corpus"] = (paths, pairs)
    return out


def check_weakly_axially_symmetric(omega: Domain, probes: Sequence[SlicePoint]) -> CheckReport:
    """Look for a probe of ``omega`` whose conjugate ``x - yI`` is outside ``omega``."""
    report = CheckReport("weakly-axially-symmetric", NO_VIOLATION)
    checked = 0
    for q in probes:
        if not omega.contains(q):
            continue
        checked += 1
        qc = conj_point(q)
        if not omega.contains(qc):
            report.witnesses.append({"kind": "conjugate-outside", "probe": q, "conjugate": qc})
    if report.witnesses:
        report.verdict = VIOLATION
    report.resolution = {"probes": checked}
    report.stats = {"probes_checked": checked, "violations": len(report.witnesses)}
    return report


def recheck_witness(witness: dict, omega2: Domain, units: Sequence[UnitImaginary] = ()) -> bool:
    """Re-run the membership tests behind a stored witness; True if it still holds.

    ``units`` is the unit sample of the original check (needed for the
    stem-preserving witness kinds).
    """
    kind = witness["kind"]
    if kind == "fewer-than-two-units":
        return len(slice_units(omega2, witness["path"], units)) <= 1
    if kind == "exactly-one-shared-unit":
        pair = witness["pair"]
        sa = slice_units(omega2, pair.alpha, units)
        sb = slice_units(omega2, pair.beta, units)
        return len([u for u in sa if u in sb]) == 1
    if kind == "conjugate-outside":
        return omega2.contains(witness["probe"]) and not omega2.contains(witness["conjugate"])
    if kind == "unreachable-probe":
        return find_path(omega2, witness["probe"], "auto") is None
    raise ValueError(f"unknown witness kind {kind!r}")


__all__ = [
    "Domain", "PathPair", "CheckReport", "UnknownDomain", "EmptyRealTrace",
    "VIOLATION", "NO_VIOLATION", "INDETERMINATE",
    "euclidean_ball", "nonaxisym_union", "slice_tube", "halfspace", "union", "make_domain",
    "domain_from_json", "slice_units", "check_real_path_connected", "check_stem_preserving",
    "check_self_stem_preserving", "check_weakly_axially_symmetric", "build_corpus",
    "sample_points", "real_grid", "find_path", "grid_bfs_path", "nearby_units", "in_path_class",
    "robustly_inside",
    "recheck_witness", "combine", "jsonable",
]
