"""Finite-difference Cauchy-Riemann residuals on the slices ``C_I^n``.

For a grid point ``q = x + yI`` the residual in variable ``l`` is::

    | (f(q + h e_x) - f(q - h e_x)) / 2h + I (f(q + h e_y) - f(q - h e_y)) / 2h | / 2

i.e. a central-difference discretisation of ``(d/dx_l + I d/dy_l) f / 2``.
Its truncation error is ``h^2 |f'''| / 6`` for a slice-holomorphic ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .domains import NO_VIOLATION, VIOLATION, CheckReport, Domain
from .quat_core import Quaternion, UnitImaginary, sphere_sample
from .slice_space import SlicePoint
from .stem import DELTA_MIN, PathSliceFn
from .star import fn_star

DEFAULT_H = 1e-3
DEFAULT_GRID = 17


class StencilLeavesDomain(ValueError):
    """No grid point has its whole stencil inside the domain."""


@dataclass
class CRReport:
    """Per-point, per-variable residuals for one slice and one step."""

    unit: UnitImaginary
    h: float
    points: list = field(default_factory=list)      # (x, y) coordinate pairs in the slice
    residuals: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    skipped: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    def rows(self):
        """``(unit, h, x, y, variable, residual)`` rows for CSV output."""
        for (x, y), res in zip(self.points, self.residuals):
            for l, r in enumerate(res):
                yield (self.unit.to_list(), self.h, list(x), list(y), l, float(r))


def _point(x: np.ndarray, y: np.ndarray, I: UnitImaginary) -> SlicePoint:
    return SlicePoint(x, y, I)


def cr_residual(f: Callable[[SlicePoint], Quaternion], omega: Domain, I: UnitImaginary,
                grid: Sequence, h: float = DEFAULT_H) -> CRReport:
    """Central-difference Cauchy-Riemann residuals of ``f`` on the slice ``C_I^n``.

    ``grid`` holds slice points of ``C_I^n`` (or ``(x, y)`` coordinate pairs with
    respect to ``I``).  Points whose stencil leaves ``omega`` are skipped and
    listed in ``report.skipped``.
    """
    report = CRReport(I, h)
    rows = []
    Iq = I.q
    for g in grid:
        if isinstance(g, SlicePoint):
            x, y = g.coords_in(I)
        else:
            x, y = (np.asarray(c, dtype=float) for c in g)
        n = x.size
        stencil = []
        for l in range(n):
            e = np.zeros(n)
            e[l] = h
            stencil.append((_point(x + e, y, I), _point(x - e, y, I),
                            _point(x, y + e, I), _point(x, y - e, I)))
        flat = [p for quad in stencil for p in quad]
        if not all(omega.contains(p) for p in flat + [_point(x, y, I)]):
            report.skipped.append((x.tolist(), y.tolist()))
            continue
        res = []
        for xp, xm, yp, ym in stencil:
            dx = (f(xp) - f(xm)) / (2 * h)
            dy = (f(yp) - f(ym)) / (2 * h)
            res.append((dx + Iq * dy).norm() / 2)
        report.points.append((x.tolist(), y.tolist()))
        rows.append(res)
    if not rows and grid:
        raise StencilLeavesDomain(f"every stencil leaves {omega!r} (h = {h})")
    report.residuals = np.array(rows, dtype=float).reshape(len(rows), omega.n)
    return report


def slice_grid(omega: Domain, I: UnitImaginary, size: int = DEFAULT_GRID,
               margin: float = 0.0) -> list[tuple[np.ndarray, np.ndarray]]:
    """``size x size`` grid in each ``(x_l, y_l)`` plane of ``C_I^n``, restricted to ``omega``.

    For ``n > 1`` the other coordinates sit at the centre of the bounding box
    (real parts) and zero (imaginary parts).
    """
    lo, hi = omega.x_bounds
    yb = omega.y_bound
    centre_x = (lo + hi) / 2
    out = []
    for l in range(omega.n):
        xs = np.linspace(lo[l] + margin, hi[l] - margin, size)
        ys = np.linspace(-yb[l] + margin, yb[l] - margin, size)
        for a in xs:
            for b in ys:
                x, y = centre_x.copy(), np.zeros(omega.n)
                x[l], y[l] = a, b
                if omega.contains(SlicePoint(x, y, I)):
                    out.append((x, y))
    return out


def cr_scan(f, omega: Domain, units: Sequence[UnitImaginary], h: float = DEFAULT_H,
            size: int = DEFAULT_GRID) -> list[CRReport]:
    return [cr_residual(f, omega, I, slice_grid(omega, I, size), h) for I in units]


def convergence_order(coarse: float, fine: float) -> float:
    """``log2(coarse / fine)``; ``nan`` unless both residuals are positive."""
    if coarse > 0 and fine > 0:
        return math.log2(coarse / fine)
    return float("nan")


def cr_ratio(f, omega: Domain, units: Sequence[UnitImaginary], h: float = DEFAULT_H,
             size: int = DEFAULT_GRID) -> float:
    """Max residual at ``h`` over max residual at ``h / 2`` (about 4 for smooth, non-quadratic ``f``)."""
    rc = max(r.max_residual for r in cr_scan(f, omega, units, h, size))
    rf = max(r.max_residual for r in cr_scan(f, omega, units, h / 2, size))
    return rc / rf if rf > 0 else float("inf")


def check_cr(f, omega: Domain, units: Sequence[UnitImaginary], h: float = DEFAULT_H,
             tol: float = 1e-8, size: int = DEFAULT_GRID) -> CheckReport:
    """Every slice residual of ``f`` at step ``h`` is at most ``tol``."""
    reports = cr_scan(f, omega, units, h, size)
    witnesses = []
    for r in reports:
        for (x, y), res in zip(r.points, r.residuals):
            if res.max() > tol and len(witnesses) < 20:
                witnesses.append({"kind": "cr-residual", "unit": r.unit, "x": x, "y": y,
                                  "residual": float(res.max())})
    return CheckReport("cr-residual", VIOLATION if witnesses else NO_VIOLATION, witnesses,
                       {"h": h, "units": len(units), "grid": size, "tol": tol},
                       {"max_residual": max(r.max_residual for r in reports),
                        "points": sum(len(r.points) for r in reports),
                        "skipped": sum(len(r.skipped) for r in reports)})


def verify_regular_closed_under_star(f: PathSliceFn, g: PathSliceFn, omega: Domain,
                                     units: Sequence[UnitImaginary] | None = None,
                                     size: int = DEFAULT_GRID, h: float = DEFAULT_H,
                                     abs_tol: float = 1e-8, min_order: float = 1.8,
                                     attestation=None, assume_hypotheses: bool | None = None,
                                     delta_min: float = DELTA_MIN) -> CheckReport:
    """CR residuals of ``f * g`` at steps ``h`` and ``h / 2``.

    Passes when the residual at ``h / 2`` is already below ``abs_tol`` (exact
    stencils, e.g. products of degree at most two) or when halving the step
    shows convergence of order at least ``min_order``.
    """
    units = list(units) if units is not None else sphere_sample(12, 0)
    if assume_hypotheses is None:
        assume_hypotheses = attestation is None
    fg = fn_star(f, g, omega, attestation=attestation, assume_hypotheses=assume_hypotheses,
                 delta_min=delta_min)
    coarse = cr_scan(fg, omega, units, h, size)
    fine = cr_scan(fg, omega, units, h / 2, size)
    rc = max(r.max_residual for r in coarse)
    rf = max(r.max_residual for r in fine)
    order = convergence_order(rc, rf)
    ok = rf <= abs_tol or (not math.isnan(order) and order >= min_order)
    witnesses = [] if ok else [{"kind": "cr-residual", "residual_h": rc, "residual_h2": rf, "order": order}]
    return CheckReport("slice-regularity-of-product", NO_VIOLATION if ok else VIOLATION, witnesses,
                       {"h": h, "units": len(units), "grid": size, "abs_tol": abs_tol,
                        "min_order": min_order},
                       {"max_residual_h": rc, "max_residual_h2": rf,
                        "order": None if math.isnan(order) else order,
                        "points": sum(len(r.points) for r in coarse),
                        "skipped": sum(len(r.skipped) for r in coarse)})


__all__ = ["CRReport", "StencilLeavesDomain", "cr_residual", "slice_grid", "cr_scan", "cr_ratio",
           "check_cr", "convergence_order", "verify_regular_closed_under_star"]
