"""Scenario files and suite orchestration.

A scenario is a JSON document naming domains, functions, a unit sample and a
list of checks.  :func:`run_suite` executes the checks and returns a
:class:`SuiteResult` whose JSON form is deterministic apart from the
``"timing"`` block.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from itertools import permutations
from pathlib import Path
from typing import Callable

import numpy as np

from .domains import (DEFAULT_GRID_STEP, INDETERMINATE, NO_VIOLATION, VIOLATION, CheckReport, Domain,
                      UnknownDomain, check_real_path_connected, check_self_stem_preserving,
                      check_stem_preserving, check_weakly_axially_symmetric, domain_from_json, jsonable,
                      real_grid, sample_points)
from .functions import Polynomial, function_from_json, random_polynomial
from .path_geom import DEFAULT_MAX_STEP, PathC, path_from_generator
from .quat_core import UNIT_I, UNIT_J, UNIT_K, UnitImaginary, sphere_sample
from .reg_check import DEFAULT_GRID, DEFAULT_H, check_cr, verify_regular_closed_under_star
from .slice_space import SlicePoint
from .star import (HypothesisNotMet, StemCache, check_real_restriction, check_star_oracle,
                   check_star_stem_closure, verify_algebra)
from .stem import (DELTA_MIN, PathSliceFn, StemBacked, check_pair_independence, check_point_stem_paths,
                   check_stem_coincidence, check_stem_restriction, check_stem_symmetries,
                   check_unique_stem, verify_path_slice)

DEFAULT_PAIRS = ((UNIT_I, -UNIT_I), (UNIT_J, -UNIT_J), (UNIT_I, UNIT_K))
REAL_PROBES = 5


class ScenarioError(ValueError):
    """Invalid scenario, with the 1-based line of the offending entry when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source or '<scenario>'}:{line}: " if line else f"{source or '<scenario>'}: "
        super().__init__(where + message)


def _line_of(text: str, *needles: str, after: int = 0, nth: int = 1) -> int | None:
    """``nth`` line past line ``after`` containing all ``needles`` (JSON-quoted), else any of them."""
    quoted = [json.dumps(n) for n in needles if n is not None]
    lines = list(enumerate(text.splitlines(), 1))[after:]
    for test in (all, any):
        hits = [k for k, line in lines if quoted and test(q in line for q in quoted)]
        if hits:
            return hits[min(nth, len(hits)) - 1]
    return None


@dataclass
class Scenario:
    """A parsed scenario; see ``slicestar/scenarios/*.json`` for the format."""

    name: str
    seed: int
    units_count: int
    units_seed: int
    max_step: float
    grid_step: float
    tol: float
    tight_tol: float
    cr_h: float
    cr_grid: int
    probe_count: int
    delta_min: float
    domains: dict
    functions: dict
    paths: list
    extra_probes: list
    checks: list
    assume_hypotheses: bool = False
    source: str | None = None
    text: str = ""

    def with_overrides(self, seed: int | None = None, units: int | None = None,
                       max_step: float | None = None, tol: float | None = None) -> Scenario:
        """Re-parse with command-line overrides (random functions depend on the seed)."""
        data = json.loads(self.text)
        if seed is not None:
            data["seed"] = seed
        if units is not None:
            data.setdefault("units", {})["count"] = units
        if max_step is not None:
            data["max_step"] = max_step
        if tol is not None:
            data.setdefault("tolerances", {})["tol"] = tol
        return parse_scenario(self.text, self.source, data)


def _get(data: dict, key: str, kind, default, text: str, source):
    value = data.get(key, default)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{key!r} must be {kind.__name__}, got {value!r}",
                            _line_of(text, key), source) from None


def parse_scenario(text: str, source: str | None = None, data: dict | None = None) -> Scenario:
    """Parse scenario JSON text; errors carry the line of the offending entry."""
    if data is None:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(exc.msg, exc.lineno, source) from None
    if not isinstance(data, dict):
        raise ScenarioError("top level must be an object", 1, source)
    units = data.get("units", {})
    tols = data.get("tolerances", {})
    seed = _get(data, "seed", int, 0, text, source)
    tol = _get(tols, "tol", float, 1e-9, text, source)
    tight = _get(tols, "tight", float, 1e-10, text, source)
    for key, v in (("tol", tol), ("tight", tight)):
        if not v > 0:
            raise ScenarioError(f"tolerance {key!r} must be positive", _line_of(text, key), source)

    domains = {}
    for name, spec in data.get("domains", {}).items():
        try:
            domains[name] = domain_from_json(spec)
        except UnknownDomain as exc:
            raise ScenarioError(f"unknown domain type {exc.args[0]!r}", _line_of(text, exc.args[0]), source) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"domain {name!r}: {exc}", _line_of(text, name), source) from None
    if not domains:
        raise ScenarioError("no domains defined", _line_of(text, "domains"), source)

    def domain_ref(name, where):
        if name not in domains:
            raise ScenarioError(f"{where}: unknown domain {name!r}", _line_of(text, name), source)
        return domains[name]

    functions = {}
    for k, (name, spec) in enumerate(data.get("functions", {}).items()):
        dom = domain_ref(spec.get("domain", next(iter(domains))), f"function {name!r}")
        try:
            if spec.get("type") == "random-polynomial":
                rng = np.random.default_rng([seed, k])
                fn = random_polynomial(dom, int(spec.get("degree", 3)), rng, float(spec.get("scale", 1.0)))
            else:
                fn = function_from_json(spec, dom)
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"function {name!r}: {exc}", _line_of(text, name), source) from None
        fn.name = name
        functions[name] = fn

    paths = []
    for spec in data.get("paths", []):
        try:
            paths.append(path_from_generator(spec) if "generator" in spec else PathC.from_json(spec))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"path: {exc}", _line_of(text, spec.get("generator", "samples")), source) from None

    probes = data.get("probes", {})
    extra = []
    for p in probes.get("extra", []):
        try:
            extra.append(SlicePoint.from_json(p))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"probe: {exc}", _line_of(text, "extra"), source) from None

    checks, keys = [], set()
    for spec in data.get("checks", []):
        name = spec.get("check")
        if name not in CHECKS:
            raise ScenarioError(f"unknown check {name!r}", _line_of(text, "check", name), source)
        key = spec.get("id", name)
        if key in keys:
            nth = sum(c["id"] == key for c in checks) + 1
            raise ScenarioError(f"duplicate check id {key!r}; add an \"id\"",
                                _line_of(text, key, after=_line_of(text, "checks") or 0, nth=nth), source)
        keys.add(key)
        for ref in [spec.get("function")] + list(spec.get("functions", [])):
            if ref is not None and ref not in functions:
                raise ScenarioError(f"check {key!r}: unknown function {ref!r}", _line_of(text, ref), source)
        for ref in (spec.get("domain"), spec.get("target")):
            if ref is not None:
                domain_ref(ref, f"check {key!r}")
        checks.append(dict(spec, id=key))

    return Scenario(
        name=str(data.get("name", source or "scenario")), seed=seed,
        units_count=_get(units, "count", int, 50, text, source),
        units_seed=_get(units, "seed", int, 0, text, source),
        max_step=_get(data, "max_step", float, DEFAULT_MAX_STEP, text, source),
        grid_step=_get(data, "grid_step", float, DEFAULT_GRID_STEP, text, source),
        tol=tol, tight_tol=tight,
        cr_h=_get(data, "cr_h", float, DEFAULT_H, text, source),
        cr_grid=_get(data, "cr_grid", int, DEFAULT_GRID, text, source),
        probe_count=_get(probes, "count", int, 20, text, source),
        delta_min=_get(data, "delta_min", float, DELTA_MIN, text, source),
        domains=domains, functions=functions, paths=paths, extra_probes=extra, checks=checks,
        assume_hypotheses=bool(data.get("assume_hypotheses", False)), source=source, text=text)


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files("slicestar") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(name_or_path: str | Path) -> Scenario:
    """Load a bundled scenario by name or a scenario file by path."""
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        return parse_scenario(path.read_text(), str(path))
    res = resources.files("slicestar") / "scenarios" / f"{name_or_path}.json"
    if not res.is_file():
        raise ScenarioError(f"no bundled scenario {str(name_or_path)!r} (have {bundled_scenarios()})")
    return parse_scenario(res.read_text(), f"{name_or_path}.json")


# -- execution -------------------------------------------------------------------

class SuiteContext:
    """Per-run caches: unit sample, probes, corpora and domain attestations."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.units = sphere_sample(sc.units_count, sc.units_seed)
        self.stem_cache = StemCache()
        self._probes: dict[int, list] = {}
        self._domain_reports: dict[int, CheckReport] = {}

    def domain(self, spec: dict) -> Domain:
        if "domain" in spec:
            return self.sc.domains[spec["domain"]]
        if "function" in spec:
            return self.fn(spec["function"]).domain
        if spec.get("functions"):
            return self.fn(spec["functions"][0]).domain
        return next(iter(self.sc.domains.values()))

    def fn(self, name: str) -> PathSliceFn:
        return self.sc.functions[name]

    def probes(self, omega: Domain) -> list[SlicePoint]:
        """Random slice probes, a few real probes, and the scenario's extra probes inside ``omega``."""
        key = id(omega)
        if key not in self._probes:
            pts = sample_points(omega, self.sc.probe_count, self.sc.seed)
            grid = real_grid(omega, self.sc.grid_step)
            if len(grid):
                idx = np.unique(np.linspace(0, len(grid) - 1, REAL_PROBES).round().astype(int))
                pts += [SlicePoint(grid[k], np.zeros(omega.n)) for k in idx]
            pts += [q for q in self.sc.extra_probes if q.n == omega.n and omega.contains(q)]
            self._probes[key] = pts
        return self._probes[key]

    def self_stem(self, omega: Domain) -> CheckReport:
        key = id(omega)
        if key not in self._domain_reports:
            extra = [p for p in self.sc.paths if p.n == omega.n]
            self._domain_reports[key] = check_self_stem_preserving(
                omega, self.probes(omega), self.units, path_corpus=extra,
                h=self.sc.grid_step, max_step=self.sc.max_step)
        return self._domain_reports[key]

    def corpus(self, omega: Domain):
        return self.self_stem(omega).found["corpus"]

    def star_kw(self, omega: Domain) -> dict:
        rep = self.self_stem(omega)
        return {"attestation": rep if rep.verdict == NO_VIOLATION else None,
                "assume_hypotheses": self.sc.assume_hypotheses,
                "units": self.units, "cache": self.stem_cache, "delta_min": self.sc.delta_min}


def _tol(ctx: SuiteContext, spec: dict, tight: bool = False) -> float:
    return float(spec.get("tol", ctx.sc.tight_tol if tight else ctx.sc.tol))


def _fns(ctx, spec, k):
    names = spec.get("functions", [])
    if len(names) < k:
        raise ScenarioError(f"check {spec['id']!r} needs {k} functions")
    return [ctx.fn(n) for n in names[:k]]


def _c_rpc(ctx, spec):
    om = ctx.domain(spec)
    return check_real_path_connected(om, ctx.probes(om), spec.get("pathfinder", "auto"),
                                     ctx.sc.grid_step, ctx.sc.max_step)


def _c_self(ctx, spec):
    return ctx.self_stem(ctx.domain(spec))


def _c_sp(ctx, spec):
    om1 = ctx.domain(spec)
    om2 = ctx.sc.domains[spec["target"]] if "target" in spec else om1
    paths, pairs = ctx.corpus(om1)
    return check_stem_preserving(om1, om2, paths, pairs, ctx.units)


def _c_axisym(ctx, spec):
    om = ctx.domain(spec)
    return check_weakly_axially_symmetric(om, ctx.probes(om))


def _c_repr(ctx, spec):
    f = ctx.fn(spec["function"])
    return verify_path_slice(f, f.domain, ctx.corpus(f.domain)[0], ctx.units, _tol(ctx, spec), ctx.sc.delta_min)


def _c_pairs(ctx, spec):
    f = ctx.fn(spec["function"])
    pairs = [tuple(UnitImaginary.from_vector(u) for u in p) for p in spec["pairs"]] \
        if "pairs" in spec else DEFAULT_PAIRS
    return check_pair_independence(f, f.domain, ctx.corpus(f.domain)[0], pairs, _tol(ctx, spec), ctx.sc.delta_min)


def _c_sym(ctx, spec):
    f = ctx.fn(spec["function"])
    return check_stem_symmetries(f, f.domain, ctx.corpus(f.domain)[0], ctx.units, _tol(ctx, spec, True),
                                 ctx.sc.delta_min)


def _c_coinc(ctx, spec):
    f = ctx.fn(spec["function"])
    return check_stem_coincidence(f, f.domain, ctx.corpus(f.domain)[1], ctx.units, _tol(ctx, spec),
                                  ctx.sc.delta_min)


def _oracle_stem(f):
    if not isinstance(f, Polynomial):
        raise ScenarioError(f"function {f.name!r} has no closed-form stem")
    return f.oracle_stem


def _c_restrict(ctx, spec):
    f = ctx.fn(spec["function"])
    return check_stem_restriction(f, f.domain, ctx.corpus(f.domain)[0], ctx.units, _tol(ctx, spec),
                                  ctx.sc.delta_min, stem_fn=_oracle_stem(f))


def _c_point(ctx, spec):
    f = ctx.fn(spec["function"])
    return check_point_stem_paths(f, f.domain, ctx.probes(f.domain), ctx.units, _tol(ctx, spec),
                                  delta_min=ctx.sc.delta_min, max_step=ctx.sc.max_step)


def _c_unique(ctx, spec):
    f = ctx.fn(spec["function"])
    g = StemBacked(_oracle_stem(f), f.domain, f"stem({f.name})")
    return check_unique_stem(f, g, ctx.probes(f.domain), _tol(ctx, spec))


def _c_star_oracle(ctx, spec):
    pool = [ctx.fn(n) for n in spec.get("functions", [])]
    om = pool[0].domain
    pairs = list(permutations(pool, 2)) + [(p, p) for p in pool]
    return check_star_oracle(pairs, ctx.probes(om), _tol(ctx, spec), **ctx.star_kw(om))


def _c_real(ctx, spec):
    f, g = _fns(ctx, spec, 2)
    return check_real_restriction(f, g, ctx.probes(f.domain), _tol(ctx, spec, True), **ctx.star_kw(f.domain))


def _c_closure(ctx, spec):
    f, g = _fns(ctx, spec, 2)
    return check_star_stem_closure(f, g, ctx.corpus(f.domain)[0], _tol(ctx, spec), **ctx.star_kw(f.domain))


def _c_algebra(ctx, spec):
    fs = _fns(ctx, spec, 3)
    kw = ctx.star_kw(fs[0].domain)
    return verify_algebra(fs, ctx.probes(fs[0].domain), tol=_tol(ctx, spec),
                          unit_tol=float(spec.get("unit_tol", ctx.sc.tight_tol)),
                          units=kw["units"], cache=kw["cache"], attestation=kw["attestation"],
                          assume_hypotheses=kw["assume_hypotheses"], delta_min=kw["delta_min"])


def _cr_units(ctx, spec):
    return sphere_sample(int(spec.get("units", 12)), ctx.sc.units_seed)


def _c_cr(ctx, spec):
    f = ctx.fn(spec["function"])
    return check_cr(f, f.domain, _cr_units(ctx, spec), ctx.sc.cr_h, float(spec.get("tol", 1e-8)),
                    ctx.sc.cr_grid)


def _c_cr_star(ctx, spec):
    f, g = _fns(ctx, spec, 2)
    kw = ctx.star_kw(f.domain)
    return verify_regular_closed_under_star(f, g, f.domain, _cr_units(ctx, spec), ctx.sc.cr_grid,
                                            ctx.sc.cr_h, float(spec.get("tol", 1e-8)),
                                            attestation=kw["attestation"],
                                            assume_hypotheses=kw["assume_hypotheses"],
                                            delta_min=kw["delta_min"])


CHECKS: dict[str, Callable[[SuiteContext, dict], CheckReport]] = {
    "real-path-connected": _c_rpc,
    "self-stem-preserving": _c_self,
    "stem-preserving": _c_sp,
    "weakly-axially-symmetric": _c_axisym,
    "path-slice-representation": _c_repr,
    "sub-stem-well-defined": _c_pairs,
    "stem-symmetries": _c_sym,
    "stem-coincidence": _c_coinc,
    "sub-stem-equals-stem": _c_restrict,
    "point-stem-well-defined": _c_point,
    "shared-stem-uniqueness": _c_unique,
    "star-product-oracle": _c_star_oracle,
    "star-real-restriction": _c_real,
    "star-stem-closure": _c_closure,
    "algebra-laws": _c_algebra,
    "cr-residual": _c_cr,
    "slice-regularity-of-product": _c_cr_star,
}


@dataclass
class SuiteResult:
    scenario: str
    seed: int
    resolution: dict
    reports: dict = field(default_factory=dict)      # check id -> CheckReport
    expected: dict = field(default_factory=dict)     # check id -> expected verdict, when declared
    timing: dict = field(default_factory=dict)

    @property
    def violation(self) -> bool:
        return any(r.verdict == VIOLATION for r in self.reports.values())

    @property
    def as_expected(self) -> bool:
        return all(self.reports[k].verdict == v for k, v in self.expected.items())

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "scenario": self.scenario,
            "seed": self.seed,
            "resolution": jsonable(self.resolution),
            "checks": {k: r.to_json() for k, r in self.reports.items()},
            "summary": {
                "violation_found": self.violation,
                "verdicts": {k: r.verdict for k, r in self.reports.items()},
                "expected": dict(self.expected),
                "as_expected": self.as_expected,
            },
        }
        if timing:
            out["timing"] = dict(self.timing)
        return out


def run_suite(sc: Scenario) -> SuiteResult:
    """Run every check of ``sc`` in order.

    A check whose hypotheses cannot be attested, or whose inputs it cannot
    handle, is reported as indeterminate with the reason.
    """
    ctx = SuiteContext(sc)
    res = SuiteResult(sc.name, sc.seed, {"units": sc.units_count, "units_seed": sc.units_seed,
                                         "max_step": sc.max_step, "grid_step": sc.grid_step,
                                         "probes": sc.probe_count, "tol": sc.tol,
                                         "tight_tol": sc.tight_tol, "cr_h": sc.cr_h,
                                         "delta_min": sc.delta_min})
    start = time.perf_counter()
    for spec in sc.checks:
        t0 = time.perf_counter()
        try:
            rep = CHECKS[spec["check"]](ctx, spec)
        except (HypothesisNotMet, ScenarioError, ValueError) as exc:
            rep = CheckReport(spec["check"], INDETERMINATE, stats={"error": f"{type(exc).__name__}: {exc}"})
        res.reports[spec["id"]] = rep
        if "expect" in spec:
            res.expected[spec["id"]] = spec["expect"]
        res.timing[spec["id"]] = round(time.perf_counter() - t0, 3)
    res.timing["total"] = round(time.perf_counter() - start, 3)
    return res


def run_suites(scenarios: list[Scenario], workers: int = 1) -> list[SuiteResult]:
    """Run several scenarios, concurrently when ``workers > 1``; results keep input order."""
    if workers <= 1 or len(scenarios) <= 1:
        return [run_suite(s) for s in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_suite, scenarios))


def report_json(results: list[SuiteResult], timing: bool = False) -> str:
    """Combined JSON report; byte-identical for identical inputs when ``timing`` is off."""
    body = {"suites": [r.to_json(timing) for r in results],
            "violation_found": any(r.violation for r in results)}
    return json.dumps(body, indent=2, sort_keys=False)


def headline(rep: CheckReport) -> str:
    """Short human summary of a report's main statistic."""
    for key in ("max_relative_error", "max_residual", "max_deviation", "max_stem_deviation",
                "max_residual_h2", "min_admissible_units", "probes_checked"):
        if key in rep.stats and rep.stats[key] is not None:
            v = rep.stats[key]
            if isinstance(v, dict) and v:
                v = max(v.values())
            return f"{key}={v:.3g}" if isinstance(v, float) else f"{key}={jsonable(v)}"
    if "error" in rep.stats:
        return rep.stats["error"]
    if rep.witnesses:
        return f"witness: {rep.witnesses[0].get('kind')}"
    return ""


def table(results: list[SuiteResult]) -> str:
    rows = [("scenario", "check", "verdict", "detail")]
    for r in results:
        for k, rep in r.reports.items():
            mark = ""
            if k in r.expected:
                mark = " (expected)" if r.expected[k] == rep.verdict else f" (expected {r.expected[k]})"
            rows.append((r.scenario, k, rep.verdict + mark, headline(rep)))
    widths = [max(len(row[c]) for row in rows) for c in range(3)]
    return "\n".join("  ".join(row[c].ljust(widths[c]) for c in range(3)) + "  " + row[3] for row in rows)


def csv_rows(results: list[SuiteResult]):
    """``scenario, check, verdict, statistic, value`` rows (scalar statistics only)."""
    yield ("scenario", "check", "verdict", "statistic", "value")

    def flat(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                yield from flat(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(obj, (int, float, str, bool)) or obj is None:
            yield prefix, obj

    for r in results:
        for k, rep in r.reports.items():
            for stat, value in flat("", jsonable(rep.stats)):
                yield (r.scenario, k, rep.verdict, stat, value)


__all__ = ["Scenario", "ScenarioError", "SuiteResult", "CHECKS", "parse_scenario", "load_scenario",
           "bundled_scenarios", "run_suite", "run_suites", "report_json", "table", "csv_rows"]
