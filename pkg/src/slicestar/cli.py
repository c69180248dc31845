"""``slicestar`` command line.

Exit status is 1 when any check reports ``violation-found``, 2 for invalid
input, 0 otherwise.  ``SLICESTAR_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .domains import (VIOLATION, CheckReport, check_real_path_connected, check_self_stem_preserving,
                      check_stem_preserving, check_weakly_axially_symmetric, domain_from_json, jsonable,
                      make_domain, sample_points)
from .functions import Polynomial, builtin, function_from_json, poly_star_oracle
from .harness import (ScenarioError, bundled_scenarios, csv_rows, load_scenario, report_json,
                      run_suites, table)
from .path_geom import PathC
from .quat_core import Quaternion, sphere_sample
from .reg_check import check_cr, verify_regular_closed_under_star
from .slice_space import SlicePoint
from .star import HypothesisNotMet, fn_star, relative_error
from .stem import DELTA_MIN, point_stem, sub_stem

DEFAULT_VERIFY = ("ball-polynomials", "nonaxisym-union")


class InputError(ValueError):
    pass


# -- argument parsing helpers ------------------------------------------------------

def _json_or_text(text: str):
    """Parse ``text`` as JSON, reading it from a file first if it names one."""
    if text.endswith(".json") or os.path.isfile(text):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {text!r}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_probes(text: str, omega, seed: int) -> list[SlicePoint]:
    """A probe count, or a JSON list (inline or in a file) of points."""
    try:
        return sample_points(omega, int(text), seed)
    except ValueError:
        pass
    value = _json_or_text(text)
    if not isinstance(value, list):
        raise InputError(f"bad probes {text!r}: expected a count or a list of points")
    return [parse_point(json.dumps(v)) for v in value]


def parse_domain(text: str):
    """A domain name (``euclidean_ball``, ``nonaxisym_union``, ...) or ``{"name": ..., "params": ...}``."""
    value = _json_or_text(text)
    try:
        if isinstance(value, dict):
            return domain_from_json(value)
        return make_domain(str(value))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad domain {text!r}: {exc}") from None


def parse_function(text: str, domain):
    """A builtin name, a coefficient list ``[a0, a1, ...]`` or a function object."""
    value = _json_or_text(text)
    try:
        if isinstance(value, dict):
            return function_from_json(value, domain)
        if isinstance(value, list):
            return Polynomial(value, domain)
        return builtin(str(value), domain)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad function {text!r}: {exc}") from None


def parse_point(text: str) -> SlicePoint:
    """``{"x": [...], "y": [...], "I": [...]}``, a quaternion ``[w, x, y, z]`` or a list of them."""
    value = _json_or_text(text)
    try:
        if isinstance(value, dict):
            return SlicePoint.from_json(value)
        if isinstance(value, list) and value and not isinstance(value[0], list):
            value = [value]
        return SlicePoint.from_quaternions([Quaternion.from_list(v) for v in value])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad point {text!r}: {exc}") from None


def parse_path(text: str) -> PathC:
    """Path JSON (``{"samples": ...}``) or a generator such as
    ``{"generator": "segment", "start": [0, 0], "end": [0.3, 0.5]}``."""
    value = _json_or_text(text)
    try:
        return PathC.from_json(value)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"bad path {text!r}: {exc}") from None


def resolve_seed(args) -> int:
    env = os.environ.get("SLICESTAR_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise InputError(f"SLICESTAR_SEED must be an integer, got {env!r}") from None
    return args.seed


# -- output ----------------------------------------------------------------------

def _qstr(q: Quaternion) -> str:
    return "[" + ", ".join(f"{c:.12g}" for c in q.to_list()) + "]"


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _emit_reports(args, reports: list[CheckReport]) -> int:
    if args.format == "json":
        _emit(args, json.dumps([r.to_json() for r in reports], indent=2))
    elif args.format == "csv":
        rows = [("check", "verdict", "statistic", "value")]
        for r in reports:
            for k, v in jsonable(r.stats).items():
                rows.append((r.check, r.verdict, k, json.dumps(v)))
        _emit(args, _csv(rows))
    else:
        lines = []
        for r in reports:
            lines.append(f"{r.check:32s} {r.verdict}")
            for k, v in jsonable(r.stats).items():
                lines.append(f"    {k}: {json.dumps(v)}")
            for w in r.witnesses[:3]:
                lines.append(f"    witness: {json.dumps(jsonable(w))[:300]}")
        _emit(args, "\n".join(lines))
    return 1 if any(r.verdict == VIOLATION for r in reports) else 0


# -- subcommands -----------------------------------------------------------------

def _units(args):
    return sphere_sample(args.units, resolve_seed(args))


def cmd_eval(args) -> int:
    omega = parse_domain(args.domain)
    f = parse_function(args.function, omega)
    q = parse_point(args.point)
    if not omega.contains(q):
        raise InputError("point is outside the domain")
    v = f(q)
    if args.format == "json":
        _emit(args, json.dumps({"point": q.to_json(), "value": v.to_list()}, indent=2))
    elif args.format == "csv":
        _emit(args, _csv([("point", "value"), (json.dumps(q.to_json()), json.dumps(v.to_list()))]))
    else:
        _emit(args, f"f(q) = {_qstr(v)}")
    return 0


def cmd_stem(args) -> int:
    omega = parse_domain(args.domain)
    f = parse_function(args.function, omega)
    units = _units(args)
    if args.path:
        where = parse_path(args.path)
        F = sub_stem(f, omega, where, units, args.delta_min, verify=True, tol=args.tol)
        key = {"path": where.to_json()}
    else:
        where = parse_point(args.point)
        F = point_stem(f, omega, where, units, delta_min=args.delta_min, max_step=args.max_step)
        key = {"point": where.to_json()}
    if args.format == "json":
        _emit(args, json.dumps(dict(key, stem=F.to_json()), indent=2))
    elif args.format == "csv":
        _emit(args, _csv([("F1", "F2"), (json.dumps(F.F1.to_list()), json.dumps(F.F2.to_list()))]))
    else:
        note = f"  ({F.note})" if F.note else ""
        _emit(args, f"F1 = {_qstr(F.F1)}\nF2 = {_qstr(F.F2)}{note}")
    return 0


def _attest(omega, units, args):
    probes = sample_points(omega, 40, resolve_seed(args))
    return check_self_stem_preserving(omega, probes, units, max_step=args.max_step)


def cmd_star(args) -> int:
    omega = parse_domain(args.domain)
    omega2 = parse_domain(args.omega2) if args.omega2 else omega
    f = parse_function(args.f, omega)
    g = parse_function(args.g, omega2)
    units = _units(args)
    att = None
    if not args.assume_hypotheses:
        att = _attest(omega, units, args)
        if omega2 is not omega:
            att = [att, check_stem_preserving(omega, omega2, *att.found["corpus"], units)]
    try:
        fg = fn_star(f, g, omega, omega2, attestation=att, assume_hypotheses=args.assume_hypotheses,
                     units=units, delta_min=args.delta_min)
    except HypothesisNotMet as exc:
        verdicts = [r.verdict for r in (att if isinstance(att, list) else [att])]
        raise InputError(f"{exc} (domain checks: {', '.join(verdicts)})") from None
    oracle = None
    if isinstance(f, Polynomial) and isinstance(g, Polynomial) and f.n == 1:
        oracle = Polynomial(poly_star_oracle(f.coeffs, g.coeffs), omega)
    probes = [parse_point(p) for p in args.point] if args.point else \
        parse_probes(args.probes, omega, resolve_seed(args))
    rows, worst = [], 0.0
    for q in probes:
        fq, gq, v = f(q), g(q), fg(q)
        res = relative_error(v, oracle(q)) if oracle else None
        worst = max(worst, res or 0.0)
        rows.append((q, fq, gq, v, fq * gq, res))
    header = ("probe", "f", "g", "f*g", "pointwise fg", "residual-vs-oracle")
    if args.format == "json":
        _emit(args, json.dumps({"hypotheses": fg.metadata["hypotheses"], "rows": [
            dict(zip(header, (q.to_json(), a.to_list(), b.to_list(), c.to_list(), d.to_list(), r)))
            for q, a, b, c, d, r in rows]}, indent=2))
    elif args.format == "csv":
        _emit(args, _csv([header] + [
            (json.dumps(q.to_json()), json.dumps(a.to_list()), json.dumps(b.to_list()),
             json.dumps(c.to_list()), json.dumps(d.to_list()), "" if r is None else repr(r))
            for q, a, b, c, d, r in rows]))
    else:
        lines = [f"hypotheses: {fg.metadata['hypotheses']}"]
        for q, a, b, c, d, r in rows:
            lines.append(f"{json.dumps(q.to_json())}\n    f*g = {_qstr(c)}   f g = {_qstr(d)}"
                         + ("" if r is None else f"   rel. error vs oracle = {r:.2e}"))
        _emit(args, "\n".join(lines))
    return 1 if oracle is not None and worst > args.tol else 0


def cmd_check_domain(args) -> int:
    omega = parse_domain(args.domain)
    units = _units(args)
    probes = sample_points(omega, args.probes, resolve_seed(args))
    probes += [parse_point(p) for p in args.point or []]
    suites = ["real-path-connected", "self-stem", "axisym"] if args.suite == "all" else [args.suite]
    reports = []
    for s in suites:
        if s == "real-path-connected":
            reports.append(check_real_path_connected(omega, probes, h=args.grid_step, max_step=args.max_step))
        elif s == "self-stem":
            reports.append(check_self_stem_preserving(omega, probes, units, h=args.grid_step,
                                                      max_step=args.max_step))
        elif s == "stem-preserving":
            target = parse_domain(args.target) if args.target else omega
            paths, pairs = check_self_stem_preserving(omega, probes, units, h=args.grid_step,
                                                      max_step=args.max_step).found["corpus"]
            reports.append(check_stem_preserving(omega, target, paths, pairs, units))
        elif s == "axisym":
            reports.append(check_weakly_axially_symmetric(omega, probes))
    return _emit_reports(args, reports)


def cmd_cr_check(args) -> int:
    omega = parse_domain(args.domain)
    f = parse_function(args.function, omega)
    units = sphere_sample(args.units, resolve_seed(args))
    if args.g:
        g = parse_function(args.g, omega)
        rep = verify_regular_closed_under_star(f, g, omega, units, args.grid, args.h, args.tol,
                                               assume_hypotheses=True, delta_min=args.delta_min)
    else:
        rep = check_cr(f, omega, units, args.h, args.tol, args.grid)
    return _emit_reports(args, [rep])


def cmd_verify(args) -> int:
    names = args.scenario or list(DEFAULT_VERIFY)
    seed = resolve_seed(args) if (args.seed is not None or os.environ.get("SLICESTAR_SEED")) else None
    scenarios = [load_scenario(n).with_overrides(seed, args.units, args.max_step, args.tol) for n in names]
    results = run_suites(scenarios, args.workers)
    if args.format == "json":
        _emit(args, report_json(results, timing=args.timing))
    elif args.format == "csv":
        _emit(args, _csv(csv_rows(results)))
    else:
        _emit(args, table(results))
    return 1 if any(r.violation for r in results) else 0


# -- parser ----------------------------------------------------------------------

def _common(**defaults) -> argparse.ArgumentParser:
    # a fresh parent per subcommand: argparse shares parent actions, so defaults would leak
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--seed", type=int, default=0, help="random seed (SLICESTAR_SEED overrides)")
    c.add_argument("--units", type=int, default=50, help="size of the unit sample of S")
    c.add_argument("--max-step", type=float, default=0.05, help="path resolution")
    c.add_argument("--tol", type=float, default=1e-9, help="absolute tolerance")
    c.add_argument("--delta-min", type=float, default=DELTA_MIN, help="minimum |I - J| of a stem pair")
    c.add_argument("--out", help="write the report to this file")
    c.add_argument("--format", choices=("table", "json", "csv"), default="table")
    c.set_defaults(**defaults)
    return c


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slicestar",
                                description="Path-slice functions and the *-product on quaternionic domains.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[_common()], help="evaluate a function at a point")
    e.add_argument("--function", "--fn", required=True)
    e.add_argument("--domain", default="euclidean_ball")
    e.add_argument("--point", required=True)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("stem", parents=[_common()], help="sub-stem on a path or point stem at a point")
    s.add_argument("--function", "--fn", required=True)
    s.add_argument("--domain", default="euclidean_ball")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--path")
    g.add_argument("--point")
    s.set_defaults(func=cmd_stem)

    st = sub.add_parser("star", parents=[_common()], help="*-product at probes, against the pointwise product")
    st.add_argument("--f", required=True)
    st.add_argument("--g", required=True)
    st.add_argument("--domain", "--omega1", default="euclidean_ball", help="domain of f and of f*g")
    st.add_argument("--omega2", help="domain of g (default: same as --domain)")
    st.add_argument("--point", action="append", help="probe point (repeatable)")
    st.add_argument("--probes", default="10", help="number of random probes, or a JSON list/file of points")
    st.add_argument("--assume-hypotheses", action="store_true",
                    help="skip the self-stem-preserving check of the domain")
    st.set_defaults(func=cmd_star)

    c = sub.add_parser("check-domain", parents=[_common()], help="falsification checks on a domain")
    c.add_argument("--domain", required=True)
    c.add_argument("--suite", choices=("self-stem", "real-path-connected", "stem-preserving", "axisym", "all"),
                   default="self-stem")
    c.add_argument("--target", help="second domain for --suite stem-preserving")
    c.add_argument("--probes", type=int, default=40)
    c.add_argument("--point", action="append", help="extra probe point (repeatable)")
    c.add_argument("--grid-step", type=float, default=0.05)
    c.set_defaults(func=cmd_check_domain)

    r = sub.add_parser("cr-check", parents=[_common(units=12, tol=1e-8)], help="Cauchy-Riemann residuals on slices")
    r.add_argument("--function", "--fn", required=True)
    r.add_argument("--g", help="check the *-product of --function and --g instead")
    r.add_argument("--domain", default="euclidean_ball")
    r.add_argument("--h", type=float, default=1e-3)
    r.add_argument("--grid", type=int, default=17)
    r.set_defaults(func=cmd_cr_check)

    v = sub.add_parser("verify", parents=[_common(seed=None, units=None, max_step=None, tol=None)], help="run scenario suites")
    v.add_argument("scenario", nargs="*",
                   help=f"bundled scenario names or JSON files (default: {', '.join(DEFAULT_VERIFY)})")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--timing", action="store_true", help="include wall times in JSON output")
    v.add_argument("--list", action="store_true", help="list bundled scenarios and exit")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "list", False):
        print("\n".join(bundled_scenarios()))
        return 0
    try:
        return args.func(args)
    except (InputError, ScenarioError) as exc:
        print(f"slicestar: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # library-level input problems: no path to a point, stencil outside the domain, ...
        print(f"slicestar: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
