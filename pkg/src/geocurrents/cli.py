"""Command-line driver.  Every subcommand writes one JSON (or CSV) document.

Exit codes: 0 when everything checked passes, 1 when a violation or a
non-converged estimate is found, 2 when a computation fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any

from . import config as _config
from .errors import GeoCurrentsError, ParseError

EXIT_OK, EXIT_VIOLATION, EXIT_FAILURE = 0, 1, 2

_DEFAULTS = {"group": "genus2", "tol": None, "nmax": 40, "lmax": None, "seed": 0,
             "out": None, "format": "json"}


@dataclass
class RunConfig:
    group: str
    tol: float | None
    nmax: int
    lmax: int | None
    seed: int
    out: str | None
    format: str
    numerics: dict

    def validate(self) -> None:
        if self.group not in ("genus2", "free2"):
            raise ParseError(f"unknown group {self.group!r}")
        if self.nmax <= 0 or (self.lmax is not None and self.lmax <= 0):
            raise ParseError("--nmax and --lmax must be positive")
        if self.tol is not None and not self.tol > 0:
            raise ParseError("--tol must be positive")
        if self.format not in ("json", "csv"):
            raise ParseError(f"unknown format {self.format!r}")

    def to_dict(self) -> dict:
        return {"group": self.group, "tol": self.tol, "nmax": self.nmax, "lmax": self.lmax,
                "seed": self.seed, "numerics": self.numerics}


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = dict(_DEFAULTS)
    numerics: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ParseError(f"cannot read config {args.config}: {exc}") from exc
        numerics = dict(data.pop("numerics", {}))
        unknown = set(data) - set(values)
        if unknown:
            raise ParseError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(data)
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    fields = {f for f in _config.Config.__dataclass_fields__}
    bad = set(numerics) - fields
    if bad:
        raise ParseError(f"unknown numerics keys: {', '.join(sorted(bad))}")
    rc = RunConfig(numerics=numerics, **values)
    rc.validate()
    return rc


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _clean(obj: Any) -> Any:
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _flatten(prefix: str, obj: Any, rows: list) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def render(doc: dict, fmt: str) -> str:
    doc = _clean(doc)
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    reports = doc.get("reports")
    if isinstance(reports, list) and reports and all(isinstance(r, dict) for r in reports):
        cols = ["axiom", "passed", "sample_size", "worst_margin", "tolerance", "skipped"]
        writer.writerow(cols)
        for r in reports:
            writer.writerow([r.get(c) for c in cols])
    else:
        rows: list = []
        _flatten("", doc, rows)
        writer.writerow(["key", "value"])
        writer.writerows(rows)
    return buf.getvalue()


def _emit(doc: dict, rc: RunConfig) -> None:
    text = render(doc, rc.format)
    if rc.out:
        with open(rc.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, exit code)
# ---------------------------------------------------------------------------

def _pres(rc: RunConfig):
    from .sgroup import get_presentation

    return get_presentation(rc.group)


def _load_curve(arg: str, pres):
    from .curves import MultiCurve, parse_curve_file

    if os.path.exists(arg):
        return parse_curve_file(arg, pres)
    return MultiCurve.single(pres.element(arg), pres=pres)


def cmd_classify(args, rc):
    from .boundary import classify_pair

    pres = _pres(rc)
    g, h = pres.element(args.w1), pres.element(args.w2)
    cls = classify_pair(g, h)
    return {"a": pres.format(g.word), "b": pres.format(h.word), "class": cls.value}, EXIT_OK


def cmd_intersect(args, rc):
    from .curves import (algebraic_intersection, asymmetric_intersection, intersection_number,
                         right_handed_intersection)

    pres = _pres(rc)
    C, D = _load_curve(args.curve_a, pres), _load_curve(args.curve_b, pres)
    out = {"a": C.to_json(), "b": D.to_json(), "intersection": intersection_number(C, D),
           "algebraic": algebraic_intersection(C, D)}
    if args.oriented:
        out["right_handed"] = right_handed_intersection(C, D)
        out["asymmetric_formula"] = asymmetric_intersection(C, D)
    return out, EXIT_OK


def _suites(raw: list[str] | None) -> list[str]:
    from .axioms import ALL_SUITES

    if not raw:
        return ["smoothing", "stability"]
    names: list[str] = []
    for item in raw:
        names.extend(s for s in item.split(",") if s)
    if names == ["all"]:
        return list(ALL_SUITES)
    return names


def cmd_axioms(args, rc):
    from .axioms import run_suites
    from .functionals import get_functional

    pres = _pres(rc)
    f = get_functional(args.functional, pres)
    reports = run_suites(f, pres, _suites(args.suite), seed=rc.seed, tol=rc.tol,
                         pair_radius=args.pair_radius, pair_cap=args.pair_cap)
    ok = all(r.passed for r in reports)
    return ({"functional": f.name, "reports": [r.to_dict() for r in reports], "passed": ok},
            EXIT_OK if ok else EXIT_VIOLATION)


def _load_box(path: str, pres, rc):
    from .currents import find_rh_box, validate_rh_system

    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read box file {path}: {exc}") from exc
    if not isinstance(data, dict) or "x" not in data:
        raise ParseError("a box file is an object with 'x' and either p1,q1,p2,q2 or targets")
    x = pres.element(data["x"])
    if "targets" in data:
        scale = math.pi / 180.0 if data.get("degrees", False) else 1.0
        targets = [float(t) * scale for t in data["targets"]]
        eps = float(data.get("eps", 20.0 if data.get("degrees", False) else math.radians(20))) * scale
        return find_rh_box(x, targets, eps, rc.lmax)
    try:
        return validate_rh_system(x, *(pres.element(data[k]) for k in ("p1", "q1", "p2", "q2")))
    except KeyError as exc:
        raise ParseError(f"box file is missing {exc}") from exc


def cmd_box_measure(args, rc):
    from .currents import DEFAULT_TOL, box_measure_estimate, liouville_box_measure
    from .curves import unoriented_box_count
    from .functionals import get_functional

    pres = _pres(rc)
    f = get_functional(args.functional, pres)
    sys_ = _load_box(args.box, pres, rc)
    tol = DEFAULT_TOL if rc.tol is None else rc.tol
    est = box_measure_estimate(f, sys_, rc.nmax, tol)
    out = {"functional": f.name, "system": sys_.words(), "kind": sys_.kind,
           "corners": list(sys_.box.angles), "estimate": est.to_dict(),
           "liouville": liouville_box_measure(sys_.box)}
    if args.functional.startswith("curve:"):
        from .functionals import _read_json
        from .curves import MultiCurve

        C = MultiCurve.from_json(pres, _read_json(args.functional.partition(":")[2]))
        out["box_count"] = unoriented_box_count(C, sys_.box)
    return out, EXIT_OK if est.converged else EXIT_VIOLATION


def cmd_recover(args, rc):
    from .currents import DEFAULT_TOL, recover_length
    from .functionals import get_functional

    pres = _pres(rc)
    f = get_functional(args.functional, pres)
    y = pres.element(args.word)
    tol = DEFAULT_TOL if rc.tol is None else rc.tol
    rec = recover_length(f, y, rc.nmax, tol)
    direct = f(y)
    out = {"functional": f.name, "word": pres.format(y.word), "recovery": rec.to_dict(),
           "direct": direct, "error": abs(rec.value - direct)}
    return out, EXIT_OK if rec.converged else EXIT_VIOLATION


def cmd_period(args, rc):
    from .crossratio import hyperbolic_crossratio, multicurve_crossratio, period

    pres = _pres(rc)
    g = pres.element(args.word)
    if args.curve:
        cr = multicurve_crossratio(_load_curve(args.curve, pres), args.sign, pres)
    else:
        cr = hyperbolic_crossratio()
    tol = 1e-9 if rc.tol is None else rc.tol
    return {"crossratio": cr.name, "word": pres.format(g.word), "period": period(cr, g, tol)}, EXIT_OK


def _report_battery(rc: RunConfig) -> tuple[list[dict], bool]:
    """Fixed reproduction battery; each entry records its expected verdict."""
    from .axioms import run_suites, sample_pairs
    from .crossratio import (check_crossratio_axioms, hyperbolic_crossratio, period_functional,
                             signed_crossratio)
    from .currents import GeodesicBox, bonahon_residual
    from .functionals import hyperbolic_length, intersection_with

    pres = _pres(rc)
    entries: list[dict] = []
    first = pres.element((1,))
    plan = [
        (hyperbolic_length(), {"smoothing": True, "stability": True, "lamination": False,
                               "parry": False, "hyperbolic": True}),
        (intersection_with(first), {"smoothing": True, "stability": True, "lamination": True,
                                    "parry": True}),
    ]
    for f, expect in plan:
        for name, want in expect.items():
            reports = run_suites(f, pres, [name], seed=rc.seed, tol=rc.tol)
            got = all(r.passed for r in reports)
            entries.append({"check": f"{f.name}:{name}", "expected": want, "passed": got,
                            "as_expected": got == want,
                            "reports": [r.to_dict() for r in reports]})
    for cr, want in ((hyperbolic_crossratio(), True), (signed_crossratio(), False)):
        reports = check_crossratio_axioms(cr, 200, 1e-9 if rc.tol is None else rc.tol, pres, rc.seed)
        got = all(r.passed for r in reports)
        entries.append({"check": f"crossratio:{cr.name}", "expected": want, "passed": got,
                        "as_expected": got == want, "reports": [r.to_dict() for r in reports]})
    period_f, length_f = period_functional(hyperbolic_crossratio()), hyperbolic_length()
    from .sgroup import conjugacy_classes

    gap = max(abs(period_f(g) - length_f(g)) for g in conjugacy_classes(3, pres) if not g.is_identity)
    entries.append({"check": "period-equals-length", "expected": True, "passed": gap <= 1e-9,
                    "as_expected": gap <= 1e-9, "worst": gap})
    res = abs(bonahon_residual(GeodesicBox.from_values(0.0, 1.0, 2.0, 3.0)))
    entries.append({"check": "bonahon-unit-box", "expected": True, "passed": res <= 1e-12,
                    "as_expected": res <= 1e-12, "residual": res})
    return entries, all(e["as_expected"] for e in entries)


def cmd_report(args, rc):
    if not args.all:
        raise ParseError("report needs --all")
    entries, ok = _report_battery(rc)
    return {"entries": entries, "all_as_expected": ok}, EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subparser from overwriting flags given before the subcommand
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--group", choices=["genus2", "free2"])
    common.add_argument("--tol", type=float)
    common.add_argument("--nmax", type=int)
    common.add_argument("--lmax", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--config", help="JSON file; flags override its values")

    parser = argparse.ArgumentParser(prog="geocurrents", parents=[common],
                                     description="Curve functionals, intersection numbers and geodesic currents.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="chirality class of two axes")
    p.add_argument("w1")
    p.add_argument("w2")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("intersect", parents=[common], help="intersection numbers of two multicurves")
    p.add_argument("curve_a", help="multicurve JSON file or a word")
    p.add_argument("curve_b", help="multicurve JSON file or a word")
    p.add_argument("--oriented", action="store_true", help="also count right-handed crossings")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("axioms", parents=[common], help="run axiom suites on a functional")
    p.add_argument("--functional", required=True)
    p.add_argument("--suite", action="append", help="comma-separated suite names, or 'all'")
    p.add_argument("--pair-radius", type=int, default=None)
    p.add_argument("--pair-cap", type=int, default=None)
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("box-measure", parents=[common], help="limit estimate of a box mass")
    p.add_argument("--functional", required=True)
    p.add_argument("--box", required=True, help="JSON with x and p1,q1,p2,q2 or with targets")
    p.set_defaults(func=cmd_box_measure)

    p = sub.add_parser("recover", parents=[common], help="recover f(y) from box masses")
    p.add_argument("--functional", required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("period", parents=[common], help="cross-ratio period of an element")
    p.add_argument("--word", required=True)
    p.add_argument("--curve", default=None, help="use the multicurve cross-ratio of this curve")
    p.add_argument("--sign", choices=["+", "-"], default="+")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("report", parents=[common], help="fixed reproduction battery")
    p.add_argument("--all", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = _run_config(args)
    except GeoCurrentsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAILURE
    try:
        with _config.using(**rc.numerics):
            payload, code = args.func(args, rc)
    except (GeoCurrentsError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        payload = {"error": type(exc).__name__, "message": str(exc)}
        code = EXIT_FAILURE
    doc = {"command": args.command, "config": rc.to_dict(), "result": payload, "exit_code": code}
    if isinstance(payload, dict) and "reports" in payload and rc.format == "csv":
        doc = {"reports": payload["reports"]}
    _emit(doc, rc)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
