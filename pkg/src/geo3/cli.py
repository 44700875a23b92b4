"""Command-line front end.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for usage, spec-file or expression errors.  ``GEO3_TOL`` overrides the
default numeric tolerance of ``classify`` and of the Γ/ρ/τ comparison in
``oracle``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter
from fractions import Fraction

import numpy as np

from . import curvature as cv
from .analysis import (
    DEFAULT_TOL,
    AmbiguousClassification,
    SolitonSpec,
    SOLITON_KINDS,
    ecs_predicate,
    jordan_type,
    nilpotency_index,
    ricci_recurrence,
    soliton_residual,
)
from .families import verify_isometry
from .numoracle import H_COTTON, H_RICCI, TOL_COTTON, TOL_RICCI, NumericMetric, compare, sample_points
from .report import Report, component_label
from .specfile import MetricSpec, SpecError, load_spec
from .suite import SECTIONS, run_suite
from .symexpr import EvaluationError, ExprError, eval_numeric, parse_expr
from .tensor import TensorField, covariant_derivative

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHECKS = ("parallel-cotton", "ecs", "recurrent-ricci", "nilpotent")


class UsageError(Exception):
    pass


def env_tol(default: float) -> float:
    raw = os.environ.get("GEO3_TOL")
    if raw is None or raw == "":
        return default
    try:
        val = float(raw)
    except ValueError:
        raise UsageError(f"GEO3_TOL must be a number, got {raw!r}") from None
    if not val > 0:
        raise UsageError("GEO3_TOL must be positive")
    return val


def _need_metric(spec: MetricSpec) -> None:
    if spec.metric is None:
        raise UsageError(f"{spec.path}: no [metric] section")


def _components(T: TensorField | np.ndarray, name: str, coords) -> dict[str, str]:
    if isinstance(T, TensorField):
        return {component_label(name, idx, coords): str(v) for idx, v in T.nonzero().items()}
    out = {}
    for k, i, j in np.ndindex(3, 3, 3):
        if i <= j and not T[k, i, j].is_zero:
            out[f"{name}[{coords[k]};{coords[i]},{coords[j]}]"] = str(T[k, i, j])
    return out


def _parse_point(text: str, coords) -> dict[str, float]:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) != 3:
        raise UsageError(f"--at needs 3 comma-separated values, got {text!r}")
    try:
        return dict(zip(coords, (float(Fraction(p.strip())) for p in parts)))
    except ValueError:
        raise UsageError(f"bad point {text!r}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_curvature(args) -> Report:
    spec = load_spec(args.spec)
    _need_metric(spec)
    m = spec.metric
    rep = Report("curvature", {"spec": args.spec, "metric": str(m)})
    pack = cv.curvature_pack(m, with_cotton_gradient=False)
    tensors = {
        "Gamma": _components(pack.christoffel, "Gamma", m.coords),
        "rho": _components(pack.ricci, "rho", m.coords),
        "tau": str(pack.scalar),
        "S": _components(pack.schouten, "S", m.coords),
        "C": _components(pack.cotton3, "C", m.coords),
    }
    if pack.cotton2 is not None:
        tensors["Ctilde"] = _components(pack.cotton2, "Ctilde", m.coords)
        tensors["Chat"] = _components(pack.cotton_operator, "Chat", m.coords)
    rep.inputs["tensors"] = tensors
    warnings = [] if pack.cotton2 is not None else ["sqrt|det g| is not rational; Ctilde and Chat omitted"]
    rep.add("curvature.computed", True, warnings=warnings)
    if args.at:
        values = {}
        for text in args.at:
            point = _parse_point(text, m.coords)
            key = ",".join(f"{c}={v:g}" for c, v in point.items())
            try:
                entry = {
                    "rho": pack.ricci.evaluate(point, spec.bindings).tolist(),
                    "tau": eval_numeric(pack.scalar, point, spec.bindings),
                }
                if pack.cotton2 is not None:
                    entry["Ctilde"] = pack.cotton2.evaluate(point, spec.bindings).tolist()
                values[key] = entry
                rep.add(f"curvature.at[{key}]", True)
            except EvaluationError as exc:
                rep.add(f"curvature.at[{key}]", False, detail=str(exc))
        rep.inputs["values"] = values
    return rep


def cmd_check(args) -> Report:
    spec = load_spec(args.spec)
    _need_metric(spec)
    m = spec.metric
    rep = Report(f"check {args.what}", {"spec": args.spec})
    if args.what == "ecs":
        tag, sub = ecs_predicate(m)
        rep.extend(sub)
        rep.add("check.ecs", tag == "ecs", detail=f"verdict: {tag}")
        if tag == "ecs":
            rep.inputs["Ctilde"] = _components(cv.cotton2(m), "Ctilde", m.coords) if _has_c2(m) else {}
    elif args.what == "parallel-cotton":
        if _has_c2(m):
            DC = cv.cotton_gradient(m)
            rep.add("check.parallel_cotton", DC.is_zero(), residuals=_components(DC, "DCtilde", m.coords))
        else:
            DC = covariant_derivative(cv.cotton3(m), m)
            rep.add(
                "check.parallel_cotton",
                DC.is_zero(),
                residuals=_components(DC, "DC", m.coords),
                warnings=["sqrt|det g| is not rational; tested the (0,3) Cotton tensor instead"],
            )
    elif args.what == "recurrent-ricci":
        try:
            omega = ricci_recurrence(m)
        except ExprError as exc:
            rep.add("check.recurrent_ricci", False, detail=str(exc))
        else:
            detail = "no one-form omega with D rho = omega x rho" if omega is None else ""
            res = {} if omega is None else {f"omega[{c}]": str(omega[i]) for i, c in enumerate(m.coords)}
            rep.add("check.recurrent_ricci", omega is not None, residuals=res, detail=detail)
    elif args.what == "nilpotent":
        ops = {"ricci": cv.ricci_operator}
        if _has_c2(m):
            ops["cotton"] = cv.cotton_operator
        wanted = [args.operator] if args.operator != "both" else list(ops)
        for name in wanted:
            if name not in ops:
                raise UsageError(f"operator {name!r} unavailable for this metric")
            k = nilpotency_index(ops[name](m))
            ok = k is not None and (args.expect is None or k == args.expect)
            rep.add(f"check.nilpotent.{name}", ok, detail=f"index {k if k is not None else 'not nilpotent'}")
    return rep


def _has_c2(m) -> bool:
    try:
        cv.cotton2(m)
    except ExprError:
        return False
    return True


def cmd_classify(args) -> Report:
    spec = load_spec(args.spec)
    _need_metric(spec)
    m = spec.metric
    tol = args.tol if args.tol is not None else env_tol(DEFAULT_TOL)
    op = cv.cotton_operator(m) if args.operator == "cotton" else cv.ricci_operator(m)
    pts = sample_points(args.points, args.seed, -args.box, args.box)
    hist: Counter = Counter()
    skipped = 0
    for p in pts:
        point = dict(zip(m.coords, p))
        try:
            A = op.evaluate(point, spec.bindings)
        except EvaluationError as exc:
            if "denominator" in str(exc):
                skipped += 1
                continue
            raise
        try:
            hist[jordan_type(A, tol).tag] += 1
        except AmbiguousClassification:
            hist["ambiguous"] += 1
    rep = Report("classify", {"spec": args.spec, "operator": args.operator, "points": args.points,
                              "seed": args.seed, "tol": tol, "histogram": dict(sorted(hist.items())),
                              "skipped": skipped})
    rep.add("classify.unambiguous", hist.get("ambiguous", 0) == 0,
            detail=", ".join(f"{k}: {v}" for k, v in sorted(hist.items())))
    if args.expect:
        rep.add("classify.expected", set(hist) == {args.expect}, detail=f"expected {args.expect}")
    return rep


def cmd_soliton(args) -> Report:
    spec = load_spec(args.spec)
    _need_metric(spec)
    m = spec.metric
    src = load_spec(args.field, spec.chart) if args.field else spec
    if args.field:
        src.metric = None
    lam = src.lam
    if args.lam is not None:
        try:
            lam = parse_expr(args.lam, spec.chart)
        except ExprError as exc:
            raise UsageError(f"--lambda: {exc}") from None
    kind = args.kind
    try:
        sspec = SolitonSpec(
            kind,
            field=src.field if not kind.startswith("gradient") else None,
            potential=src.potential if kind.startswith("gradient") else None,
            lam=lam if lam is not None else 0,
        )
    except ExprError as exc:
        raise UsageError(str(exc)) from None
    _, rep = soliton_residual(m, sspec)
    rep.command = "soliton"
    rep.inputs["spec"] = args.spec
    return rep


def cmd_isometry(args) -> Report:
    a = load_spec(args.spec_a)
    b = load_spec(args.spec_b, a.chart)
    a = load_spec(args.spec_a, b.chart)
    _need_metric(a)
    _need_metric(b)
    mp = load_spec(args.map, b.chart).map if args.map else (a.map or b.map)
    if mp is None:
        raise UsageError("no map: pass --map FILE or put a [map] section in a spec")
    root = None
    if args.root:
        name, _, val = args.root.partition("=")
        try:
            root = (name.strip(), Fraction(val))
        except ValueError:
            raise UsageError(f"--root needs NAME=RATIONAL, got {args.root!r}") from None
    rep = verify_isometry(a.metric, b.metric, mp, root=root)
    rep.inputs.update({"source": args.spec_a, "target": args.spec_b})
    return rep


def cmd_oracle(args) -> Report:
    spec = load_spec(args.spec)
    _need_metric(spec)
    m = spec.metric
    tol = {
        "christoffel": args.tol if args.tol is not None else env_tol(TOL_RICCI),
        "ricci": args.tol if args.tol is not None else env_tol(TOL_RICCI),
        "scalar": args.tol if args.tol is not None else env_tol(TOL_RICCI),
        "cotton2": args.tol_cotton,
    }
    steps = {"christoffel": args.h, "ricci": args.h, "scalar": args.h, "cotton2": args.h_cotton}
    nm = NumericMetric.from_metric(m, spec.bindings)
    pts = sample_points(args.points, args.seed, -args.box, args.box)
    cmp = compare(m, nm, pts, tol=tol, steps=steps)
    rep = cmp.to_report()
    rep.inputs.update({"spec": args.spec, "seed": args.seed})
    return rep


def cmd_verify_paper(args) -> Report:
    return run_suite(args.section or None)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geo3",
        description="Curvature, Cotton tensor and soliton checks for 3D metrics.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON report object")
    common.add_argument("-o", "--output", help="also write the JSON report to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", parents=[common], help="print Gamma, rho, tau, S, C, Ctilde, Chat")
    p.add_argument("spec")
    p.add_argument("--at", action="append", metavar="T,X,Y", help="also evaluate at this point (repeatable)")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("check", parents=[common], help="structural checks")
    p.add_argument("spec")
    p.add_argument("what", choices=CHECKS)
    p.add_argument("--operator", choices=("ricci", "cotton", "both"), default="both")
    p.add_argument("--expect", type=int, help="required nilpotency index")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("classify", parents=[common], help="Jordan-type histogram over sampled points")
    p.add_argument("spec")
    p.add_argument("--operator", choices=("cotton", "ricci"), default="cotton")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--box", type=float, default=1.0, help="sample in [-box, box]^3")
    p.add_argument("--expect", help="required Jordan type at every point")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("soliton", parents=[common], help="soliton residual")
    p.add_argument("spec")
    p.add_argument("--kind", choices=SOLITON_KINDS, required=True)
    p.add_argument("--field", help="spec file holding the [field] section")
    p.add_argument("--lambda", dest="lam", help="soliton constant (overrides the spec)")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("isometry", parents=[common], help="verify map^* target = source")
    p.add_argument("spec_a", metavar="SOURCE")
    p.add_argument("spec_b", metavar="TARGET")
    p.add_argument("--map", help="spec file holding the [map] section")
    p.add_argument("--root", help="impose NAME^2 = VALUE for a constant, e.g. c=2")
    p.set_defaults(func=cmd_isometry)

    p = sub.add_parser("oracle", parents=[common], help="finite-difference cross-check")
    p.add_argument("spec")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=H_RICCI, help="step for Gamma, rho, tau")
    p.add_argument("--h-cotton", type=float, default=H_COTTON)
    p.add_argument("--tol", type=float, default=None, help=f"tolerance for Gamma, rho, tau (default {TOL_RICCI:g})")
    p.add_argument("--tol-cotton", type=float, default=TOL_COTTON)
    p.add_argument("--box", type=float, default=1.0)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify-paper", parents=[common], help="run the built-in verification suite")
    p.add_argument("--section", action="append", choices=sorted(SECTIONS))
    p.set_defaults(func=cmd_verify_paper)
    return parser


def _render_tensors(tensors) -> str:
    if not tensors:
        return ""
    lines = []
    for name, comps in tensors.items():
        if isinstance(comps, str):
            lines.append(f"{name} = {comps}")
        elif not comps:
            lines.append(f"{name} = 0")
        else:
            lines.extend(f"{k} = {v}" for k, v in comps.items())
    return "\n".join(lines)


def _validate(args) -> None:
    for name in ("points",):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            raise UsageError(f"--{name} must be positive")
    for name in ("h", "h_cotton", "tol", "tol_cotton", "box"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        _validate(args)
        rep = args.func(args)
    except (UsageError, SpecError, ExprError) as exc:
        print(f"geo3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    wall = time.perf_counter() - start
    payload = rep.to_dict(wall_time=round(wall, 3))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=False)
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        text = _render_tensors(rep.inputs.get("tensors"))
        if text:
            print(text)
        for key, entry in rep.inputs.get("values", {}).items():
            print(f"at {key}:")
            for name, val in entry.items():
                print(f"    {name} = {np.array2string(np.asarray(val), precision=8, separator=', ')}")
        print(rep.render())
        print(f"wall time {wall:.2f}s")
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
