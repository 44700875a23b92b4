"""Reader for metric-spec files.

A spec file is UTF-8 text split into sections::

    [chart]
    coords = t, x, y

    [functions]
    a(y)
    k

    [metric]
    metric = theorem(a)        # or walker(f), family6(k, A, B, C), product(sign, gxx, gxy, gyy)
    # g[0][2] = 1              # explicit entries, 0-based, symmetry completed

    [field]
    X = (5/4*lam*t, lam*x/2, -lam*y/4)
    phi = 3/4*y^2
    lambda = lam

    [map]
    t = t + 1
    x = x
    y = y

    [bindings]
    a(y) = sin(y)
    lam = 1/2

``#`` starts a comment.  Every identifier must be declared in ``[chart]`` or
``[functions]`` before it is used.
"""

from __future__ import annotations

import re
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .families import CoordMap, family6, product_metric, theorem_metric, walker
from .symexpr import Chart, Expr, ExprError, FuncBinding, ParseError, parse_expr
from .tensor import MetricChart, MetricError, TensorField, build_metric, vector_field

__all__ = ["MetricSpec", "SpecError", "load_spec", "parse_spec"]

SECTIONS = ("chart", "functions", "metric", "field", "map", "bindings")


class SpecError(ValueError):
    """A problem in a spec file, with file and line."""

    def __init__(self, msg: str, path: str = "<spec>", line: int | None = None):
        self.path, self.line = path, line
        where = f"{path}:{line}" if line else path
        super().__init__(f"{where}: {msg}")


@dataclass
class MetricSpec:
    chart: Chart
    metric: MetricChart | None = None
    field: TensorField | None = None
    potential: Expr | None = None
    lam: Expr | None = None
    map: CoordMap | None = None
    bindings: dict[str, object] = dataclasses.field(default_factory=dict)
    path: str = "<spec>"


_ENTRY = re.compile(r"g\s*\[\s*(\d)\s*\]\s*\[\s*(\d)\s*\]$")
_BUILTIN = re.compile(r"(theorem|walker|family6|product)\s*\((.*)\)$")


def _split_args(text: str) -> list[str]:
    """Split on commas that are not nested in parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail or out:
        out.append(tail)
    return out


def _sections(text: str, path: str) -> dict[str, list[tuple[int, str]]]:
    out: dict[str, list[tuple[int, str]]] = {}
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[\s*(\w+)\s*\]", line)
        if m:
            current = m.group(1)
            if current not in SECTIONS:
                raise SpecError(f"unknown section [{current}]; expected one of {', '.join(SECTIONS)}", path, n)
            if current in out:
                raise SpecError(f"section [{current}] appears twice", path, n)
            out[current] = []
            continue
        if current is None:
            raise SpecError("content before the first section header", path, n)
        out[current].append((n, line))
    return out


def _assignment(line: str, path: str, n: int) -> tuple[str, str]:
    if "=" not in line:
        raise SpecError(f"expected 'name = value', got {line!r}", path, n)
    lhs, rhs = line.split("=", 1)
    return lhs.strip(), rhs.strip()


class _Reader:
    def __init__(self, path: str):
        self.path = path

    def expr(self, src: str, chart: Chart, n: int) -> Expr:
        try:
            return parse_expr(src, chart)
        except ParseError as exc:
            raise SpecError(f"{exc.args[0]} in {src!r}", self.path, n) from None
        except ExprError as exc:
            raise SpecError(f"{exc} in {src!r}", self.path, n) from None

    def chart(self, secs) -> Chart:
        coords = ("t", "x", "y")
        for n, line in secs.get("chart", []):
            key, val = _assignment(line, self.path, n)
            if key != "coords":
                raise SpecError(f"unknown chart key {key!r}", self.path, n)
            coords = tuple(c.strip() for c in val.split(","))
        try:
            chart = Chart(coords)
        except ExprError as exc:
            raise SpecError(str(exc), self.path, None) from None
        for n, line in secs.get("functions", []):
            for sig in _split_args(line):
                try:
                    chart = chart.declare(sig)
                except ExprError as exc:
                    raise SpecError(str(exc), self.path, n) from None
        return chart

    def metric(self, lines, chart: Chart) -> MetricChart | None:
        entries: dict[tuple[int, int], Expr] = {}
        built = None
        where = None
        for n, line in lines:
            key, val = _assignment(line, self.path, n)
            where = n
            if key == "metric":
                m = _BUILTIN.fullmatch(val)
                if not m:
                    raise SpecError(f"unknown metric shortcut {val!r}", self.path, n)
                built = self.builtin(m.group(1), _split_args(m.group(2)), chart, n)
            elif key == "signature":
                continue
            else:
                m = _ENTRY.fullmatch(key)
                if not m:
                    raise SpecError(f"expected 'g[i][j] = expr' or 'metric = ...', got {key!r}", self.path, n)
                i, j = int(m.group(1)), int(m.group(2))
                if i > 2 or j > 2:
                    raise SpecError("metric indices are 0, 1, 2", self.path, n)
                e = self.expr(val, chart, n)
                if (j, i) in entries and entries[(j, i)] != e:
                    raise SpecError(f"g[{i}][{j}] disagrees with g[{j}][{i}]", self.path, n)
                entries[(i, j)] = e
        signature = dict(_assignment(line, self.path, n) for n, line in lines).get("signature")
        if built is not None:
            if entries:
                raise SpecError("give either 'metric = ...' or explicit entries, not both", self.path, where)
            return built
        if not entries:
            return None
        try:
            return build_metric(chart, entries, signature)
        except (MetricError, ExprError) as exc:
            raise SpecError(str(exc), self.path, where) from None

    def builtin(self, name: str, args: list[str], chart: Chart, n: int) -> MetricChart:
        if chart.coords != ("t", "x", "y"):
            raise SpecError(f"{name}(...) needs coordinates t, x, y", self.path, n)
        arity = {"theorem": 1, "walker": 1, "family6": 4, "product": 4}[name]
        if len(args) != arity:
            raise SpecError(f"{name} takes {arity} arguments, got {len(args)}", self.path, n)
        try:
            if name == "theorem":
                return theorem_metric(self.expr(args[0], chart, n), chart)
            if name == "walker":
                return walker(self.expr(args[0], chart, n), chart)
            if name == "family6":
                kappa = Fraction(args[0])
                A, B, C = (self.expr(a, chart, n) for a in args[1:])
                return family6(kappa, A, B, C, chart)
            sign = int(args[0])
            gN = tuple(self.expr(a, chart, n) for a in args[1:])
            return product_metric(sign, gN, chart)
        except SpecError:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(str(exc), self.path, n) from None

    def field_section(self, lines, chart: Chart):
        X = phi = lam = None
        for n, line in lines:
            key, val = _assignment(line, self.path, n)
            if key == "X":
                body = val.strip()
                if not (body.startswith("(") and body.endswith(")")):
                    raise SpecError("vector field must be written (X^0, X^1, X^2)", self.path, n)
                comps = _split_args(body[1:-1])
                if len(comps) != 3:
                    raise SpecError(f"vector field needs 3 components, got {len(comps)}", self.path, n)
                X = vector_field([self.expr(c, chart, n) for c in comps], chart)
            elif key == "phi":
                phi = self.expr(val, chart, n)
            elif key in ("lambda", "lam"):
                lam = self.expr(val, chart, n)
                if lam.free_names() & set(chart.coords):
                    raise SpecError("lambda must not depend on the coordinates", self.path, n)
            else:
                raise SpecError(f"unknown field key {key!r} (use X, phi, lambda)", self.path, n)
        return X, phi, lam

    def map_section(self, lines, chart: Chart) -> CoordMap | None:
        comps: dict[str, Expr] = {}
        for n, line in lines:
            key, val = _assignment(line, self.path, n)
            if key not in chart.coords:
                raise SpecError(f"map keys are the coordinates {chart.coords}, got {key!r}", self.path, n)
            comps[key] = self.expr(val, chart, n)
        if not comps:
            return None
        missing = [c for c in chart.coords if c not in comps]
        if missing:
            raise SpecError(f"map is missing components for {missing}", self.path, lines[-1][0])
        return CoordMap(tuple(comps[c] for c in chart.coords), chart, name=Path(self.path).stem)

    def bindings(self, lines, chart: Chart) -> dict[str, object]:
        out: dict[str, object] = {}
        for n, line in lines:
            key, val = _assignment(line, self.path, n)
            name = key.split("(", 1)[0].strip()
            sig = chart.signature(name)
            if sig is None:
                raise SpecError(f"binding for undeclared function {name!r}", self.path, n)
            if sig.is_constant:
                try:
                    out[name] = float(Fraction(val))
                except ValueError:
                    raise SpecError(f"constant {name} needs a rational value, got {val!r}", self.path, n) from None
                continue
            body_chart = Chart(chart.coords)
            body = self.expr(val, body_chart, n)
            try:
                out[name] = FuncBinding.from_expr(sig, body, body_chart)
            except ExprError as exc:
                raise SpecError(str(exc), self.path, n) from None
        return out


def parse_spec(text: str, path: str = "<spec>", chart: Chart | None = None) -> MetricSpec:
    """Parse spec text.  ``chart`` (if given) is extended by the file's declarations."""
    r = _Reader(path)
    secs = _sections(text, path)
    own = r.chart(secs)
    if chart is not None:
        if chart.coords != own.coords and "chart" in secs:
            raise SpecError(f"coordinates {own.coords} differ from {chart.coords}", path, secs["chart"][0][0] if secs["chart"] else None)
        try:
            own = chart.declare(*own.funcsyms)
        except ExprError as exc:
            raise SpecError(str(exc), path) from None
    spec = MetricSpec(own, path=path)
    spec.metric = r.metric(secs.get("metric", []), own)
    spec.field, spec.potential, spec.lam = r.field_section(secs.get("field", []), own)
    spec.map = r.map_section(secs.get("map", []), own)
    spec.bindings = r.bindings(secs.get("bindings", []), own)
    return spec


def load_spec(path: str | Path, chart: Chart | None = None) -> MetricSpec:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read: {exc.strerror}", str(p)) from None
    return parse_spec(text, str(p), chart)
