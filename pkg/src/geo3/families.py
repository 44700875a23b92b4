"""Metric families in Walker coordinates and coordinate maps between them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import sympy as sp
from sympy.core.function import AppliedUndef

from .report import Report, component_label
from .symexpr import Chart, Expr, ExprError, FuncSym, as_expr, derive, substitute
from .tensor import MetricChart, MetricError, build_metric

__all__ = [
    "CoordMap",
    "WALKER_CHART",
    "affine_isometry",
    "chart_for",
    "compose",
    "family6",
    "product_metric",
    "pullback",
    "reduce_square_root",
    "scaling_map",
    "shift_map",
    "strict_walker",
    "theorem_metric",
    "verify_isometry",
    "walker",
]

WALKER_CHART = Chart(("t", "x", "y"))


def chart_for(*exprs: Expr, base: Chart = WALKER_CHART) -> Chart:
    """``base`` extended by every function symbol and constant the expressions use."""
    sigs: dict[str, FuncSym] = {}
    for e in exprs:
        for fs in e.funcsyms():
            sigs[fs.name] = FuncSym(fs.name, fs.args)
        for a in e.sym.atoms(AppliedUndef):
            name = a.func.__name__
            if name not in sigs and base.signature(name) is None:
                raise ExprError(f"{name} is applied to non-coordinate arguments; declare it in the chart")
        for s in e.sym.free_symbols:
            if s.name not in base.coords and s.name not in sigs:
                sigs[s.name] = FuncSym(s.name)
    return base.declare(*[s for s in sigs.values() if base.signature(s.name) is None])


def _depends_on(e: Expr, coord: str) -> bool:
    return not derive(e, coord).is_zero


def walker(f, chart: Chart | None = None) -> MetricChart:
    """``dt dy + dx² + f dy²`` read as ``g(∂t, ∂y) = 1``."""
    f = as_expr(f, chart)
    chart = chart_for(f, base=chart or WALKER_CHART)
    return build_metric(chart, {(0, 2): 1, (1, 1): 1, (2, 2): f}, "lorentzian")


def strict_walker(f, chart: Chart | None = None) -> MetricChart:
    f = as_expr(f, chart)
    if _depends_on(f, "t"):
        raise MetricError("a strict Walker metric needs f independent of t")
    return walker(f, chart)


def theorem_metric(a, chart: Chart | None = None) -> MetricChart:
    """Strict Walker metric with ``f = x³ + a(y) x``."""
    a = as_expr(a, chart)
    if _depends_on(a, "t") or _depends_on(a, "x"):
        raise MetricError("the profile a must depend on y only")
    x = Expr(sp.Symbol("x"))
    return strict_walker(x**3 + a * x, chart)


def family6(kappa, A, B, C, chart: Chart | None = None) -> MetricChart:
    """Strict Walker metric with ``f = κx³ + A(y)x² + B(y)x + C(y)``, ``κ ≠ 0`` rational."""
    kappa = Fraction(kappa)
    if kappa == 0:
        raise MetricError("kappa must be nonzero")
    A, B, C = (as_expr(v, chart) for v in (A, B, C))
    for v in (A, B, C):
        if _depends_on(v, "t") or _depends_on(v, "x"):
            raise MetricError("A, B, C must depend on y only")
    x = Expr(sp.Symbol("x"))
    return strict_walker(Expr(kappa) * x**3 + A * x**2 + B * x + C, chart)


def _gn_entries(gN) -> dict[tuple[int, int], object]:
    if isinstance(gN, Mapping):
        return dict(gN)
    rows = list(gN)
    if len(rows) == 3 and not isinstance(rows[0], (list, tuple)):
        g11, g12, g22 = rows
        return {(0, 0): g11, (0, 1): g12, (1, 1): g22}
    return {(i, j): rows[i][j] for i in range(2) for j in range(2)}


def product_metric(sign: int, gN, chart: Chart | None = None, gN_signature: str = "riemannian") -> MetricChart:
    """``±dt² + g_N`` with the 2D metric ``g_N`` on the ``(x, y)`` block.

    ``gN`` is a 2×2 nested sequence, a mapping ``{(i, j): value}`` with
    indices 0, 1 for x, y, or the triple ``(g_xx, g_xy, g_yy)``.
    """
    if sign not in (1, -1):
        raise MetricError("sign must be +1 or -1")
    entries = {(0, 0): sign}
    exprs = []
    for (i, j), v in _gn_entries(gN).items():
        e = as_expr(v, chart)
        if _depends_on(e, "t"):
            raise MetricError("g_N must not depend on t")
        exprs.append(e)
        entries[(i + 1, j + 1)] = e
    chart = chart_for(*exprs, base=chart or WALKER_CHART)
    negatives = (sign < 0) + (1 if gN_signature == "lorentzian" else 0)
    return build_metric(chart, entries, "lorentzian" if negatives == 1 else "riemannian")


def product_companion(sign: int, gN, chart: Chart | None = None) -> MetricChart:
    """The metric ``∓dt² + g_N`` sharing the Levi-Civita connection of ``±dt² + g_N``."""
    return product_metric(-sign, gN, chart)


# ---------------------------------------------------------------------------
# Coordinate maps


@dataclass(frozen=True)
class CoordMap:
    """``p ↦ (Φ^0(p), Φ^1(p), Φ^2(p))`` written in source coordinates."""

    components: tuple[Expr, Expr, Expr]
    chart: Chart = WALKER_CHART
    inverse: "CoordMap | None" = None
    name: str = ""

    def __post_init__(self):
        comps = tuple(as_expr(c, self.chart) for c in self.components)
        if len(comps) != 3:
            raise ExprError("a coordinate map needs 3 components")
        object.__setattr__(self, "components", comps)

    def bindings(self) -> dict[str, Expr]:
        return dict(zip(self.chart.coords, self.components))

    def jacobian(self) -> list[list[Expr]]:
        """``J[a][i] = ∂_i Φ^a``."""
        return [[derive(c, s) for s in self.chart.coords] for c in self.components]


def identity_map(chart: Chart = WALKER_CHART) -> CoordMap:
    return CoordMap(tuple(Expr(s) for s in chart.coord_symbols()), chart, name="id")


def compose(A: CoordMap, B: CoordMap) -> CoordMap:
    """``A ∘ B`` (apply ``B`` first)."""
    subs = B.bindings()
    comps = tuple(substitute(c, subs) for c in A.components)
    return CoordMap(comps, _merge_charts(A.chart, B.chart), name=f"{A.name}∘{B.name}")


def _merge_charts(*charts: Chart) -> Chart:
    out = charts[0]
    for c in charts[1:]:
        if c.coords != out.coords:
            raise ExprError("charts have different coordinates")
        out = out.declare(*c.funcsyms)
    return out


def _det3(J) -> Expr:
    return (
        J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1])
        - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0])
        + J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0])
    )


def pullback(m: MetricChart, phi: CoordMap) -> MetricChart:
    """``(Φ*g)_ij = ∂_i Φ^a ∂_j Φ^b (g_ab ∘ Φ)``."""
    J = phi.jacobian()
    if _det3(J).is_zero:
        raise MetricError(f"map {phi.name or ''} has singular Jacobian")
    subs = phi.bindings()
    gphi = [[substitute(m.g[a, b], subs) for b in range(3)] for a in range(3)]
    entries = {}
    for i in range(3):
        for j in range(i, 3):
            acc = sp.Add(
                *[
                    J[a][i].sym * J[b][j].sym * gphi[a][b].sym
                    for a in range(3)
                    for b in range(3)
                    if not gphi[a][b].is_zero
                ]
            )
            entries[(i, j)] = Expr(acc)
    chart = _merge_charts(m.chart, phi.chart)
    return build_metric(chart, entries, m.signature)


def reduce_square_root(e: Expr, root: str, square) -> Expr:
    """Impose ``root² = square`` on every polynomial occurrence of the constant ``root``.

    Atoms that contain ``root`` inside their arguments (e.g. ``b(y/c)``) are
    left opaque.
    """
    c = sp.Symbol(root)
    sq = sp.Rational(Fraction(square).numerator, Fraction(square).denominator)
    if sq <= 0:
        raise ExprError("square must be positive")

    def reduce(p):
        hidden = {}
        for a in p.atoms(AppliedUndef, sp.Derivative, sp.sin, sp.cos, sp.exp):
            if c in a.free_symbols:
                hidden[a] = sp.Dummy()
        q = sp.expand(p.xreplace(hidden))
        poly = sp.Poly(q, c)
        out = sp.S.Zero
        for (k,), coeff in poly.terms():
            out += coeff * sq ** (k // 2) * c ** (k % 2)
        return out.xreplace({v: k for k, v in hidden.items()})

    return Expr(reduce(e.num) / reduce(e.den))


def reduce_metric(m: MetricChart, root: str, square) -> MetricChart:
    entries = {(i, j): reduce_square_root(m.g[i, j], root, square) for i in range(3) for j in range(i, 3)}
    return build_metric(m.chart, entries, m.signature)


def shift_map(phi, psi, chart: Chart | None = None) -> CoordMap:
    """``(t − φ'(y) x + ψ, x + φ, y)`` for profiles ``φ(y)``, ``ψ(y)``."""
    phi, psi = as_expr(phi, chart), as_expr(psi, chart)
    chart = chart or chart_for(phi, psi)
    t, x, y = (Expr(s) for s in chart.coord_symbols())
    return CoordMap((t - derive(phi, "y") * x + psi, x + phi, y), chart, name="T")


def scaling_map(kappa, root: str = "c", chart: Chart | None = None) -> CoordMap:
    """``(c t, ε x, y / c)`` with ``ε = sign κ`` and ``c`` a constant standing for ``sqrt|κ|``."""
    kappa = Fraction(kappa)
    if kappa == 0:
        raise ExprError("kappa must be nonzero")
    eps = 1 if kappa > 0 else -1
    chart = (chart or WALKER_CHART).declare(FuncSym(root))
    t, x, y = (Expr(s) for s in chart.coord_symbols())
    c = Expr(sp.Symbol(root))
    return CoordMap((c * t, eps * x, y / c), chart, name="T~")


def affine_isometry(eps2: int, alpha, beta, chart: Chart | None = None) -> CoordMap:
    """``(ε₂ t + β, x, ε₂ y + α)``."""
    if eps2 not in (1, -1):
        raise ExprError("eps2 must be ±1")
    alpha, beta = as_expr(alpha, chart), as_expr(beta, chart)
    chart = chart or chart_for(alpha, beta)
    t, x, y = (Expr(s) for s in chart.coord_symbols())
    return CoordMap((eps2 * t + beta, x, eps2 * y + alpha), chart, name="Phi")


def metric_residual(a: MetricChart, b: MetricChart) -> dict[str, str]:
    out = {}
    for i in range(3):
        for j in range(i, 3):
            r = a.g[i, j] - b.g[i, j]
            if not r.is_zero:
                out[component_label("g", (i, j), a.coords)] = str(r)
    return out


def verify_isometry(source: MetricChart, target: MetricChart, phi: CoordMap, *, root=None) -> Report:
    """Check ``Φ* target = source`` component by component.

    ``root=(name, square)`` imposes ``name² = square`` before comparing, for
    maps carrying an irrational constant.
    """
    report = Report("isometry", {"map": phi.name, "components": [str(c) for c in phi.components]})
    pulled = pullback(target, phi)
    if root is not None:
        pulled = reduce_metric(pulled, *root)
    res = metric_residual(pulled, source)
    report.add(
        "isometry.pullback",
        not res,
        residuals=res,
        detail="pullback of target equals source" if not res else "pullback differs from source",
    )
    if phi.inverse is not None:
        both = compose(phi, phi.inverse)
        bad = {
            f"({phi.name}∘inv)^{c}": str(e - Expr(sp.Symbol(c)))
            for c, e in zip(phi.chart.coords, both.components)
            if not (e - Expr(sp.Symbol(c))).is_zero
        }
        report.add("isometry.inverse", not bad, residuals=bad)
    return report
