"""Curvature chain from Christoffel symbols to the gradient of the Cotton tensor.

Sign conventions (fixed everywhere)::

    R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    R_abcd  = g_ae R^e_bcd
    ρ_bd    = R^a_bad,       τ = g^bd ρ_bd
    S       = ρ − τ/4 g
    C_ijk   = (∇_i S)_jk − (∇_j S)_ik

With these, a round sphere has positive Ricci curvature and
``R_ijkl = K (g_ik g_jl − g_il g_jk)`` at constant curvature ``K``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import sympy as sp
from sympy.polys.matrices import DomainMatrix

from .symexpr import Expr, ExprError
from .tensor import (
    DIM,
    MetricChart,
    TensorField,
    _christoffel_raw,
    covariant_derivative,
    hodge_dual_cotton,
    musical,
)

__all__ = [
    "CurvaturePack",
    "christoffel",
    "cotton2",
    "cotton3",
    "cotton_gradient",
    "cotton_operator",
    "curvature_pack",
    "normalize_condition",
    "parallel_cotton_system",
    "ricci",
    "ricci_operator",
    "riemann",
    "riemann_up",
    "scalar",
    "schouten",
    "system_membership",
]


def christoffel(m: MetricChart) -> np.ndarray:
    """``Γ[k, i, j] = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)``."""

    def compute():
        g = m.raw_g()
        ginv = m.raw_ginv()
        syms = m.chart.coord_symbols()
        dg = [[[sp.diff(g[i, j], syms[l]) for j in range(DIM)] for i in range(DIM)] for l in range(DIM)]
        out = np.empty((DIM, DIM, DIM), dtype=object)
        for k, i in itertools.product(range(DIM), repeat=2):
            for j in range(i, DIM):
                acc = []
                for l in range(DIM):
                    if ginv[k, l] == 0:
                        continue
                    term = dg[i][j][l] + dg[j][i][l] - dg[l][i][j]
                    if term != 0:
                        acc.append(ginv[k, l] * term)
                val = Expr(sp.Add(*acc) / 2)
                out[k, i, j] = out[k, j, i] = val
        out.setflags(write=False)
        return out

    return m.cached("christoffel", compute)


def riemann_up(m: MetricChart) -> TensorField:
    """``R^a_bcd`` with kinds ``'uddd'``."""

    def compute():
        G = _christoffel_raw(m)
        syms = m.chart.coord_symbols()

        def comp(a, b, c, d):
            if c == d:
                return 0
            acc = [sp.diff(G[a, d, b], syms[c]), -sp.diff(G[a, c, b], syms[d])]
            for e in range(DIM):
                acc.append(G[a, c, e] * G[e, d, b] - G[a, d, e] * G[e, c, b])
            return sp.Add(*acc)

        return TensorField.build("uddd", m.chart, comp)

    return m.cached("riemann_up", compute)


def riemann(m: MetricChart) -> TensorField:
    """``R_abcd = g_ae R^e_bcd``."""
    return m.cached("riemann", lambda: musical(riemann_up(m), 0, "lower", m))


def ricci(m: MetricChart) -> TensorField:
    """``ρ_bd = R^a_bad``."""

    def compute():
        R = riemann_up(m).raw()
        return TensorField.build("dd", m.chart, lambda b, d: sp.Add(*[R[a, b, a, d] for a in range(DIM)]))

    return m.cached("ricci", compute)


def scalar(m: MetricChart) -> Expr:
    def compute():
        rho = ricci(m).raw()
        ginv = m.raw_ginv()
        return Expr(sp.Add(*[ginv[i, j] * rho[i, j] for i in range(DIM) for j in range(DIM)]))

    return m.cached("scalar", compute)


def ricci_operator(m: MetricChart) -> TensorField:
    """``ρ̂`` with ``ρ(X, Y) = g(ρ̂ X, Y)``; kinds ``'ud'``, column ``j`` is ``ρ̂(∂_j)``."""
    return m.cached("ricci_operator", lambda: musical(ricci(m), 0, "raise", m))


def schouten(m: MetricChart) -> TensorField:
    """``S = ρ − τ/(2(n−1)) g`` with ``n = 3``."""

    def compute():
        rho = ricci(m).raw()
        g = m.raw_g()
        tau = scalar(m).sym
        return TensorField.build("dd", m.chart, lambda i, j: rho[i, j] - tau * g[i, j] / 4)

    return m.cached("schouten", compute)


def schouten_gradient(m: MetricChart) -> TensorField:
    return m.cached("schouten_gradient", lambda: covariant_derivative(schouten(m), m))


def cotton3(m: MetricChart) -> TensorField:
    """``C_ijk = (∇_i S)_jk − (∇_j S)_ik``."""

    def compute():
        DS = schouten_gradient(m).raw()
        return TensorField.build("ddd", m.chart, lambda i, j, k: DS[i, j, k] - DS[j, i, k])

    return m.cached("cotton3", compute)


def cotton2(m: MetricChart) -> TensorField:
    """Symmetric trace-free ``(0,2)`` Cotton tensor (Hodge dual of ``C``)."""
    return m.cached("cotton2", lambda: hodge_dual_cotton(cotton3(m), m))


def cotton_operator(m: MetricChart) -> TensorField:
    """``Ĉ`` with ``C̃(X, Y) = g(Ĉ X, Y)``; kinds ``'ud'``."""
    return m.cached("cotton_operator", lambda: musical(cotton2(m), 0, "raise", m))


def cotton_gradient(m: MetricChart) -> TensorField:
    """``(∇C̃)[μ, i, j] = (∇_μ C̃)_ij``."""
    return m.cached("cotton_gradient", lambda: covariant_derivative(cotton2(m), m))


@dataclass(frozen=True)
class CurvaturePack:
    christoffel: np.ndarray
    riemann: TensorField
    ricci: TensorField
    scalar: Expr
    schouten: TensorField
    cotton3: TensorField
    cotton2: TensorField | None
    cotton_operator: TensorField | None
    cotton_gradient: TensorField | None


def curvature_pack(m: MetricChart, *, with_cotton_gradient: bool = True) -> CurvaturePack:
    """Everything at once.  The ``(0,2)`` parts are ``None`` when ``sqrt|det g|`` is irrational."""
    try:
        c2, chat = cotton2(m), cotton_operator(m)
        dc = cotton_gradient(m) if with_cotton_gradient else None
    except ExprError:
        c2 = chat = dc = None
    return CurvaturePack(
        christoffel(m), riemann(m), ricci(m), scalar(m), schouten(m), cotton3(m), c2, chat, dc
    )


# ---------------------------------------------------------------------------
# Parallel-Cotton condition system


def is_walker_form(m: MetricChart) -> bool:
    """``g_tt = g_tx = g_xy = 0``, ``g_ty = g_xx = 1`` in chart order."""
    g = m.g
    return (
        g[0, 0].is_zero
        and g[0, 1].is_zero
        and g[1, 2].is_zero
        and g[0, 2] == Expr(1)
        and g[1, 1] == Expr(1)
    )


def normalize_condition(e: Expr) -> Expr:
    """Scale a nonzero polynomial condition to a fixed representative.

    Clears rational content and makes the leading coefficient (lex order on
    sorted atoms) positive, so constant multiples collapse to one value.
    """
    if e.is_zero:
        return e
    num = e.num
    gens = e.atoms()
    if not gens:
        return Expr(1)
    poly = sp.Poly(num, *gens, domain="QQ")
    _, prim = poly.clear_denoms()
    prim = prim.set_domain("ZZ").primitive()[1]
    if prim.LC() < 0:
        prim = -prim
    return Expr(prim.as_expr())


def parallel_cotton_system(m: MetricChart) -> list[Expr]:
    """Distinct nonzero components of ``∇C̃`` up to rational constant multiples.

    Only defined for metrics in Walker form.  Order follows the first
    occurrence when scanning ``(μ, i, j)`` with ``i <= j`` lexicographically.
    """
    if not is_walker_form(m):
        raise ExprError("metric is not in Walker form dt dy + dx^2 + f dy^2")
    DC = cotton_gradient(m)
    seen: dict[Expr, Expr] = {}
    for mu in range(DIM):
        for i in range(DIM):
            for j in range(i, DIM):
                e = DC[mu, i, j]
                if e.is_zero:
                    continue
                key = normalize_condition(e)
                seen.setdefault(key, key)
    return list(seen.values())


def _coefficient_vectors(polys: Sequence[sp.Expr], gens: Sequence[sp.Expr]):
    return [sp.Poly(p, *gens, domain="QQ").as_dict() if gens else {(): sp.Rational(p)} for p in polys]


def system_membership(
    targets: Iterable[Expr],
    generators: Sequence[Expr],
    multiplier_degree: int = 0,
) -> list[bool]:
    """Decide whether each target is a combination of ``generators``.

    Multipliers are rational constants when ``multiplier_degree`` is 0, and
    polynomials of total degree at most ``multiplier_degree`` in the atoms of
    the whole system otherwise.  The test is exact linear algebra over QQ:
    the target lies in the span iff appending it does not raise the rank.
    """
    targets = list(targets)
    allgens: set = set()
    for e in list(targets) + list(generators):
        if not e.is_polynomial:
            raise ExprError("membership test needs polynomial conditions")
        allgens.update(e.atoms())
    atoms = sorted(allgens, key=sp.default_sort_key)
    monomials = [sp.S.One]
    for d in range(1, multiplier_degree + 1):
        monomials += [sp.Mul(*c) for c in itertools.combinations_with_replacement(atoms, d)]
    columns = [sp.expand(mono * g.num) for g in generators for mono in monomials]
    col_dicts = _coefficient_vectors(columns, atoms)
    tgt_dicts = _coefficient_vectors([t.num for t in targets], atoms)
    keys = sorted({k for d in col_dicts + tgt_dicts for k in d})
    index = {k: n for n, k in enumerate(keys)}

    def matrix(dicts):
        rows = [[sp.S.Zero] * len(dicts) for _ in keys]
        for c, d in enumerate(dicts):
            for k, v in d.items():
                rows[index[k]][c] = v
        return DomainMatrix.from_list_sympy(len(keys), len(dicts), rows).convert_to(sp.QQ)

    base = matrix(col_dicts)
    base_rank = base.rank()
    out = []
    for td in tgt_dicts:
        aug = matrix(col_dicts + [td])
        out.append(aug.rank() == base_rank)
    return out
