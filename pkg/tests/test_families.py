from fractions import Fraction

import pytest

from geo3 import curvature as cv
from geo3.families import (
    CoordMap,
    affine_isometry,
    compose,
    family6,
    identity_map,
    product_metric,
    pullback,
    reduce_square_root,
    scaling_map,
    shift_map,
    strict_walker,
    theorem_metric,
    verify_isometry,
    walker,
)
from geo3.symexpr import Chart, Expr, ExprError, FuncSym, parse_expr, substitute
from geo3.tensor import MetricError

CH = Chart(("t", "x", "y")).declare("a(y)", "b(y)", "phi(y)", "psi(y)", "A(y)", "B(y)", "C(y)", "al", "be", "c")


def P(src):
    return parse_expr(src, CH)


def test_theorem_metric_entry():
    m = theorem_metric(P("a"), CH)
    assert m.g[2, 2] == P("x^3 + a(y)*x")
    assert cv.is_walker_form(m)


def test_family6_simplest_member():
    m = family6(1, 0, 0, 0, CH)
    assert m.g[2, 2] == P("x^3")


def test_family6_general_entry():
    m = family6(Fraction(1, 3), P("A"), P("B"), P("C"), CH)
    assert m.g[2, 2] == P("x^3/3 + x^2*A(y) + x*B(y) + C(y)")


def test_product_of_flat_plane_is_flat():
    m = product_metric(1, (1, 0, 1), CH)
    assert cv.riemann(m).is_zero()


@pytest.mark.parametrize(
    "m",
    [
        walker(P("t*x + a(y)"), CH),
        strict_walker(P("x^2*b(y)"), CH),
        theorem_metric(P("y^2"), CH),
        family6(-2, P("A"), P("B"), P("C"), CH),
    ],
)
def test_builders_have_walker_form(m):
    assert cv.is_walker_form(m)


def test_strict_walker_rejects_t_dependence():
    with pytest.raises(ExprError):
        strict_walker(P("t*x"), CH)
    with pytest.raises(ExprError):
        theorem_metric(P("x"), CH)


def test_shift_pullback_gives_expanded_profile():
    kappa = 2
    src = family6(kappa, 0, P("b"), 0, CH)
    T = shift_map(P("phi"), P("psi"), CH)
    pulled = pullback(src, T)
    ft = P("2*(x + phi)^3 + b(y)*(x + phi) - 2*x*diff(phi(y), y, 2) + diff(phi(y), y)^2 + 2*diff(psi(y), y)")
    assert pulled.g[2, 2] == ft
    assert cv.is_walker_form(pulled)


@pytest.mark.parametrize("kappa", [2, -3, Fraction(1, 4)])
def test_scaling_pullback(kappa):
    k = Fraction(kappa)
    src = family6(k, 0, P("b"), 0, CH)
    Tt = scaling_map(k, "c", CH)
    profile = substitute(P("b(y)"), {"y": P("y/c")}, CH) / Expr(k)
    target = theorem_metric(profile, CH.declare(FuncSym("c")))
    rep = verify_isometry(target, src, Tt, root=("c", abs(k)))
    assert rep.passed, rep.render()


def test_reduce_square_root():
    hidden = substitute(P("b(y)"), {"y": P("y/c")}, CH)
    e = P("c^3 + c^2*x") + hidden
    assert reduce_square_root(e, "c", 2) == P("2*c + 2*x") + hidden
    with pytest.raises(ExprError):
        reduce_square_root(e, "c", -1)


def test_identity_pullback():
    m = theorem_metric(P("a"), CH)
    assert pullback(m, identity_map(CH)) == m


def test_composition_of_pullbacks():
    m = theorem_metric(P("a"), CH)
    A = shift_map(P("phi"), 0, CH)
    B = affine_isometry(-1, P("al"), P("be"), CH)
    assert pullback(pullback(m, A), B) == pullback(m, compose(A, B))


@pytest.mark.parametrize("eps2", [1, -1])
def test_affine_isometry_pass(eps2):
    target = theorem_metric(P("b"), CH)
    shifted = substitute(P("b(y)"), {"y": P(f"{eps2}*y + al")}, CH)
    source = theorem_metric(shifted, CH)
    rep = verify_isometry(source, target, affine_isometry(eps2, P("al"), P("be"), CH))
    assert rep.passed


def test_affine_isometry_fail_names_yy():
    target = theorem_metric(P("b"), CH)
    source = theorem_metric(P("a"), CH)
    rep = verify_isometry(source, target, affine_isometry(1, P("al"), 0, CH))
    assert not rep.passed
    (check,) = rep.failures()
    assert list(check.residuals) == ["g[y,y]"]


def test_singular_map_rejected():
    m = theorem_metric(P("a"), CH)
    with pytest.raises(MetricError):
        pullback(m, CoordMap((P("t"), P("t"), P("y")), CH))
