import pytest

from geo3 import curvature as cv
from geo3.families import family6, product_companion, product_metric, strict_walker, theorem_metric, walker
from geo3.golden import (
    GENERIC_CHART,
    fd,
    generic_f,
    walker_christoffel,
    walker_cotton2,
    walker_parallel_cotton_conditions,
    walker_ricci,
)
from geo3.symexpr import Chart, Expr, ExprError, parse_expr, substitute
from geo3.tensor import build_metric, contract, covariant_derivative, hessian, metric_trace, operator_power

CH = Chart(("t", "x", "y")).declare("a(y)", "h(x, y)", "u(x)", "A(y)", "B(y)", "C(y)")


def P(src):
    return parse_expr(src, CH)


@pytest.fixture(scope="module")
def generic():
    return walker(generic_f(), GENERIC_CHART)


def _as_dict(T, symmetric_from=1):
    out = {}
    for idx, v in T.nonzero().items():
        if list(idx[symmetric_from:]) == sorted(idx[symmetric_from:]):
            out[idx] = v
    return out


def test_generic_walker_christoffel(generic):
    G = generic.christoffel
    got = {(k, i, j): G[k, i, j] for k in range(3) for i in range(3) for j in range(i, 3) if not G[k, i, j].is_zero}
    assert got == walker_christoffel()


def test_generic_walker_ricci(generic):
    assert _as_dict(cv.ricci(generic), 0) == walker_ricci()


def test_generic_walker_cotton(generic):
    assert _as_dict(cv.cotton2(generic), 0) == walker_cotton2()


def test_theorem_metric_values():
    m = theorem_metric(P("a"), CH)
    assert m.christoffel[0, 1, 2] == P("(3*x^2 + a(y))/2")
    assert cv.ricci(m).nonzero() == {(2, 2): P("-3*x")}
    assert cv.scalar(m).is_zero
    assert cv.cotton2(m).nonzero() == {(2, 2): Expr(-3)}
    chat = cv.cotton_operator(m)
    assert chat.nonzero() == {(0, 2): Expr(-3)}
    assert operator_power(chat, 2).is_zero()


def test_flat_metric():
    m = walker(Expr(0), CH)
    assert cv.riemann(m).is_zero()
    assert cv.ricci(m).is_zero()
    assert cv.scalar(m).is_zero
    assert cv.cotton3(m).is_zero()


@pytest.mark.parametrize(
    "gN",
    [
        (1, 0, P("cos(x)^2")),
        (1, 0, P("sin(x)^2")),
        (1, 0, P("exp(2*x)")),
    ],
)
def test_constant_curvature_products_are_conformally_flat(gN):
    # round sphere, and the hyperbolic plane in horospherical form
    for sign in (1, -1):
        assert cv.cotton3(product_metric(sign, gN, CH)).is_zero()


def _check_riemann_symmetries(m):
    R = cv.riemann(m)
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for d in range(3):
                    assert R[a, b, c, d] == -R[b, a, c, d]
                    assert R[a, b, c, d] == -R[a, b, d, c]
                    assert R[a, b, c, d] == R[c, d, a, b]
                    assert (R[a, b, c, d] + R[a, c, d, b] + R[a, d, b, c]).is_zero


def test_riemann_symmetries_generic(generic):
    _check_riemann_symmetries(generic)


def test_riemann_symmetries_riemannian():
    _check_riemann_symmetries(build_metric(CH, {(0, 0): 1, (1, 1): P("1 + x^2"), (2, 2): P("u")}, "riemannian"))


def test_ricci_trace_and_symmetry(generic):
    rho = cv.ricci(generic)
    assert rho.is_symmetric()
    assert metric_trace(rho, generic) == cv.scalar(generic)


def test_cotton_algebraic_identities(generic):
    m = generic
    C = cv.cotton3(m)
    assert C.is_antisymmetric(0, 1)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert (C[i, j, k] + C[j, k, i] + C[k, i, j]).is_zero
    assert metric_trace(C, m, 1, 2).is_zero()
    C2 = cv.cotton2(m)
    assert C2.is_symmetric()
    assert metric_trace(C2, m).is_zero
    assert contract(cv.cotton_operator(m), 0, 1).is_zero


def test_strict_walker_cotton_and_gradient():
    m = strict_walker(P("h"), CH)
    assert cv.cotton2(m).nonzero() == {(2, 2): P("-1/2*diff(h(x, y), x, 3)")}


def test_product_schouten_gradient():
    # h flips the sign of the line factor
    gN = (1, 0, P("u"))
    m, h = product_metric(1, gN, CH), product_companion(1, gN, CH).g
    assert h[0, 0] == Expr(-1) and h[2, 2] == P("u")
    tau = cv.scalar(m)
    DS = cv.schouten_gradient(m)
    for mu in range(3):
        for i in range(3):
            for j in range(3):
                assert DS[mu, i, j] == tau.diff(m.coords[mu]) * h[i, j] / 4


def test_product_cotton_gradient_slice():
    gN = (1, 0, P("u"))
    m, h = product_metric(-1, gN, CH), product_companion(-1, gN, CH).g
    DC = covariant_derivative(cv.cotton3(m), m)
    H = hessian(cv.scalar(m), m)
    for mu in range(3):
        for a in range(3):
            for b in range(3):
                for c in range(3):
                    expected = (H[mu, a] * h[b, c] - H[mu, b] * h[a, c]) / 4
                    assert DC[mu, a, b, c] == expected


# ---------------------------------------------------------------- condition system


def test_system_requires_walker_form():
    m = build_metric(CH, {(0, 0): 1, (1, 1): 1, (2, 2): 1})
    with pytest.raises(ExprError):
        cv.parallel_cotton_system(m)


def test_system_contains_pure_derivative_lines(generic):
    system = cv.parallel_cotton_system(generic)
    for spec in ("tttt", "tttx", "ttxx"):
        assert cv.normalize_condition(fd(spec)) in system
    # f_txxx only appears inside a rational combination
    assert cv.normalize_condition(fd("txxx")) not in system
    assert cv.system_membership([fd("txxx")], system) == [True]


def test_system_vanishes_on_family6():
    m = family6(1, P("A"), P("B"), P("C"), CH)
    assert cv.parallel_cotton_system(m) == []
    assert cv.cotton_gradient(m).is_zero()


def test_system_detects_quartic():
    m = strict_walker(P("x^4"), CH)
    system = cv.parallel_cotton_system(m)
    assert system
    assert cv.cotton_gradient(m)[1, 2, 2] == Expr(-12)


def test_normalize_condition_collapses_multiples(generic):
    e = fd("ttx") * 3 - fd("t") * fd("x") / 2
    assert cv.normalize_condition(e) == cv.normalize_condition(e * -7)
    assert cv.normalize_condition(Expr(0)).is_zero


def test_membership_constant_multipliers():
    f1, f2 = fd("tttt"), fd("xxxx")
    assert cv.system_membership([f1 * 3 - f2], [f1, f2]) == [True]
    assert cv.system_membership([f1 * fd("t")], [f1, f2]) == [False]
    assert cv.system_membership([f1 * fd("t")], [f1, f2], multiplier_degree=1) == [True]


def test_golden_conditions_vanish_on_family6():
    sub = {"f": P("2*x^3 + x^2*A(y) + x*B(y) + C(y)")}
    for label, cond in walker_parallel_cotton_conditions():
        assert substitute(cond, sub).is_zero, label
