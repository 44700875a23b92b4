import math

import pytest
import sympy as sp
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from geo3.symexpr import (
    ONE,
    ZERO,
    Chart,
    EvaluationError,
    Expr,
    ExprError,
    FuncBinding,
    FuncSym,
    ParseError,
    derive,
    eval_numeric,
    is_zero,
    parse_expr,
    substitute,
)

CH = Chart(("t", "x", "y")).declare("a(y)", "phi(y)", "u(x, y)", "k")


def P(src, chart=CH):
    return parse_expr(src, chart)


# ---------------------------------------------------------------- parsing


def test_parse_polynomial_with_function_atom():
    e = P("x^3 + a(y)*x")
    assert e.is_polynomial
    assert e == P("x*a(y) + x*x*x")
    assert {f.name for f in e.funcsyms()} == {"a"}


def test_parse_zero():
    assert P("0").is_zero
    assert P("0") == ZERO
    assert P("x - x") == ZERO


def test_parse_derivative_atom():
    e = P("diff(a(y), y, 2)")
    assert e == derive(derive(P("a(y)"), "y"), "y")
    assert e != derive(P("a(y)"), "y")


def test_bare_function_name_means_declared_arguments():
    assert P("a") == P("a(y)")
    assert P("u") == P("u(x, y)")


def test_unary_minus_binds_looser_than_power():
    assert P("-x^2") == -(P("x") ** 2)
    assert P("-2^2") == Expr(-4)


def test_rational_constants_are_exact():
    e = P("1/3 + 2/3")
    assert e == ONE
    assert e.as_fraction() == 1


@pytest.mark.parametrize(
    "src",
    ["x +", "(x", "x y", "q(y)", "a(x)", "x^y", "x^(1/2)", "diff(a(y), t, -1)", "sin()", "1/0", "x^-1 +* 2"],
)
def test_parse_errors(src):
    with pytest.raises(ExprError):
        P(src)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        P("x + * y")
    assert info.value.pos == 4


def test_undeclared_identifier_is_rejected():
    with pytest.raises(ExprError, match="unknown identifier"):
        P("z + 1")


def test_rational_function_canonical_form():
    e = P("(x^2 - 1)/(x - 1)")
    assert e == P("x + 1")
    f = P("1/(2*x + 2)")
    assert f.den.as_poly().LC() == 1
    assert (f * P("2*x + 2")) == ONE


# ---------------------------------------------------------------- derive


def test_derive_power_rule():
    assert derive(P("x^3 + a(y)*x"), "x") == P("3*x^2 + a(y)")


def test_derive_function_rule():
    assert derive(P("x^3 + a(y)*x"), "y") == P("diff(a(y), y)*x")


def test_third_x_derivative_is_six():
    e = P("x^3 + a(y)*x")
    for _ in range(3):
        e = derive(e, "x")
    assert e == Expr(6)


def test_derivative_in_non_argument_is_zero():
    assert derive(P("a(y)"), "x").is_zero
    assert derive(P("a(y)"), "t").is_zero


def test_elementary_derivatives():
    assert derive(P("sin(x)"), "x") == P("cos(x)")
    assert derive(P("cos(x*y)"), "x") == P("-y*sin(x*y)")
    assert derive(P("exp(2*x)"), "x") == P("2*exp(2*x)")


def test_quotient_rule():
    assert derive(P("1/x"), "x") == P("-1/x^2")


# ---------------------------------------------------------------- is_zero


def test_commutativity_decided():
    assert is_zero(P("x*a(y) - a(y)*x"))


def test_parallel_cotton_condition_for_theorem_profile():
    f = P("x^3 + a(y)*x")
    for _ in range(4):
        f = derive(f, "t")
    assert is_zero(f)


def test_pythagorean_identity_not_decided():
    assert not is_zero(P("sin(x)^2 + cos(x)^2 - 1"))


# ---------------------------------------------------------------- eval_numeric


def test_eval_polynomial():
    assert eval_numeric(P("x^3 + a(y)*x"), {"t": 0, "x": 2, "y": 0}, {"a": lambda y: 0.0}) == 8.0


def test_eval_ricci_component_of_theorem_metric():
    assert eval_numeric(P("-3*x"), {"t": 0, "x": 1, "y": 0}) == -3.0


def test_eval_derivative_via_binding():
    sig = CH.signature("a")
    bind = FuncBinding.from_expr(sig, "y^2", Chart(("t", "x", "y")))
    assert eval_numeric(P("diff(a(y), y)"), {"t": 0, "x": 0, "y": 1}, {"a": bind}) == pytest.approx(2.0)


def test_eval_missing_binding():
    with pytest.raises(EvaluationError):
        eval_numeric(P("a(y)"), {"t": 0, "x": 0, "y": 1})
    with pytest.raises(EvaluationError):
        eval_numeric(P("diff(a(y), y)"), {"t": 0, "x": 0, "y": 1}, {"a": math.sin})


def test_eval_pole():
    with pytest.raises(EvaluationError):
        eval_numeric(P("1/x"), {"t": 0, "x": 0, "y": 0})


# ---------------------------------------------------------------- substitute


def test_substitute_function_by_polynomial():
    chart = Chart(("t", "x", "y")).declare("f(x, y)")
    c = P("-1/2*diff(f(x, y), x, 3)", chart)
    assert substitute(c, {"f": "x^3"}, chart) == Expr(-3)


def test_substitute_shift_expansion():
    out = substitute(P("x^3"), {"x": P("x + phi(y)")}, CH)
    assert out == P("x^3 + 3*phi*x^2 + 3*phi^2*x + phi^3")


def test_substitute_identity():
    e = P("x^3 + a(y)*x + sin(t)")
    assert substitute(e, {"x": "x", "y": "y"}, CH) == e


def test_substitute_is_simultaneous():
    assert substitute(P("x - y"), {"x": "y", "y": "x"}, CH) == P("y - x")


def test_substitute_function_updates_derivative_atoms():
    e = P("diff(a(y), y, 2) + a(y)")
    assert substitute(e, {"a": "y^3"}, CH) == P("6*y + y^3")


def test_substitute_rejects_undeclared():
    with pytest.raises(ExprError):
        substitute(P("x"), {"x": "w"}, CH)


# ---------------------------------------------------------------- properties

_LEAVES = st.sampled_from(["t", "x", "y", "a(y)", "u(x, y)", "k", "1", "2", "3", "1/2", "diff(a(y), y)"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda p: f"({p[0]} {p[1]} {p[2]})"),
        st.tuples(children, st.integers(0, 3)).map(lambda p: f"({p[0]})^{p[1]}"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda p: f"{p[0]}({p[1]})"),
    )


SOURCES = st.recursive(_LEAVES, _combine, max_leaves=6)
POLY_SOURCES = st.recursive(
    _LEAVES,
    lambda c: st.tuples(c, st.sampled_from(["+", "-", "*"]), c).map(lambda p: f"({p[0]} {p[1]} {p[2]})"),
    max_leaves=6,
)
COORDS = st.sampled_from(["t", "x", "y"])
FUZZ = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@FUZZ
@given(SOURCES, COORDS, COORDS)
def test_derivatives_commute(src, u, v):
    e = P(src)
    assert derive(derive(e, u), v) == derive(derive(e, v), u)


@FUZZ
@given(SOURCES, SOURCES, COORDS)
def test_leibniz_rule(s1, s2, u):
    e1, e2 = P(s1), P(s2)
    assert derive(e1 * e2, u) == derive(e1, u) * e2 + e1 * derive(e2, u)


@FUZZ
@given(SOURCES)
def test_difference_with_itself_is_zero(src):
    e = P(src)
    assert is_zero(e - e)
    assert is_zero(P(f"({src}) - ({src})"))


@FUZZ
@given(SOURCES)
def test_parse_print_roundtrip(src):
    e = P(src)
    assert P(str(e)) == e


@FUZZ
@given(POLY_SOURCES, COORDS, st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_derivative_matches_central_difference(src, u, t, x, y):
    body_chart = Chart(("t", "x", "y"))
    funcs = {
        "a": FuncBinding.from_expr(CH.signature("a"), "cos(y) + y^2", body_chart),
        "u": FuncBinding.from_expr(CH.signature("u"), "exp(x/2)*sin(y)", body_chart),
        "k": 0.7,
    }
    e = P(f"sin({src})")
    p = {"t": t, "x": x, "y": y}
    h = 1e-5
    hi, lo = dict(p), dict(p)
    hi[u] += h
    lo[u] -= h
    fd = (eval_numeric(e, hi, funcs) - eval_numeric(e, lo, funcs)) / (2 * h)
    exact = eval_numeric(derive(e, u), p, funcs)
    assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1.0)


# ---------------------------------------------------------------- misc


def test_expr_is_immutable_and_hashable():
    e = P("x + 1")
    with pytest.raises(AttributeError):
        e.num = sp.S.One
    assert len({e, P("1 + x")}) == 1


def test_funcsym_validation():
    with pytest.raises(ExprError):
        FuncSym("f", ("x", "x"))
    with pytest.raises(ExprError):
        Chart(("t", "x", "y")).declare("sin(y)")
