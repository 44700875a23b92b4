"""Closed-form reference values for the generic Walker metric ``dt dy + dx² + f dy²``.

Everything here is typed in by hand from the known closed forms and is never
derived by the engine; the test-suite compares the engine against it.
"""

from __future__ import annotations

import sympy as sp

from .symexpr import Chart, Expr, FuncSym

__all__ = [
    "GENERIC_CHART",
    "fd",
    "generic_f",
    "walker_christoffel",
    "walker_cotton2",
    "walker_parallel_cotton_conditions",
    "walker_ricci",
]

T, X, Y = sp.symbols("t x y")
_F = sp.Function("f")(T, X, Y)
_AXES = {"t": T, "x": X, "y": Y}

GENERIC_CHART = Chart(("t", "x", "y"), (FuncSym("f", ("t", "x", "y")),))


def generic_f() -> Expr:
    return Expr(_F)


def _d(spec: str) -> sp.Expr:
    if not spec:
        return _F
    return sp.diff(_F, *[_AXES[c] for c in spec])


def fd(spec: str = "") -> Expr:
    """The partial derivative ``f_spec`` of the opaque ``f(t, x, y)``, e.g. ``fd("ttx")``."""
    return Expr(_d(spec))


def walker_christoffel() -> dict[tuple[int, int, int], Expr]:
    """Nonzero ``Γ^k_ij`` (``i <= j``), keyed ``(k, i, j)`` with ``t, x, y = 0, 1, 2``."""
    h = sp.Rational(1, 2)
    f = _F
    return {
        (0, 0, 2): Expr(h * _d("t")),
        (0, 1, 2): Expr(h * _d("x")),
        (0, 2, 2): Expr(h * (_d("y") + f * _d("t"))),
        (1, 2, 2): Expr(-h * _d("x")),
        (2, 2, 2): Expr(-h * _d("t")),
    }


def walker_ricci() -> dict[tuple[int, int], Expr]:
    h = sp.Rational(1, 2)
    return {
        (0, 2): Expr(h * _d("tt")),
        (1, 2): Expr(h * _d("tx")),
        (2, 2): Expr(h * (_F * _d("tt") - _d("xx"))),
    }


def walker_cotton2() -> dict[tuple[int, int], Expr]:
    q = sp.Rational(1, 4)
    f = _F
    return {
        (0, 1): Expr(-q * _d("ttt")),
        (0, 2): Expr(q * _d("ttx")),
        (1, 1): Expr(-2 * q * _d("ttx")),
        (1, 2): Expr(q * (2 * _d("txx") + _d("tty") - f * _d("ttt"))),
        (2, 2): Expr(
            q * (_d("x") * _d("tt") - 2 * _d("xxx") - _d("t") * _d("tx") - 2 * _d("txy") + 2 * f * _d("ttx"))
        ),
    }


def walker_parallel_cotton_conditions() -> list[tuple[str, Expr]]:
    """The hand-eliminated parallel-Cotton system, one labelled expression per condition."""
    f = _F
    d = _d
    rows = [
        ("f_tttt", d("tttt")),
        ("f_tttx", d("tttx")),
        ("f_ttxx", d("ttxx")),
        ("f_txxx", d("txxx")),
        ("f_t f_ttt - 2 f_ttty", d("t") * d("ttt") - 2 * d("ttty")),
        ("2 f_ttxy - f_x f_ttt", 2 * d("ttxy") - d("x") * d("ttt")),
        (
            "4 f_txxy + ... - 2 f f_ttty",
            4 * d("txxy")
            + (2 * d("txx") + d("tty")) * d("t")
            + 2 * d("ttyy")
            - 3 * d("x") * d("ttx")
            - d("y") * d("ttt")
            - 2 * f * d("ttty"),
        ),
        (
            "f_tx^2 + 2 f_xxxx + ... - 2 f_x f_ttx",
            d("tx") ** 2
            + 2 * d("xxxx")
            + d("t") * d("txx")
            + 2 * d("txxy")
            - d("xx") * d("tt")
            - 2 * d("x") * d("ttx"),
        ),
        (
            "f_tx f_t^2 + ... - (f_y + f f_t) f_ttx",
            d("tx") * d("t") ** 2
            + (2 * d("xxx") + 3 * d("txy")) * d("t")
            + 2 * d("xxxy")
            + d("ty") * d("tx")
            + 2 * d("txyy")
            - d("xy") * d("tt")
            - (2 * d("txx") + d("t") * d("tt") + 2 * d("tty")) * d("x")
            - (d("y") + f * d("t")) * d("ttx"),
        ),
    ]
    return [(label, Expr(e)) for label, e in rows]
