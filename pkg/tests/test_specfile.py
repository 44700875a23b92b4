from pathlib import Path

import pytest

from geo3.specfile import SpecError, load_spec, parse_spec
from geo3.symexpr import Expr, eval_numeric

DATA = Path(__file__).parent / "data"


def test_explicit_entries_complete_symmetry():
    spec = parse_spec("[metric]\ng[0][2] = 1\ng[1][1] = 1\ng[2][2] = x^3\n")
    m = spec.metric
    assert m.g[2, 0] == Expr(1)
    assert m.g[0, 0].is_zero
    assert m.signature == "lorentzian"


def test_builtin_theorem_with_bindings():
    spec = load_spec(DATA / "theorem_sin.spec")
    assert str(spec.metric.g[2, 2]) == "x^3 + x*a(y)"
    val = eval_numeric(spec.metric.g[2, 2], {"t": 0, "x": 1, "y": 0.5}, spec.bindings)
    assert val == pytest.approx(1 + 0.479425538604203)


def test_field_section():
    spec = load_spec(DATA / "homothetic.spec")
    assert spec.field.kinds == "u"
    assert str(spec.lam) == "lam"
    assert spec.potential is None


def test_map_section():
    spec = load_spec(DATA / "shift.map")
    assert spec.metric is None
    assert [str(c) for c in spec.map.components] == ["t", "x", "y + 1"]


def test_custom_coordinates():
    spec = parse_spec("[chart]\ncoords = u, v, w\n[metric]\nsignature = riemannian\ng[0][0] = 1\ng[1][1] = 1\ng[2][2] = exp(u)\n")
    assert spec.metric.coords == ("u", "v", "w")
    assert spec.metric.signature == "riemannian"


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("[metric]\ng[0][2] = 1\ng[1][1] = 1 +* x\n", 3, "unexpected"),
        ("[metric]\ng[2][2] = q(y)\n", 2, "unknown identifier"),
        ("[metrik]\n", 1, "unknown section"),
        ("g[0][0] = 1\n", 1, "before the first section"),
        ("[metric]\ng[3][0] = 1\n", 2, "indices"),
        ("[metric]\nmetric = sphere(x)\n", 2, "unknown metric shortcut"),
        ("[metric]\nmetric = family6(1, 0)\n", 2, "takes 4 arguments"),
        ("[metric]\ng[0][0] = 1\n", 2, "singular"),
        ("[metric]\ng[0][1] = 1\ng[1][0] = x\ng[2][2] = 1\n", 3, "disagrees"),
        ("[functions]\na(y)\n[field]\nlambda = x\n", 4, "must not depend"),
        ("[map]\nt = t\n", 2, "missing"),
        ("[bindings]\nb(y) = y\n", 2, "undeclared"),
        ("[functions]\nk\n[bindings]\nk = sin(1)\n", 4, "rational"),
    ],
)
def test_errors_carry_line(text, line, fragment):
    with pytest.raises(SpecError) as info:
        parse_spec(text, "demo.spec")
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"demo.spec:{line}:")


def test_missing_file():
    with pytest.raises(SpecError, match="cannot read"):
        load_spec(DATA / "nope.spec")


def test_comments_and_blank_lines_ignored():
    spec = parse_spec("# header\n\n[metric]  \ng[0][2] = 1  # cross term\ng[1][1] = 1\n")
    assert spec.metric.detg == Expr(-1)
