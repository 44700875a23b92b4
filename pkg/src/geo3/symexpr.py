"""Exact symbolic expressions over a three-coordinate chart.

An :class:`Expr` is a reduced fraction ``num/den`` of expanded polynomials with
rational coefficients. The polynomial indeterminates are coordinates, constant
parameters, opaque function symbols such as ``a(y)`` together with their
derivative atoms, and applications of ``sin``, ``cos`` and ``exp``.  Sympy
supplies the polynomial arithmetic and gcd; this module fixes the normal form
on top of it so that structural equality decides rational identities.

Trigonometric and exponential identities are *not* decided: ``sin(x)^2 +
cos(x)^2 - 1`` is a nonzero canonical form.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping

import sympy as sp
from sympy.polys.fields import sfield
from sympy.core.function import AppliedUndef

__all__ = [
    "Chart",
    "EvaluationError",
    "Expr",
    "ExprError",
    "FuncBinding",
    "FuncSym",
    "ParseError",
    "derive",
    "eval_numeric",
    "is_zero",
    "parse_expr",
    "substitute",
]

BUILTINS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp}
_ELEMENTARY = (sp.sin, sp.cos, sp.exp)
_RESERVED = set(BUILTINS) | {"diff"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


class ExprError(ValueError):
    """Invalid symbolic input."""


class ParseError(ExprError):
    def __init__(self, message: str, pos: int | None = None, src: str | None = None):
        self.pos = pos
        self.src = src
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class EvaluationError(ExprError):
    """Numeric evaluation failed (missing binding or vanishing denominator)."""


# ---------------------------------------------------------------------------
# Charts and function symbols


@dataclass(frozen=True)
class FuncSym:
    """Opaque function of some chart coordinates, possibly differentiated.

    A ``FuncSym`` with no arguments is a constant parameter.
    """

    name: str
    args: tuple[str, ...] = ()
    dorder: tuple[int, ...] | None = None

    def __post_init__(self):
        if not _IDENT.match(self.name) or self.name in _RESERVED:
            raise ExprError(f"invalid function name {self.name!r}")
        object.__setattr__(self, "args", tuple(self.args))
        if self.dorder is None:
            object.__setattr__(self, "dorder", (0,) * len(self.args))
        object.__setattr__(self, "dorder", tuple(int(k) for k in self.dorder))
        if len(self.dorder) != len(self.args):
            raise ExprError(f"{self.name}: dorder length does not match arguments")
        if any(k < 0 for k in self.dorder):
            raise ExprError(f"{self.name}: negative derivative order")
        if len(set(self.args)) != len(self.args):
            raise ExprError(f"{self.name}: repeated argument")

    @property
    def is_constant(self) -> bool:
        return not self.args

    def atom(self) -> sp.Expr:
        if not self.args:
            return sp.Symbol(self.name)
        base = sp.Function(self.name)(*[sp.Symbol(a) for a in self.args])
        counts = [(sp.Symbol(a), k) for a, k in zip(self.args, self.dorder) if k]
        return sp.Derivative(base, *counts) if counts else base

    def expr(self) -> "Expr":
        return Expr(self.atom())

    def __str__(self):
        return to_text(self.atom())


@dataclass(frozen=True)
class Chart:
    """Three ordered coordinate names plus declared function symbols."""

    coords: tuple[str, ...] = ("t", "x", "y")
    funcsyms: tuple[FuncSym, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "funcsyms", tuple(self.funcsyms))
        if len(self.coords) != 3:
            raise ExprError("a chart needs exactly 3 coordinates")
        if len(set(self.coords)) != 3:
            raise ExprError("coordinate names must be distinct")
        for c in self.coords:
            if not _IDENT.match(c) or c in _RESERVED:
                raise ExprError(f"invalid coordinate name {c!r}")
        seen = set(self.coords)
        for fs in self.funcsyms:
            if fs.name in seen:
                raise ExprError(f"name {fs.name!r} declared twice")
            seen.add(fs.name)
            if any(k for k in fs.dorder):
                raise ExprError(f"declare {fs.name} without derivative orders")
            missing = [a for a in fs.args if a not in self.coords]
            if missing:
                raise ExprError(f"{fs.name}: {missing} are not chart coordinates")
            order = [self.coords.index(a) for a in fs.args]
            if order != sorted(order):
                raise ExprError(f"{fs.name}: arguments must follow coordinate order")

    def declare(self, *sigs: FuncSym | str) -> "Chart":
        """Return a chart with extra function symbols (``"a(y)"`` or ``"k"``)."""
        new = [s if isinstance(s, FuncSym) else _parse_signature(s) for s in sigs]
        known = {fs.name: fs for fs in self.funcsyms}
        extra = []
        for fs in new:
            if fs.name in known:
                if known[fs.name] != fs:
                    raise ExprError(f"{fs.name} redeclared with a different signature")
                continue
            known[fs.name] = fs
            extra.append(fs)
        return Chart(self.coords, self.funcsyms + tuple(extra))

    def signature(self, name: str) -> FuncSym | None:
        for fs in self.funcsyms:
            if fs.name == name:
                return fs
        return None

    def coord_symbols(self) -> tuple[sp.Symbol, ...]:
        return tuple(sp.Symbol(c) for c in self.coords)

    def index(self, coord: str) -> int:
        try:
            return self.coords.index(coord)
        except ValueError:
            raise ExprError(f"{coord!r} is not a coordinate of this chart") from None

    def names(self) -> set[str]:
        return set(self.coords) | {fs.name for fs in self.funcsyms}


def _parse_signature(text: str) -> FuncSym:
    m = re.fullmatch(r"\s*([A-Za-z_]\w*)\s*(?:\(([^)]*)\))?\s*", text)
    if not m:
        raise ExprError(f"bad function declaration {text!r}")
    name, args = m.group(1), m.group(2)
    arglist = tuple(a.strip() for a in args.split(",") if a.strip()) if args else ()
    return FuncSym(name, arglist)


# ---------------------------------------------------------------------------
# Canonical form


def _poly_atoms(e: sp.Expr) -> Iterator[sp.Expr]:
    """Yield the polynomial-level atoms of ``e`` (not descending into functions)."""
    stack = [e]
    while stack:
        node = stack.pop()
        if node.is_Add or node.is_Mul:
            stack.extend(node.args)
        elif node.is_Pow and node.exp.is_Integer:
            stack.append(node.base)
        elif node.is_Number:
            continue
        else:
            yield node


def _has_denominator(e: sp.Expr) -> bool:
    stack = [e]
    while stack:
        node = stack.pop()
        if node.is_Add or node.is_Mul:
            stack.extend(node.args)
        elif node.is_Pow:
            if not node.exp.is_Integer:
                raise ExprError(f"non-integer exponent in {node}")
            if node.exp.is_negative:
                return True
            stack.append(node.base)
    return False


def _generators(*parts: sp.Expr) -> list[sp.Expr]:
    gens = set()
    for p in parts:
        gens.update(_poly_atoms(p))
    return sorted(gens, key=sp.default_sort_key)


def _canonical(raw) -> tuple[sp.Expr, sp.Expr]:
    e = sp.sympify(raw)
    if not _has_denominator(e):
        return sp.expand(e), sp.S.One
    gens = _generators(e)
    if gens:
        # sparse rational-function arithmetic cancels gcds as it goes
        _, frac = sfield(e, *gens, domain=sp.QQ)
        num, den = frac.numer.as_expr(), frac.denom.as_expr()
    else:
        num, den = sp.fraction(sp.Rational(e))
    if den == 0:
        raise ZeroDivisionError("canonical denominator vanished")
    gens = _generators(num, den)
    lead = sp.Poly(den, *gens, domain="QQ").LC() if gens else den
    if lead != 1:
        num, den = sp.expand(num / lead), sp.expand(den / lead)
    return num, den


class Expr:
    """Immutable canonical rational expression.

    ``Expr`` instances compare structurally; within the rational class this
    is mathematical equality.  Arithmetic with ``int``, ``Fraction`` and
    other ``Expr`` values returns new canonical values.
    """

    __slots__ = ("num", "den", "_hash", "_compiled")

    def __init__(self, value=0):
        if isinstance(value, Expr):
            num, den = value.num, value.den
        elif isinstance(value, Fraction):
            num, den = sp.Rational(value.numerator, value.denominator), sp.S.One
        elif isinstance(value, float):
            raise ExprError("floating point values are not allowed in expressions")
        else:
            num, den = _canonical(value)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_compiled", None)

    @classmethod
    def _trusted(cls, num, den=sp.S.One) -> "Expr":
        out = cls.__new__(cls)
        object.__setattr__(out, "num", num)
        object.__setattr__(out, "den", den)
        object.__setattr__(out, "_hash", None)
        object.__setattr__(out, "_compiled", None)
        return out

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    def __reduce__(self):
        return (Expr._trusted, (self.num, self.den))

    # -- views -------------------------------------------------------------

    @property
    def sym(self) -> sp.Expr:
        """Sympy view ``num/den``."""
        return self.num if self.den == 1 else self.num / self.den

    @property
    def is_zero(self) -> bool:
        return self.num == 0

    @property
    def is_polynomial(self) -> bool:
        return self.den == 1

    def is_constant(self) -> bool:
        return not self.free_names()

    def as_fraction(self) -> Fraction:
        """Exact value of a numeric expression."""
        v = self.sym
        if not v.is_Rational:
            raise ExprError(f"{self} is not a rational number")
        return Fraction(int(v.p), int(v.q))

    def atoms(self) -> list[sp.Expr]:
        return _generators(self.num, self.den)

    def free_names(self) -> set[str]:
        """Coordinate, constant and function names occurring anywhere."""
        names = {s.name for s in self.sym.free_symbols}
        names |= {f.func.__name__ for f in self.sym.atoms(AppliedUndef)}
        return names

    def funcsyms(self) -> set[FuncSym]:
        out = set()
        for a in self.sym.atoms(AppliedUndef, sp.Derivative):
            fs = _as_funcsym(a)
            if fs is not None:
                out.add(fs)
        return out

    def has_elementary(self) -> bool:
        return bool(self.sym.atoms(*_ELEMENTARY))

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Expr":
        if isinstance(other, Expr):
            return other
        if isinstance(other, (int, Fraction)):
            return Expr(other)
        if isinstance(other, sp.Basic):
            return Expr(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == 1 and other.den == 1:
            return Expr._trusted(self.num + other.num)
        return Expr(self.sym + other.sym)

    __radd__ = __add__

    def __neg__(self):
        return Expr._trusted(-self.num if self.den == 1 else sp.expand(-self.num), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == 1 and other.den == 1:
            return Expr._trusted(sp.expand(self.num * other.num))
        return Expr(self.sym * other.sym)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero:
            raise ZeroDivisionError(f"division of {self} by zero")
        return Expr(self.sym / other.sym)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise ExprError("only integer exponents are supported")
        if n < 0:
            if self.is_zero:
                raise ZeroDivisionError("negative power of zero")
            return Expr(self.den ** (-n) / self.num ** (-n))
        return Expr(self.num**n / self.den**n)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Expr(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.num, self.den)))
        return self._hash

    def __bool__(self):
        return not self.is_zero

    def __str__(self):
        return to_text(self.sym)

    def __repr__(self):
        return f"Expr({to_text(self.sym)!r})"

    # -- calculus -----------------------------------------------------------

    def diff(self, coord: str) -> "Expr":
        return derive(self, coord)

    def subs(self, bindings: Mapping[str, object], chart: Chart | None = None) -> "Expr":
        return substitute(self, bindings, chart)

    def __call__(self, point: Mapping[str, float], funcs=None) -> float:
        return eval_numeric(self, point, funcs or {})


ZERO = Expr._trusted(sp.S.Zero)
ONE = Expr._trusted(sp.S.One)


def as_expr(value, chart: Chart | None = None) -> Expr:
    """Coerce ints, fractions, text (needs ``chart``) and sympy values."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        if chart is None:
            raise ExprError("parsing text needs a chart")
        return parse_expr(value, chart)
    return Expr(value)


def is_zero(e: Expr) -> bool:
    """True iff ``e`` is the zero fraction.

    Complete for rational expressions in coordinates and function atoms.
    With ``sin``/``cos``/``exp`` present a ``False`` answer may be a false
    negative (e.g. ``sin(x)^2 + cos(x)^2 - 1``).
    """
    return e.is_zero


def derive(e: Expr, coord: str) -> Expr:
    """Formal partial derivative with respect to ``coord``."""
    s = sp.Symbol(coord)
    dn = sp.diff(e.num, s)
    if e.den == 1:
        return Expr._trusted(sp.expand(dn))
    dd = sp.diff(e.den, s)
    return Expr((dn * e.den - e.num * dd) / e.den**2)


def _as_funcsym(a: sp.Expr) -> FuncSym | None:
    if isinstance(a, sp.Derivative):
        base = a.expr
        if not isinstance(base, AppliedUndef) or not all(arg.is_Symbol for arg in base.args):
            return None
        args = tuple(s.name for s in base.args)
        counts = dict.fromkeys(args, 0)
        for v, k in a.variable_count:
            counts[v.name] += int(k)
        return FuncSym(base.func.__name__, args, tuple(counts[n] for n in args))
    if isinstance(a, AppliedUndef) and all(arg.is_Symbol for arg in a.args):
        return FuncSym(a.func.__name__, tuple(s.name for s in a.args))
    return None


# ---------------------------------------------------------------------------
# Substitution


def substitute(e: Expr, bindings: Mapping[str, object], chart: Chart | None = None) -> Expr:
    """Simultaneous substitution of coordinates, constants and functions.

    Keys naming a function symbol bind it to an expression in that function's
    own argument coordinates; derivative atoms become derivatives of the bound
    expression.  Other keys name coordinates or constants and are replaced
    simultaneously.  When ``chart`` is given, every name introduced by a
    binding must be declared there.
    """
    sym = e.sym
    fn_names = {f.func.__name__: f.args for f in sym.atoms(AppliedUndef)}
    fn_binds, sym_binds = {}, {}
    for key, value in bindings.items():
        val = as_expr(value, chart)
        if chart is not None:
            undeclared = val.free_names() - chart.names()
            if undeclared:
                raise ExprError(f"binding for {key} introduces undeclared {sorted(undeclared)}")
        sig = chart.signature(key) if chart is not None else None
        if key in fn_names or (sig is not None and not sig.is_constant):
            if sig is not None:
                params = tuple(sp.Symbol(a) for a in sig.args)
            else:
                params = fn_names[key]
                if not all(p.is_Symbol for p in params):
                    raise ExprError(f"cannot infer the arguments of {key}")
            fn_binds[key] = (params, val.sym)
        else:
            sym_binds[sp.Symbol(key)] = val.sym

    out = sym
    if fn_binds:
        for name, (params, body) in fn_binds.items():
            fcls = sp.Function(name)

            def _apply(*args, _params=params, _body=body):
                if len(args) != len(_params):
                    raise ExprError(f"{name} applied to {len(args)} arguments")
                return _body.xreplace(dict(zip(_params, args)))

            out = out.replace(fcls, _apply)
        out = out.doit()
    if sym_binds:
        out = out.subs(sym_binds, simultaneous=True)
        if out.atoms(sp.Subs):
            out = out.doit()
    return Expr(out)


# ---------------------------------------------------------------------------
# Printing


def _needs_parens(s: sp.Expr) -> bool:
    return s.is_Add or (s.is_Rational and not s.is_Integer) or (s.is_Number and s < 0)


def _wrap(s: sp.Expr) -> str:
    text = to_text(s)
    return f"({text})" if (s.is_Add or s.is_Mul or s.is_Pow or _needs_parens(s)) else text


def _factor_text(s: sp.Expr) -> str:
    if s.is_Pow:
        base, n = s.base, int(s.exp)
        btxt = to_text(base)
        if base.is_Add or base.is_Mul or base.is_Pow or base.is_Number:
            btxt = f"({btxt})"
        return f"{btxt}^{n}" if n != 1 else btxt
    if s.is_Add:
        return f"({to_text(s)})"
    return to_text(s)


def _mul_text(s: sp.Expr) -> str:
    coeff, rest = s.as_coeff_Mul()
    numer, denom = [], []
    for fac in sp.Mul.make_args(rest):
        if fac.is_Pow and fac.exp.is_Integer and fac.exp < 0:
            denom.append(_factor_text(sp.Pow(fac.base, -fac.exp)))
        else:
            numer.append(_factor_text(fac))
    sign = ""
    if coeff < 0:
        sign, coeff = "-", -coeff
    p, q = int(sp.Rational(coeff).p), int(sp.Rational(coeff).q)
    if p != 1 or not numer:
        numer.insert(0, str(p))
    if q != 1:
        denom.insert(0, str(q))
    text = "*".join(numer)
    if denom:
        text += "/" + (denom[0] if len(denom) == 1 else "(" + "*".join(denom) + ")")
    return sign + text


def to_text(s: sp.Expr) -> str:
    """Render a sympy view in the expression grammar accepted by :func:`parse_expr`."""
    if s.is_Integer:
        return str(int(s))
    if s.is_Rational:
        return f"{int(s.p)}/{int(s.q)}"
    if s.is_Symbol:
        return s.name
    if s.is_Add:
        terms = s.as_ordered_terms()
        parts = [to_text(terms[0])]
        for term in terms[1:]:
            if term.could_extract_minus_sign():
                parts.append(" - " + to_text(-term))
            else:
                parts.append(" + " + to_text(term))
        return "".join(parts)
    if s.is_Mul or (s.is_Pow and s.exp.is_Integer and s.exp < 0):
        return _mul_text(s)
    if s.is_Pow:
        return _factor_text(s)
    if isinstance(s, sp.Derivative):
        text = to_text(s.expr)
        for v, k in s.variable_count:
            text = f"diff({text}, {v.name}" + (f", {int(k)})" if k != 1 else ")")
        return text
    if isinstance(s, AppliedUndef):
        return f"{s.func.__name__}({', '.join(to_text(a) for a in s.args)})"
    if isinstance(s, _ELEMENTARY):
        return f"{s.func.__name__}({to_text(s.args[0])})"
    if isinstance(s, sp.Subs):
        inner = to_text(s.expr)
        pairs = ", ".join(f"{v.name} = {to_text(p)}" for v, p in zip(s.variables, s.point))
        return f"subs({inner}; {pairs})"
    raise ExprError(f"cannot print {s!r}")


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    toks, pos = [], 0
    while True:
        m = _TOKEN.match(src, pos)
        if not m:
            rest = src[pos:]
            if rest.strip() == "":
                break
            bad = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {src[bad]!r}", bad, src)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str, chart: Chart):
        self.src = src
        self.chart = chart
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.src)

    def error(self, message, pos=None):
        raise ParseError(message, self.peek()[2] if pos is None else pos, self.src)

    def parse(self) -> sp.Expr:
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            self.error(f"unexpected {text!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op, pos = self.take()[1], self.toks[self.i - 1][2]
            rhs = self.unary()
            if op == "*":
                e = e * rhs
            else:
                if rhs == 0:
                    raise ParseError("division by zero", pos, self.src)
                e = e / rhs
        return e

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text in ("-", "+"):
            self.take()
            v = self.unary()
            return -v if text == "-" else v
        return self.power()

    def power(self):
        base = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            kind, text, pos = self.take()
            if kind != "int":
                raise ParseError("exponent must be an integer", pos, self.src)
            n = -int(text) if neg else int(text)
            if n < 0 and base == 0:
                raise ParseError("negative power of zero", pos, self.src)
            return base**n
        return base

    def base(self):
        kind, text, pos = self.take()
        if kind == "int":
            return sp.Integer(int(text))
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "id":
            if text in BUILTINS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return BUILTINS[text](arg)
            if text == "diff":
                return self.diff_call()
            return self.identifier(text, pos)
        if kind == "end":
            raise ParseError("unexpected end of input", pos, self.src)
        raise ParseError(f"unexpected {text!r}", pos, self.src)

    def diff_call(self):
        self.expect("(")
        target = self.expr()
        self.expect(",")
        kind, coord, pos = self.take()
        if kind != "id" or coord not in self.chart.coords:
            raise ParseError(f"diff needs a coordinate, found {coord!r}", pos, self.src)
        n = 1
        if self.peek()[1] == ",":
            self.take()
            kind, text, pos = self.take()
            if kind != "int":
                raise ParseError("derivative order must be an integer", pos, self.src)
            n = int(text)
        self.expect(")")
        return sp.diff(target, sp.Symbol(coord), n) if n else target

    def identifier(self, name, pos):
        if name in self.chart.coords:
            return sp.Symbol(name)
        sig = self.chart.signature(name)
        if sig is None:
            raise ParseError(f"unknown identifier {name!r}", pos, self.src)
        if sig.is_constant:
            return sp.Symbol(name)
        if self.peek()[1] != "(":
            # bare name stands for the declared application, e.g. ``a`` -> ``a(y)``
            return sig.atom()
        self.take()
        args = []
        while True:
            kind, text, apos = self.take()
            if kind != "id":
                raise ParseError(f"{name} must be applied to coordinates", apos, self.src)
            args.append(text)
            sep = self.take()
            if sep[1] == ")":
                break
            if sep[1] != ",":
                raise ParseError("expected ',' or ')'", sep[2], self.src)
        if tuple(args) != sig.args:
            raise ParseError(
                f"{name} is declared as {name}({', '.join(sig.args)}), applied to ({', '.join(args)})",
                pos,
                self.src,
            )
        return sig.atom()


def parse_expr(src: str, chart: Chart) -> Expr:
    """Parse text in the expression grammar into canonical form.

    ``-x^2`` means ``-(x^2)``.  A declared function may be written bare
    (``a``) or applied to exactly its declared coordinates (``a(y)``).
    """
    return Expr(_Parser(src, chart).parse())


# ---------------------------------------------------------------------------
# Numeric evaluation


@dataclass(frozen=True)
class FuncBinding:
    """Numeric values of a function symbol and of its partial derivatives.

    ``derivatives`` maps a derivative multi-order (one entry per argument) to
    a callable of the argument values.
    """

    name: str
    derivatives: Mapping[tuple[int, ...], Callable[..., float]]

    def __call__(self, dorder: tuple[int, ...], *args: float) -> float:
        try:
            fn = self.derivatives[tuple(dorder)]
        except KeyError:
            raise EvaluationError(f"no binding for {self.name} with derivative order {tuple(dorder)}") from None
        return float(fn(*args))

    @classmethod
    def from_expr(cls, sig: FuncSym, body: Expr | str, chart: Chart, max_order: int = 4) -> "FuncBinding":
        """Bind ``sig`` to an explicit expression, with analytic derivatives up to ``max_order``."""
        body = as_expr(body, chart)
        stray = body.free_names() - set(sig.args)
        if stray:
            raise ExprError(f"binding for {sig.name} uses {sorted(stray)} outside its arguments")
        table = {}
        n = len(sig.args)
        orders = [()]
        for _ in range(n):
            orders = [o + (k,) for o in orders for k in range(max_order + 1)]
        for order in orders:
            if sum(order) > max_order:
                continue
            d = body
            for arg, k in zip(sig.args, order):
                for _ in range(k):
                    d = derive(d, arg)
            table[order] = _closure(d, sig.args)
        return cls(sig.name, table)


def _closure(e: Expr, argnames: tuple[str, ...]):
    def fn(*vals):
        return eval_numeric(e, dict(zip(argnames, vals)), {})

    return fn


def _compile(e: Expr):
    if e._compiled is not None:
        return e._compiled
    gens = _generators(e.num, e.den)

    def terms(p):
        if not gens:
            return [(float(sp.Rational(p)), ())]
        poly = sp.Poly(p, *gens, domain="QQ")
        out = []
        for monom, coeff in poly.terms():
            out.append((float(Fraction(int(coeff.numerator), int(coeff.denominator))),
                        tuple((i, k) for i, k in enumerate(monom) if k)))
        return out

    compiled = (gens, terms(e.num), terms(e.den) if e.den != 1 else None)
    object.__setattr__(e, "_compiled", compiled)
    return compiled


def _lookup_binding(funcs, name):
    b = funcs.get(name)
    if b is None:
        raise EvaluationError(f"missing numeric binding for {name}")
    if isinstance(b, FuncBinding):
        return b
    if callable(b):
        return FuncBinding(name, {(): b, (0,): b, (0, 0): b, (0, 0, 0): b})
    raise EvaluationError(f"binding for {name} is not callable")


def _eval_atom(a: sp.Expr, point, funcs) -> float:
    if a.is_Symbol:
        if a.name in point:
            return float(point[a.name])
        b = funcs.get(a.name)
        if b is not None and not callable(b):
            return float(b)
        if b is not None:
            return float(b())
        raise EvaluationError(f"no value for {a.name}")
    if isinstance(a, AppliedUndef):
        args = [_eval_sub(x, point, funcs) for x in a.args]
        return _lookup_binding(funcs, a.func.__name__)((0,) * len(args), *args)
    if isinstance(a, sp.Derivative):
        base = a.expr
        if not isinstance(base, AppliedUndef) or not all(x.is_Symbol for x in base.args):
            raise EvaluationError(f"cannot evaluate derivative {to_text(a)}")
        order = [0] * len(base.args)
        for v, k in a.variable_count:
            order[base.args.index(v)] += int(k)
        args = [_eval_sub(x, point, funcs) for x in base.args]
        return _lookup_binding(funcs, base.func.__name__)(tuple(order), *args)
    if isinstance(a, sp.Subs):
        inner = dict(point)
        for v, p in zip(a.variables, a.point):
            inner[v.name] = _eval_sub(p, point, funcs)
        return _eval_sub(a.expr, inner, funcs)
    if isinstance(a, _ELEMENTARY):
        v = _eval_sub(a.args[0], point, funcs)
        return {"sin": math.sin, "cos": math.cos, "exp": math.exp}[a.func.__name__](v)
    raise EvaluationError(f"cannot evaluate {a!r}")


def _eval_sub(s: sp.Expr, point, funcs) -> float:
    if s.is_Symbol:
        return _eval_atom(s, point, funcs)
    return eval_numeric(Expr(s), point, funcs)


def eval_numeric(e: Expr, point: Mapping[str, float], funcs: Mapping[str, object] | None = None) -> float:
    """Evaluate ``e`` in double precision.

    ``point`` maps coordinate (and optionally constant) names to floats.
    ``funcs`` maps function names to :class:`FuncBinding` objects, plain
    callables (value only) or floats for constants.
    """
    funcs = funcs or {}
    gens, num_terms, den_terms = _compile(e)
    vals = [_eval_atom(g, point, funcs) for g in gens]

    def run(terms):
        total = 0.0
        for coeff, monom in terms:
            prod = 1.0
            for i, k in monom:
                prod *= vals[i] ** k
            total += coeff * prod
        return total

    num = run(num_terms)
    if den_terms is None:
        return num
    den = run(den_terms)
    if den == 0.0 or not math.isfinite(den):
        raise EvaluationError(f"denominator {to_text(e.den)} vanishes at {dict(point)}")
    return num / den


def exprs(values: Iterable, chart: Chart | None = None) -> list[Expr]:
    return [as_expr(v, chart) for v in values]
