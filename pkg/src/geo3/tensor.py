"""Metrics, tensor fields and first-order tensor calculus on a 3D chart.

Component arrays are numpy object arrays of :class:`~geo3.symexpr.Expr`.
Each slot is tagged ``'u'`` (contravariant) or ``'d'`` (covariant); the tag
string is ``kinds``.  Internally sums are accumulated on raw sympy views and
canonicalized once per component.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import sympy as sp

from .symexpr import ONE, ZERO, Chart, Expr, ExprError, as_expr

__all__ = [
    "MetricChart",
    "MetricError",
    "TensorField",
    "build_metric",
    "covariant_derivative",
    "gradient",
    "hessian",
    "hodge_dual_cotton",
    "levi_civita",
    "lie_derivative_metric",
    "lie_derivative_via_connection",
    "musical",
    "vector_field",
]

DIM = 3
SIGNATURES = ("riemannian", "lorentzian")


class MetricError(ExprError):
    """Singular, asymmetric or otherwise invalid metric data."""


def _slots(rank: int):
    return itertools.product(range(DIM), repeat=rank)


def _raw(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = arr[idx].sym
    return out


def _canon(raw) -> Expr:
    return raw if isinstance(raw, Expr) else Expr(raw)


class TensorField:
    """Components of a tensor field in the coordinate frame of ``chart``."""

    __slots__ = ("kinds", "components", "chart", "_raw")

    def __init__(self, kinds: str, components, chart: Chart):
        if any(k not in "ud" for k in kinds):
            raise ExprError(f"slot kinds must be 'u' or 'd', got {kinds!r}")
        comps = np.empty((DIM,) * len(kinds), dtype=object)
        src = np.asarray(components, dtype=object)
        if src.shape != comps.shape:
            raise ExprError(f"expected component shape {comps.shape}, got {src.shape}")
        for idx in np.ndindex(comps.shape):
            comps[idx] = as_expr(src[idx], chart)
        comps.setflags(write=False)
        self.kinds = kinds
        self.components = comps
        self.chart = chart
        self._raw = None

    @classmethod
    def build(cls, kinds: str, chart: Chart, fn: Callable[..., object]) -> "TensorField":
        comps = np.empty((DIM,) * len(kinds), dtype=object)
        for idx in _slots(len(kinds)):
            comps[idx] = _canon(fn(*idx))
        return cls(kinds, comps, chart)

    @classmethod
    def zeros(cls, kinds: str, chart: Chart) -> "TensorField":
        return cls.build(kinds, chart, lambda *idx: ZERO)

    @property
    def rank(self) -> int:
        return len(self.kinds)

    @property
    def valence(self) -> tuple[int, int]:
        return self.kinds.count("u"), self.kinds.count("d")

    def raw(self) -> np.ndarray:
        if self._raw is None:
            self._raw = _raw(self.components)
        return self._raw

    def __getitem__(self, idx) -> Expr:
        return self.components[idx]

    def nonzero(self) -> dict[tuple[int, ...], Expr]:
        return {idx: self.components[idx] for idx in _slots(self.rank) if not self.components[idx].is_zero}

    def is_zero(self) -> bool:
        return not self.nonzero()

    def map(self, fn: Callable[[Expr], Expr]) -> "TensorField":
        return TensorField.build(self.kinds, self.chart, lambda *idx: fn(self.components[idx]))

    def _check(self, other: "TensorField"):
        if not isinstance(other, TensorField) or other.kinds != self.kinds:
            raise ExprError("tensor fields of different type")

    def __add__(self, other):
        self._check(other)
        return TensorField.build(self.kinds, self.chart, lambda *i: self.components[i] + other.components[i])

    def __sub__(self, other):
        self._check(other)
        return TensorField.build(self.kinds, self.chart, lambda *i: self.components[i] - other.components[i])

    def __neg__(self):
        return self.map(lambda e: -e)

    def __mul__(self, scalar):
        s = as_expr(scalar, self.chart)
        return self.map(lambda e: e * s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TensorField):
            return NotImplemented
        return self.kinds == other.kinds and all(
            self.components[i] == other.components[i] for i in _slots(self.rank)
        )

    __hash__ = None

    def is_symmetric(self, a: int = 0, b: int = 1) -> bool:
        perm = list(range(self.rank))
        perm[a], perm[b] = perm[b], perm[a]
        return all(self.components[i] == self.components[tuple(i[p] for p in perm)] for i in _slots(self.rank))

    def is_antisymmetric(self, a: int = 0, b: int = 1) -> bool:
        perm = list(range(self.rank))
        perm[a], perm[b] = perm[b], perm[a]
        return all(
            (self.components[i] + self.components[tuple(i[p] for p in perm)]).is_zero for i in _slots(self.rank)
        )

    def matrix(self) -> np.ndarray:
        if self.rank != 2:
            raise ExprError("matrix view needs a rank-2 tensor")
        return self.components

    def evaluate(self, point: Mapping[str, float], funcs=None) -> np.ndarray:
        from .symexpr import eval_numeric

        out = np.empty(self.components.shape, dtype=float)
        for idx in np.ndindex(out.shape):
            out[idx] = eval_numeric(self.components[idx], point, funcs or {})
        return out

    def __repr__(self):
        nz = ", ".join(f"{list(k)}: {v}" for k, v in self.nonzero().items())
        return f"TensorField({self.kinds!r}, {{{nz}}})"


def vector_field(components, chart: Chart) -> TensorField:
    """A ``(1,0)`` field from three component expressions or strings."""
    comps = [as_expr(c, chart) for c in components]
    if len(comps) != DIM:
        raise ExprError("a vector field needs 3 components")
    return TensorField("u", comps, chart)


# ---------------------------------------------------------------------------
# Metrics


def _det3(m) -> sp.Expr:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _adjugate3(m) -> list[list[sp.Expr]]:
    def minor(i, j):
        rows = [r for r in range(3) if r != i]
        cols = [c for c in range(3) if c != j]
        return m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]]

    return [[(-1) ** (i + j) * minor(j, i) for j in range(3)] for i in range(3)]


@dataclass(frozen=True, eq=False)
class MetricChart:
    """Symmetric nondegenerate metric with exact inverse and determinant."""

    chart: Chart
    g: np.ndarray
    ginv: np.ndarray
    detg: Expr
    signature: str
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def cached(self, key: str, fn: Callable[[], object]):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def coords(self) -> tuple[str, ...]:
        return self.chart.coords

    def metric_tensor(self) -> TensorField:
        return self.cached("g", lambda: TensorField("dd", self.g, self.chart))

    def inverse_tensor(self) -> TensorField:
        return self.cached("ginv", lambda: TensorField("uu", self.ginv, self.chart))

    def raw_g(self) -> np.ndarray:
        return self.metric_tensor().raw()

    def raw_ginv(self) -> np.ndarray:
        return self.inverse_tensor().raw()

    @property
    def christoffel(self) -> np.ndarray:
        """``Γ[k, i, j] = Γ^k_ij`` (computed once, see :mod:`geo3.curvature`)."""
        from .curvature import christoffel

        return christoffel(self)

    def with_chart(self, chart: Chart) -> "MetricChart":
        return MetricChart(chart, self.g, self.ginv, self.detg, self.signature)

    def __eq__(self, other):
        if not isinstance(other, MetricChart):
            return NotImplemented
        return all(self.g[i, j] == other.g[i, j] for i in range(3) for j in range(3))

    __hash__ = None

    def __str__(self):
        parts = []
        for i in range(3):
            for j in range(i, 3):
                if not self.g[i, j].is_zero:
                    parts.append(f"g[{self.coords[i]},{self.coords[j]}] = {self.g[i, j]}")
        return "; ".join(parts)


def build_metric(chart: Chart, entries: Mapping, signature: str | None = None) -> MetricChart:
    """Build a metric from sparse entries.

    Keys are index pairs ``(i, j)`` or coordinate-name pairs; values are
    ``Expr``, ints or expression text.  Missing entries are zero and the
    symmetric partner is filled in.  With ``signature=None`` the tag is read
    off a constant determinant (negative means Lorentzian).
    """
    mat: list[list[Expr | None]] = [[None] * 3 for _ in range(3)]
    for key, value in entries.items():
        i, j = (k if isinstance(k, int) else chart.index(k) for k in key)
        if not (0 <= i < 3 and 0 <= j < 3):
            raise MetricError(f"index {key} out of range")
        val = as_expr(value, chart)
        for a, b in ((i, j), (j, i)):
            if mat[a][b] is not None and mat[a][b] != val:
                raise MetricError(f"asymmetric entries at ({a},{b}): {mat[a][b]} vs {val}")
            mat[a][b] = val
    g = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            g[i, j] = mat[i][j] if mat[i][j] is not None else ZERO
    raw = [[g[i, j].sym for j in range(3)] for i in range(3)]
    det = Expr(_det3(raw))
    if det.is_zero:
        raise MetricError("metric is singular (determinant vanishes identically)")
    adj = _adjugate3(raw)
    ginv = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            ginv[i, j] = Expr(adj[i][j] / det.sym)
    g.setflags(write=False)
    ginv.setflags(write=False)
    if signature is None:
        if not det.is_constant():
            raise MetricError("cannot infer the signature from a non-constant determinant; pass signature=")
        signature = "lorentzian" if det.as_fraction() < 0 else "riemannian"
    if signature not in SIGNATURES:
        raise MetricError(f"signature must be one of {SIGNATURES}")
    return MetricChart(chart, g, ginv, det, signature)


# ---------------------------------------------------------------------------
# Derivative toolkit


def _christoffel_raw(m: MetricChart) -> np.ndarray:
    return m.cached("christoffel_raw", lambda: _raw(m.christoffel))


def _dvec(m: MetricChart, e) -> list:
    """Raw partial derivatives of a raw sympy value along each coordinate."""
    return [sp.diff(e, s) for s in m.chart.coord_symbols()]


def covariant_derivative(T: TensorField, m: MetricChart) -> TensorField:
    """Levi-Civita covariant derivative; the new covariant slot comes first."""
    G = _christoffel_raw(m)
    raw = T.raw()
    syms = m.chart.coord_symbols()
    rank = T.rank
    comps = np.empty((DIM,) * (rank + 1), dtype=object)
    for idx in _slots(rank):
        grads = [sp.diff(raw[idx], s) for s in syms]
        for mu in range(DIM):
            acc = [grads[mu]]
            for s, kind in enumerate(T.kinds):
                for a in range(DIM):
                    other = idx[:s] + (a,) + idx[s + 1 :]
                    val = raw[other]
                    if val == 0:
                        continue
                    if kind == "u":
                        gam = G[idx[s], mu, a]
                        if gam != 0:
                            acc.append(gam * val)
                    else:
                        gam = G[a, mu, idx[s]]
                        if gam != 0:
                            acc.append(-gam * val)
            comps[(mu,) + idx] = Expr(sp.Add(*acc))
    return TensorField("d" + T.kinds, comps, T.chart)


def lie_derivative_metric(X: TensorField, m: MetricChart) -> TensorField:
    """``(L_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k``."""
    if X.kinds != "u":
        raise ExprError("Lie derivative needs a vector field")
    g = m.raw_g()
    Xr = X.raw()
    syms = m.chart.coord_symbols()
    dX = [[sp.diff(Xr[k], s) for s in syms] for k in range(DIM)]

    def comp(i, j):
        acc = []
        for k in range(DIM):
            if Xr[k] != 0 and g[i, j] != 0:
                acc.append(Xr[k] * sp.diff(g[i, j], syms[k]))
            acc.append(g[k, j] * dX[k][i])
            acc.append(g[i, k] * dX[k][j])
        return sp.Add(*acc)

    return TensorField.build("dd", m.chart, comp)


def lie_derivative_via_connection(X: TensorField, m: MetricChart) -> TensorField:
    """``∇_i X♭_j + ∇_j X♭_i``; equal to :func:`lie_derivative_metric` for Levi-Civita."""
    flat = musical(X, 0, "lower", m)
    D = covariant_derivative(flat, m)
    return TensorField.build("dd", m.chart, lambda i, j: D[i, j] + D[j, i])


def hessian(phi, m: MetricChart) -> TensorField:
    """``Hess φ_ij = ∂_i ∂_j φ − Γ^k_ij ∂_k φ``."""
    phi = as_expr(phi, m.chart).sym
    G = _christoffel_raw(m)
    syms = m.chart.coord_symbols()
    d1 = [sp.diff(phi, s) for s in syms]
    return TensorField.build(
        "dd",
        m.chart,
        lambda i, j: sp.diff(d1[j], syms[i]) - sp.Add(*[G[k, i, j] * d1[k] for k in range(DIM)]),
    )


def gradient(phi, m: MetricChart) -> TensorField:
    phi = as_expr(phi, m.chart).sym
    ginv = m.raw_ginv()
    d1 = [sp.diff(phi, s) for s in m.chart.coord_symbols()]
    return TensorField.build("u", m.chart, lambda i: sp.Add(*[ginv[i, j] * d1[j] for j in range(DIM)]))


def musical(T: TensorField, slot: int, direction: str, m: MetricChart) -> TensorField:
    """Raise (contract with ``g^{-1}``) or lower (contract with ``g``) one slot."""
    if not 0 <= slot < T.rank:
        raise ExprError(f"slot {slot} out of range for a rank-{T.rank} tensor")
    if direction == "raise":
        if T.kinds[slot] != "d":
            raise ExprError(f"slot {slot} is not covariant")
        M, new = m.raw_ginv(), "u"
    elif direction == "lower":
        if T.kinds[slot] != "u":
            raise ExprError(f"slot {slot} is not contravariant")
        M, new = m.raw_g(), "d"
    else:
        raise ExprError("direction must be 'raise' or 'lower'")
    raw = T.raw()
    kinds = T.kinds[:slot] + new + T.kinds[slot + 1 :]

    def comp(*idx):
        return sp.Add(*[M[idx[slot], a] * raw[idx[:slot] + (a,) + idx[slot + 1 :]] for a in range(DIM)])

    return TensorField.build(kinds, T.chart, comp)


def levi_civita(i: int, j: int, k: int) -> int:
    """Permutation symbol with ``ε(0, 1, 2) = 1``."""
    if len({i, j, k}) < 3:
        return 0
    perm = [i, j, k]
    sign = 1
    for a in range(3):
        for b in range(a + 1, 3):
            if perm[a] > perm[b]:
                sign = -sign
    return sign


def volume_factor(m: MetricChart) -> Expr:
    """Exact ``sqrt|det g|`` when ``|det g|`` is a perfect square, else ``MetricError``."""

    def compute():
        absdet = -m.detg if m.signature == "lorentzian" else m.detg
        num = _exact_sqrt(absdet.num)
        den = _exact_sqrt(absdet.den)
        if num is None or den is None:
            raise MetricError(f"sqrt|det g| = sqrt({absdet}) is not rational in the chart")
        return Expr(num / den)

    return m.cached("volume", compute)


def _exact_sqrt(p: sp.Expr):
    if p.is_Number:
        r = sp.sqrt(p)
        return r if r.is_Rational else None
    coeff, factors = sp.factor_list(p)
    root = sp.sqrt(sp.Rational(coeff)) if coeff > 0 else None
    if root is None or not root.is_Rational:
        return None
    out = root
    for base, k in factors:
        if k % 2:
            return None
        out *= base ** (k // 2)
    return out


def hodge_dual_cotton(C: TensorField, m: MetricChart) -> TensorField:
    """``C̃_ij = (1 / (2 sqrt|det g|)) C_nmi ε^{nml} g_lj``."""
    if C.kinds != "ddd":
        raise ExprError("expected a (0,3) tensor")
    if not C.is_antisymmetric(0, 1):
        raise ExprError("tensor is not antisymmetric in its first two slots")
    vol = volume_factor(m).sym
    g = m.raw_g()
    raw = C.raw()
    eps = [(n, mm, l, levi_civita(n, mm, l)) for n, mm, l in _slots(3) if levi_civita(n, mm, l)]

    def comp(i, j):
        acc = sp.Add(*[s * raw[n, mm, i] * g[l, j] for n, mm, l, s in eps])
        return acc / (2 * vol)

    return TensorField.build("dd", m.chart, comp)


def contract(T: TensorField, a: int, b: int) -> TensorField | Expr:
    """Trace over one upper and one lower slot."""
    if {T.kinds[a], T.kinds[b]} != {"u", "d"}:
        raise ExprError("contraction needs one upper and one lower slot")
    keep = [s for s in range(T.rank) if s not in (a, b)]
    raw = T.raw()

    def comp(*idx):
        acc = []
        for k in range(DIM):
            full = [0] * T.rank
            for s, v in zip(keep, idx):
                full[s] = v
            full[a] = full[b] = k
            acc.append(raw[tuple(full)])
        return sp.Add(*acc)

    kinds = "".join(T.kinds[s] for s in keep)
    if not kinds:
        return Expr(comp())
    return TensorField.build(kinds, T.chart, comp)


def metric_trace(T: TensorField, m: MetricChart, a: int = 0, b: int = 1) -> TensorField | Expr:
    """``g^{ij}`` contraction over two covariant slots."""
    if T.kinds[a] != "d" or T.kinds[b] != "d":
        raise ExprError("metric trace needs two covariant slots")
    return contract(musical(T, a, "raise", m), a, b)


def operator_power(T: TensorField, k: int) -> TensorField:
    """``k``-th power of a ``(1,1)`` operator ``T^i_j``."""
    if T.kinds != "ud":
        raise ExprError("operator powers need a (1,1) tensor with kinds 'ud'")
    if k == 0:
        return TensorField.build("ud", T.chart, lambda i, j: ONE if i == j else ZERO)
    out = T
    for _ in range(k - 1):
        a, b = out.raw(), T.raw()
        out = TensorField.build("ud", T.chart, lambda i, j, a=a, b=b: sp.Add(*[a[i, l] * b[l, j] for l in range(DIM)]))
    return out
