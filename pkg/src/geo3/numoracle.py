"""Finite-difference curvature from numeric metric samples.

This module never differentiates an :class:`~geo3.symexpr.Expr`.  The metric
is only *evaluated*; every derivative is a central difference of numbers,
so agreement with :mod:`geo3.curvature` is an independent check.

Derivatives are taken on the lattice ``p + h·k`` (``k`` integer vectors) and
metric samples are memoized per lattice point, so the three nested
difference levels needed for ``C̃`` share evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .report import Report
from .symexpr import EvaluationError, eval_numeric
from .tensor import MetricChart, TensorField

__all__ = [
    "CompareReport",
    "NumericMetric",
    "compare",
    "fd_christoffel",
    "fd_cotton2",
    "fd_ricci",
    "fd_scalar",
    "sample_points",
]

DIM = 3
H_RICCI = 1e-3
H_COTTON = 5e-3
TOL_RICCI = 1e-5
TOL_COTTON = 1e-3

_EPS = np.zeros((3, 3, 3))
_EPS[0, 1, 2] = _EPS[1, 2, 0] = _EPS[2, 0, 1] = 1.0
_EPS[0, 2, 1] = _EPS[2, 1, 0] = _EPS[1, 0, 2] = -1.0


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class NumericMetric:
    """A metric given only through its values ``g(p)`` as a 3×3 array."""

    fn: Callable[[np.ndarray], np.ndarray]
    coords: tuple[str, ...] = ("t", "x", "y")
    funcs: Mapping[str, object] = field(default_factory=dict)

    @classmethod
    def from_metric(cls, m: MetricChart, funcs: Mapping[str, object] | None = None) -> "NumericMetric":
        """Sample the entries of ``m`` with :func:`eval_numeric` (evaluation only)."""
        funcs = dict(funcs or {})
        coords = m.coords
        entries = [(i, j, m.g[i, j]) for i in range(DIM) for j in range(i, DIM) if not m.g[i, j].is_zero]

        def fn(p):
            point = dict(zip(coords, map(float, p)))
            out = np.zeros((DIM, DIM))
            for i, j, e in entries:
                out[i, j] = out[j, i] = eval_numeric(e, point, funcs)
            return out

        return cls(fn, coords, funcs)

    def __call__(self, p) -> np.ndarray:
        g = np.asarray(self.fn(np.asarray(p, dtype=float)), dtype=float)
        if g.shape != (DIM, DIM):
            raise OracleError("metric callable must return a 3x3 array")
        if not np.allclose(g, g.T, rtol=0, atol=1e-14 * max(1.0, np.abs(g).max())):
            raise OracleError(f"metric is not symmetric at {p}")
        return g


class _Lattice:
    """Memoized metric samples and curvature on ``p + h·k``."""

    def __init__(self, nm: NumericMetric, p, h: float):
        p = np.asarray(p, dtype=float)
        if not h > 0 or not np.all(np.isfinite(p)):
            raise OracleError("need h > 0 and a finite point")
        if np.any(p + h == p):
            raise OracleError(f"step {h:g} underflows at {p}")
        self.nm, self.p, self.h = nm, p, h
        self._memo: dict[tuple, dict] = {}

    def _slot(self, k) -> dict:
        k = tuple(k)
        slot = self._memo.get(k)
        if slot is None:
            slot = self._memo[k] = {}
        return slot

    def _get(self, k, name, fn):
        slot = self._slot(k)
        if name not in slot:
            slot[name] = fn(k)
        return slot[name]

    @staticmethod
    def _shift(k, axis, s):
        k = list(k)
        k[axis] += s
        return tuple(k)

    def _diff(self, k, name):
        """Central difference of the quantity ``name``; axis 0 of the result is the derivative index."""
        f = getattr(self, name)
        return np.stack([(f(self._shift(k, a, 1)) - f(self._shift(k, a, -1))) / (2 * self.h) for a in range(DIM)])

    def g(self, k):
        return self._get(k, "g", lambda k: self.nm(self.p + self.h * np.asarray(k, dtype=float)))

    def ginv(self, k):
        def compute(k):
            g = self.g(k)
            cond = np.linalg.cond(g)
            if not np.isfinite(cond) or cond > 1e12:
                raise OracleError(f"metric is numerically singular near {self.p} (cond {cond:.3g})")
            return np.linalg.inv(g)

        return self._get(k, "ginv", compute)

    def christoffel(self, k):
        def compute(k):
            dg = self._diff(k, "g")  # dg[l, i, j] = ∂_l g_ij
            lower = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
            # lower[l, i, j] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
            return np.einsum("kl,lij->kij", self.ginv(k), lower)

        return self._get(k, "christoffel", compute)

    def riemann_up(self, k):
        def compute(k):
            G = self.christoffel(k)
            dG = self._diff(k, "christoffel")  # dG[c, a, d, b] = ∂_c Γ^a_db
            R = np.einsum("cadb->abcd", dG) - np.einsum("dacb->abcd", dG)
            R += np.einsum("ace,edb->abcd", G, G) - np.einsum("ade,ecb->abcd", G, G)
            return R

        return self._get(k, "riemann_up", compute)

    def ricci(self, k):
        return self._get(k, "ricci", lambda k: np.einsum("abad->bd", self.riemann_up(k)))

    def scalar(self, k):
        return self._get(k, "scalar", lambda k: float(np.einsum("ij,ij->", self.ginv(k), self.ricci(k))))

    def schouten(self, k):
        return self._get(k, "schouten", lambda k: self.ricci(k) - self.scalar(k) * self.g(k) / 4)

    def cotton2(self, k):
        G = self.christoffel(k)
        S = self.schouten(k)
        dS = self._diff(k, "schouten")
        DS = dS - np.einsum("pij,pk->ijk", G, S) - np.einsum("pik,jp->ijk", G, S)
        C3 = DS - np.einsum("jik->ijk", DS)
        g = self.g(k)
        vol = np.sqrt(abs(np.linalg.det(g)))
        return np.einsum("nmi,nml,lj->ij", C3, _EPS, g) / (2 * vol)


def fd_christoffel(nm: NumericMetric, p, h: float = H_RICCI) -> np.ndarray:
    """``Γ[k, i, j]`` by central differences of ``g``."""
    return _Lattice(nm, p, h).christoffel((0, 0, 0))


def fd_ricci(nm: NumericMetric, p, h: float = H_RICCI) -> np.ndarray:
    return _Lattice(nm, p, h).ricci((0, 0, 0))


def fd_scalar(nm: NumericMetric, p, h: float = H_RICCI) -> float:
    return _Lattice(nm, p, h).scalar((0, 0, 0))


def fd_cotton2(nm: NumericMetric, p, h: float = H_COTTON) -> np.ndarray:
    """``C̃`` from nested central differences (third derivatives of ``g``)."""
    return _Lattice(nm, p, h).cotton2((0, 0, 0))


def sample_points(n: int, seed: int = 0, low: float = -1.0, high: float = 1.0, avoid_x: float = 0.0) -> np.ndarray:
    """``n`` uniform points in ``[low, high]³``; points with ``|x| < avoid_x`` are redrawn."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        p = rng.uniform(low, high, size=DIM)
        if abs(p[1]) >= avoid_x:
            pts.append(p)
    return np.array(pts)


def rel_error(sym: np.ndarray, fd: np.ndarray) -> float:
    """``||sym − fd||_∞ / max(||sym||_∞, 1)``."""
    sym, fd = np.asarray(sym, dtype=float), np.asarray(fd, dtype=float)
    return float(np.max(np.abs(sym - fd)) / max(float(np.max(np.abs(sym))), 1.0))


@dataclass
class CompareReport:
    errors: dict[str, float]
    tolerances: dict[str, float]
    steps: dict[str, float]
    n_points: int
    worst_points: dict[str, tuple[float, ...]]
    max_condition: float

    @property
    def passed(self) -> bool:
        return all(self.errors[q] < self.tolerances[q] for q in self.errors)

    def failures(self) -> list[str]:
        return [q for q in self.errors if not self.errors[q] < self.tolerances[q]]

    def to_report(self, command: str = "oracle") -> Report:
        rep = Report(command, {"points": self.n_points, "steps": dict(self.steps), "max-condition": self.max_condition})
        for q in sorted(self.errors):
            ok = self.errors[q] < self.tolerances[q]
            worst = ", ".join(f"{float(v):.6g}" for v in self.worst_points[q])
            rep.add(
                f"oracle.{q}",
                ok,
                numeric_errors={"max-rel-error": self.errors[q], "tolerance": self.tolerances[q]},
                detail=f"h={self.steps[q]:g}, worst at ({worst})",
            )
        return rep


def _symbolic_values(tensor, point, funcs):
    if isinstance(tensor, np.ndarray) and tensor.dtype == object:
        return np.vectorize(lambda e: eval_numeric(e, point, funcs), otypes=[float])(tensor)
    if isinstance(tensor, TensorField):
        return tensor.evaluate(point, funcs)
    return eval_numeric(tensor, point, funcs)


def compare(
    m: MetricChart,
    nm: NumericMetric,
    points: Sequence[Sequence[float]],
    tol: Mapping[str, float] | None = None,
    steps: Mapping[str, float] | None = None,
    symbolic: Mapping[str, object] | None = None,
) -> CompareReport:
    """Compare symbolic ``Γ, ρ, τ, C̃`` of ``m`` with the finite-difference values of ``nm``.

    ``symbolic`` overrides any of the symbolic quantities (used to inject a
    corrupted tensor as a negative control).  Quantities whose symbolic form
    is unavailable (``C̃`` with irrational volume factor) are skipped.
    """
    from . import curvature

    if tuple(nm.coords) != tuple(m.coords):
        raise OracleError(f"numeric metric coordinates {nm.coords} differ from {m.coords}")
    tols = {"christoffel": TOL_RICCI, "ricci": TOL_RICCI, "scalar": TOL_RICCI, "cotton2": TOL_COTTON}
    tols.update(tol or {})
    hs = {"christoffel": H_RICCI, "ricci": H_RICCI, "scalar": H_RICCI, "cotton2": H_COTTON}
    hs.update(steps or {})
    sym = {
        "christoffel": curvature.christoffel(m),
        "ricci": curvature.ricci(m),
        "scalar": curvature.scalar(m),
    }
    try:
        sym["cotton2"] = curvature.cotton2(m)
    except ValueError:
        pass
    sym.update(symbolic or {})
    errors = {q: 0.0 for q in sym}
    worst = {q: (0.0,) * DIM for q in sym}
    max_cond = 0.0
    for p in np.asarray(points, dtype=float):
        point = dict(zip(m.coords, map(float, p)))
        lat_r = _Lattice(nm, p, hs["ricci"])
        lat_c = lat_r if hs["cotton2"] == hs["ricci"] else _Lattice(nm, p, hs["cotton2"])
        origin = (0, 0, 0)
        try:
            max_cond = max(max_cond, float(np.linalg.cond(lat_r.g(origin))))
        except EvaluationError as exc:
            raise OracleError(f"binding mismatch: {exc}") from exc
        fd = {
            "christoffel": lambda: _Lattice(nm, p, hs["christoffel"]).christoffel(origin),
            "ricci": lambda: lat_r.ricci(origin),
            "scalar": lambda: _Lattice(nm, p, hs["scalar"]).scalar(origin),
            "cotton2": lambda: lat_c.cotton2(origin),
        }
        for q, s in sym.items():
            try:
                err = rel_error(_symbolic_values(s, point, nm.funcs), fd[q]())
            except EvaluationError as exc:
                raise OracleError(f"binding mismatch: {exc}") from exc
            if err > errors[q] or not np.isfinite(err):
                errors[q] = err if np.isfinite(err) else float("inf")
                worst[q] = tuple(p)
    return CompareReport(errors, {q: tols[q] for q in sym}, {q: hs[q] for q in sym}, len(points), worst, max_cond)


def corrupt(T: TensorField, idx: tuple[int, ...], delta) -> TensorField:
    """``T`` with ``delta`` added to one component (and its mirror for symmetric 2-tensors)."""
    comps = T.components.copy()
    comps[idx] = comps[idx] + delta
    if len(idx) == 2 and idx[0] != idx[1]:
        comps[idx[::-1]] = comps[idx[::-1]] + delta
    return TensorField(T.kinds, comps, T.chart)
