"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test records one ``PASS``/``FAIL`` line; ``conftest.py`` prints them in
the terminal summary.  Running this file directly prints the same lines.
"""

import time

import pytest

from geo3 import suite
from geo3.numoracle import TOL_COTTON, TOL_RICCI

RESULTS: dict[int, str] = {}

TITLES = {
    1: "golden Walker formulas (Gamma, rho, Ctilde)",
    2: "parallel-Cotton condition system",
    3: "parallel-Cotton family with profile a(y)",
    4: "four-function family and quartic perturbation",
    5: "product metrics R x N",
    6: "isometries T, T~ and the affine family",
    7: "structure remarks (nilpotency, recurrence, not 2-symmetric)",
    8: "solitons and negative controls",
    9: "tensor identities on all test metrics",
    10: "finite-difference oracle agreement",
}


def _record(n: int, ok: bool, elapsed: float, note: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {n:2d}: {TITLES[n]} ({elapsed:.1f}s)"
    if note:
        line += f" - {note}"
    RESULTS[n] = line


def _run(name: str, *args):
    start = time.perf_counter()
    rep = suite.SECTIONS[name](*args)
    return rep, time.perf_counter() - start


def _judge(n: int, rep, elapsed: float, budget: float | None, extra_ok: bool = True, note: str = ""):
    failures = [c.id for c in rep.failures()]
    in_time = budget is None or elapsed < budget
    ok = rep.passed and in_time and extra_ok
    if failures:
        note = f"{len(failures)} failing checks: {', '.join(failures[:5])}"
    elif not in_time:
        note = f"over the {budget:g}s budget"
    _record(n, ok, elapsed, note or f"{len(rep.checks)} checks")
    assert not failures, rep.sorted().render()
    assert in_time, f"took {elapsed:.1f}s, budget {budget}s"
    assert extra_ok, note


def test_criterion_01_golden_formulas():
    rep, dt = _run("golden")
    ids = {c.id for c in rep.checks}
    _judge(1, rep, dt, 5.0, {"golden.christoffel", "golden.ricci", "golden.cotton2"} <= ids)


def test_criterion_02_condition_system():
    rep, dt = _run("system")
    weakened = [c for c in rep.checks if "not a rational-constant" in c.detail]
    # weakening is only tolerated from display line 4 on, and never silently
    silent = [c.id for c in weakened if not c.warnings]
    early = [c.id for c in weakened if c.id.startswith("system.listed") and int(c.detail.split()[1].rstrip(":")) < 4]
    note = f"{len(weakened)} memberships need degree-1 multipliers (reported)" if weakened else ""
    _judge(2, rep, dt, 60.0, not silent and not early, note)


def test_criterion_03_theorem_family():
    start = time.perf_counter()
    worst = 0.0
    rep = suite.Report("theorem")
    names = []
    for name, a in suite.theorem_profiles().items():
        t0 = time.perf_counter()
        rep.extend(suite.check_theorem_metric(name, a))
        worst = max(worst, time.perf_counter() - t0)
        names.append(name)
    dt = time.perf_counter() - start
    want = {"0", "y", "y^2", "sin(y)"} | {f"random[{s}]" for s in range(5)}
    ok = want <= set(names) and worst < 10.0
    _judge(3, rep, dt, None, ok, f"{len(names)} profiles, slowest {worst:.2f}s")


def test_criterion_04_family6():
    rep, dt = _run("family6")
    ids = {c.id for c in rep.checks}
    want = {f"family6[{k}].parallel" for k in ("1", "-2", "1/3")} | {"family6.perturbed_x4"}
    _judge(4, rep, dt, None, want <= ids)


def test_criterion_05_products():
    rep, dt = _run("product")
    ids = {c.id for c in rep.checks}
    want = {"product[u(x),+1].schouten_gradient", "product[u(x),-1].schouten_gradient"}
    _judge(5, rep, dt, None, want <= ids and any(i.endswith("conformally_flat") for i in ids))


def test_criterion_06_isometries():
    rep, dt = _run("isometry")
    ids = {c.id for c in rep.checks}
    want = {"shift.isometry.pullback"} | {f"scaling[{k}].isometry.pullback" for k in ("2", "-3", "1/4")}
    want |= {f"isometry.affine[{i}]" for i in range(10)}
    _judge(6, rep, dt, None, want <= ids)


def test_criterion_07_structure():
    rep, dt = _run("structure")
    ids = {c.id for c in rep.checks}
    want = {
        "structure.ricci_operator.nilpotency",
        "structure.cotton_operator.nilpotency",
        "structure.recurrent_ricci",
        "structure.not_2_symmetric[0]",
        "structure.not_2_symmetric[y^2]",
    }
    _judge(7, rep, dt, None, want <= ids)


def test_criterion_08_solitons():
    rep, dt = _run("soliton")
    ids = {c.id for c in rep.checks}
    controls = [i for i in ids if i.startswith("soliton.negative_control")]
    want = {
        "soliton.homothetic.soliton.homothetic",
        "soliton.cotton.soliton.cotton",
        "soliton.ricci.soliton.ricci",
        "soliton.ricci_steady.soliton.ricci",
        "soliton.gradient_cotton.soliton.gradient-cotton",
        "soliton.gradient_cotton.null_gradient",
        "soliton.ricci_pde.specialization",
    }
    _judge(8, rep, dt, None, want <= ids and len(controls) == 10, f"{len(controls)} negative controls")


def test_criterion_09_identities():
    rep, dt = _run("identities")
    metrics = {c.id.split("]")[0] + "]" for c in rep.checks}
    kinds = {"kulkarni_nomizu", "contracted_bianchi", "metricity", "lie_two_paths", "cotton3.trace"}
    ok = len(metrics) >= 5 and all(any(c.id.endswith(k) for c in rep.checks) for k in kinds)
    _judge(9, rep, dt, None, ok, f"{len(metrics)} metrics")


def test_criterion_10_oracle():
    tol = {"ricci": TOL_RICCI, "cotton2": TOL_COTTON}
    assert (TOL_RICCI, TOL_COTTON) == (1e-5, 1e-3)
    rep, dt = _run("oracle", 100, 0, tol)
    metrics = {c.id.split(".oracle")[0] for c in rep.checks if ".oracle." in c.id}
    worst_r = max(c.numeric_errors["max-rel-error"] for c in rep.checks if c.id.endswith("oracle.ricci"))
    worst_c = max(c.numeric_errors["max-rel-error"] for c in rep.checks if c.id.endswith("oracle.cotton2"))
    note = f"{len(metrics)} metrics x 100 points, max rel err rho {worst_r:.1e}, Ctilde {worst_c:.1e}"
    ok = len(metrics) == 5 and any(c.id == "oracle.mutation_detected" for c in rep.checks)
    _judge(10, rep, dt, 30.0, ok, note)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
