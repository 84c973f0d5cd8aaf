"""Acceptance criteria 1-9.  Each test prints one ``criterion N: PASS|FAIL``
line (visible even under output capture) and then asserts."""
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from mpmath import mpf

from tscalc.gridfn import (
    GridFunction,
    Monotonicity,
    cauchy_mvt_witnesses,
    delta_derivative,
    nabla_derivative,
)
from tscalc.lhopital import Supplied, run_property_suite, verify_delta_rule
from tscalc.qbounds import BoundProblem, sandwich_report, verify_derivative_chain
from tscalc.qcalc import QContext, q_derivative, q_exponential, q_number, q_poly
from tscalc.scale import FiniteSet, QScale, UniformLattice

GRID = [(q, n) for q in ("0.3", "0.5", "0.9") for n in (1, 2, 3, 4)]


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return report


def test_criterion_1_delta_suite(verdict):
    t0 = time.perf_counter()
    rep = run_property_suite(trials=1000, seed=0, tol=1e-10)
    elapsed = time.perf_counter() - t0
    c = rep.counts
    ok = c["violations"] == 0 and c["trials"] == 1000 and elapsed <= 10.0
    verdict(1, ok, f"{c['satisfied']} satisfied, {c['vacuous']} vacuous, {c['violations']} violations, {elapsed:.2f}s <= 10s")


def test_criterion_2_nabla_suite(verdict):
    rep = run_property_suite(trials=500, seed=0, tol=1e-10, kind="nabla")
    c = rep.counts
    gap = max((r.get("h_max_gap", 0.0) for r in rep.records), default=0.0)
    flags_match = all(r.get("dual_agrees", True) for r in rep.records)
    ok = c["violations"] == 0 and c["dual_disagreements"] == 0 and flags_match and gap <= 1e-12
    verdict(2, ok, f"{c['satisfied']} satisfied, {c['vacuous']} vacuous, {c['violations']} violations, max |dH| = {gap:.1e} <= 1e-12")


def test_criterion_3_continuous_limit(verdict):
    kinds = []
    for h in (Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000)):
        ts = UniformLattice(0, h, int(1 / h) + 1)
        f = GridFunction.from_function(ts, lambda x: x**3 + x)
        g = GridFunction.from_function(ts, lambda x: x)
        rep = verify_delta_rule(f, g, "left", Supplied(0), Supplied(0), tol=1e-10)
        assert rep.premises.ratio_verdict.kind is Monotonicity.STRICTLY_INCREASING
        kinds.append(rep.conclusion.kind)
    ok = kinds == [Monotonicity.STRICTLY_INCREASING] * 3
    verdict(3, ok, "H verdicts for h = 1e-1, 1e-2, 1e-3: " + ", ".join(k.value for k in kinds))


def _random_pair(rng):
    n = int(rng.integers(2, 13))
    start = Fraction(int(rng.integers(-20, 21)), 4)
    pts = [start]
    for _ in range(n - 1):
        pts.append(pts[-1] + Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5))))
    ts = FiniteSet(tuple(pts))
    fv = [Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 7))) for _ in pts]
    gv = [Fraction(0)]
    for _ in range(n - 1):
        gv.append(gv[-1] + Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 7))))
    return ts, pts, fv, gv


def test_criterion_4_mvt_witnesses(verdict):
    rng = np.random.default_rng(20240601)
    failures = 0
    for _ in range(200):
        ts, pts, fv, gv = _random_pair(rng)
        F, G = GridFunction.from_values(ts, fv), GridFunction.from_values(ts, gv)
        j = int(rng.integers(1, len(pts)))
        # exhaustive scan oracle in plain Fractions
        ratios = {pts[i]: (fv[i + 1] - fv[i]) / (gv[i + 1] - gv[i]) for i in range(j)}
        secant = (fv[j] - fv[0]) / (gv[j] - gv[0])
        exists = any(r <= secant for r in ratios.values()) and any(r >= secant for r in ratios.values())
        w = cauchy_mvt_witnesses(F, G, pts[0], pts[j])
        good = (
            exists
            and w.holds
            and w.middle_ratio == secant
            and ratios[w.c1.value] == w.lower_ratio == min(ratios.values())
            and ratios[w.c2.value] == w.upper_ratio == max(ratios.values())
        )
        failures += not good
    verdict(4, failures == 0, f"{200 - failures}/200 pairs with exact witnesses")


def test_criterion_5_q_identities(verdict):
    worst_poly = mpf(0)
    for q in ("0.3", "0.5", "0.9"):
        ctx = QContext(q)
        for n in range(1, 7):
            for i in range(20):
                x = -2.0 + 0.21 * i + 0.013
                got = q_derivative(ctx, lambda t: q_poly(ctx, t, 0.37, n), x)
                want = q_number(ctx, n) * q_poly(ctx, x, 0.37, n - 1)
                worst_poly = max(worst_poly, abs(got - want) / abs(want))

    worst_exp = mpf(0)
    worst_nabla = mpf(0)
    for q in ("0.3", "0.5", "0.9"):
        ctx = QContext(q, precision=40, tail_tol=1e-40)
        e = lambda t: q_exponential(ctx, t).value  # noqa: E731
        k = 0
        while ctx.q**k >= ctx.radius * (1 - Fraction(1, 10**6)):
            k += 1
        for j in range(k, k + 30):
            x = ctx.q**j
            worst_exp = max(worst_exp, abs(q_derivative(ctx, e, x) - e(x)))
        ts = QScale(q, k, k + 30)
        with ctx.workdps():
            for func in (e, lambda t: t**3 - 2 * t):
                f = GridFunction.from_function(ts, func)
                for p, v in nabla_derivative(f).items():
                    want = q_derivative(ctx, func, p.value)
                    worst_nabla = max(worst_nabla, float(abs(v - want) / abs(want)))

    e0 = q_exponential(QContext("0.5"), 0).value
    ok = worst_poly <= 1e-12 and worst_exp <= 1e-9 and e0 == 1 and worst_nabla <= 1e-14
    verdict(
        5,
        ok,
        f"D_q poly rel {float(worst_poly):.1e}, |D_q e - e| {float(worst_exp):.1e}, e_q^0 = {e0}, nabla vs D_q rel {float(worst_nabla):.1e}",
    )


def test_criterion_6_bounds(verdict):
    t0 = time.perf_counter()
    worst_margin, worst_end, rows = None, mpf(0), 0
    for q, n in GRID:
        rep = sandwich_report(BoundProblem(QContext(q), 4, 0, n), tol=1e-10)
        rows += len(rep.rows)
        for r in rep.rows:
            m = min(r.lower_margin, r.upper_margin)
            worst_margin = m if worst_margin is None else min(worst_margin, m)
        worst_end = max(worst_end, rep.endpoint_lower, rep.endpoint_upper)
    elapsed = time.perf_counter() - t0
    ok = worst_margin >= -1e-10 and worst_end <= 1e-10 and elapsed <= 5.0
    verdict(6, ok, f"{rows} rows, min margin {float(worst_margin):.3e}, max endpoint residual {float(worst_end):.1e}, {elapsed:.2f}s <= 5s")


def test_criterion_7_derivative_chain(verdict):
    bad = []
    for q, n in GRID:
        rep = verify_derivative_chain(BoundProblem(QContext(q), 4, 0, n), tol=1e-10)
        vanish = all(v <= 1e-10 for v in rep.f_at_a)
        increasing = rep.ratio_kinds == [Monotonicity.STRICTLY_INCREASING.value] * (n + 1)
        if not (vanish and rep.g_top_exact and increasing):
            bad.append((q, n))
    verdict(7, not bad, f"{len(GRID) - len(bad)}/{len(GRID)} (q, n) cases" + (f", failing {bad}" if bad else ""))


def test_criterion_8_exactness(verdict):
    scales = [QScale(q, -5, 25) for q in ("0.3", "0.5", "0.9", "2/3")] + [UniformLattice(-10, 1, 40)]
    errors = 0
    for ts in scales:
        sq = GridFunction.from_function(ts, lambda t: t * t)
        for p, v in delta_derivative(sq).items():
            errors += v != p.value + ts.sigma(p).value
    rng = np.random.default_rng(8)
    trips = 0
    qs = [QScale(q, -40, 40) for q in ("0.3", "0.5", "0.9", "2/3", "1/7")]
    for _ in range(10**4):
        ts = qs[int(rng.integers(len(qs)))]
        p = ts.at(int(rng.integers(-39, 40)))
        trips += ts.rho(ts.sigma(p)) == p and ts.sigma(ts.rho(p)) == p
    ok = errors == 0 and trips == 10**4
    verdict(8, ok, f"(t^2)^Delta mismatches: {errors}; exact sigma/rho round trips: {trips}/10000")


def test_criterion_9_cli(verdict, tmp_path):
    argv = [sys.executable, "-m", "tscalc", "verify", "lhopital", "--trials", "100", "--seed", "7", "--format", "json"]
    first = subprocess.run(argv, capture_output=True)
    second = subprocess.run(argv, capture_output=True)
    identical = first.stdout == second.stdout and first.returncode == second.returncode == 0

    tampered = tmp_path / "tampered.csv"
    tampered.write_text("t,f,g\n0,0,0\n1,1,1\n2,4,2\n3,9,1.5\n4,16,4\n")
    bad = subprocess.run([sys.executable, "-m", "tscalc", "mvt", "--csv", str(tampered), "--x", "4"], capture_output=True)
    ok = identical and bad.returncode == 2
    verdict(9, ok, f"byte-identical JSON: {identical}; tampered CSV exit code {bad.returncode} (want 2)")
