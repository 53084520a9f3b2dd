"""Acceptance suite: every verification criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with -s to see them live).  Exact
criteria admit zero tolerance; Monte Carlo criteria combine three standard
errors with the stated finite-size allowance.
"""

import random
import time
from fractions import Fraction as F

from vandermoments.cumulants import CumulantSpec, alpha, cumulant_by_inversion
from vandermoments.funcspace import ONE, T, const, from_poly
from vandermoments.moments import (Word, X_XSTAR, XSTAR_X,
                                   centered_product_trace, concat,
                                   expectation, trace_moment, word_power)
from vandermoments.montecarlo import (centered_decay, estimate_diagonal,
                                      estimate_trace)
from vandermoments.partitions import (PI4, classify, enumerate_partitions,
                                      enumerate_purely_crossing)
from vandermoments.transforms import (gamma, lambda_eval_at,
                                      lambda_interpolate, lambda_reduce,
                                      tau_lambda)

HALF = F(1, 2)


def report(criterion: str, ok: bool, detail: str = ""):
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}"
          + (f": {detail}" if detail else ""))
    assert ok, f"{criterion} failed: {detail}"


def rnd_poly(rng, deg):
    return from_poly([F(rng.randint(-3, 3), rng.randint(1, 4))
                      for _ in range(deg + 1)])


def test_criterion_01_trace_moments():
    t0 = time.time()
    got = [trace_moment(word_power(XSTAR_X, p)) for p in range(1, 5)]
    elapsed = time.time() - t0
    ok = got == [1, 2, 5, F(44, 3)] and elapsed < 1.0
    report("criterion 1 (trace moments p=1..4, < 1s)", ok,
           f"{got} in {elapsed:.3f}s")


def test_criterion_02_fourth_moment_profile():
    e4 = expectation(word_power(XSTAR_X, 4)).value
    ok = (e4 == const(F(29, 2)) + T - T * T
          and e4.eval_at(0) == F(29, 2)
          and e4.eval_at(F(1, 3)) == F(29, 2) + F(2, 9)
          and e4.eval_at(HALF) == F(59, 4))
    report("criterion 2 (E((X*X)^4) profile)", ok, str(e4))


def test_criterion_03_crossing_pair_map():
    ok = all(lambda_eval_at(PI4, [ONE] * 3, t) == HALF + t * (1 - t)
             for t in (F(0), F(1, 4), F(1, 3), HALF, F(1)))
    poly = lambda_interpolate(PI4, [ONE] * 3, (F(0), F(1)))
    ok = ok and poly == (HALF, F(1), F(-1))
    report("criterion 3 (crossing-pair map values and interpolation)", ok,
           str(poly))


def test_criterion_04_sandwich_moment():
    ok = True
    for bp in (T, T * T):
        w = concat(word_power(X_XSTAR, 2), Word.of([bp]),
                   word_power(X_XSTAR, 2))
        ok &= expectation(w).value == const(10 * bp.tau()) + bp.scale(F(14, 3))
    report("criterion 4 (E((XX*)^2 b (XX*)^2) = 10 tau(b) + 14/3 b)", ok)


def test_criterion_05_witness():
    t0 = time.time()
    A = word_power(XSTAR_X, 4)
    B = word_power(X_XSTAR, 2)
    val = centered_product_trace(
        [(A, F(44, 3)), (B, F(2)), (A, F(44, 3)), (B, F(2))],
        letter_guard=24, override=True)
    elapsed = time.time() - t0
    ok = val == F(1, 270) and elapsed < 300
    report("criterion 5 (24-letter witness = 1/270, < 5 min)", ok,
           f"{val} in {elapsed:.1f}s")


def test_criterion_06_noncrossing_normalization_both_engines():
    ok = True
    checked = 0
    for n in range(1, 7):
        ts = (F(0), F(1, 3), HALF, F(1)) if n <= 5 else (F(1, 3), F(3, 4))
        for p in enumerate_partitions(n):
            if not classify(p).noncrossing:
                continue
            checked += 1
            ok &= lambda_reduce(p, [ONE] * (n - 1)) == ONE
            ok &= all(lambda_eval_at(p, [ONE] * (n - 1), t) == 1 for t in ts)
    report("criterion 6 (noncrossing map is 1, both engines, n <= 6)", ok,
           f"{checked} partitions")


def test_criterion_07_gamma_normalization():
    ok = all(gamma(p, [ONE] * n) == ONE
             for n in range(1, 7) for p in enumerate_partitions(n))
    report("criterion 7 (gamma of units is 1, n <= 6)", ok)


def test_criterion_08_engine_equivalence():
    rng = random.Random(88)
    parts = enumerate_partitions(5)
    ok = True
    compared = 0
    for _ in range(20):
        gs = [rnd_poly(rng, 2) for _ in range(4)]
        ts = [F(rng.randint(0, 30), 30) for _ in range(5)]
        for p in parts:
            reduced = lambda_reduce(p, gs)
            if reduced is None:
                continue
            for t in ts:
                compared += 1
                ok &= reduced.eval_at(t) == lambda_eval_at(p, gs, t)
    report("criterion 8 (engine equivalence on all of P(5))", ok,
           f"{compared} comparisons")


def test_criterion_09_rotation_identity():
    rng = random.Random(99)
    ok = True
    for n in range(2, 6):
        for p in enumerate_partitions(n):
            gs = [rnd_poly(rng, 2) for _ in range(n - 1)]
            gn = rnd_poly(rng, 2)
            lhs = tau_lambda(p, gs, gn)
            rhs = tau_lambda(p.rotate_left(), list(gs[1:]) + [gn], gs[0])
            ok &= lhs == rhs
    report("criterion 9 (rotation identity, exhaustive n <= 5)", ok)


def test_criterion_10_aggregate_identity():
    total = sum(tau_lambda(p, [ONE] * 3, ONE) for p in enumerate_partitions(4))
    report("criterion 10 (sum over P(4) equals 44/3)", total == F(44, 3),
           str(total))


def test_criterion_11_purely_crossing_structure():
    ok = all(enumerate_purely_crossing(n) == [] for n in (1, 2, 3, 5))
    ok &= enumerate_purely_crossing(4) == [PI4]
    for pattern in (1, 2):
        ok &= alpha(CumulantSpec.of(1, pattern, [T])) == const(F(1, 2))
    ok &= alpha(CumulantSpec.of(4, 1, [ONE] * 7)) == const(F(2, 3))
    report("criterion 11 (purely crossing structure and cumulant values)", ok)


def test_criterion_12_cumulant_cross_validation():
    rng = random.Random(123)
    ok = True
    for n in (1, 2):
        for pattern, eps in ((1, "1*" * n), (2, "*1" * n)):
            bs = [rnd_poly(rng, 1) for _ in range(2 * n - 1)]
            ok &= cumulant_by_inversion(tuple(eps), bs) \
                == alpha(CumulantSpec.of(n, pattern, bs))
    for eps in ("11", "**", "1**1", "11**", "*1*1"):
        bs = [rnd_poly(rng, 1) for _ in range(len(eps) - 1)]
        expected_zero = cumulant_by_inversion(tuple(eps), bs)
        if eps == "*1*1":
            # alternating star-leading: must match the closed form instead
            ok &= expected_zero == alpha(CumulantSpec.of(2, 2, bs))
        else:
            ok &= expected_zero == const(0)
    report("criterion 12 (inversion oracle vs closed forms)", ok)


def test_criterion_13_monte_carlo_convergence():
    t0 = time.time()
    r1 = estimate_trace(XSTAR_X, 200, 2000, 101)
    ok = abs(r1.mean - 1) < 1e-12 and r1.stderr < 1e-12
    detail = [f"p=1 exact ({abs(r1.mean - 1):.1e})"]

    r2 = estimate_trace(word_power(XSTAR_X, 2), 200, 2000, 102,
                        analytic=2.0, allowance=0.05)
    ok &= r2.verdict == "PASS"
    detail.append(f"p=2 {r2.mean.real:.4f}+-{r2.stderr:.4f}")

    r4 = estimate_trace(word_power(XSTAR_X, 4), 200, 2000, 103,
                        analytic=float(F(44, 3)), allowance=0.3)
    ok &= r4.verdict == "PASS"
    detail.append(f"p=4 {r4.mean.real:.4f}+-{r4.stderr:.4f}")

    rd = estimate_diagonal(word_power(XSTAR_X, 4), 100, HALF, 5000, 104,
                           analytic=float(F(59, 4)), allowance=0.5)
    ok &= rd.verdict == "PASS"
    detail.append(f"diag {rd.mean.real:.4f}+-{rd.stderr:.4f}")

    elapsed = time.time() - t0
    ok &= elapsed < 600
    report("criterion 13 (MC convergence at stated budgets, < 10 min)", ok,
           "; ".join(detail) + f" in {elapsed:.0f}s")


def test_criterion_14_centered_decay():
    rep = centered_decay("11", [25, 50, 100, 200], 2000, 105)
    ok = rep.slope is not None and rep.slope <= -0.3
    report("criterion 14 (centered-product decay slope <= -0.3)", ok,
           f"slope {rep.slope:.3f}, magnitudes "
           + str([f"{r.magnitude:.2e}" for r in rep.rows]))


def test_criterion_15_structural_dichotomy():
    star_first = expectation(word_power(XSTAR_X, 4)).value
    x_first = expectation(word_power(X_XSTAR, 4)).value
    ok = x_first.is_constant() and not star_first.is_constant()
    ok &= x_first == const(F(44, 3))
    ok &= star_first == const(F(29, 2)) + T - T * T
    report("criterion 15 (polar-decomposition dichotomy)", ok)
