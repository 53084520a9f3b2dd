"""Finite-size simulation: exact identities, determinism, estimator checks.

MC assertions here use reduced budgets; the full budgets from the
verification criteria live in test_acceptance.py.
"""

from fractions import Fraction as F

import numpy as np
import pytest

from vandermoments.errors import ContractError
from vandermoments.funcspace import T, const
from vandermoments.moments import Word, X_XSTAR, XSTAR_X, word_power
from vandermoments.montecarlo import (centered_decay, diagonal_index,
                                      estimate_diagonal, estimate_trace,
                                      growth_check, sample)

HALF = F(1, 2)


def test_sample_identities():
    for N in (1, 7, 64):
        X = sample(N, 123).matrix()
        assert abs(np.trace(X.conj().T @ X).real / N - 1) < 1e-12
        assert abs(np.abs(X).max() - 1 / np.sqrt(N)) < 1e-12
    s1 = sample(32, 5, trial=9)
    s2 = sample(32, 5, trial=9)
    assert np.array_equal(s1.angles, s2.angles)
    assert not np.array_equal(sample(32, 5, 9).angles, sample(32, 5, 10).angles)
    with pytest.raises(ContractError):
        sample(0, 1)


def test_estimate_trace_exact_for_first_moment():
    rep = estimate_trace(XSTAR_X, 50, 10, 7)
    assert abs(rep.mean - 1) < 1e-12
    assert rep.stderr < 1e-12


def test_estimate_trace_determinism():
    a = estimate_trace(word_power(XSTAR_X, 2), 40, 25, 31)
    b = estimate_trace(word_power(XSTAR_X, 2), 40, 25, 31)
    assert a == b
    c = estimate_trace(word_power(XSTAR_X, 2), 40, 25, 32)
    assert a.mean != c.mean


def test_estimate_trace_against_limits():
    rep = estimate_trace(word_power(XSTAR_X, 2), 150, 400, 11,
                         analytic=2.0, allowance=0.05)
    assert rep.verdict == "PASS"
    rep4 = estimate_trace(word_power(X_XSTAR, 2), 150, 400, 13,
                          analytic=2.0, allowance=0.05)
    assert rep4.verdict == "PASS"


def test_odd_word_mean_near_zero():
    rep = estimate_trace(Word.of(["X"]), 64, 400, 17)
    assert abs(rep.mean) <= 3 * rep.stderr + 1e-12


def test_hermitian_symmetry():
    w = Word.of(["X", T, "X*", "X", "X*"])
    a = estimate_trace(w, 48, 60, 19)
    b = estimate_trace(w.adjoint(), 48, 60, 19)
    # same samples: the adjoint trace is the exact conjugate per trial
    assert abs(a.mean - np.conj(b.mean)) < 1e-10


def test_coefficient_words():
    # D(b) alone: normalized trace is the mean of b over the grid, no noise
    b = const(F(3, 2)) + T
    rep = estimate_trace(Word.of([b]), 10, 5, 23)
    grid = sum(float(b.eval_at(F(k, 10))) for k in range(1, 11)) / 10
    assert abs(rep.mean.real - grid) < 1e-12
    assert rep.stderr < 1e-12


def test_diagonal_index():
    assert diagonal_index(F(0), 100) == 1
    assert diagonal_index(F(1), 100) == 100
    assert diagonal_index(HALF, 100) == 50
    assert diagonal_index(F(1, 3), 9) == 3
    assert diagonal_index(F(103, 300), 100) == 35


def test_estimate_diagonal_exact_and_limit():
    rep = estimate_diagonal(XSTAR_X, 40, F(2, 7), 10, 3)
    assert abs(rep.mean - 1) < 1e-12 and rep.stderr < 1e-12
    rep2 = estimate_diagonal(word_power(X_XSTAR, 2), 100, F(1, 4), 800, 5,
                             analytic=2.0, allowance=0.25)
    assert rep2.verdict == "PASS"
    with pytest.raises(ContractError):
        estimate_diagonal(Word.of(["X", "X"]), 10, HALF, 5, 1)


def test_centered_decay_trends_down():
    rep = centered_decay("11", [25, 50, 100], 600, 7, batches=16)
    mags = [r.magnitude for r in rep.rows]
    assert mags[0] > mags[-1]
    assert rep.slope is not None and rep.slope <= -0.3


def test_centered_decay_single_block_and_empty():
    rep = centered_decay("1*", [40], 300, 9, batches=12)
    row = rep.rows[0]
    # the block minus its own limit: consistent with zero at this budget
    assert row.magnitude <= 4 * max(row.stderr, 1e-4)
    empty = centered_decay("", [25, 50], 10, 1)
    assert all(r.magnitude == 0.0 for r in empty.rows)


def test_growth_check():
    rep1 = growth_check(1, [25, 50, 100], 50, 3)
    assert all(abs(r.ratio - 1) < 1e-12 for r in rep1.rows)
    assert not rep1.grows
    rep2 = growth_check(2, [50, 100], 300, 5)
    assert not rep2.grows
    assert abs(rep2.rows[-1].ratio - 2.0) < 0.1
    with pytest.raises(ContractError):
        growth_check(7, [10], 10, 1)


@pytest.mark.slow
def test_growth_fourth_power_near_limit():
    rep = growth_check(4, [200], 300, 11)
    assert abs(rep.rows[0].ratio - float(44 / 3)) < 1.0


def test_report_serialization():
    rep = estimate_trace(XSTAR_X, 20, 5, 7, analytic=1.0)
    d = rep.to_json_dict()
    assert set(d) >= {"word", "N", "trials", "seed", "mean_re", "mean_im",
                      "stderr", "analytic", "verdict"}
    assert d["verdict"] == "PASS"
