"""Finite-size simulation of random Vandermonde matrices.

A sample stores only the N uniform angles; the matrix entry (i, j) is the
j-th power of the i-th unit-circle point, scaled by 1/sqrt(N).  Powers are
taken by angle multiplication modulo one with a single complex exponential
at the end, so unit modulus is never lost to drift.  Each trial draws from
a counter-based stream keyed by (seed, trial): results are reproducible
under any execution schedule, and the serial reduction used here is
bit-identical run to run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError
from .funcspace import PiecewisePoly
from .moments import MomentEngine, Word
from .partitions import max_alternating_interval_partition, parse_star_pattern


@dataclass(frozen=True)
class VandermondeSample:
    """One draw: N angles in [0,1); the matrix is built on demand."""

    N: int
    seed: int
    trial: int
    angles: np.ndarray

    def matrix(self) -> np.ndarray:
        j = np.arange(1, self.N + 1)
        phases = (self.angles[:, None] * j[None, :]) % 1.0
        return np.exp(2j * np.pi * phases) / math.sqrt(self.N)


SOFT_SIZE_CAP = 512  # dense complex matrices; memory and runtime budget


def sample(N: int, seed: int, trial: int = 0) -> VandermondeSample:
    if N < 1:
        raise ContractError("matrix size must be positive")
    if N > SOFT_SIZE_CAP:
        import logging
        logging.getLogger(__name__).warning(
            "N=%d exceeds the soft cap %d; expect heavy memory and runtime",
            N, SOFT_SIZE_CAP)
    rng = np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1),
                                                     trial & (2**64 - 1)]))
    return VandermondeSample(N, seed, trial, rng.random(N))


@dataclass(frozen=True)
class EstimatorReport:
    word: str
    N: int
    trials: int
    seed: int
    mean: complex
    stderr: float
    analytic: Optional[float] = None
    verdict: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = {
            "word": self.word,
            "N": self.N,
            "trials": self.trials,
            "seed": self.seed,
            "mean_re": self.mean.real,
            "mean_im": self.mean.imag,
            "stderr": self.stderr,
        }
        if self.analytic is not None:
            d["analytic"] = self.analytic
        if self.verdict is not None:
            d["verdict"] = self.verdict
        d.update(self.extra)
        return d


def _reduce(values: list[complex]) -> tuple[complex, float]:
    arr = np.asarray(values)
    mean = complex(arr.mean())
    if len(arr) < 2:
        raise ContractError("at least two trials are required")
    dev = np.abs(arr - mean)
    stderr = float(np.sqrt((dev ** 2).sum() / (len(arr) - 1)) /
                   math.sqrt(len(arr)))
    return mean, stderr


def _verdict(mean: complex, stderr: float, analytic: float,
             allowance: float) -> str:
    return ("PASS" if abs(mean - analytic) <= max(3 * stderr, allowance)
            else "FAIL")


def _diag_vector(b: PiecewisePoly, N: int) -> np.ndarray:
    return np.array([float(b.eval_at(Fraction(k, N))) for k in range(1, N + 1)])


def _word_ops(word: Word, N: int):
    """Letters precompiled: ('mat', is_star) or ('diag', vector)."""
    ops = []
    for letter in word.letters:
        if letter == "X":
            ops.append(("mat", False))
        elif letter == "X*":
            ops.append(("mat", True))
        else:
            ops.append(("diag", _diag_vector(letter, N)))
    return ops


def _product(ops, X: np.ndarray) -> np.ndarray:
    Xh = X.conj().T
    M = None
    pending = None  # accumulated diagonal waiting for the next matrix
    for kind, payload in ops:
        if kind == "diag":
            pending = payload if pending is None else pending * payload
            continue
        A = Xh if payload else X
        if pending is not None:
            A = pending[:, None] * A
            pending = None
        M = A if M is None else M @ A
    if M is None:  # pure coefficient word
        N = X.shape[0]
        d = pending if pending is not None else np.ones(N)
        return np.diag(d)
    if pending is not None:
        M = M * pending[None, :]
    return M


def estimate_trace(word: Word, N: int, trials: int, seed: int,
                   analytic: Optional[float] = None,
                   allowance: float = 0.0) -> EstimatorReport:
    """Monte Carlo mean of the normalized trace of the matrix word."""
    from .parsing import render_word

    if word.is_zero:
        raise ContractError("degenerate word")
    if trials < 2:
        raise ContractError("at least two trials are required")
    ops = _word_ops(word, N)
    values = []
    for k in range(trials):
        X = sample(N, seed, k).matrix()
        values.append(complex(np.trace(_product(ops, X))) / N)
    mean, stderr = _reduce(values)
    verdict = None if analytic is None else _verdict(mean, stderr, analytic,
                                                     allowance)
    return EstimatorReport(render_word(word), N, trials, seed, mean, stderr,
                           analytic, verdict)


@dataclass(frozen=True)
class DiagonalProbe:
    """A position t in [0,1] and the matrix index tracking it at size N."""

    t: Fraction
    N: int
    h: int

    @staticmethod
    def of(t: Fraction, N: int) -> "DiagonalProbe":
        t = Fraction(t)
        if t < 0 or t > 1:
            raise ContractError("t outside [0,1]")
        return DiagonalProbe(t, N, max(1, math.ceil(t * N)))


def diagonal_index(t: Fraction, N: int) -> int:
    """Least h in 1..N with t <= h/N."""
    return DiagonalProbe.of(t, N).h


def estimate_diagonal(word: Word, N: int, t: Fraction, trials: int, seed: int,
                      analytic: Optional[float] = None,
                      allowance: float = 0.0) -> EstimatorReport:
    """Monte Carlo mean of one diagonal entry of the matrix word.

    The entry index tracks t through the least h with t <= h/N; the product
    is applied to a basis vector, so a trial costs only matrix-vector work.
    """
    from .parsing import render_word

    if word.is_zero:
        raise ContractError("degenerate word")
    if not word.is_alternating():
        raise ContractError("diagonal probes expect an alternating word")
    if trials < 2:
        raise ContractError("at least two trials are required")
    probe = DiagonalProbe.of(t, N)
    h = probe.h
    ops = _word_ops(word, N)
    values = []
    for k in range(trials):
        X = sample(N, seed, k).matrix()
        Xh = X.conj().T
        v = np.zeros(N, dtype=complex)
        v[h - 1] = 1.0
        for kind, payload in reversed(ops):
            if kind == "diag":
                v = payload * v
            else:
                v = (Xh if payload else X) @ v
        values.append(complex(v[h - 1]))
    mean, stderr = _reduce(values)
    verdict = None if analytic is None else _verdict(mean, stderr, analytic,
                                                     allowance)
    return EstimatorReport(render_word(word), N, trials, seed, mean, stderr,
                           analytic, verdict,
                           extra={"t": str(Fraction(t)), "h": h})


# ---------------------------------------------------------------------------
# centered products and growth experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayRow:
    N: int
    magnitude: float
    stderr: float


@dataclass(frozen=True)
class DecayReport:
    eps: str
    rows: tuple[DecayRow, ...]
    slope: Optional[float]
    trials: int
    batches: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "eps": self.eps,
            "rows": [{"N": r.N, "magnitude": r.magnitude, "stderr": r.stderr}
                     for r in self.rows],
            "slope": self.slope,
            "trials": self.trials,
            "batches": self.batches,
            "seed": self.seed,
        }


def centered_decay(eps: str, N_list: Sequence[int], trials: int, seed: int,
                   batches: int = 32) -> DecayReport:
    """Size of the centered block product across matrix sizes.

    The star pattern splits into maximal alternating runs; each run's
    expectation is replaced by its analytic limit rendered as a diagonal
    matrix, and the trace of the product of centered runs is averaged.
    Since the limit of that trace is zero, the magnitude is estimated as
    the mean absolute value of batch means (a plain mean would only see
    noise cancellation), and the log-log slope against N is fitted.
    """
    if not eps.strip():
        # empty block list: the centered product has no factors, exactly 0
        rows = tuple(DecayRow(N, 0.0, 0.0) for N in N_list)
        return DecayReport("", rows, None, trials, batches, seed)
    pattern = parse_star_pattern(eps)
    sigma = max_alternating_interval_partition(pattern)
    blocks = [[("X" if pattern[j - 1] == "1" else "X*") for j in blk]
              for blk in sigma.blocks]
    engine = MomentEngine()
    limits = [engine.expectation(Word.of(b)) for b in blocks]
    rows = []
    for N in N_list:
        centers = [_diag_vector(lim, N) for lim in limits]
        values = []
        for k in range(trials):
            X = sample(N, seed, k).matrix()
            Xh = X.conj().T
            M = None
            for b, c in zip(blocks, centers):
                B = None
                for letter in b:
                    A = Xh if letter == "X*" else X
                    B = A if B is None else B @ A
                B = B - np.diag(c.astype(complex))
                M = B if M is None else M @ B
            values.append(complex(np.trace(M)) / N)
        nb = min(batches, max(1, trials // 2))
        batch_means = [np.mean(values[i::nb]) for i in range(nb)]
        mags = np.abs(batch_means)
        mag = float(np.mean(mags))
        se = float(np.std(mags, ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
        rows.append(DecayRow(N, mag, se))
    slope = None
    if len(rows) >= 2 and all(r.magnitude > 0 for r in rows):
        xs = np.log([r.N for r in rows])
        ys = np.log([r.magnitude for r in rows])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return DecayReport(eps, tuple(rows), slope, trials, batches, seed)


@dataclass(frozen=True)
class GrowthRow:
    N: int
    ratio: float
    stderr: float


@dataclass(frozen=True)
class GrowthReport:
    p: int
    rows: tuple[GrowthRow, ...]
    grows: bool
    trials: int
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "rows": [{"N": r.N, "ratio": r.ratio, "stderr": r.stderr}
                     for r in self.rows],
            "grows": self.grows,
            "trials": self.trials,
            "seed": self.seed,
        }


def growth_check(p: int, N_list: Sequence[int], trials: int,
                 seed: int) -> GrowthReport:
    """Unnormalized trace of the p-th power, divided by N, across sizes.

    The ratio should approach the limit moment from below or level off; the
    report flags any increase that exceeds the combined noise.
    """
    if p < 1 or p > 6:
        raise ContractError("power must be between 1 and 6")
    word = Word.of(["X*", "X"] * p)
    rows = []
    for N in N_list:
        rep = estimate_trace(word, N, trials, seed)
        rows.append(GrowthRow(N, float(rep.mean.real), rep.stderr))
    grows = any(b.ratio - a.ratio > 3 * (a.stderr + b.stderr)
                for a, b in zip(rows, rows[1:]))
    return GrowthReport(p, tuple(rows), grows, trials, seed)
