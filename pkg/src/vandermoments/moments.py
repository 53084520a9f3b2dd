"""The C[0,1]-valued moment engine.

Words are sequences of matrix letters X, X* and coefficient functions.  The
conditional expectation of an even alternating word is a sum over all set
partitions of half the length, each term assembled from the two
partition-indexed maps; odd alternating words vanish.  Arbitrary words
reduce to alternating ones through the centered-product identity over the
maximal alternating interval partition of the star pattern: expanding the
vanishing product expresses the expectation through strictly shorter words,
which recursion plus memoization makes tractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Optional, Sequence, Union

from .cache import LambdaCache, default_cache
from .errors import ContractError, ResourceLimitError, ShapeMismatchError
from .funcspace import ONE, PiecewisePoly, as_piecewise, const
from .partitions import (bell_number, enumerate_partitions,
                         max_alternating_interval_partition)
from .transforms import gamma, lambda_function, tau_gamma, tau_lambda

F0 = Fraction(0)
F1 = Fraction(1)

Letter = Union[str, PiecewisePoly]  # "X" | "X*" | coefficient function

DEFAULT_PARTITION_GUARD = 8   # alternating half-length; Bell(8) = 4140 terms
DEFAULT_LETTER_GUARD = 16     # total matrix letters entering the recursion


@dataclass(frozen=True)
class Word:
    """A normalized word: no adjacent coefficients, no unit coefficients.

    A zero coefficient anywhere collapses the whole word to the zero flag;
    the canonical zero word lives at Word.ZERO (assigned below the class).
    """

    letters: tuple[Letter, ...]
    is_zero: bool = False

    ZERO: ClassVar["Word"]

    @staticmethod
    def of(items: Sequence) -> "Word":
        out: list[Letter] = []
        for item in items:
            if isinstance(item, str):
                if item not in ("X", "X*"):
                    raise ContractError(f"bad letter {item!r}")
                out.append(item)
                continue
            f = as_piecewise(item)
            if f.is_zero():
                return Word.ZERO
            if out and not isinstance(out[-1], str):
                f = out.pop() * f
                if f.is_zero():
                    return Word.ZERO
            if f == ONE:
                continue
            out.append(f)
        return Word(tuple(out))

    # -- structure ----------------------------------------------------------

    def matrix_count(self) -> int:
        return sum(1 for x in self.letters if isinstance(x, str))

    def star_pattern(self) -> str:
        return "".join("1" if x == "X" else "*"
                       for x in self.letters if isinstance(x, str))

    def is_alternating(self) -> bool:
        eps = self.star_pattern()
        return all(a != b for a, b in zip(eps, eps[1:]))

    def adjoint(self) -> "Word":
        if self.is_zero:
            return Word.ZERO
        flip = {"X": "X*", "X*": "X"}
        items = [flip[x] if isinstance(x, str) else x
                 for x in reversed(self.letters)]
        return Word.of(items)

    def key(self) -> str:
        if self.is_zero:
            return "<zero>"
        parts = []
        for x in self.letters:
            parts.append(x if isinstance(x, str) else f"[{x.canonical_key()}]")
        return " ".join(parts) if parts else "<empty>"

    def __repr__(self):
        from .parsing import render_word
        return "Word(0)" if self.is_zero else f"Word({render_word(self)})"


Word.ZERO = Word((), True)


def word_power(word: Word, k: int) -> Word:
    if k < 0:
        raise ContractError("negative word powers are not defined")
    return Word.of(list(word.letters) * k)


def concat(*words: Word) -> Word:
    items: list[Letter] = []
    for w in words:
        if w.is_zero:
            return Word.ZERO
        items.extend(w.letters)
    return Word.of(items)


XSTAR_X = Word.of(["X*", "X"])
X_XSTAR = Word.of(["X", "X*"])


@dataclass
class MomentStats:
    partitions_summed: int = 0
    recursion_depth: int = 0
    memo_hits: int = 0


@dataclass(frozen=True)
class MomentResult:
    value: PiecewisePoly
    derivation_stats: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# display decomposition of alternating even words
# ---------------------------------------------------------------------------

def _display_coefficients(word: Word):
    """(b_1..b_2n, trailing): b_j is the coefficient before the j-th matrix
    letter (default 1); a coefficient after the last letter factors out."""
    bs = []
    pending = ONE
    for x in word.letters:
        if isinstance(x, str):
            bs.append(pending)
            pending = ONE
        else:
            pending = x
    return bs, pending


def alternating_even_moment(word: Word, guard: int = DEFAULT_PARTITION_GUARD,
                            override: bool = False,
                            cache: Optional[LambdaCache] = None,
                            stats: Optional[MomentStats] = None
                            ) -> PiecewisePoly:
    """Expectation of a strictly alternating word of even length.

    Star-leading words sum b1 * map(b3, b5, ...) * trace-weight over all
    partitions of the half-length; X-leading words sum the gamma map times
    the traced companion value.  The two displays are implemented
    independently and cross-checked in the tests.
    """
    if word.is_zero:
        return const(0)
    eps = word.star_pattern()
    if not word.is_alternating() or len(eps) % 2 != 0 or not eps:
        raise ShapeMismatchError(
            "alternating_even_moment requires a nonempty even-length "
            "strictly alternating word; use expectation() for general words")
    n = len(eps) // 2
    if n > guard and not override:
        raise ResourceLimitError(
            f"alternating moment of half-length {n} sums Bell({n}) = "
            f"{bell_number(n)} partition terms; pass override to allow")
    bs, trailing = _display_coefficients(word)
    cache = cache if cache is not None else default_cache()
    total = const(0)
    partitions = enumerate_partitions(n, guard=max(n, 10))
    if stats is not None:
        stats.partitions_summed += len(partitions)
    if eps[0] == "*":
        odd = bs[2::2]   # b3, b5, ..., b_{2n-1}
        even = bs[1::2]  # b2, b4, ..., b_{2n}
        for pi in partitions:
            weight = tau_gamma(pi, even)
            if weight == 0:
                continue
            total = total + (bs[0] * lambda_function(pi, odd, cache)).scale(weight)
    else:
        odd = bs[0::2]   # b1, b3, ..., b_{2n-1}
        inner = bs[1::2]  # b2, b4, ..., b_{2n}
        for pi in partitions:
            weight = tau_lambda(pi, inner[:-1], inner[-1], cache)
            if weight == 0:
                continue
            total = total + gamma(pi, odd).scale(weight)
    return total * trailing


# ---------------------------------------------------------------------------
# the general expectation
# ---------------------------------------------------------------------------

class MomentEngine:
    """Memoizing evaluator for expectations of arbitrary words."""

    def __init__(self, partition_guard: int = DEFAULT_PARTITION_GUARD,
                 letter_guard: int = DEFAULT_LETTER_GUARD,
                 override: bool = False,
                 cache: Optional[LambdaCache] = None):
        self.partition_guard = partition_guard
        self.letter_guard = letter_guard
        self.override = override
        self.cache = cache if cache is not None else default_cache()
        self._memo: dict[str, PiecewisePoly] = {}
        self.stats = MomentStats()

    def expectation(self, word: Word) -> PiecewisePoly:
        if not isinstance(word, Word):
            raise ContractError("expectation expects a Word")
        if not word.is_zero and word.matrix_count() > self.letter_guard \
                and not self.override:
            raise ResourceLimitError(
                f"word has {word.matrix_count()} matrix letters "
                f"(guard {self.letter_guard}); pass override to allow")
        return self._expect(word, 0)

    def _expect(self, word: Word, depth: int) -> PiecewisePoly:
        self.stats.recursion_depth = max(self.stats.recursion_depth, depth)
        if word.is_zero:
            return const(0)
        key = word.key()
        hit = self._memo.get(key)
        if hit is not None:
            self.stats.memo_hits += 1
            return hit
        value = self._compute(word, depth)
        self._memo[key] = value
        return value

    def _compute(self, word: Word, depth: int) -> PiecewisePoly:
        letters = word.letters
        if not letters:
            return ONE
        # pure coefficient
        if len(letters) == 1 and not isinstance(letters[0], str):
            return letters[0]
        # bimodularity: outer coefficients factor out
        lead = trail = None
        core = list(letters)
        if not isinstance(core[0], str):
            lead = core.pop(0)
        if core and not isinstance(core[-1], str):
            trail = core.pop()
        if lead is not None or trail is not None:
            inner = self._expect(Word(tuple(core)), depth)
            if lead is not None:
                inner = lead * inner
            if trail is not None:
                inner = inner * trail
            return inner
        coreword = Word(tuple(core))
        eps = coreword.star_pattern()
        n = len(eps)
        if coreword.is_alternating():
            if n % 2 == 1:
                return const(0)
            return alternating_even_moment(
                coreword, guard=self.partition_guard, override=self.override,
                cache=self.cache, stats=self.stats)
        # centered-product expansion over the maximal alternating runs
        sigma = max_alternating_interval_partition(eps)
        blocks = [self._block_letters(core, blk) for blk in sigma.blocks]
        c_values = [self._expect(Word.of(b), depth + 1) for b in blocks]
        nblocks = len(blocks)
        total = const(0)
        for mask in range(2 ** nblocks - 1):  # all proper subsets of blocks
            items: list = []
            for i in range(nblocks):
                if mask >> i & 1:
                    items.extend(blocks[i])
                else:
                    items.append(c_values[i])
            kept = bin(mask).count("1")
            sign = -1 if (nblocks - kept) % 2 == 0 else 1
            term = self._expect(Word.of(items), depth + 1)
            total = total + term.scale(sign)
        return total

    @staticmethod
    def _block_letters(core: list, block: tuple[int, ...]) -> list:
        """Letters of one alternating run, with its interleaved coefficients.

        Matrix letter j carries the coefficient that precedes it; the
        coefficient after the run's last letter belongs to the next run.
        """
        out: list = []
        pos = 0
        pending: list = []
        for x in core:
            if isinstance(x, str):
                pos += 1
                if pos in block:
                    out.extend(pending)
                    out.append(x)
                pending = []
            else:
                pending.append(x)
        return out


def expectation(word: Word, partition_guard: int = DEFAULT_PARTITION_GUARD,
                letter_guard: int = DEFAULT_LETTER_GUARD,
                override: bool = False,
                cache: Optional[LambdaCache] = None,
                engine: Optional[MomentEngine] = None) -> MomentResult:
    """Expectation of an arbitrary word as an element of C[0,1]."""
    eng = engine or MomentEngine(partition_guard, letter_guard, override, cache)
    value = eng.expectation(word)
    return MomentResult(value, {
        "partitions_summed": eng.stats.partitions_summed,
        "recursion_depth": eng.stats.recursion_depth,
        "memo_hits": eng.stats.memo_hits,
    })


def trace_moment(word: Word, **kwargs) -> Fraction:
    """Trace of the expectation, exact."""
    return expectation(word, **kwargs).value.tau()


def diagonal_limit(word: Word, t: Fraction, **kwargs) -> Fraction:
    """Limit diagonal-entry profile of an alternating word, evaluated at t."""
    if not word.is_zero and not word.is_alternating():
        raise ShapeMismatchError("diagonal_limit requires an alternating word")
    return expectation(word, **kwargs).value.eval_at(Fraction(t))


def scalar_check(word: Word, **kwargs) -> bool:
    """Whether an X-leading sandwich word has a constant expectation.

    The word must look like X b1 X* X b2 X* ... X bn X*: it starts with X,
    ends with X*, strictly alternates, and carries no outer coefficients.
    """
    if word.is_zero:
        raise ShapeMismatchError("zero word has no sandwich shape")
    letters = word.letters
    if not letters or letters[0] != "X" or letters[-1] != "X*":
        raise ShapeMismatchError("sandwich words start with X and end with X*")
    if not word.is_alternating() or word.matrix_count() % 2 != 0:
        raise ShapeMismatchError("sandwich words strictly alternate X, X*")
    return expectation(word, **kwargs).value.is_constant()


def centered_product_trace(pairs: Sequence[tuple[Word, Fraction]],
                           **kwargs) -> Fraction:
    """Trace of prod_i (word_i - c_i), expanded through linearity.

    Shared subwords across the 2^k expansion terms hit the same memoized
    engine, so the cost stays polynomial in practice.
    """
    eng = kwargs.pop("engine", None) or MomentEngine(**kwargs)
    total = F0
    k = len(pairs)
    for mask in range(2 ** k):
        scalar = F1
        words = []
        for i, (w, c) in enumerate(pairs):
            if mask >> i & 1:
                words.append(w)
            else:
                scalar *= -Fraction(c)
        if scalar == 0:
            continue
        total += scalar * eng.expectation(concat(*words)).tau()
    return total
