"""Exact combinatorics of set partitions of {1..n}.

Partitions are stored in canonical form: blocks sorted by least element,
elements ascending inside each block.  Enumeration follows restricted growth
strings in lexicographic order, so fixture order is stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .errors import ContractError, ResourceLimitError

DEFAULT_GUARD = 10


def bell_number(n: int) -> int:
    """Number of set partitions of an n-set (Bell triangle recurrence)."""
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[-1] if n >= 1 else 1


@dataclass(frozen=True)
class SetPartition:
    """A partition of {1..n} in canonical block order."""

    n: int
    blocks: tuple[tuple[int, ...], ...]

    @staticmethod
    def of(n: int, blocks: Iterable[Iterable[int]]) -> "SetPartition":
        if n < 1:
            raise ContractError("ground set must be nonempty")
        bs = [tuple(sorted(set(b))) for b in blocks]
        if any(not b for b in bs):
            raise ContractError("empty block")
        seen: set[int] = set()
        for b in bs:
            for j in b:
                if j in seen:
                    raise ContractError(f"element {j} appears in two blocks")
                seen.add(j)
        if seen != set(range(1, n + 1)):
            raise ContractError(f"blocks do not cover 1..{n}")
        bs.sort(key=lambda b: b[0])
        return SetPartition(n, tuple(bs))

    # -- basic queries -------------------------------------------------------

    def block_of(self, j: int) -> tuple[int, ...]:
        for b in self.blocks:
            if j in b:
                return b
        raise ContractError(f"{j} not in ground set")

    def same_block(self, i: int, j: int) -> bool:
        return self.block_of(i) is self.block_of(j)

    def num_blocks(self) -> int:
        return len(self.blocks)

    def is_discrete(self) -> bool:
        return len(self.blocks) == self.n

    def is_full(self) -> bool:
        return len(self.blocks) == 1

    # -- lattice and rearrangement ops ----------------------------------------

    def join(self, other: "SetPartition") -> "SetPartition":
        """Finest partition coarser than both (transitive closure of union)."""
        if self.n != other.n:
            raise ContractError("join requires equal ground sets")
        parent = list(range(self.n + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra

        for p in (self, other):
            for b in p.blocks:
                for j in b[1:]:
                    union(b[0], j)
        groups: dict[int, list[int]] = {}
        for j in range(1, self.n + 1):
            groups.setdefault(find(j), []).append(j)
        return SetPartition.of(self.n, groups.values())

    def rotate_left(self) -> "SetPartition":
        """Image under j -> j-1 (with 1 -> n)."""
        n = self.n
        shift = lambda j: n if j == 1 else j - 1
        return SetPartition.of(n, [[shift(j) for j in b] for b in self.blocks])

    def restrict(self, keep: Iterable[int]) -> "SetPartition":
        """Restriction relabeled through the order bijection keep -> 1..|keep|."""
        ks = sorted(set(keep))
        if not ks:
            raise ContractError("cannot restrict to the empty set")
        if ks[0] < 1 or ks[-1] > self.n:
            raise ContractError("restriction set not inside the ground set")
        relabel = {j: i + 1 for i, j in enumerate(ks)}
        blocks = []
        for b in self.blocks:
            nb = [relabel[j] for j in b if j in relabel]
            if nb:
                blocks.append(nb)
        return SetPartition.of(len(ks), blocks)

    # -- text format -----------------------------------------------------------

    def to_text(self) -> str:
        return "{" + "|".join(",".join(str(j) for j in b) for b in self.blocks) + "}"

    @staticmethod
    def from_text(text: str, n: Optional[int] = None) -> "SetPartition":
        s = text.strip()
        if not (s.startswith("{") and s.endswith("}")):
            raise ContractError(f"bad partition literal {text!r}")
        blocks = []
        for part in s[1:-1].split("|"):
            if not part.strip():
                raise ContractError(f"empty block in {text!r}")
            blocks.append([int(x) for x in part.split(",")])
        size = n if n is not None else max(max(b) for b in blocks)
        return SetPartition.of(size, blocks)

    def __repr__(self):
        return f"SetPartition({self.to_text()})"


def zero_partition(n: int) -> SetPartition:
    """All singletons."""
    return SetPartition.of(n, [[j] for j in range(1, n + 1)])


def one_partition(n: int) -> SetPartition:
    """A single block."""
    return SetPartition.of(n, [list(range(1, n + 1))])


PI4 = SetPartition.of(4, [[1, 3], [2, 4]])


def enumerate_partitions(n: int, guard: int = DEFAULT_GUARD) -> list[SetPartition]:
    """All partitions of {1..n}, restricted-growth-string lexicographic order."""
    if n < 1:
        raise ContractError("n must be positive")
    if n > guard:
        raise ResourceLimitError(
            f"enumerating partitions of an {n}-set would produce Bell({n}) = "
            f"{bell_number(n)} items; raise the guard to allow it")
    return list(_partitions_cached(n))


@lru_cache(maxsize=None)
def _partitions_cached(n: int) -> tuple[SetPartition, ...]:
    out = []
    rgs = [0] * n

    def rec(i: int, maxval: int):
        if i == n:
            blocks: dict[int, list[int]] = {}
            for j, v in enumerate(rgs):
                blocks.setdefault(v, []).append(j + 1)
            out.append(SetPartition.of(n, [blocks[k] for k in sorted(blocks)]))
            return
        for v in range(maxval + 2):
            rgs[i] = v
            rec(i + 1, max(maxval, v))

    rec(1, 0)
    return tuple(out)


@dataclass(frozen=True)
class Classification:
    noncrossing: bool
    purely_crossing: bool
    splits_interval: Optional[tuple[int, int]]  # (start, end) inclusive, or None


def _splitting_interval(p: SetPartition) -> Optional[tuple[int, int]]:
    """A proper subinterval {a..b} of {1..n} that is a union of blocks."""
    n = p.n
    block_index = {}
    for i, b in enumerate(p.blocks):
        for j in b:
            block_index[j] = i
    for a in range(1, n + 1):
        for b in range(a, n + 1):
            if b - a + 1 == n:
                continue
            members = set(range(a, b + 1))
            used = {block_index[j] for j in members}
            if all(set(p.blocks[i]) <= members for i in used):
                return (a, b)
    return None


def classify(p: SetPartition) -> Classification:
    """Crossing/purely-crossing flags plus a splitting-interval witness.

    A partition is crossing when a < b < c < d exist with a,c in one block
    and b,d in another.  It is purely crossing when no proper subinterval is
    a union of blocks and no block contains two cyclically adjacent points.
    """
    noncrossing = not _has_crossing(p)
    witness = _splitting_interval(p)
    neighbors = _has_cyclic_neighbors(p)
    purely = witness is None and not neighbors
    return Classification(noncrossing, purely, witness)


def _has_crossing(p: SetPartition) -> bool:
    block_index = {}
    for i, b in enumerate(p.blocks):
        for j in b:
            block_index[j] = i
    n = p.n
    for b_el in range(2, n):
        for d_el in range(b_el + 1, n + 1):
            if block_index[b_el] != block_index[d_el]:
                continue
            # look for a < b_el < c < d_el with a,c in one other block
            for c_el in range(b_el + 1, d_el):
                if block_index[c_el] == block_index[b_el]:
                    continue
                blk = p.blocks[block_index[c_el]]
                if any(a_el < b_el for a_el in blk):
                    return True
    return False


def _has_cyclic_neighbors(p: SetPartition) -> bool:
    for k in range(1, p.n):
        if p.same_block(k, k + 1):
            return True
    return p.same_block(1, p.n)  # covers n == 1 as well


def enumerate_purely_crossing(n: int, guard: int = DEFAULT_GUARD) -> list[SetPartition]:
    return [p for p in enumerate_partitions(n, guard) if classify(p).purely_crossing]


# ---------------------------------------------------------------------------
# star patterns
# ---------------------------------------------------------------------------

STAR = "*"
NOSTAR = "1"


def parse_star_pattern(text: str) -> tuple[str, ...]:
    eps = tuple(text.strip())
    if not eps or any(c not in (STAR, NOSTAR) for c in eps):
        raise ContractError(f"star pattern must be a nonempty string of 1/*: {text!r}")
    return eps


def max_alternating_interval_partition(eps: Sequence[str]) -> SetPartition:
    """Interval partition into maximal runs on which the pattern alternates."""
    eps = tuple(eps)
    if not eps:
        raise ContractError("empty star pattern")
    if any(c not in (STAR, NOSTAR) for c in eps):
        raise ContractError("star pattern entries must be '1' or '*'")
    n = len(eps)
    blocks = []
    start = 1
    for j in range(1, n):
        if eps[j] == eps[j - 1]:
            blocks.append(list(range(start, j + 1)))
            start = j + 1
    blocks.append(list(range(start, n + 1)))
    return SetPartition.of(n, blocks)


# ---------------------------------------------------------------------------
# index-set geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionGeometry:
    """The index sets controlling the integration region of a partition.

    j_set collects every block with its maximum removed.  i_sets[p] holds the
    j <= p whose block reaches beyond p; i_sets[n] is always empty.
    """

    pi: SetPartition
    j_set: frozenset[int]
    i_sets: dict[int, frozenset[int]]


def geometry(p: SetPartition) -> PartitionGeometry:
    j_set = set()
    for b in p.blocks:
        j_set.update(b[:-1])
    i_sets = {}
    block_max = {}
    for b in p.blocks:
        for j in b:
            block_max[j] = b[-1]
    for q in range(1, p.n + 1):
        i_sets[q] = frozenset(j for j in range(1, q + 1) if block_max[j] > q)
    return PartitionGeometry(p, frozenset(j_set), i_sets)
