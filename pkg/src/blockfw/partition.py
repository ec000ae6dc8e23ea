"""Contiguous block partitions and the action of the pair index matrices.

Blocks and pairs are indexed from 0.  The index matrices ``E_kl`` are never
formed; ``extract`` and ``embed`` apply them and their transposes.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from .errors import DimensionMismatch, InvalidPartition


@dataclass(frozen=True)
class PairIndex:
    k: int
    l: int
    range_k: range
    range_l: range

    @property
    def indices(self):
        """Global row indices covered by the pair, in increasing order."""
        return np.r_[self.range_k.start:self.range_k.stop, self.range_l.start:self.range_l.stop]

    @property
    def dim(self):
        return len(self.range_k) + len(self.range_l)


@dataclass(frozen=True)
class Partition:
    blocks: tuple
    offsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if len(blocks) < 2:
            raise InvalidPartition(f"a partition needs at least two blocks, got {blocks}")
        if any(b < 1 for b in blocks):
            raise InvalidPartition(f"block sizes must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "offsets", tuple(np.concatenate([[0], np.cumsum(blocks)]).tolist()))

    @property
    def n(self):
        return self.offsets[-1]

    @property
    def p(self):
        return len(self.blocks)

    @property
    def n_pairs(self):
        return comb(self.p, 2)

    def block_range(self, k):
        return range(self.offsets[k], self.offsets[k + 1])

    def pair(self, k, l):
        if not 0 <= k < l < self.p:
            raise IndexError(f"invalid pair ({k}, {l}) for {self.p} blocks")
        return PairIndex(k, l, self.block_range(k), self.block_range(l))

    def pairs(self):
        """Lazily iterate all pairs in lexicographic order."""
        return (self.pair(k, l) for k, l in combinations(range(self.p), 2))

    @cached_property
    def is_trivial(self):
        return all(b == 1 for b in self.blocks)

    def label(self):
        if self.is_trivial:
            return f"1x{self.n}"
        return ",".join(map(str, self.blocks))

    def __len__(self):
        return self.p

    def __str__(self):
        return "{" + ",".join(map(str, self.blocks)) + "}"


class PairList:
    """Sized, lazily generated view of ``pair_indices``."""

    def __init__(self, part):
        self.part = part

    def __len__(self):
        return self.part.n_pairs

    def __iter__(self):
        return self.part.pairs()

    def __getitem__(self, i):
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        # unrank the lexicographic pair index
        p = self.part.p
        k = 0
        while i >= p - 1 - k:
            i -= p - 1 - k
            k += 1
        return self.part.pair(k, k + 1 + i)


def pair_indices(part):
    return PairList(part)


def make_uniform(n, block):
    """Blocks of size ``block``; a remainder ``n % block`` forms one final smaller block."""
    if block < 1:
        raise InvalidPartition("block size must be positive")
    blocks = [block] * (n // block)
    if n % block:
        blocks.append(n % block)
    if len(blocks) < 2:
        raise InvalidPartition(f"uniform:{block} yields fewer than two blocks for n={n}")
    return Partition(tuple(blocks))


def trivial(n):
    return make_uniform(n, 1)


def parse_partition(spec, n):
    """Parse ``"uniform:K"``, ``"sdd"``/``"trivial"``, or ``"2,2,2,2,2"``."""
    spec = spec.strip()
    if spec.lower() in ("sdd", "trivial"):
        return trivial(n)
    if spec.lower().startswith("uniform:"):
        try:
            block = int(spec.split(":", 1)[1])
        except ValueError:
            raise InvalidPartition(f"bad partition spec {spec!r}") from None
        return make_uniform(n, block)
    try:
        blocks = tuple(int(tok) for tok in spec.replace(" ", "").split(",") if tok)
    except ValueError:
        raise InvalidPartition(f"bad partition spec {spec!r}") from None
    part = Partition(blocks)
    if part.n != n:
        raise InvalidPartition(f"partition {spec!r} sums to {part.n}, problem has n={n}")
    return part


def is_finer(a, b):
    """True iff every block of ``b`` is a union of consecutive blocks of ``a``."""
    if a.n != b.n:
        raise DimensionMismatch(f"partitions of {a.n} and {b.n}")
    return set(b.offsets) <= set(a.offsets)


def extract(a, pair):
    """Principal submatrix of ``a`` on the rows of ``pair`` (also works on stacks)."""
    idx = pair.indices
    a = np.asarray(a)
    if a.shape[-1] <= idx[-1] or a.shape[-2] != a.shape[-1]:
        raise DimensionMismatch(f"matrix of shape {a.shape} too small for pair ({pair.k}, {pair.l})")
    return a[..., idx[:, None], idx]


def embed(b, pair, n):
    """Scatter ``b`` into an n x n zero matrix on the rows of ``pair``."""
    b = np.asarray(b, dtype=float)
    idx = pair.indices
    if b.shape != (len(idx), len(idx)) or n <= idx[-1]:
        raise DimensionMismatch(f"block of shape {b.shape} does not fit pair ({pair.k}, {pair.l}) in n={n}")
    out = np.zeros((n, n))
    out[idx[:, None], idx] = b
    return out
