"""Index-space compaction for very long vectors.

When indices are too large for the polynomial encoding, every index is
replaced by its residue modulo a prime ``p`` that divides none of the pairwise
index differences, so the map stays injective on the support.  ``p`` is found
among ``n**3 + 1`` primes of magnitude ``n**4`` by

1. multiplying the pool into a product tree (root ``Q``),
2. multiplying all pairwise differences (``D``),
3. ``P = Q / gcd(Q, D)``: the product of the primes that separate everything,
4. walking down the tree, keeping whichever half still shares a factor with ``P``.

Big-integer products and GCDs go through gmpy2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import gmpy2

from .errors import CompactionError
from .model import SparseVector
from .primes import gen_primes, is_prime


class ProductTree:
    """Balanced binary multiplication tree; ``levels[0]`` are the leaves.

    Node ``(level, j)`` covers leaves ``[j * 2**level, (j + 1) * 2**level)``.
    An odd node at the end of a level is carried up unchanged.
    """

    def __init__(self, values: Sequence[int]):
        if not values:
            raise ValueError("product tree needs at least one value")
        level = [gmpy2.mpz(v) for v in values]
        if any(v <= 0 for v in level):
            raise ValueError("product tree values must be positive")
        self.levels = [level]
        while len(level) > 1:
            nxt = [level[k] * level[k + 1] for k in range(0, len(level) - 1, 2)]
            if len(level) % 2:
                nxt.append(level[-1])
            self.levels.append(nxt)
            level = nxt

    @property
    def root(self) -> int:
        return int(self.levels[-1][0])

    @property
    def height(self) -> int:
        return len(self.levels) - 1

    def node(self, level: int, j: int):
        return self.levels[level][j]

    def children(self, level: int, j: int) -> list[tuple[int, int]]:
        below = self.levels[level - 1]
        return [(level - 1, k) for k in (2 * j, 2 * j + 1) if k < len(below)]

    def internal_nodes(self) -> list[int]:
        return [int(v) for lvl in self.levels[1:] for v in lvl]


def product_tree(values: Sequence[int]) -> ProductTree:
    return ProductTree(values)


def pairwise_diff_product(indices) -> int:
    """Product of ``i - j`` over all unordered pairs of distinct indices."""
    idx = sorted(set(int(i) for i in indices))
    if len(idx) < 2:
        raise ValueError("need at least two distinct indices")
    diffs = [b - a for a, b in combinations(idx, 2)]
    return ProductTree(diffs).root


def pool_size(n1: int) -> int:
    return n1**3 + 1


@dataclass
class PrimePool:
    primes: list[int]
    tree: ProductTree = field(repr=False)

    @classmethod
    def from_primes(cls, primes: Sequence[int]) -> "PrimePool":
        primes = [int(p) for p in primes]
        if len(set(primes)) != len(primes):
            raise ValueError("pool primes must be distinct")
        for p in primes:
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
        return cls(primes, ProductTree(primes))

    @property
    def Q(self) -> int:
        return self.tree.root


@lru_cache(maxsize=8)
def _cached_pool(count: int, lower: int) -> PrimePool:
    primes = gen_primes(count, lower)
    return PrimePool(primes, ProductTree(primes))


def build_pool(n1: int, lower_bound: int | None = None) -> PrimePool:
    """``n1**3 + 1`` consecutive primes starting at ``n1**4`` (cached by size)."""
    n1 = max(n1, 2)
    lower = n1**4 if lower_bound is None else lower_bound
    return _cached_pool(pool_size(n1), lower)


@dataclass
class PrimeSearch:
    p: int
    rounds: int
    pool_size: int
    q_bits: int
    d_bits: int
    p_bits: int


def find_good_prime(indices, pool: PrimePool) -> PrimeSearch:
    idx = sorted(set(int(i) for i in indices))
    D = gmpy2.mpz(pairwise_diff_product(idx)) if len(idx) >= 2 else gmpy2.mpz(1)
    Q = pool.tree.node(pool.tree.height, 0)
    P = Q // gmpy2.gcd(Q, D)
    if P == 1:
        raise CompactionError(
            f"every one of the {len(pool.primes)} pool primes divides an index difference"
        )
    level, j = pool.tree.height, 0
    rounds = 0
    while level > 0:
        kids = pool.tree.children(level, j)
        if len(kids) == 1:
            level, j = kids[0]
            continue
        rounds += 1
        left, right = kids
        if gmpy2.gcd(pool.tree.node(*left), P) > 1:
            level, j = left
        else:
            level, j = right
    p = int(pool.tree.node(0, j))
    return PrimeSearch(
        p=p,
        rounds=rounds,
        pool_size=len(pool.primes),
        q_bits=int(gmpy2.bit_length(Q)),
        d_bits=int(gmpy2.bit_length(D)),
        p_bits=int(gmpy2.bit_length(P)),
    )


@dataclass
class CompactionResult:
    p: int
    index_map: dict[int, int]
    original_length: int
    search: PrimeSearch | None = None

    def report_lines(self) -> list[str]:
        lines = [f"p: {self.p}", f"original_length: {self.original_length}"]
        if self.search is not None:
            s = self.search
            lines += [
                f"pool_size: {s.pool_size}",
                f"rounds: {s.rounds}",
                f"max_rounds: {math.ceil(math.log2(s.pool_size)) if s.pool_size > 1 else 0}",
                f"Q_bits: {s.q_bits}",
                f"D_bits: {s.d_bits}",
                f"P_bits: {s.p_bits}",
            ]
        return lines


def compact(
    v1: SparseVector, v2: SparseVector, pool: PrimePool | None = None
) -> tuple[SparseVector, SparseVector, CompactionResult]:
    union = sorted(set(v1.indices) | set(v2.indices))
    if pool is None:
        pool = build_pool(max(v1.nnz, v2.nnz, 2))
    search = find_good_prime(union, pool)
    p = search.p
    index_map = {i: i % p for i in union}
    if len(set(index_map.values())) != len(index_map):
        raise CompactionError(f"prime {p} does not separate the support")
    c1 = SparseVector.from_pairs(p, ((index_map[i], v) for i, v in v1.entries))
    c2 = SparseVector.from_pairs(p, ((index_map[i], v) for i, v in v2.entries))
    return c1, c2, CompactionResult(p, index_map, v1.length, search)
