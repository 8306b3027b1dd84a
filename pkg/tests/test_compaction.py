import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparseconv.compaction import (
    PrimePool,
    build_pool,
    compact,
    find_good_prime,
    pairwise_diff_product,
    pool_size,
    product_tree,
)
from sparseconv.errors import CompactionError
from sparseconv.instances import random_indices
from sparseconv.model import SparseVector


def test_product_tree_examples():
    assert product_tree([6]).root == 6
    t = product_tree([2, 3, 5, 7])
    assert t.root == 210
    assert {int(x) for x in t.internal_nodes()} >= {6, 35}


@given(st.lists(st.integers(1, 2**80), min_size=1, max_size=50))
def test_product_tree_root(values):
    acc = 1
    for v in values:
        acc *= v
    assert product_tree(values).root == acc


@pytest.mark.parametrize("idx, d", [([0, 5], 5), ([0, 5, 12], 420), ([0, 1, 2, 3], 12)])
def test_pairwise_diff_product(idx, d):
    assert pairwise_diff_product(idx) == d


def test_pairwise_diff_product_needs_two():
    with pytest.raises(ValueError):
        pairwise_diff_product([4])


def test_walkthrough():
    pool = PrimePool.from_primes([2, 3, 11])
    assert pool.Q == 66
    res = find_good_prime([0, 5, 12], pool)
    assert res.p == 11 and res.rounds <= 2
    assert math.gcd(66, 420) == 6 and 66 // 6 == 11


def test_two_indices_take_first_retained():
    pool = PrimePool.from_primes([5, 7, 11, 13])
    assert find_good_prime([0, 1], pool).p == 5


def test_all_primes_divide():
    with pytest.raises(CompactionError):
        find_good_prime([0, 6], PrimePool.from_primes([2, 3]))


def test_compact_example():
    v1 = SparseVector(13, ((0, 1), (5, 2)))
    v2 = SparseVector(13, ((12, 3),))
    c1, c2, res = compact(v1, v2, PrimePool.from_primes([2, 3, 11]))
    assert res.p == 11
    assert c1.entries == ((0, 1), (5, 2)) and c2.entries == ((1, 3),)
    assert c1.length == 11 and res.original_length == 13


def test_compact_single():
    v1 = SparseVector(100, ((42, 1),))
    c1, c2, res = compact(v1, SparseVector(100, ()))
    assert c2.nnz == 0 and c1.entries == ((42 % res.p, 1),)


def test_pool_sizes():
    pool = build_pool(8)
    assert len(pool.primes) == pool_size(8) == 513
    assert min(pool.primes) >= 8**4


@pytest.mark.parametrize("seed", range(10))
def test_random_64bit_sound(seed):
    rng = np.random.default_rng(seed)
    n1 = int(rng.integers(2, 33))
    idx = random_indices(rng, 1 << 64, n1)
    pool = build_pool(n1)
    res = find_good_prime(idx, pool)
    assert all((b - a) % res.p for a, b in itertools.combinations(idx, 2))
    assert res.rounds <= math.ceil(math.log2(len(pool.primes)))
