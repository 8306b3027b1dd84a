"""Seeded invariant checks shared by ``sparseconv selftest`` and the test suite.

Each check takes a generator and a size and raises ``AssertionError`` naming
the violated property.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .compaction import build_pool, find_good_prime, pool_size
from .engine import brute_convolution, fast_sparse_convolution
from .instances import random_indices, random_instance
from .model import SparseVector
from .polyenc import (
    EncodingParams,
    aligned_variant_of_sum,
    encode_base,
    evaluate,
    make_variants,
)
from .primes import next_prime
from .polyenc import variant_coefficient_tensor
from .scheme import (
    build_scheme,
    build_singleton_table,
    candidate_assignments,
    choose_parameters,
    reduce_v1,
    required_rows,
)


def params_for(rng: np.random.Generator, c: int, size: int) -> EncodingParams:
    return EncodingParams(next_prime(int(rng.integers(5, max(7, 4 * size)))), c)


def check_alignment(rng: np.random.Generator, size: int, pairs: int = 200) -> None:
    for c in (1, 2, 3):
        params = params_for(rng, c, size)
        cap = params.capacity
        for _ in range(pairs):
            i = int(rng.integers(0, cap))
            j = int(rng.integers(0, cap - i))
            target = tuple(a + b for a, b in zip(encode_base(i, params).coefficients,
                                                 encode_base(j, params).coefficients))
            hits = [v.variant_mask for v in make_variants(encode_base(i + j, params), params)
                    if _int_coeffs(v, params) == target]
            assert len(hits) == 1, f"alignment: {i}+{j} matched {len(hits)} variants (q={params.q}, c={c})"
            assert hits[0] == aligned_variant_of_sum(i, j, params), f"alignment: carry mask for {i}+{j}"


def _int_coeffs(v, params: EncodingParams) -> tuple[int, ...]:
    base = encode_base(v.origin_index, params).coefficients
    coeffs = list(base)
    for k in range(params.c):
        if v.variant_mask >> k & 1:
            coeffs[k] += params.radix
            coeffs[k + 1] -= 1
    return tuple(coeffs)


def check_collisions(rng: np.random.Generator, size: int, pairs: int = 50) -> None:
    for c in (1, 2, 3):
        params = params_for(rng, c, size)
        q = params.q
        a = np.arange(q, dtype=np.int64)
        for _ in range(pairs):
            p1 = rng.integers(0, q, c + 1)
            p2 = rng.integers(0, q, c + 1)
            if (p1 == p2).all():
                continue
            diff = (p1 - p2) % q
            vals = np.zeros(q, dtype=np.int64)
            for coef in diff[::-1]:
                vals = (vals * a + coef) % q
            roots = int(np.count_nonzero(vals == 0))
            assert roots <= c, f"collision bound: {roots} > c={c} common points (q={q})"


def check_variants(rng: np.random.Generator, size: int) -> None:
    params = params_for(rng, 2, size)
    idx = random_indices(rng, params.capacity, min(size, params.capacity))
    seen = set()
    for i in idx:
        for v in make_variants(encode_base(i, params), params):
            assert v.decode(params.radix) == i, f"decode invariance failed for {i}"
            seen.add(v.coefficients)
    assert len(seen) == len(idx) * params.n_variants, "variant polynomials not unique"


def check_table(rng: np.random.Generator, size: int) -> None:
    n1 = max(2, size)
    indices = random_indices(rng, max(n1 * 4, n1**2), n1)
    params = choose_parameters(max(indices), n1)
    cand = candidate_assignments(params, required_rows(params.c, n1))
    coeffs = variant_coefficient_tensor(indices, params).reshape(-1, params.c + 1)
    table = build_singleton_table(coeffs, cand, params)
    false_cells = table.column_false_counts()
    limit = params.c * params.n_variants * n1
    assert false_cells.max() <= limit, f"column false cells {false_cells.max()} > {limit}"
    assert 2 * false_cells.max() <= table.n_rows, "a column is less than half true"


def check_scheme(rng: np.random.Generator, size: int) -> None:
    n1 = max(1, size)
    v1 = SparseVector(max(n1 * 4, n1**2), tuple((i, 1) for i in random_indices(rng, max(n1 * 4, n1**2), n1)))
    scheme = build_scheme(v1)
    bound = math.ceil(math.log2(scheme.n_polys))
    assert len(scheme.assignments) <= bound, f"{len(scheme.assignments)} assignments > bound {bound}"
    q = scheme.params.q
    bundles = [reduce_v1(v1, scheme, t) for t in range(len(scheme.assignments))]
    for pos, idx in enumerate(scheme.v1_indices):
        for mask in range(scheme.params.n_variants):
            t = int(scheme.coverage[pos * scheme.params.n_variants + mask])
            a = scheme.assignments[t]
            where = int(evaluate(tuple(int(x) for x in scheme.coefficients[pos, mask]), a, scheme.params))
            assert bundles[t].count_vec[where] == 1, f"poly ({idx},{mask}) not a singleton under {a}"
    for a in scheme.assignments:
        for pos in range(len(scheme.v1_indices)):
            spots = {evaluate(tuple(int(x) for x in scheme.coefficients[pos, m]), a, scheme.params)
                     for m in range(scheme.params.n_variants)}
            assert len(spots) == scheme.params.n_variants, f"sibling collision at a={a}"
    assert q >= 2 * required_rows(scheme.params.c, max(n1, 2))


def check_oracle(rng: np.random.Generator, size: int) -> None:
    n1 = max(1, size)
    n2 = max(1, min(64, size // 2 + 1))
    N1 = min(max(n1**3, 2 * n1), 1 << 22)
    signed = bool(rng.integers(0, 2))
    v1, v2 = random_instance(rng, N1, n1, n2, signed=signed)
    fast, report = fast_sparse_convolution(v1, v2, build_scheme(v1))
    assert fast == brute_convolution(v1, v2), "fast convolution differs from the oracle"
    assert report.total_pairs_accounted == report.total_pairs, "pair accounting incomplete"


def check_compaction(rng: np.random.Generator, size: int) -> None:
    n1 = max(2, min(size, 32))
    idx = random_indices(rng, 1 << 64, n1)
    pool = build_pool(n1)
    assert len(pool.primes) == pool_size(n1)
    found = find_good_prime(idx, pool)
    assert all((b - a) % found.p for k, a in enumerate(idx) for b in idx[k + 1 :]), (
        f"p={found.p} divides an index difference"
    )
    assert found.rounds <= math.ceil(math.log2(len(pool.primes)))


SUITES: dict[str, Callable[[np.random.Generator, int], None]] = {
    "alignment": check_alignment,
    "collision_bound": check_collisions,
    "variant_uniqueness": check_variants,
    "singleton_table": check_table,
    "assignment_cover": check_scheme,
    "oracle_equivalence": check_oracle,
    "compaction_soundness": check_compaction,
}
