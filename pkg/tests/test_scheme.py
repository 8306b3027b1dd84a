import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparseconv.errors import SchemeError
from sparseconv.instances import random_indices
from sparseconv.model import SparseVector
from sparseconv.polyenc import EncodingParams, encode_base, evaluate, make_variants
from sparseconv.scheme import (
    ReductionConfig,
    SingletonTable,
    build_scheme,
    build_singleton_table,
    candidate_assignments,
    choose_parameters,
    reduce_v1,
    reduce_v2,
    reduce_vector,
    required_rows,
    select_assignments,
    sibling_colliding_values,
)

FORCED = ReductionConfig(force_q=13, force_c=2)


def table_from(dense):
    dense = np.asarray(dense, dtype=bool)
    return SingletonTable(np.arange(dense.shape[0]), np.packbits(dense, axis=1), dense.shape[1])


def sibling_oracle(params):
    # brute force: a is bad if two variants of some index meet; offsets do not depend on the index
    vs = make_variants(encode_base(0, params), params)
    bad = set()
    for a in range(params.q):
        spots = [evaluate(v, a, params) for v in vs]
        if len(set(spots)) < len(spots):
            bad.add(a)
    return bad


def test_choose_parameters_regressions():
    assert choose_parameters(95, 4) == EncodingParams(37, 1)
    assert choose_parameters(0, 2) == EncodingParams(17, 1)


def test_choose_parameters_postconditions():
    n1 = 256
    p = choose_parameters(n1**2 - 1, n1)
    assert p.capacity > n1**2 - 1
    assert p.q >= 2 * required_rows(p.c, n1)
    assert len(candidate_assignments(p, None)) >= required_rows(p.c, n1)


def test_choose_parameters_gives_up():
    with pytest.raises(SchemeError):
        choose_parameters(2**64 - 1, 2)


@pytest.mark.parametrize("q, c", [(13, 2), (37, 1), (101, 3), (8209, 1)])
def test_sibling_values_match_bruteforce(q, c):
    params = EncodingParams(q, c)
    got = set(int(a) for a in sibling_colliding_values(params))
    assert got == sibling_oracle(params)
    assert len(got) <= c * math.comb(1 << c, 2)


def test_c1_has_one_bad_value():
    for q in (17, 37, 101):
        assert len(sibling_colliding_values(EncodingParams(q, 1))) == 1


def test_table_trivial_cases():
    p = EncodingParams(13, 1)
    one = np.array([[3, 4]])
    t = build_singleton_table(one, np.arange(13), p)
    assert t.dense().all()
    two = np.array([[3, 4], [3, 4]])
    assert not build_singleton_table(two, np.arange(13), p).dense().any()


def test_table_matches_direct_count():
    rng = np.random.default_rng(5)
    p = EncodingParams(31, 2)
    coeffs = rng.integers(0, 31, (40, 3))
    cand = np.arange(31)
    t = build_singleton_table(coeffs, cand, p, chunk_cells=64)
    for a in cand:
        pos = [evaluate(tuple(row), int(a), p) for row in coeffs]
        want = [pos.count(x) == 1 for x in pos]
        assert list(t.dense()[a]) == want


def test_select_all_true():
    picked, cov = select_assignments(table_from(np.ones((4, 9))))
    assert picked == [0] and (cov == 0).all()


def test_select_forced_two():
    picked, cov = select_assignments(table_from([[1, 0], [0, 1]]))
    assert picked == [0, 1] and list(cov) == [0, 1]


def test_select_raises_on_thin_table():
    with pytest.raises(SchemeError):
        select_assignments(table_from([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_example_scheme_dump():
    s = build_scheme(SparseVector(96, ((95, 7),)), FORCED)
    assert s.n_polys == 4 and len(s.assignments) == 1
    assert {str(p) for p in s.v1_polynomials()} == {
        "2X^2+3X+5", "2X^2+2X+11", "X^2+9X+5", "X^2+8X+11"}
    dump = "\n".join(s.dump_lines())
    for text in ("2X^2+3X+5", "2X^2+2X+11", "X^2+9X+5", "X^2+8X+11"):
        assert text in dump


def test_single_nonzero_one_assignment():
    s = build_scheme(SparseVector(1000, ((777, -3),)))
    assert len(s.assignments) == 1


def test_empty_v1_rejected():
    with pytest.raises(SchemeError, match="no non-zeros"):
        build_scheme(SparseVector(5, ()))


def test_forced_params_must_come_together():
    with pytest.raises((ValueError, SchemeError)):
        build_scheme(SparseVector(96, ((95, 1),)), ReductionConfig(force_q=13))


@pytest.mark.parametrize("n1", [16, 64, 256])
def test_scheme_bound_and_cover(n1):
    rng = np.random.default_rng(n1)
    N = n1**2
    v1 = SparseVector(N, tuple((i, 1) for i in random_indices(rng, N, n1)))
    s = build_scheme(v1)
    assert len(s.assignments) <= math.ceil(math.log2(s.params.n_variants * n1))
    for t, a in enumerate(s.assignments):
        b = reduce_v1(v1, s, t)
        assert b.count_vec.sum() == s.n_polys
    # every polynomial is a singleton at its covering assignment
    bundles = [reduce_v1(v1, s, t) for t in range(len(s.assignments))]
    for pos in range(n1):
        for m in range(s.params.n_variants):
            a = s.covered_by(pos, m)
            t = s.assignments.index(a)
            where = evaluate(tuple(int(x) for x in s.coefficients[pos, m]), a, s.params)
            assert bundles[t].count_vec[where] == 1


def test_reduce_examples():
    p = EncodingParams(13, 2)
    b = reduce_vector([95], [7], p, 0, True)
    assert b.value_vec[5] == 14 and b.value_vec[11] == 14 and b.value_vec.sum() == 28
    assert b.count_vec[5] == 2 and b.count_vec[11] == 2
    b = reduce_vector([11], [4], p, 1, False)
    assert (b.value_vec[6], b.count_vec[6], b.idx_vec[6], b.idx2_vec[6]) == (4, 1, 11, 121)
    assert b.value_vec.sum() == 4


def test_reduce_empty_and_zero_index():
    s = build_scheme(SparseVector(96, ((95, 7),)), FORCED)
    b = reduce_v2(SparseVector(96, ()), s, 0)
    assert not any(x.any() for x in (b.value_vec, b.count_vec, b.idx_vec, b.idx2_vec))
    b = reduce_v2(SparseVector(96, ((0, 3),)), s, 0)
    assert b.value_vec[0] == 3 and b.value_vec.sum() == 3
    b = reduce_v1(SparseVector(96, ((11, 1),)), s, 0)
    assert b.count_vec.sum() == 4


@given(st.lists(st.integers(0, 5000), min_size=1, max_size=40, unique=True))
def test_scheme_property(idx):
    v1 = SparseVector(5001, tuple((i, 1) for i in sorted(idx)))
    s = build_scheme(v1)
    assert len(s.assignments) <= max(1, math.ceil(math.log2(s.n_polys))) + 1
    assert (s.coverage >= 0).all()
    bad = set(int(a) for a in sibling_colliding_values(s.params))
    assert not bad & set(s.assignments)
