import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparseconv.polyenc import (
    EncodingParams,
    aligned_variant_of_sum,
    encode_base,
    evaluate,
    horner,
    make_variants,
    variant_coefficient_tensor,
)

P13 = EncodingParams(13, 2)


def base_digits(i, r, width):
    # independent oracle: repeated division
    out = []
    for _ in range(width):
        out.append(i % r)
        i //= r
    return out


def test_example_95():
    base = encode_base(95, P13)
    assert list(base.coefficients) == [5, 3, 2]
    assert str(base) == "2X^2+3X+5"
    got = {str(v) for v in make_variants(base, P13)}
    assert got == {"2X^2+3X+5", "2X^2+2X+11", "X^2+9X+5", "X^2+8X+11"}


def test_small_encodings():
    assert encode_base(0, P13).coefficients == (0, 0, 0)
    assert encode_base(11, P13).coefficients == (5, 1, 0)


def test_zero_variants_decode_to_zero():
    vs = make_variants(encode_base(0, P13), P13)
    assert {v.coefficients for v in vs} == {(0, 0, 0), (6, 12, 0), (0, 6, 12), (6, 5, 12)}
    assert all(v.decode(P13.radix) == 0 for v in vs)


def test_evaluate_examples():
    p = encode_base(95, P13)
    assert [evaluate(p, a, P13) for a in (0, 1, 2)] == [5, 10, 6]


def test_aligned_examples():
    assert aligned_variant_of_sum(0, 0, P13) == 0
    assert aligned_variant_of_sum(5, 5, P13) == 0b01


def test_rejects_bad_params_and_indices():
    with pytest.raises(ValueError):
        EncodingParams(15, 1)
    with pytest.raises(ValueError):
        EncodingParams(13, 0)
    with pytest.raises(ValueError):
        encode_base(P13.capacity, P13)


@given(st.sampled_from([7, 13, 31, 101, 8191]), st.integers(1, 3), st.data())
def test_alignment_property(q, c, data):
    params = EncodingParams(q, c)
    i = data.draw(st.integers(0, params.capacity - 1))
    j = data.draw(st.integers(0, params.capacity - 1 - i))
    target = [(x + y) % q for x, y in zip(encode_base(i, params).coefficients,
                                          encode_base(j, params).coefficients)]
    matches = [v.variant_mask for v in make_variants(encode_base(i + j, params), params)
               if list(v.coefficients) == target]
    assert matches == [aligned_variant_of_sum(i, j, params)]


@given(st.sampled_from([7, 13, 101]), st.integers(1, 3), st.data())
def test_variants_decode_and_distinct(q, c, data):
    params = EncodingParams(q, c)
    i = data.draw(st.integers(0, params.capacity - 1))
    vs = make_variants(encode_base(i, params), params)
    assert len({v.coefficients for v in vs}) == 1 << c
    assert all(v.decode(params.radix) == i for v in vs)
    assert list(vs[0].coefficients) == base_digits(i, params.radix, c + 1)


def test_tensor_matches_scalar_path():
    rng = np.random.default_rng(1)
    params = EncodingParams(101, 3)
    idx = sorted(set(int(x) for x in rng.integers(0, params.capacity, 50)))
    tens = variant_coefficient_tensor(idx, params)
    for row, i in enumerate(idx):
        for v in make_variants(encode_base(i, params), params):
            assert tuple(tens[row, v.variant_mask]) == v.coefficients
    a = np.arange(params.q)
    vals = horner(tens[:3, :, None, :], a, params.q)
    for row in range(3):
        for m in range(params.n_variants):
            assert all(vals[row, m, x] == evaluate(tuple(tens[row, m]), x, params) for x in range(0, 101, 7))


def test_collision_bound_exhaustive_small():
    params = EncodingParams(7, 1)
    polys = list(itertools.product(range(7), repeat=2))
    for p1, p2 in itertools.combinations(polys[:20], 2):
        agree = sum(evaluate(p1, a, params) == evaluate(p2, a, params) for a in range(7))
        assert agree <= 1
