import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sparseconv.errors import BoundError, ParseError
from sparseconv.model import (
    SparseVector,
    check_value_bound,
    parse_sparse_vector,
    serialize_sparse_vector,
)


def test_parse_basic():
    v = parse_sparse_vector("N 8\n0 2\n3 1")
    assert v == SparseVector(8, ((0, 2), (3, 1)))


def test_parse_empty_vector():
    v = parse_sparse_vector("N 4\n")
    assert v.length == 4 and v.nnz == 0


def test_parse_resorts_and_drops_zeros():
    assert parse_sparse_vector("N 8\n3 1\n0 2\n5 0") == SparseVector(8, ((0, 2), (3, 1)))


def test_parse_stream_and_comments():
    v = parse_sparse_vector(io.StringIO("# header\nN 3\n# x\n2 -7\n"))
    assert v.entries == ((2, -7),)


def test_serialize():
    assert serialize_sparse_vector(SparseVector(8, ((0, 2), (3, 1)))) == "N 8\n0 2\n3 1\n"
    assert serialize_sparse_vector(SparseVector(1, ())) == "N 1\n"


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("N\n", 1),
        ("N -3\n", 1),
        ("M 4\n", 1),
        ("N 4\n4 1\n", 2),
        ("N 4\n1 1\n1 2\n", 3),
        ("N 4\n1\n", 2),
        ("N 4\n1 x\n", 2),
        ("N 4\n0 1 2\n", 2),
        ("N 4\n-1 3\n", 2),
        ("N  4\n", 1),
    ],
)
def test_parse_errors_report_line(text, line):
    with pytest.raises(ParseError) as exc:
        parse_sparse_vector(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_duplicate_with_same_value_is_accepted():
    assert parse_sparse_vector("N 4\n1 2\n1 2\n").entries == ((1, 2),)


def test_invalid_construction():
    with pytest.raises(ValueError):
        SparseVector(4, ((2, 1), (1, 1)))
    with pytest.raises(ValueError):
        SparseVector(4, ((1, 0),))
    with pytest.raises(ValueError):
        SparseVector(2, ((2, 1),))


def test_value_bound():
    check_value_bound(SparseVector(2, ((0, 1 << 20),)))
    with pytest.raises(BoundError):
        check_value_bound(SparseVector(2, ((0, -(1 << 20) - 1),)))


@st.composite
def vectors(draw):
    length = draw(st.integers(1, 1 << 20))
    idx = draw(st.sets(st.integers(0, length - 1), max_size=30))
    vals = [draw(st.integers(-(10**12), 10**12).filter(bool)) for _ in idx]
    return SparseVector(length, tuple(zip(sorted(idx), vals)))


@given(vectors())
def test_round_trip(v):
    assert parse_sparse_vector(serialize_sparse_vector(v)) == v


@given(st.text(alphabet="N0123456789 -\n#x", max_size=40))
def test_fuzzed_input_is_valid_or_rejected(text):
    try:
        v = parse_sparse_vector(text)
    except ParseError:
        return
    # anything accepted must satisfy the invariants and survive a round trip
    assert all(0 <= i < v.length and x != 0 for i, x in v.entries)
    assert list(v.indices) == sorted(set(v.indices))
    assert parse_sparse_vector(serialize_sparse_vector(v)) == v
