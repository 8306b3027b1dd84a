"""Sparse integer vectors and their line-oriented text format.

A file looks like::

    # optional comments
    N 8
    0 2
    3 1

The first non-comment line declares the length, every following line is an
``<index> <value>`` pair separated by a single space.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .errors import BoundError, ParseError

DEFAULT_VALUE_BOUND = 1 << 20
MAX_INDEX = (1 << 64) - 1


@dataclass(frozen=True)
class SparseVector:
    """Immutable sparse vector: declared length plus sorted non-zero entries."""

    length: int
    entries: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        entries = tuple((int(i), int(v)) for i, v in self.entries)
        object.__setattr__(self, "entries", entries)
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        prev = -1
        for i, v in entries:
            if i <= prev:
                raise ValueError("indices must be strictly ascending")
            if i >= self.length:
                raise ValueError(f"index {i} >= length {self.length}")
            if v == 0:
                raise ValueError(f"zero value stored at index {i}")
            prev = i

    @classmethod
    def from_sorted_arrays(cls, length: int, indices, values) -> "SparseVector":
        """Fast constructor for engine output already sorted and zero-free.

        Validation is vectorized rather than skipped.
        """
        idx = np.asarray(indices)
        val = np.asarray(values)
        if len(idx):
            if idx.dtype == object or val.dtype == object:
                return cls(length, tuple(zip(idx.tolist(), val.tolist())))
            if (idx[0] < 0 or idx[-1] >= length or (np.diff(idx) <= 0).any()
                    or (val == 0).any()):
                raise ValueError("entries must be strictly ascending, in range and non-zero")
        obj = object.__new__(cls)
        object.__setattr__(obj, "length", length)
        object.__setattr__(obj, "entries", tuple(zip(idx.tolist(), val.tolist())))
        return obj

    @classmethod
    def from_pairs(cls, length: int, pairs: Iterable[tuple[int, int]]) -> "SparseVector":
        """Build from unordered pairs; zeros are dropped, repeated indices must agree."""
        seen: dict[int, int] = {}
        for i, v in pairs:
            i, v = int(i), int(v)
            if i < 0 or i > MAX_INDEX:
                raise ValueError(f"index {i} outside the unsigned 64-bit range")
            if i >= length:
                raise ValueError(f"index {i} >= length {length}")
            if i in seen and seen[i] != v:
                raise ValueError(f"duplicate index {i} with conflicting values")
            seen[i] = v
        return cls(length, tuple(sorted((i, v) for i, v in seen.items() if v != 0)))

    @classmethod
    def from_dict(cls, length: int, d: dict[int, int]) -> "SparseVector":
        return cls.from_pairs(length, d.items())

    @property
    def nnz(self) -> int:
        return len(self.entries)

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.entries]

    @property
    def values(self) -> list[int]:
        return [v for _, v in self.entries]

    def to_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def max_abs_value(self) -> int:
        return max((abs(v) for _, v in self.entries), default=0)


def parse_sparse_vector(text: str | TextIO) -> SparseVector:
    if not isinstance(text, str):
        text = text.read()
    length = None
    pairs: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if line.startswith("#"):
            continue
        parts = line.split(" ")
        if length is None:
            if len(parts) != 2 or parts[0] != "N" or not _is_uint(parts[1]):
                raise ParseError(f"expected 'N <length>', got {line!r}", lineno)
            length = int(parts[1])
            continue
        if len(parts) != 2 or not _is_uint(parts[0]) or not _is_int(parts[1]):
            raise ParseError(f"expected '<index> <value>', got {line!r}", lineno)
        idx, val = int(parts[0]), int(parts[1])
        if idx > MAX_INDEX:
            raise ParseError(f"index {idx} exceeds 64 bits", lineno)
        if idx >= length:
            raise ParseError(f"index {idx} >= declared length {length}", lineno)
        if idx in pairs and pairs[idx] != val:
            raise ParseError(f"duplicate index {idx} with conflicting values", lineno)
        pairs[idx] = val
    if length is None:
        raise ParseError("missing 'N <length>' header", 1)
    return SparseVector(length, tuple(sorted((i, v) for i, v in pairs.items() if v != 0)))


def serialize_sparse_vector(v: SparseVector) -> str:
    buf = io.StringIO()
    buf.write(f"N {v.length}\n")
    for i, val in v.entries:
        buf.write(f"{i} {val}\n")
    return buf.getvalue()


def check_value_bound(v: SparseVector, bound: int = DEFAULT_VALUE_BOUND) -> None:
    m = v.max_abs_value()
    if m > bound:
        raise BoundError(f"|value| {m} exceeds bound {bound}")


def _is_uint(s: str) -> bool:
    return s.isascii() and s.isdigit()


def _is_int(s: str) -> bool:
    return _is_uint(s[1:]) if s[:1] == "-" else _is_uint(s)
