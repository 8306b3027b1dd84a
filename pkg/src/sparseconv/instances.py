"""Seeded random instances for tests, self-checks and benchmarks."""

from __future__ import annotations

import numpy as np

from .model import SparseVector


def random_indices(rng: np.random.Generator, length: int, n: int) -> list[int]:
    """``n`` distinct indices drawn uniformly from ``[0, length)``."""
    if n > length:
        raise ValueError(f"cannot draw {n} distinct indices below {length}")
    if length < 1 << 63:
        return sorted(int(i) for i in rng.choice(length, size=n, replace=False))
    seen: set[int] = set()
    while len(seen) < n:
        seen.add(int.from_bytes(rng.bytes(8), "little") % length)
    return sorted(seen)


def random_values(rng: np.random.Generator, n: int, lo: int, hi: int) -> list[int]:
    """Uniform values in ``[lo, hi]`` with zero excluded."""
    out = []
    while len(out) < n:
        draw = rng.integers(lo, hi + 1, size=n - len(out))
        out.extend(int(v) for v in draw if v != 0)
    return out


def random_sparse_vector(
    rng: np.random.Generator, length: int, n: int, lo: int = -100, hi: int = 100
) -> SparseVector:
    idx = random_indices(rng, length, n)
    return SparseVector(length, tuple(zip(idx, random_values(rng, n, lo, hi))))


def random_instance(
    rng: np.random.Generator, N1: int, n1: int, n2: int, signed: bool = True, N2: int | None = None
) -> tuple[SparseVector, SparseVector]:
    lo = -100 if signed else 1
    N2 = N1 if N2 is None else N2
    return (
        random_sparse_vector(rng, N1, n1, lo, 100),
        random_sparse_vector(rng, N2, n2, lo, 100),
    )
