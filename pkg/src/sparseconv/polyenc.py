"""Index-to-polynomial encoding over F_q.

An index is written in base ``r = (q - 1) / 2`` and its digits become the
coefficients of a polynomial (little-endian: coefficient of X^0 first).  Each
base polynomial is expanded into ``2**c`` carry variants: bit ``k`` of the
variant mask adds ``r`` to coefficient ``k`` and borrows one from coefficient
``k + 1``.  Every variant still decodes to the same integer, and for any
``i, j`` the coefficient-wise sum ``base(i) + base(j)`` equals exactly one
variant of ``i + j``.  That is what makes the reduced vectors alignment
preserving.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .primes import is_prime


@dataclass(frozen=True)
class EncodingParams:
    q: int
    c: int

    def __post_init__(self):
        if self.q < 5 or self.q % 2 == 0 or not is_prime(self.q):
            raise ValueError(f"q must be an odd prime >= 5, got {self.q}")
        if self.c < 1:
            raise ValueError(f"c must be >= 1, got {self.c}")

    @property
    def radix(self) -> int:
        return (self.q - 1) // 2

    @property
    def capacity(self) -> int:
        """One past the largest encodable index."""
        return self.radix ** (self.c + 1)

    @property
    def n_variants(self) -> int:
        return 1 << self.c

    @cached_property
    def variant_offsets(self) -> np.ndarray:
        """Integer coefficient deltas of every mask relative to the base, shape (2**c, c+1)."""
        off = np.zeros((self.n_variants, self.c + 1), dtype=np.int64)
        for mask in range(self.n_variants):
            for k in range(self.c):
                if mask >> k & 1:
                    off[mask, k] += self.radix
                    off[mask, k + 1] -= 1
        return off


@dataclass(frozen=True)
class IndexPolynomial:
    coefficients: tuple[int, ...]
    origin_index: int
    variant_mask: int
    q: int

    def integer_coefficients(self) -> tuple[int, ...]:
        # variant coefficients live in [-1, q-2]; only a borrow wraps to q-1
        return tuple(-1 if a == self.q - 1 else a for a in self.coefficients)

    def decode(self, radix: int) -> int:
        return sum(a * radix**k for k, a in enumerate(self.integer_coefficients()))

    def __str__(self) -> str:
        terms = []
        for k in range(len(self.coefficients) - 1, -1, -1):
            a = self.coefficients[k]
            if a == 0:
                continue
            coef = "" if a == 1 and k > 0 else str(a)
            terms.append(coef + ("X" if k == 1 else f"X^{k}" if k > 1 else ""))
        return "+".join(terms) or "0"


def digits(index: int, params: EncodingParams) -> list[int]:
    if index < 0 or index >= params.capacity:
        raise ValueError(
            f"index {index} not encodable with q={params.q}, c={params.c} "
            f"(capacity {params.capacity})"
        )
    out = []
    for _ in range(params.c + 1):
        index, d = divmod(index, params.radix)
        out.append(d)
    return out


def encode_base(index: int, params: EncodingParams) -> IndexPolynomial:
    return IndexPolynomial(tuple(digits(index, params)), index, 0, params.q)


def make_variant(base: IndexPolynomial, mask: int, params: EncodingParams) -> IndexPolynomial:
    coeffs = list(base.coefficients)
    for k in range(params.c):
        if mask >> k & 1:
            coeffs[k] += params.radix
            coeffs[k + 1] -= 1
    return IndexPolynomial(
        tuple(a % params.q for a in coeffs), base.origin_index, mask, params.q
    )


def make_variants(base: IndexPolynomial, params: EncodingParams) -> list[IndexPolynomial]:
    if base.variant_mask != 0:
        raise ValueError("make_variants expects a base polynomial")
    return [make_variant(base, m, params) for m in range(params.n_variants)]


def evaluate(p: IndexPolynomial | tuple[int, ...], a: int, params: EncodingParams) -> int:
    coeffs = p.coefficients if isinstance(p, IndexPolynomial) else p
    acc = 0
    for coef in reversed(coeffs):
        acc = (acc * a + coef) % params.q
    return acc


def aligned_variant_of_sum(i: int, j: int, params: EncodingParams) -> int:
    """Mask of the variant of ``i + j`` that equals ``base(i) + base(j)``.

    The set bits are the digit positions where base-r addition of ``i`` and
    ``j`` produces a carry.
    """
    di, dj = digits(i, params), digits(j, params)
    digits(i + j, params)  # range check
    mask, carry = 0, 0
    for k in range(params.c + 1):
        carry = (di[k] + dj[k] + carry) >= params.radix
        if carry:
            if k == params.c:
                raise ValueError("sum overflows the top digit")
            mask |= 1 << k
    return mask


# ---------------------------------------------------------------------------
# vectorized helpers used by the scheme and the engine


def digit_matrix(indices, params: EncodingParams) -> np.ndarray:
    """Base-r digits of many indices, shape (n, c+1), int64."""
    idx = [int(i) for i in indices]
    if idx and (min(idx) < 0 or max(idx) >= params.capacity):
        bad = max(idx) if max(idx) >= params.capacity else min(idx)
        raise ValueError(f"index {bad} not encodable with q={params.q}, c={params.c}")
    if not idx or max(idx) < (1 << 63):
        rem = np.asarray(idx, dtype=np.uint64)
        out = np.empty((len(idx), params.c + 1), dtype=np.int64)
        r = np.uint64(params.radix)
        for k in range(params.c + 1):
            out[:, k] = (rem % r).astype(np.int64)
            rem //= r
        return out
    return np.array([digits(i, params) for i in idx], dtype=np.int64).reshape(
        len(idx), params.c + 1
    )


def variant_coefficient_tensor(indices, params: EncodingParams) -> np.ndarray:
    """Residue coefficients of every variant of every index, shape (n, 2**c, c+1)."""
    base = digit_matrix(indices, params)
    return (base[:, None, :] + params.variant_offsets[None, :, :]) % params.q


def horner(coeffs: np.ndarray, a, q: int) -> np.ndarray:
    """Evaluate coefficient rows (last axis = degree) at ``a`` modulo ``q``.

    ``a`` may be a scalar or an array broadcastable against ``coeffs[..., 0]``.
    All intermediates stay below q**2 < 2**63.
    """
    a = np.asarray(a, dtype=np.int64)
    shape = np.broadcast_shapes(coeffs.shape[:-1], a.shape)
    acc = np.broadcast_to(coeffs[..., -1] % q, shape)
    for k in range(coeffs.shape[-1] - 2, -1, -1):
        acc = acc * a
        acc += coeffs[..., k]
        acc %= q
    return np.array(acc, dtype=np.int64)
