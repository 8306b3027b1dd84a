"""Number theoretic transforms over several NTT-friendly primes below 2**31.

Every butterfly product stays under 2**62 in int64.  Results computed modulo
several primes are rebuilt with Garner's mixed-radix CRT into the symmetric
range, exact whenever the true magnitude is below half the prime product.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BoundError

# p = k * 2**m + 1; all support transforms up to length 2**23
NTT_PRIMES = (
    2013265921,  # 15 * 2**27 + 1
    1811939329,  # 27 * 2**26 + 1
    469762049,  # 7 * 2**26 + 1
    754974721,  # 45 * 2**24 + 1
    998244353,  # 119 * 2**23 + 1
    167772161,  # 5 * 2**25 + 1
)
MAX_NTT_LOG2 = 23
DIRECT_THRESHOLD = 64


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    fs = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in fs):
            return g
    raise ValueError(f"no primitive root mod {p}")


@lru_cache(maxsize=64)
def _plan(p: int, log_n: int, invert: bool) -> tuple[np.ndarray, list[np.ndarray]]:
    n = 1 << log_n
    rev = np.zeros(n, dtype=np.int64)
    for b in range(log_n):
        rev |= ((np.arange(n) >> b) & 1) << (log_n - 1 - b)
    g = primitive_root(p)
    twiddles = []
    length = 2
    while length <= n:
        w = pow(g, (p - 1) // length, p)
        if invert:
            w = pow(w, p - 2, p)
        half = length // 2
        tw = np.empty(half, dtype=np.int64)
        acc = 1
        for j in range(half):
            tw[j] = acc
            acc = acc * w % p
        twiddles.append(tw)
        length <<= 1
    return rev, twiddles


def ntt(a: np.ndarray, p: int, invert: bool = False) -> np.ndarray:
    """Iterative radix-2 transform of a power-of-two length int64 array mod ``p``."""
    n = len(a)
    log_n = n.bit_length() - 1
    if n != 1 << log_n:
        raise ValueError("length must be a power of two")
    if log_n > MAX_NTT_LOG2:
        raise BoundError(f"transform length 2**{log_n} exceeds 2**{MAX_NTT_LOG2}")
    rev, twiddles = _plan(p, log_n, invert)
    x = a[rev] % p
    length = 2
    for tw in twiddles:
        half = length // 2
        blk = x.reshape(-1, length)
        u = blk[:, :half]
        v = blk[:, half:] * tw % p
        x = np.concatenate(((u + v) % p, (u - v) % p), axis=1).ravel()
        length <<= 1
    if invert:
        x = x * pow(n, p - 2, p) % p
    return x


def reduce_mod(a: np.ndarray, p: int) -> np.ndarray:
    if a.dtype == object:
        return np.array([int(x) % p for x in a], dtype=np.int64)
    return np.asarray(a, dtype=np.int64) % p


def crt_symmetric(residues: list[np.ndarray], primes: Sequence[int]) -> np.ndarray:
    """Symmetric-range CRT reconstruction; returns int64 if it fits, else object."""
    k = len(primes)
    digits = [residues[0]]
    for i in range(1, k):
        pi = primes[i]
        acc = np.zeros_like(residues[i])
        radix = 1
        for j in range(i):
            acc = (acc + digits[j] * (radix % pi)) % pi
            radix *= primes[j]
        inv = pow(radix % pi, pi - 2, pi)
        digits.append((residues[i] - acc) % pi * inv % pi)
    M = 1
    for p in primes:
        M *= p
    if M < 1 << 62:
        x = np.zeros_like(digits[0])
        radix = 1
        for j in range(k):
            x = x + digits[j] * radix
            radix *= primes[j]
        return np.where(x > M // 2, x - M, x)
    x = np.zeros(len(digits[0]), dtype=object)
    x[:] = 0
    radix = 1
    for j in range(k):
        x = x + digits[j].astype(object) * radix
        radix *= primes[j]
    x = np.where(x > M // 2, x - M, x)
    if len(x) == 0 or (-(1 << 62) < int(x.min()) and int(x.max()) < 1 << 62):
        return x.astype(np.int64)
    return x


def primes_for_bound(bound: int) -> tuple[int, ...]:
    """Fewest primes whose product exceeds ``2 * bound``."""
    M = 1
    for k, p in enumerate(NTT_PRIMES, start=1):
        M *= p
        if M > 2 * bound:
            return NTT_PRIMES[:k]
    raise BoundError(f"correlation magnitude bound 2**{bound.bit_length()} exceeds the CRT range")
