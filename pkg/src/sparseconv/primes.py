"""Deterministic primality and prime enumeration."""

from __future__ import annotations

import math

import numpy as np

# First 12 primes as Miller-Rabin bases: no strong pseudoprime below 3.3e24.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Exact primality for every n < 3.3e24 (in particular all 64-bit n)."""
    if n < 2:
        return False
    for p in _WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    if n <= 2:
        return 2
    n |= 1
    while not is_prime(n):
        n += 2
    return n


def _small_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


def _sieve_segment(lo: int, hi: int) -> list[int]:
    """Primes in [lo, hi) by a segmented sieve."""
    lo = max(lo, 2)
    if hi <= lo:
        return []
    seg = np.ones(hi - lo, dtype=bool)
    for p in _small_primes(math.isqrt(hi - 1)).tolist():
        start = max(p * p, -(-lo // p) * p)
        seg[start - lo :: p] = False
    return (np.flatnonzero(seg) + lo).tolist()


def gen_primes(count: int, lower_bound: int, verify: bool = True) -> list[int]:
    """The first ``count`` primes >= ``lower_bound``, ascending.

    Candidates come from a segmented sieve; with ``verify`` each is rechecked
    by :func:`is_prime`.  Bounds beyond sieve range fall back to stepping
    through :func:`next_prime`.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    out: list[int] = []
    if lower_bound > 1 << 40:
        p = lower_bound - 1
        while len(out) < count:
            p = next_prime(p + 1)
            out.append(p)
        return out
    lo = max(lower_bound, 2)
    width = max(1024, int(count * max(math.log(lo + 2), 1.0) * 1.3))
    while len(out) < count:
        hi = lo + width
        out.extend(_sieve_segment(lo, hi))
        lo = hi
    out = out[:count]
    if verify:
        for p in out:
            if not is_prime(p):
                raise AssertionError(f"sieve produced composite {p}")
    return out
