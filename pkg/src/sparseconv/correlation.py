"""Exact integer cyclic correlation ``C[s] = sum_m A[(s + m) % q] * B[m]``.

Three interchangeable routes, all exact:

* ``direct``: the O(q**2) double loop, used for tiny q and as a test oracle.
* ``ntt``: multi-prime number theoretic transform with CRT reconstruction;
  the prime count comes from the Cauchy-Schwarz bound ``|C[s]| <= |A|_2 |B|_2``.
* ``float``: numpy's real FFT on limbs of the inputs.  Limbs are narrow enough
  that every limb-pair correlation is below a rounding guard, so ``rint``
  recovers it exactly; limbs are then recombined in integer arithmetic.

The float guard uses the standard radix-2 FFT forward error bound (Higham,
*Accuracy and Stability of Numerical Algorithms*, thm. 24.2): a cyclic
convolution of length ``n`` computed by two forward transforms, a pointwise
product and one inverse transform has max error below
``(3 log2(n) + 2) * eta * sqrt(n) * |a|_2 * |b|_2`` with ``eta ~ 6.7u``.  We
take ``eta = 8u`` and another factor 8 of slack, and demand the bound stay
under 1/4.

Every route accepts int64 or object (Python int) arrays.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import BoundError
from .ntt import crt_symmetric, ntt, primes_for_bound, reduce_mod

Term = tuple[int, np.ndarray, np.ndarray]

DIRECT_THRESHOLD = 64
MIN_LIMB_BITS = 8
_EPS = 2.0**-53


def _max_abs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return int(max(abs(int(a.max())), abs(int(a.min()))))


def _l2_bound(a: np.ndarray) -> int:
    """Integer upper bound on the Euclidean norm."""
    if a.dtype != object and _max_abs(a) < 1 << 26:
        sq = int(np.dot(a.astype(np.int64), a.astype(np.int64)))
    else:
        sq = sum(int(x) * int(x) for x in a[a != 0])
    return math.isqrt(sq) + 1


def _fft_length(q: int) -> int:
    return 1 << (2 * q - 2).bit_length()


def _fold(lin: np.ndarray, q: int) -> np.ndarray:
    out = lin[:q].copy()
    out[: q - 1] += lin[q : 2 * q - 1]
    return out


def direct_cyclic_correlation(A: Sequence[int], B: Sequence[int]) -> list[int]:
    q = len(A)
    A = [int(x) for x in A]
    B = [int(x) for x in B]
    return [sum(A[(s + m) % q] * B[m] for m in range(q) if B[m]) for s in range(q)]


def _pack(values: list[int], fits: bool) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = values
    return arr.astype(np.int64) if fits else arr


def _direct(channels: Sequence[Sequence[Term]], q: int) -> list[np.ndarray]:
    out = []
    for terms in channels:
        acc = [0] * q
        for coef, A, B in terms:
            for s, v in enumerate(direct_cyclic_correlation(A, B)):
                acc[s] += coef * v
        out.append(_pack(acc, all(-(1 << 62) < v < 1 << 62 for v in acc)))
    return out


# ---------------------------------------------------------------------------
# number theoretic route


def _ntt_route(channels: Sequence[Sequence[Term]], q: int) -> list[np.ndarray]:
    n = _fft_length(q)
    norms: dict[int, int] = {}

    def norm(x):
        if id(x) not in norms:
            norms[id(x)] = _l2_bound(x)
        return norms[id(x)]

    spectra: dict[tuple[int, bool, int], np.ndarray] = {}

    def fwd(x: np.ndarray, reverse: bool, p: int) -> np.ndarray:
        key = (id(x), reverse, p)
        if key not in spectra:
            r = reduce_mod(x, p)
            if reverse:
                r = np.concatenate((r[:1], r[:0:-1]))
            buf = np.zeros(n, dtype=np.int64)
            buf[:q] = r
            spectra[key] = ntt(buf, p)
        return spectra[key]

    out = []
    for terms in channels:
        bound = sum(abs(c) * norm(A) * norm(B) for c, A, B in terms)
        primes = primes_for_bound(bound)
        residues = []
        for p in primes:
            acc = np.zeros(n, dtype=np.int64)
            for coef, A, B in terms:
                acc = (acc + (coef % p) * (fwd(A, False, p) * fwd(B, True, p) % p)) % p
            residues.append(_fold(ntt(acc, p, invert=True), q) % p)
        out.append(crt_symmetric(residues, primes))
    return out


# ---------------------------------------------------------------------------
# floating route


def fft_error_factor(n: int) -> float:
    """Max-error multiplier on ``|a|_2 * |b|_2`` for an FFT convolution of length n."""
    log_n = max(1, n.bit_length() - 1)
    return 8.0 * (3 * log_n + 2) * (8 * _EPS) * math.sqrt(n)


def _limbs(x: np.ndarray, w: int | None) -> list[np.ndarray]:
    """Split into ``sum_j limb_j * 2**(w*j)``; low limbs in [0, 2**w), top limb signed."""
    m = _max_abs(x)
    if w is None or m < 1 << w:
        return [x.astype(np.float64)]
    count = -(-(m.bit_length() + 1) // w)
    mask = (1 << w) - 1
    rest = x.copy()
    out = []
    for _ in range(count - 1):
        out.append((rest & mask).astype(np.int64).astype(np.float64))
        rest = rest >> w
    out.append(rest.astype(np.int64).astype(np.float64))
    return out


def _limb_norm_bounds(x: np.ndarray, w: int | None) -> list[float]:
    m = _max_abs(x)
    if w is None or m < 1 << w:
        return [float(_l2_bound(x))]
    count = -(-(m.bit_length() + 1) // w)
    nnz = int(np.count_nonzero(x))
    return [math.sqrt(nnz) * 2.0**w] * count


def _guard_ok(terms: Sequence[Term], w: int | None, kappa: float) -> bool:
    groups: dict[int, float] = {}
    for coef, A, B in terms:
        na, nb = _limb_norm_bounds(A, w), _limb_norm_bounds(B, w)
        for ja, a in enumerate(na):
            for jb, b in enumerate(nb):
                groups[ja + jb] = groups.get(ja + jb, 0.0) + abs(coef) * a * b
    return all(kappa * g < 0.25 for g in groups.values())


def _pick_width(terms: Sequence[Term], kappa: float) -> int | None | bool:
    if _guard_ok(terms, None, kappa):
        return None
    for w in range(26, MIN_LIMB_BITS - 1, -2):
        if _guard_ok(terms, w, kappa):
            return w
    return False


def _float_route(channels: Sequence[Sequence[Term]], q: int) -> list[np.ndarray] | None:
    n = _fft_length(q)
    kappa = fft_error_factor(n)
    widths = [_pick_width(terms, kappa) for terms in channels]
    if any(w is False for w in widths):
        return None
    spectra: dict[tuple[int, bool, int | None], list[np.ndarray]] = {}

    def fwd(x: np.ndarray, reverse: bool, w: int | None) -> list[np.ndarray]:
        key = (id(x), reverse, w)
        if key not in spectra:
            specs = []
            for limb in _limbs(x, w):
                if reverse:
                    limb = np.concatenate((limb[:1], limb[:0:-1]))
                specs.append(np.fft.rfft(limb, n))
            spectra[key] = specs
        return spectra[key]

    out = []
    for terms, w in zip(channels, widths):
        groups: dict[int, np.ndarray] = {}
        for coef, A, B in terms:
            for ja, fa in enumerate(fwd(A, False, w)):
                for jb, fb in enumerate(fwd(B, True, w)):
                    prod = coef * (fa * fb)
                    s = ja + jb
                    groups[s] = groups[s] + prod if s in groups else prod
        parts = {s: _fold(np.rint(np.fft.irfft(g, n)).astype(np.int64), q) for s, g in groups.items()}
        bound = sum(abs(c) * _l2_bound(A) * _l2_bound(B) for c, A, B in terms)
        step = 0 if w is None else w
        if bound < 1 << 62:
            acc = np.zeros(q, dtype=np.int64)
            for s, part in parts.items():
                # int64 wraps; the final sum is in range, so the wrapped total is exact
                if step * s < 64:
                    acc += np.left_shift(part, step * s)
            out.append(acc)
        else:
            acc = np.zeros(q, dtype=object)
            acc[:] = 0
            for s, part in parts.items():
                acc = acc + part.astype(object) * (1 << (step * s))
            out.append(acc)
    return out


def correlate_channels(channels: Sequence[Sequence[Term]], method: str = "auto") -> list[np.ndarray]:
    """Exact ``sum(coef * corr(A, B))`` for each channel; all arrays share length q.

    Transforms of an input array are computed once and shared across channels,
    so callers should pass the same array object wherever it recurs.
    """
    q = len(channels[0][0][1])
    for terms in channels:
        for _, A, B in terms:
            if len(A) != q or len(B) != q:
                raise ValueError("all correlation inputs must have the same length")
    if method == "direct" or (method == "auto" and q <= DIRECT_THRESHOLD):
        return _direct(channels, q)
    if method in ("auto", "float"):
        res = _float_route(channels, q)
        if res is not None:
            return res
        if method == "float":
            raise BoundError("inputs too large for the floating route at any limb width")
    if method in ("auto", "ntt"):
        return _ntt_route(channels, q)
    raise ValueError(f"unknown method {method!r}")


def correlate_combination(terms: Sequence[Term], method: str = "auto") -> np.ndarray:
    return correlate_channels([terms], method)[0]


def exact_cyclic_correlation(A, B, method: str = "auto") -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 1:
        raise ValueError("inputs must be 1-D arrays of equal length")
    return correlate_combination([(1, A, B)], method)
