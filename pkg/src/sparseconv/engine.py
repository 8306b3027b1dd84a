"""Sparse convolution ``W[k] = sum_i V1[k + i] * V2[i]``.

The fast path reduces both vectors under each selected assignment, correlates
the reduced vectors exactly, and reads outputs off "pure" offsets: offsets
where every contributing (v1, v2) pair has the same output index ``k``.
Purity is certified by three count-channel correlations (pair count, sum of
``k``, sum of ``k**2``): zero variance means a single ``k``.  At a pure offset
that equals ``base(k)`` evaluated at the assignment, the value correlation is
exactly ``W[k]``, because each pair with output ``k`` lands there through
exactly one carry variant.  Pairs not explained by any pure offset are summed
directly, so the result always equals the brute-force oracle.
"""

from __future__ import annotations

import bisect
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundError, SchemeError, VerifyMismatch
from .model import DEFAULT_VALUE_BOUND, SparseVector
from .polyenc import digit_matrix, horner
from .scheme import (
    MAX_Q,
    ReducedBundle,
    ReductionConfig,
    ReductionScheme,
    build_scheme,
    reduce_v1,
    reduce_v2,
)
from .correlation import correlate_channels

MAX_N2 = 1 << 16


def brute_convolution(v1: SparseVector, v2: SparseVector) -> SparseVector:
    out: dict[int, int] = {}
    for i, b in v2.entries:
        for j1, a in v1.entries:
            if j1 >= i:
                k = j1 - i
                out[k] = out.get(k, 0) + a * b
    return SparseVector.from_pairs(v1.length, ((k, w) for k, w in out.items() if w))


def pair_count(v1: SparseVector, v2: SparseVector) -> int:
    """Number of support pairs (i1, i2) with i1 >= i2."""
    i1 = v1.indices
    total = 0
    for i in v2.indices:
        total += len(i1) - bisect.bisect_left(i1, i)
    return total


@dataclass
class CorrelationSet:
    assignment: int
    R_val: np.ndarray
    R_cnt: np.ndarray
    R_k1: np.ndarray
    R_k2: np.ndarray


def correlate_bundles(b1: ReducedBundle, b2: ReducedBundle, method: str = "auto") -> CorrelationSet:
    """All four correlation channels at reduced offset ``s = pos1 - pos2 (mod q)``.

    The moment channels are differences of correlations: summed over the
    contributions at ``s`` they give ``sum(i1 - i2)`` and ``sum((i1 - i2)**2)``.
    """
    r_val, r_cnt, r_k1, r_k2 = correlate_channels(
        [
            [(1, b1.value_vec, b2.value_vec)],
            [(1, b1.count_vec, b2.count_vec)],
            [(1, b1.idx_vec, b2.count_vec), (-1, b1.count_vec, b2.idx_vec)],
            [
                (1, b1.idx2_vec, b2.count_vec),
                (-2, b1.idx_vec, b2.idx_vec),
                (1, b1.count_vec, b2.idx2_vec),
            ],
        ],
        method,
    )
    return CorrelationSet(b1.assignment, r_val, r_cnt, r_k1, r_k2)


@dataclass
class RecoveryReport:
    recovered: dict[int, tuple[int, int, int]] = field(default_factory=dict)
    fallback_outputs: set[int] = field(default_factory=set)
    total_pairs_accounted: int = 0
    total_pairs: int = 0
    fallback_pairs: int = 0
    pure_offsets: list[int] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def fallback_fraction(self) -> float:
        touched = len(self.recovered) + len(self.fallback_outputs)
        return len(self.fallback_outputs) / touched if touched else 0.0


def extract_pure(cs: CorrelationSet, scheme: ReductionScheme) -> list[tuple[int, int, int, int]]:
    """Accepted ``(k, s, value, pair_count)`` candidates of one assignment."""
    q = scheme.params.q
    s_idx = np.flatnonzero(cs.R_cnt)
    if not len(s_idx):
        return []
    cnt = cs.R_cnt[s_idx].astype(object)
    k1 = cs.R_k1[s_idx].astype(object)
    k2 = cs.R_k2[s_idx].astype(object)
    ok = (k1 % cnt == 0) & (k1 >= 0) & (k2 * cnt == k1 * k1)
    if not ok.any():
        return []
    s_ok = s_idx[ok.astype(bool)]
    k_hat = [int(x) for x in (k1[ok.astype(bool)] // cnt[ok.astype(bool)])]
    # every pure k is at most max(v1), hence encodable
    pos = horner(digit_matrix(k_hat, scheme.params), cs.assignment, q)
    out = []
    for k, s, p in zip(k_hat, s_ok.tolist(), pos.tolist()):
        if p == s:
            out.append((k, s, int(cs.R_val[s]), int(cs.R_cnt[s])))
    return out


def _fallback(
    v1: SparseVector, v2: SparseVector, skip: set[int], chunk: int = 1 << 22
) -> tuple[dict[int, int], int, set[int]]:
    """Direct pair enumeration for outputs not in ``skip``."""
    if not v1.nnz or not v2.nnz:
        return {}, 0, set()
    if max(v1.indices[-1], v2.indices[-1]) >= 1 << 62:
        out: dict[int, int] = {}
        n = 0
        for i2, b in v2.entries:
            for i1, a in v1.entries:
                k = i1 - i2
                if k >= 0 and k not in skip:
                    out[k] = out.get(k, 0) + a * b
                    n += 1
        return out, n, set(out)
    I1 = np.array(v1.indices, dtype=np.int64)
    A1 = np.array(v1.values, dtype=np.int64)
    I2 = np.array(v2.indices, dtype=np.int64)
    A2 = np.array(v2.values, dtype=np.int64)
    skip_arr = np.array(sorted(skip), dtype=np.int64)
    ks, ws = [], []
    step = max(1, chunk // len(I1))
    for lo in range(0, len(I2), step):
        K = I1[None, :] - I2[lo : lo + step, None]
        prod = A2[lo : lo + step, None] * A1[None, :]
        m = K >= 0
        if len(skip_arr):
            m &= ~np.isin(K, skip_arr)
        ks.append(K[m])
        ws.append(prod[m])
    K = np.concatenate(ks)
    W = np.concatenate(ws)
    uniq, inv = np.unique(K, return_inverse=True)
    acc = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(acc, inv, W)
    keys = uniq.tolist()
    return dict(zip(keys, acc.tolist())), int(len(K)), set(keys)


def check_bounds(v1: SparseVector, v2: SparseVector, scheme: ReductionScheme | None,
                 value_bound: int = DEFAULT_VALUE_BOUND) -> None:
    for name, v in (("v1", v1), ("v2", v2)):
        m = v.max_abs_value()
        if m > value_bound:
            raise BoundError(f"{name}: |value| {m} exceeds bound {value_bound}")
    if v2.nnz > MAX_N2:
        raise BoundError(f"v2 has {v2.nnz} non-zeros, more than {MAX_N2}")
    if scheme is not None and scheme.params.q > MAX_Q:
        raise BoundError(f"q={scheme.params.q} exceeds {MAX_Q}")


def _trim_v2(v1: SparseVector, v2: SparseVector) -> SparseVector:
    # v2 indices beyond max(v1) only form pairs with negative output index
    if not v1.nnz:
        return SparseVector(v2.length)
    top = v1.indices[-1]
    return SparseVector(v2.length, tuple(e for e in v2.entries if e[0] <= top))


def _assignment_job(v1, v2, scheme, t):
    t0 = time.perf_counter()
    b1 = reduce_v1(v1, scheme, t)
    b2 = reduce_v2(v2, scheme, t)
    t1 = time.perf_counter()
    cs = correlate_bundles(b1, b2)
    t2 = time.perf_counter()
    pure = extract_pure(cs, scheme)
    return pure, (t1 - t0, t2 - t1, time.perf_counter() - t2)


def fast_sparse_convolution(
    v1: SparseVector, v2: SparseVector, scheme: ReductionScheme, threads: int = 1
) -> tuple[SparseVector, RecoveryReport]:
    """Length-reduced convolution with exact fallback.

    With ``threads > 1`` every assignment runs as an independent job; results
    are merged in assignment order (smallest ordinal wins per output index),
    so the output does not depend on completion order.
    """
    if v1.indices != scheme.v1_indices:
        raise SchemeError("scheme was built for a different v1 support")
    check_bounds(v1, v2, scheme)
    v2 = _trim_v2(v1, v2)
    if v2.nnz and v2.indices[-1] >= scheme.params.capacity:
        raise SchemeError(f"v2 index {v2.indices[-1]} not encodable under q={scheme.params.q}")
    report = RecoveryReport(total_pairs=pair_count(v1, v2))
    tm = report.timings
    for key in ("reduce", "correlate", "recover", "fallback"):
        tm[key] = 0.0
    if v2.nnz == 0:
        return SparseVector(v1.length), report

    n_assign = len(scheme.assignments)
    if threads > 1 and n_assign > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            jobs = ex.map(lambda t: _assignment_job(v1, v2, scheme, t), range(n_assign))
            results = list(jobs)
    else:
        results = None

    recovered = report.recovered
    accounted = 0
    for t in range(n_assign):
        if accounted == report.total_pairs:
            break
        pure, dts = results[t] if results else _assignment_job(v1, v2, scheme, t)
        report.pure_offsets.append(len(pure))
        for k, _s, val, npairs in pure:
            if k not in recovered:
                recovered[k] = (val, scheme.assignments[t], npairs)
                accounted += npairs
        for key, dt in zip(("reduce", "correlate", "recover"), dts):
            tm[key] += dt

    t0 = time.perf_counter()
    fb: dict[int, int] = {}
    if accounted < report.total_pairs:
        fb, n_fb, touched = _fallback(v1, v2, set(recovered))
        report.fallback_outputs = touched
        report.fallback_pairs = n_fb
    tm["fallback"] = time.perf_counter() - t0
    report.total_pairs_accounted = accounted + report.fallback_pairs
    if report.total_pairs_accounted != report.total_pairs:
        raise AssertionError(
            f"pair accounting mismatch: {report.total_pairs_accounted} != {report.total_pairs}"
        )
    keys = list(recovered) + list(fb)
    vals = [val for val, _, _ in recovered.values()] + list(fb.values())
    return _assemble(v1.length, keys, vals), report


def _assemble(length: int, keys: list[int], vals: list[int]) -> SparseVector:
    # recovered and fallback keys are disjoint
    if keys and max(keys) < 1 << 62 and max(map(abs, vals)) < 1 << 62:
        k = np.array(keys, dtype=np.int64)
        v = np.array(vals, dtype=np.int64)
        order = np.argsort(k, kind="stable")
        k, v = k[order], v[order]
        nz = v != 0
        return SparseVector.from_sorted_arrays(length, k[nz], v[nz])
    return SparseVector.from_pairs(length, zip(keys, vals))


@dataclass
class ConvolutionRun:
    result: SparseVector
    mode: str
    scheme: ReductionScheme | None = None
    recovery: RecoveryReport | None = None
    compaction: object | None = None
    timings: dict[str, float] = field(default_factory=dict)
    verified: bool | None = None


def run_convolution(
    v1: SparseVector,
    v2: SparseVector,
    mode: str = "fast",
    config: ReductionConfig = ReductionConfig(),
    force_compaction: bool = False,
    pool=None,
    threads: int = 1,
) -> ConvolutionRun:
    """Run the convolution in ``naive``, ``fast`` or ``verify`` mode.

    When v1's indices do not fit the polynomial encoding (or when forced), the
    index space is compacted first; the result is then the convolution of the
    compacted vectors, and ``compaction`` carries the index map.
    """
    if mode not in ("naive", "fast", "verify"):
        raise ValueError(f"unknown mode {mode!r}")
    timings: dict[str, float] = {}
    if mode == "naive":
        t0 = time.perf_counter()
        w = brute_convolution(v1, v2)
        timings["naive"] = time.perf_counter() - t0
        return ConvolutionRun(w, mode, timings=timings)
    check_bounds(v1, v2, None)
    compaction = None
    if force_compaction:
        v1, v2, compaction = _compact(v1, v2, pool, timings)
    if v1.nnz == 0:
        return ConvolutionRun(SparseVector(v1.length), mode, compaction=compaction, timings=timings,
                              verified=True if mode == "verify" else None)
    t0 = time.perf_counter()
    try:
        scheme = build_scheme(v1, config)
    except SchemeError:
        if compaction is not None or config.force_q is not None:
            raise
        v1, v2, compaction = _compact(v1, v2, pool, timings)
        t0 = time.perf_counter()
        scheme = build_scheme(v1, config)
    timings["preprocess"] = time.perf_counter() - t0
    w, rec = fast_sparse_convolution(v1, v2, scheme, threads=threads)
    timings.update(rec.timings)
    run = ConvolutionRun(w, mode, scheme, rec, compaction, timings)
    if mode == "verify":
        t0 = time.perf_counter()
        ref = brute_convolution(v1, v2)
        timings["naive"] = time.perf_counter() - t0
        _assert_equal(w, ref)
        run.verified = True
    return run


def _compact(v1, v2, pool, timings):
    from .compaction import compact

    t0 = time.perf_counter()
    out = compact(v1, v2, pool)
    timings["compact"] = time.perf_counter() - t0
    return out


def _assert_equal(fast: SparseVector, naive: SparseVector) -> None:
    if fast == naive:
        return
    a, b = fast.to_dict(), naive.to_dict()
    for k in sorted(set(a) | set(b)):
        if a.get(k, 0) != b.get(k, 0):
            raise VerifyMismatch(k, a.get(k, 0), b.get(k, 0))
    raise VerifyMismatch(-1, fast.length, naive.length)


def verified_convolution(
    v1: SparseVector, v2: SparseVector, mode: str = "verify",
    config: ReductionConfig = ReductionConfig(),
) -> SparseVector:
    return run_convolution(v1, v2, mode, config).result


def dense_fft_convolution(v1: SparseVector, v2: SparseVector) -> SparseVector:
    """Full-length floating FFT baseline; exact only while |W| stays well below 2**50."""
    if not v1.nnz or not v2.nnz:
        return SparseVector(v1.length)
    n1 = v1.indices[-1] + 1
    n2 = v2.indices[-1] + 1
    a = np.zeros(n1)
    a[v1.indices] = v1.values
    b = np.zeros(n2)
    b[v2.indices] = v2.values
    size = 1 << (n1 + n2 - 1).bit_length()
    full = np.fft.irfft(np.fft.rfft(a, size) * np.conj(np.fft.rfft(b, size)), size)
    w = np.rint(full[:n1]).astype(np.int64)
    nz = np.flatnonzero(w)
    return SparseVector.from_sorted_arrays(v1.length, nz, w[nz])
