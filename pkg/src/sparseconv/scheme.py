"""Deterministic length reduction of the first vector.

Every variant polynomial of every non-zero index of ``v1`` is evaluated at a
candidate assignment ``a`` in F_q, giving a position in a length-``q`` vector.
The singleton table records, per (assignment, polynomial), whether that
polynomial landed alone.  A greedy cover then picks assignments until every
polynomial has been a singleton at least once; each pick covers at least half
of the remaining columns, so only logarithmically many assignments survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import SchemeError
from .model import SparseVector
from .polyenc import (
    EncodingParams,
    IndexPolynomial,
    horner,
    variant_coefficient_tensor,
)
from .primes import next_prime

MAX_Q = 1 << 26


@dataclass(frozen=True)
class ReductionConfig:
    c_cap: int = 4
    # q may grow to q_slack times its size lower bound before c is raised
    q_slack: int = 4
    max_q: int = MAX_Q
    force_q: int | None = None
    force_c: int | None = None


def required_rows(c: int, n1: int) -> int:
    return c * (1 << (c + 1)) * n1


def _min_q_for_digits(max_index: int, c: int) -> int:
    # smallest radix r with r**(c+1) > max_index, then q = 2r + 1
    r = max(2, math.floor(max_index ** (1.0 / (c + 1))) - 1)
    while r ** (c + 1) <= max_index:
        r += 1
    while r > 2 and (r - 1) ** (c + 1) > max_index:
        r -= 1
    return 2 * r + 1


def sibling_colliding_values(params: EncodingParams, chunk: int = 1 << 14) -> np.ndarray:
    """Assignments at which two variants of one index share a position.

    A variant differs from its base by a fixed polynomial that does not depend
    on the index, so the bad set is global and is found by scanning F_q once.
    """
    q = params.q
    offs = params.variant_offsets % q
    bad = []
    for lo in range(0, q, chunk):
        a = np.arange(lo, min(q, lo + chunk), dtype=np.int64)
        pos = np.sort(horner(offs[None, :, :], a[:, None], q), axis=1)
        dup = (pos[:, 1:] == pos[:, :-1]).any(axis=1)
        bad.append(a[dup])
    return np.concatenate(bad) if bad else np.zeros(0, dtype=np.int64)


def candidate_assignments(params: EncodingParams, count: int | None) -> np.ndarray:
    """The first ``count`` sibling-free values of F_q (all of them if ``count`` is None)."""
    mask = np.ones(params.q, dtype=bool)
    mask[sibling_colliding_values(params)] = False
    good = np.flatnonzero(mask).astype(np.int64)
    if count is None:
        return good
    if len(good) < count:
        raise SchemeError(
            f"only {len(good)} sibling-free assignments in F_{params.q}, need {count}"
        )
    return good[:count]


def choose_parameters(max_index: int, n1: int, config: ReductionConfig = ReductionConfig()) -> EncodingParams:
    """Smallest degree bound ``c`` and then smallest prime ``q`` that fit.

    ``q`` must (a) give enough digits for ``max_index``, (b) be at least twice
    the table row count, and (c) still leave that many sibling-free rows.
    """
    n1 = max(n1, 2)
    if config.force_q is not None or config.force_c is not None:
        if config.force_q is None or config.force_c is None:
            raise SchemeError("force_q and force_c must be given together")
        params = EncodingParams(config.force_q, config.force_c)
        if params.capacity <= max_index:
            raise SchemeError(
                f"forced q={params.q}, c={params.c} cannot encode index {max_index}"
            )
        return params
    for c in range(1, config.c_cap + 1):
        floor_q = 2 * required_rows(c, n1)
        limit = min(config.max_q, config.q_slack * floor_q)
        q = next_prime(max(floor_q, _min_q_for_digits(max_index, c), 5))
        while q <= limit:
            params = EncodingParams(q, c)
            n_bad = len(sibling_colliding_values(params))
            if q - n_bad >= required_rows(c, n1):
                return params
            q = next_prime(q + 1)
    raise SchemeError(
        f"no (c, q) with c <= {config.c_cap} encodes index {max_index} for n1={n1}; "
        "compact the index space first"
    )


@dataclass
class SingletonTable:
    """Bit-packed (assignment x polynomial) singleton indicator."""

    candidates: np.ndarray
    bits: np.ndarray  # (rows, ceil(cols / 8)) uint8, big-endian bit order
    n_cols: int

    @property
    def n_rows(self) -> int:
        return len(self.candidates)

    def dense(self) -> np.ndarray:
        return np.unpackbits(self.bits, axis=1, count=self.n_cols).astype(bool)

    def cell(self, row: int, col: int) -> bool:
        return bool(self.bits[row, col >> 3] >> (7 - (col & 7)) & 1)

    def column_false_counts(self) -> np.ndarray:
        return self.n_rows - self.dense().sum(axis=0)

    def row_true_counts(self) -> np.ndarray:
        return np.bitwise_count(self.bits).sum(axis=1)


def _eval_rows(coeffs: np.ndarray, a: np.ndarray, q: int) -> np.ndarray:
    """Positions of every polynomial under each value in ``a``, shape (len(a), n_polys)."""
    if q >= 1 << 16:
        return horner(coeffs[None, :, :], a[:, None], q)
    # q**2 + q < 2**32, so Horner stays exact in uint32 and runs faster
    cf = coeffs.astype(np.uint32)
    av = a.astype(np.uint32)[:, None]
    qq = np.uint32(q)
    acc = np.broadcast_to(cf[:, -1], (len(av), len(cf)))
    for k in range(cf.shape[1] - 2, -1, -1):
        acc = acc * av
        acc += cf[:, k]
        acc %= qq
    return acc.astype(np.intp)


def build_singleton_table(
    coeffs: np.ndarray, candidates: np.ndarray, params: EncodingParams, chunk_cells: int = 1 << 16
) -> SingletonTable:
    """``coeffs`` has shape (n_polys, c+1); one table row per candidate.

    Rows are processed a few at a time so the bucket counts stay cache resident.
    """
    q = params.q
    n_cols = coeffs.shape[0]
    candidates = np.asarray(candidates, dtype=np.int64)
    rows_per_chunk = max(1, chunk_cells // max(n_cols, q, 1))
    bits = np.zeros((len(candidates), (n_cols + 7) // 8), np.uint8)
    for lo in range(0, len(candidates), rows_per_chunk):
        a = candidates[lo : lo + rows_per_chunk]
        pos = _eval_rows(coeffs, a, q)
        pos += (np.arange(len(a), dtype=np.intp) * q)[:, None]
        counts = np.bincount(pos.ravel(), minlength=len(a) * q)
        bits[lo : lo + len(a)] = np.packbits(counts[pos] == 1, axis=1)
    return SingletonTable(candidates, bits, n_cols)


def select_assignments(table: SingletonTable) -> tuple[list[int], np.ndarray]:
    """Greedy cover; returns picked values and, per column, the ordinal that covered it.

    Ties go to the smallest assignment value (rows are in ascending order).
    """
    n_cols = table.n_cols
    surv = np.packbits(np.ones(n_cols, dtype=bool))
    remaining = n_cols
    coverage = np.full(n_cols, -1, dtype=np.int64)
    picked: list[int] = []
    while remaining:
        gains = np.bitwise_count(table.bits & surv).sum(axis=1, dtype=np.int64)
        row = int(np.argmax(gains))
        gain = int(gains[row])
        if 2 * gain < remaining or gain == 0:
            raise SchemeError(
                f"best assignment covers {gain} of {remaining} remaining polynomials; "
                "singleton table is not half full"
            )
        newly = np.unpackbits(table.bits[row] & surv, count=n_cols).astype(bool)
        coverage[newly] = len(picked)
        picked.append(int(table.candidates[row]))
        surv &= ~table.bits[row]
        remaining -= gain
    return picked, coverage


@dataclass
class ReductionScheme:
    params: EncodingParams
    assignments: list[int]
    coverage: np.ndarray  # per column (index_pos * 2**c + mask) -> assignment ordinal
    v1_indices: list[int]
    coefficients: np.ndarray = field(repr=False)  # (n1, 2**c, c+1) residues
    n_candidates: int = 0
    n_excluded: int = 0
    table: SingletonTable | None = field(default=None, repr=False)

    @property
    def n_polys(self) -> int:
        return len(self.v1_indices) * self.params.n_variants

    @property
    def assignment_bound(self) -> int:
        return math.ceil(math.log2(self.n_polys)) if self.n_polys > 1 else 1

    def v1_polynomials(self) -> Iterator[IndexPolynomial]:
        for pos, idx in enumerate(self.v1_indices):
            for mask in range(self.params.n_variants):
                yield IndexPolynomial(
                    tuple(int(x) for x in self.coefficients[pos, mask]), idx, mask, self.params.q
                )

    def covered_by(self, pos: int, mask: int) -> int:
        return self.assignments[int(self.coverage[pos * self.params.n_variants + mask])]

    def dump_lines(self) -> list[str]:
        lines = [
            f"q: {self.params.q}",
            f"c: {self.params.c}",
            f"n1: {len(self.v1_indices)}",
            f"polynomials: {self.n_polys}",
            f"candidates: {self.n_candidates}",
            f"excluded_sibling_values: {self.n_excluded}",
            f"assignment_count: {len(self.assignments)}",
            f"assignment_bound: {self.assignment_bound}",
            "assignments: " + " ".join(str(a) for a in self.assignments),
        ]
        for pos, idx in enumerate(self.v1_indices):
            for mask in range(self.params.n_variants):
                poly = IndexPolynomial(
                    tuple(int(x) for x in self.coefficients[pos, mask]), idx, mask, self.params.q
                )
                lines.append(f"poly {idx} {mask} {poly} covered_by {self.covered_by(pos, mask)}")
        return lines


def build_scheme(
    v1: SparseVector, config: ReductionConfig = ReductionConfig(), keep_table: bool = False
) -> ReductionScheme:
    if v1.nnz == 0:
        raise SchemeError("no non-zeros in v1")
    indices = v1.indices
    n1 = len(indices)
    params = choose_parameters(max(indices), n1, config)
    forced = config.force_q is not None
    candidates = candidate_assignments(params, None if forced else required_rows(params.c, max(n1, 2)))
    n_excluded = len(sibling_colliding_values(params))
    coeffs = variant_coefficient_tensor(indices, params)
    table = build_singleton_table(coeffs.reshape(-1, params.c + 1), candidates, params)
    assignments, coverage = select_assignments(table)
    return ReductionScheme(
        params=params,
        assignments=assignments,
        coverage=coverage,
        v1_indices=list(indices),
        coefficients=coeffs,
        n_candidates=len(candidates),
        n_excluded=n_excluded,
        table=table if keep_table else None,
    )


@dataclass
class ReducedBundle:
    assignment: int
    value_vec: np.ndarray
    count_vec: np.ndarray
    idx_vec: np.ndarray
    idx2_vec: np.ndarray


def _accumulate(q: int, positions: np.ndarray, weights: list[int] | np.ndarray, big: bool) -> np.ndarray:
    if big:
        out = np.zeros(q, dtype=object)
        out[:] = 0
        np.add.at(out, positions, np.asarray(weights, dtype=object))
        return out
    out = np.zeros(q, dtype=np.int64)
    np.add.at(out, positions, np.asarray(weights, dtype=np.int64))
    return out


def reduce_vector(
    indices: list[int], values: list[int], params: EncodingParams, a: int, variants: bool
) -> ReducedBundle:
    """Bucket every (variant) polynomial of ``indices`` at assignment ``a``.

    Value sums ride ``value_vec``; counts and index moments ride the count
    channel (weight 1 per polynomial), so they never cancel.
    """
    q = params.q
    if not indices:
        z = np.zeros(q, dtype=np.int64)
        return ReducedBundle(a, z, z.copy(), z.copy(), z.copy())
    if variants:
        coeffs = variant_coefficient_tensor(indices, params)
    else:
        coeffs = variant_coefficient_tensor(indices, params)[:, :1, :]
    reps = coeffs.shape[1]
    pos = horner(coeffs, a, q).ravel()
    idx_rep = [i for i in indices for _ in range(reps)]
    val_rep = [v for v in values for _ in range(reps)]
    max_idx = max(indices)
    n = len(pos)
    big_idx = n * max_idx >= 1 << 62
    big_idx2 = n * max_idx * max_idx >= 1 << 62
    big_val = n * max(abs(v) for v in values) >= 1 << 62
    return ReducedBundle(
        assignment=a,
        value_vec=_accumulate(q, pos, val_rep, big_val),
        count_vec=np.bincount(pos, minlength=q).astype(np.int64),
        idx_vec=_accumulate(q, pos, idx_rep, big_idx),
        idx2_vec=_accumulate(q, pos, [i * i for i in idx_rep], big_idx2),
    )


def reduce_v1(v1: SparseVector, scheme: ReductionScheme, t: int) -> ReducedBundle:
    return reduce_vector(v1.indices, v1.values, scheme.params, scheme.assignments[t], True)


def reduce_v2(v2: SparseVector, scheme: ReductionScheme, t: int) -> ReducedBundle:
    return reduce_vector(v2.indices, v2.values, scheme.params, scheme.assignments[t], False)
