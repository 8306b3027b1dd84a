"""Timing harness: naive oracle vs dense FFT vs the length-reduction fast path."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    ConvolutionRun,
    brute_convolution,
    dense_fft_convolution,
    fast_sparse_convolution,
    run_convolution,
)
from .instances import random_instance
from .model import SparseVector
from .scheme import build_scheme

PHASES = ("compact", "preprocess", "reduce", "correlate", "recover", "fallback", "naive")


@dataclass
class RunReport:
    mode: str
    N1: int
    N2: int
    n1: int
    n2: int
    c: int | None = None
    q: int | None = None
    assignment_count: int | None = None
    assignment_bound: int | None = None
    timings: dict[str, float] = field(default_factory=dict)
    fallback_fraction: float | None = None
    recovered_outputs: int | None = None
    fallback_outputs: int | None = None
    total_pairs: int | None = None
    output_entries: int = 0
    index_space: str = "original"
    verified: bool | None = None
    extra: dict[str, object] = field(default_factory=dict)

    @classmethod
    def from_run(cls, v1: SparseVector, v2: SparseVector, run: ConvolutionRun) -> "RunReport":
        rep = cls(run.mode, v1.length, v2.length, v1.nnz, v2.nnz, timings=dict(run.timings))
        if run.scheme is not None:
            rep.c = run.scheme.params.c
            rep.q = run.scheme.params.q
            rep.assignment_count = len(run.scheme.assignments)
            rep.assignment_bound = run.scheme.assignment_bound
        if run.recovery is not None:
            rec = run.recovery
            rep.fallback_fraction = rec.fallback_fraction
            rep.recovered_outputs = len(rec.recovered)
            rep.fallback_outputs = len(rec.fallback_outputs)
            rep.total_pairs = rec.total_pairs
        if run.compaction is not None:
            rep.index_space = f"compacted mod {run.compaction.p}"
        rep.output_entries = run.result.nnz
        rep.verified = run.verified
        return rep

    def lines(self) -> list[str]:
        def fmt(v):
            if v is None:
                return "n/a"
            if isinstance(v, float):
                return f"{v:.6f}"
            return str(v)

        out = [
            ("mode", self.mode),
            ("N1", self.N1),
            ("N2", self.N2),
            ("n1", self.n1),
            ("n2", self.n2),
            ("c", self.c),
            ("q", self.q),
            ("assignment_count", self.assignment_count),
            ("assignment_bound", self.assignment_bound),
        ]
        out += [(f"time_{p}", self.timings.get(p)) for p in PHASES]
        out += [
            ("fallback_fraction", self.fallback_fraction),
            ("recovered_outputs", self.recovered_outputs),
            ("fallback_outputs", self.fallback_outputs),
            ("total_pairs", self.total_pairs),
            ("output_entries", self.output_entries),
            ("index_space", self.index_space),
            ("verified", self.verified),
        ]
        out += list(self.extra.items())
        return [f"{k}: {fmt(v)}" for k, v in out]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


@dataclass
class BenchResult:
    reports: list[RunReport]
    medians: dict[str, float]
    agree: bool
    repetitions: int

    @property
    def speedup_vs_dense(self) -> float:
        return self.medians["dense_fft"] / self.medians["fast"]

    def table(self) -> str:
        rows = [f"{'path':<12} {'median_s':>12}"]
        for name in ("naive", "dense_fft", "fast", "fast_online"):
            rows.append(f"{name:<12} {self.medians[name]:>12.6f}")
        stat = "median" if self.repetitions > 1 else "single-sample (not a median)"
        rows.append(f"timing_stat: {stat}")
        rows.append(f"speedup_fast_vs_dense: {self.speedup_vs_dense:.2f}")
        rows.append(f"outputs_agree: {self.agree}")
        return "\n".join(rows) + "\n"


def run_bench(
    n1: int, N1: int, n2: int, repetitions: int = 3, seed: int = 0, signed: bool = False,
    N2: int | None = None,
) -> BenchResult:
    """Time all paths on one seeded instance.

    ``fast`` includes scheme construction; ``fast_online`` reuses a prebuilt
    scheme, which is the setting where v1 is known in advance.
    """
    rng = np.random.default_rng(seed)
    v1, v2 = random_instance(rng, N1, n1, n2, signed=signed, N2=N2)
    times: dict[str, list[float]] = {k: [] for k in ("naive", "dense_fft", "fast", "fast_online")}
    reports = []
    outputs = {}
    scheme = build_scheme(v1)
    for _ in range(max(1, repetitions)):
        t0 = time.perf_counter()
        outputs["naive"] = brute_convolution(v1, v2)
        times["naive"].append(time.perf_counter() - t0)

        t0 = time.perf_counter()
        outputs["dense_fft"] = dense_fft_convolution(v1, v2)
        times["dense_fft"].append(time.perf_counter() - t0)

        t0 = time.perf_counter()
        run = run_convolution(v1, v2, "fast")
        times["fast"].append(time.perf_counter() - t0)
        outputs["fast"] = run.result

        t0 = time.perf_counter()
        outputs["fast_online"], _ = fast_sparse_convolution(v1, v2, scheme)
        times["fast_online"].append(time.perf_counter() - t0)
        reports.append(RunReport.from_run(v1, v2, run))
    medians = {k: statistics.median(v) for k, v in times.items()}
    agree = len({o for o in outputs.values()}) == 1
    return BenchResult(reports, medians, agree, repetitions)
