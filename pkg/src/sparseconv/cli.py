"""Command-line front end.

Exit codes:
  0  success
  1  usage, I/O or parse error
  2  verify-mode mismatch
  3  engine bound violation (magnitude budget, no admissible scheme, compaction failure)
  4  selftest failure
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import RunReport, run_bench
from .checks import SUITES
from .compaction import PrimePool, build_pool, compact
from .engine import run_convolution
from .errors import BoundError, CompactionError, ParseError, SchemeError, VerifyMismatch
from .model import SparseVector, parse_sparse_vector, serialize_sparse_vector
from .scheme import ReductionConfig, build_scheme, reduce_v1
from .polyenc import evaluate

log = logging.getLogger("sparseconv")

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_BOUND, EXIT_SELFTEST = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file in the same directory, then rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_vector(path: str) -> SparseVector:
    try:
        with open(path, encoding="ascii") as fh:
            return parse_sparse_vector(fh)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _config(args) -> ReductionConfig:
    return ReductionConfig(force_q=args.force_q, force_c=args.force_c)


def _pool(args) -> PrimePool | None:
    if not args.debug_pool:
        return None
    return PrimePool.from_primes(int(x) for x in args.debug_pool.split(","))


def cmd_conv(args) -> int:
    v1 = _read_vector(args.v1)
    v2 = _read_vector(args.v2)
    run = run_convolution(v1, v2, args.mode, _config(args), force_compaction=args.compact,
                          pool=_pool(args), threads=args.threads)
    write_atomic(args.out, serialize_sparse_vector(run.result))
    report = RunReport.from_run(v1, v2, run)
    if run.compaction is not None:
        report.extra["compaction_note"] = "output indices are in the compacted index space"
    if args.report:
        write_atomic(args.report, report.text())
    else:
        sys.stderr.write(report.text())
    return EXIT_OK


def cmd_reduce(args) -> int:
    v1 = _read_vector(args.v1)
    if v1.nnz == 0:
        raise SchemeError("no non-zeros in v1")
    t0 = time.perf_counter()
    scheme = build_scheme(v1, _config(args))
    elapsed = time.perf_counter() - t0
    lines = scheme.dump_lines()
    # coverage certificate: every polynomial is alone at its covering assignment
    bundles = [reduce_v1(v1, scheme, t) for t in range(len(scheme.assignments))]
    ok = 0
    for pos in range(len(scheme.v1_indices)):
        for mask in range(scheme.params.n_variants):
            t = int(scheme.coverage[pos * scheme.params.n_variants + mask])
            spot = evaluate(tuple(int(x) for x in scheme.coefficients[pos, mask]),
                            scheme.assignments[t], scheme.params)
            ok += int(bundles[t].count_vec[spot] == 1)
    lines += [
        f"coverage_certified: {ok}/{scheme.n_polys}",
        f"within_assignment_bound: {len(scheme.assignments) <= scheme.assignment_bound}",
        f"time_preprocess: {elapsed:.6f}",
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok == scheme.n_polys else EXIT_BOUND


def cmd_compact(args) -> int:
    v1 = _read_vector(args.v1)
    v2 = _read_vector(args.v2)
    n1 = max(v1.nnz, v2.nnz)
    pool = _pool(args)
    if pool is None and n1 > args.max_n1:
        raise BoundError(f"n1={n1} exceeds the exponential-path cap {args.max_n1} (see --max-n1)")
    c1, c2, res = compact(v1, v2, pool if pool is not None else build_pool(max(n1, 2)))
    union = sorted(res.index_map)
    sound = all((b - a) % res.p for k, a in enumerate(union) for b in union[k + 1 :])
    lines = res.report_lines() + [f"n1: {n1}", f"verified_separating: {sound}"]
    prefix = args.out or args.v1
    write_atomic(f"{prefix}.v1", serialize_sparse_vector(c1))
    write_atomic(f"{prefix}.v2", serialize_sparse_vector(c2))
    text = "\n".join(lines) + "\n"
    if args.report:
        write_atomic(args.report, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if sound else EXIT_BOUND


def cmd_selftest(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    names = args.suite or list(SUITES)
    failed = False
    for name in names:
        check = SUITES[name]
        t0 = time.perf_counter()
        status, detail = "pass", ""
        for k in range(args.seeds):
            for size in sizes:
                seed = args.seed + k
                try:
                    check(np.random.default_rng([seed, size]), size)
                except AssertionError as exc:
                    status, detail = "FAIL", f" seed={seed} size={size}: {exc}"
                    break
            if status == "FAIL":
                break
        failed |= status == "FAIL"
        print(f"{status} {name} ({time.perf_counter() - t0:.2f}s){detail}")
    return EXIT_SELFTEST if failed else EXIT_OK


def cmd_bench(args) -> int:
    N1 = args.N1 if args.N1 else int(args.n1 / args.density)
    res = run_bench(args.n1, N1, args.n2, args.repetitions, args.seed, signed=args.signed)
    text = res.reports[-1].text() + res.table()
    if args.report:
        write_atomic(args.report, text)
    sys.stdout.write(text)
    return EXIT_OK if res.agree else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sparseconv", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, v2=True):
        sp.add_argument("--v1", required=True, help="first vector file")
        if v2:
            sp.add_argument("--v2", required=True, help="second vector file")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1,
                        help="worker threads for per-assignment jobs; output never depends on it")
        sp.add_argument("--force-q", type=int, help="debug: force the prime q")
        sp.add_argument("--force-c", type=int, help="debug: force the degree bound c")
        sp.add_argument("--debug-pool", help="debug: comma-separated prime pool for compaction")

    sp = sub.add_parser("conv", help="convolve two vector files")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--report")
    sp.add_argument("--mode", choices=("fast", "naive", "verify"), default="fast")
    sp.add_argument("--compact", action="store_true", help="compact the index space first")
    sp.set_defaults(func=cmd_conv)

    sp = sub.add_parser("reduce", help="build and dump the reduction scheme of v1")
    common(sp, v2=False)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("compact", help="find a separating prime and remap both vectors")
    common(sp)
    sp.add_argument("--out", help="output prefix (writes <prefix>.v1 and <prefix>.v2)")
    sp.add_argument("--report")
    sp.add_argument("--max-n1", type=int, default=128)
    sp.set_defaults(func=cmd_compact)

    sp = sub.add_parser("selftest", help="seeded invariant suites")
    sp.add_argument("--seeds", type=int, default=3)
    sp.add_argument("--sizes", default="16,64")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--suite", action="append", choices=sorted(SUITES))
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("bench", help="time naive, dense FFT and fast paths")
    sp.add_argument("--n1", type=int, default=1 << 10)
    sp.add_argument("--N1", type=int, default=None)
    sp.add_argument("--n2", type=int, default=1 << 8)
    sp.add_argument("--density", type=float, default=2.0**-12,
                    help="n1 / N1, used when --N1 is absent")
    sp.add_argument("--repetitions", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--signed", action="store_true")
    sp.add_argument("--report")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except VerifyMismatch as exc:
        print(f"sparseconv: verify mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (BoundError, SchemeError, CompactionError) as exc:
        print(f"sparseconv: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (OSError, ParseError, ValueError) as exc:
        print(f"sparseconv: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
