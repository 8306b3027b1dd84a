"""Deterministic length reduction for sparse convolution."""

__version__ = "0.1.0"

from .compaction import (
    CompactionResult,
    PrimePool,
    ProductTree,
    build_pool,
    compact,
    find_good_prime,
    pairwise_diff_product,
    product_tree,
)
from .correlation import exact_cyclic_correlation
from .engine import (
    RecoveryReport,
    brute_convolution,
    fast_sparse_convolution,
    run_convolution,
    verified_convolution,
)
from .errors import (
    BoundError,
    CompactionError,
    ParseError,
    SchemeError,
    SparseConvError,
    VerifyMismatch,
)
from .model import SparseVector, parse_sparse_vector, serialize_sparse_vector
from .polyenc import (
    EncodingParams,
    IndexPolynomial,
    aligned_variant_of_sum,
    encode_base,
    evaluate,
    make_variants,
)
from .primes import gen_primes, is_prime
from .scheme import (
    ReducedBundle,
    ReductionConfig,
    ReductionScheme,
    SingletonTable,
    build_scheme,
    build_singleton_table,
    candidate_assignments,
    choose_parameters,
    reduce_v1,
    reduce_v2,
    select_assignments,
)
