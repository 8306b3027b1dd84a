import pytest
import gmpy2
from hypothesis import given
from hypothesis import strategies as st

from sparseconv.primes import gen_primes, is_prime, next_prime


def test_is_prime_examples():
    assert is_prime(13)
    assert not is_prime(1) and not is_prime(4) and not is_prime(0)
    assert is_prime(2**61 - 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7
    assert not is_prime(2**64 - 59 + 2)


@given(st.integers(0, 2**64))
def test_is_prime_agrees_with_gmpy(n):
    assert is_prime(n) == bool(gmpy2.is_prime(n, 50))


def test_gen_primes():
    assert gen_primes(3, 10) == [11, 13, 17]
    assert gen_primes(1, 2) == [2]
    ps = gen_primes(8**3 + 1, 8**4)
    assert len(ps) == 513 and len(set(ps)) == 513 and min(ps) >= 4096
    assert ps == sorted(ps)
    # consecutive: no prime skipped
    assert all(next_prime(a + 1) == b for a, b in zip(ps, ps[1:]))


def test_gen_primes_large_bound():
    ps = gen_primes(5, 2**62)
    assert ps[0] == next_prime(2**62)
    assert all(is_prime(p) for p in ps)


@pytest.mark.parametrize("n, p", [(0, 2), (2, 2), (14, 17), (8192, 8209)])
def test_next_prime(n, p):
    assert next_prime(n) == p
