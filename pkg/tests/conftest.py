"""Shared independent oracles for the test suite.

Everything here is deliberately written with a different algorithm (and
mostly a different library) than the package code it checks: bytearray
trial sieves instead of numpy slicing, mpmath instead of gmpy2, divisor
loops instead of linear sieves.
"""

import math

import pytest
from mpmath import mp


def oracle_primes(limit):
    """Primes <= limit by a plain bytearray sieve."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    i = 2
    while i * i <= limit:
        if flags[i]:
            for j in range(i * i, limit + 1, i):
                flags[j] = 0
        i += 1
    return [i for i in range(2, limit + 1) if flags[i]]


def oracle_prime_set(limit):
    return set(oracle_primes(limit))


def oracle_spf(limit):
    """Smallest prime factor table (0 for n < 2)."""
    spf = list(range(limit + 1))
    i = 2
    while i * i <= limit:
        if spf[i] == i:
            for j in range(i * i, limit + 1, i):
                if spf[j] == j:
                    spf[j] = i
        i += 1
    return spf


def oracle_lambda_table(limit):
    """von Mangoldt values for 0..limit via the spf table."""
    spf = oracle_spf(limit)
    lam = [0.0] * (limit + 1)
    for n in range(2, limit + 1):
        p = spf[n]
        m = n
        while m % p == 0:
            m //= p
        if m == 1:
            lam[n] = math.log(p)
    return lam


def oracle_mu(n):
    if n == 1:
        return 1
    out = 1
    d = 2
    while d * d <= n:
        if n % d == 0:
            n //= d
            if n % d == 0:
                return 0
            out = -out
        d += 1
    return -out if n > 1 else out


def oracle_tau(n):
    count = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            count += 1 if d * d == n else 2
        d += 1
    return count


def mp_frac(x):
    return x - mp.floor(x)


def mp_dist(x):
    f = mp_frac(x)
    return min(f, 1 - f)


@pytest.fixture(scope="session")
def sqrt2():
    from psmod1 import parse_real
    return parse_real("sqrt:2")


@pytest.fixture(scope="session")
def golden():
    from psmod1 import parse_real
    return parse_real("golden")


@pytest.fixture(scope="session")
def zero():
    from psmod1 import parse_real
    return parse_real("0")
