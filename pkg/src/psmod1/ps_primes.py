"""Segmented prime sieving, arithmetic functions and PS-prime membership.

Every audit in the toolkit is a sum over primes p <= N, so sieving is
segmented (default 2^22 flags per segment, sized for cache residency) and
optionally backed by a small on-disk segment cache.  Piatetski-Shapiro
membership is computed from the p-side weight

    weight(p) = ceil((p+1)^gamma) - ceil(p^gamma)  in {0, 1},

the number of integers n with p^gamma <= n < (p+1)^gamma, using certified
floors; the n-side enumeration ([n^(1/gamma)] over all n) is kept as an
independent cross-check route.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .core_arith import pow_floor, pow_floor_batch
from .errors import GammaOutOfRange
from .summation import Kahan

DEFAULT_SEGMENT_BITS = 22
CACHE_ENV = "PSMOD1_SIEVE_CACHE"
_MAGIC = b"PSSV1"

GAMMA_MIN = Fraction(205, 243)   # PS primes exist for gamma above this
THEOREM_GAMMA_MIN = Fraction(11, 12)


@dataclass
class SieveSegment:
    """Primality flags for [base, base + len(flags))."""

    base: int
    flags: np.ndarray

    @property
    def length(self) -> int:
        return len(self.flags)

    def primes(self) -> np.ndarray:
        return self.base + np.nonzero(self.flags)[0].astype(np.int64)


def small_sieve(limit: int) -> np.ndarray:
    """Boolean primality array for 0..limit (inclusive)."""
    flags = np.ones(max(limit + 1, 2), dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i:: i] = False
    return flags


def base_primes(limit: int) -> np.ndarray:
    return np.nonzero(small_sieve(limit))[0].astype(np.int64)


def _segment_flags(base: int, length: int, bases: np.ndarray) -> np.ndarray:
    flags = np.ones(length, dtype=bool)
    hi = base + length
    for p in bases:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((base + p - 1) // p) * p)
        flags[start - base:: p] = False
    if base < 2:
        flags[: min(2 - base, length)] = False
    return flags


def _cache_path(cache_dir: str, base: int, length: int) -> str:
    return os.path.join(cache_dir, f"seg_{base:016x}_{length}.pssv1")


def write_segment_cache(path: str, seg: SieveSegment) -> None:
    """Cache format: magic "PSSV1", base u64, length u64, packed bits."""
    payload = np.packbits(seg.flags).tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", seg.base, seg.length))
        fh.write(payload)


def read_segment_cache(path: str) -> SieveSegment | None:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError:
        return None
    if len(blob) < 21 or blob[:5] != _MAGIC:
        return None
    base, length = struct.unpack("<QQ", blob[5:21])
    bits = np.frombuffer(blob[21:], dtype=np.uint8)
    if len(bits) * 8 < length:
        return None
    flags = np.unpackbits(bits)[:length].astype(bool)
    return SieveSegment(base, flags)


def sieve(lo: int, hi: int, segment_bits: int = DEFAULT_SEGMENT_BITS,
          cache_dir: str | None = None) -> Iterator[SieveSegment]:
    """Stream primality flags for [lo, hi) in ascending aligned segments.

    Yielded segments are trimmed to [lo, hi); the cache (if enabled via
    the cache_dir argument or the PSMOD1_SIEVE_CACHE environment variable)
    stores full power-of-two aligned segments and is safe to delete at any
    time.
    """
    if hi <= lo:
        return
    if hi > 1 << 63:
        raise ValueError("sieve range exceeds 2^63")
    seg_len = 1 << segment_bits
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV) or None
    bases = base_primes(math.isqrt(hi) + 1)
    base = (lo // seg_len) * seg_len
    while base < hi:
        seg = None
        if cache_dir:
            seg = read_segment_cache(_cache_path(cache_dir, base, seg_len))
            if seg is not None and (seg.base != base or seg.length != seg_len):
                seg = None
        if seg is None:
            seg = SieveSegment(base, _segment_flags(base, seg_len, bases))
            if cache_dir:
                os.makedirs(cache_dir, exist_ok=True)
                write_segment_cache(_cache_path(cache_dir, base, seg_len), seg)
        a = max(lo, base) - base
        b = min(hi, base + seg_len) - base
        yield SieveSegment(base + a, seg.flags[a:b])
        base += seg_len


def primes_in_range(lo: int, hi: int, segment_bits: int = DEFAULT_SEGMENT_BITS,
                    cache_dir: str | None = None) -> Iterator[np.ndarray]:
    for seg in sieve(lo, hi, segment_bits, cache_dir):
        ps = seg.primes()
        if len(ps):
            yield ps


def count_primes(lo: int, hi: int, segment_bits: int = DEFAULT_SEGMENT_BITS) -> int:
    return sum(int(seg.flags.sum()) for seg in sieve(lo, hi, segment_bits))


def iter_prime_logs(hi: int, segment_bits: int = DEFAULT_SEGMENT_BITS
                    ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """(primes, log primes) segments for p <= hi, ascending.

    Shared by the Chebyshev sum and the exponential sums so that the
    alpha = 0 case reproduces theta(X) bit for bit.
    """
    for ps in primes_in_range(2, hi + 1, segment_bits):
        yield ps, np.log(ps.astype(np.float64))


def chebyshev_theta(x: int, segment_bits: int = DEFAULT_SEGMENT_BITS) -> float:
    """theta(x) = sum of log p over primes p <= x."""
    acc = Kahan()
    for _, logs in iter_prime_logs(x, segment_bits):
        acc.add(float(np.sum(logs)))
    return acc.total


# ---------------------------------------------------------------------------
# arithmetic functions

def lambda_(n: int) -> float:
    """von Mangoldt: log p when n is a prime power p^k, else 0."""
    if n < 2:
        return 0.0
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return math.log(n)


def mu(n: int) -> int:
    """Moebius function."""
    if n < 1:
        raise ValueError("mu(n) needs n >= 1")
    if n == 1:
        return 1
    out = 1
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
    if n > 1:
        out = -out
    return out


def tau(n: int) -> int:
    """Number of positive divisors."""
    if n < 1:
        raise ValueError("tau(n) needs n >= 1")
    out = 1
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out *= k + 1
    if n > 1:
        out *= 2
    return out


def mobius_upto(limit: int) -> np.ndarray:
    """mu(0..limit) as an int8 array, linear sieve."""
    mu_arr = np.zeros(limit + 1, dtype=np.int8)
    if limit >= 1:
        mu_arr[1] = 1
    is_comp = np.zeros(limit + 1, dtype=bool)
    primes: list[int] = []
    for i in range(2, limit + 1):
        if not is_comp[i]:
            primes.append(i)
            mu_arr[i] = -1
        for p in primes:
            if i * p > limit:
                break
            is_comp[i * p] = True
            if i % p == 0:
                mu_arr[i * p] = 0
                break
            mu_arr[i * p] = -mu_arr[i]
    return mu_arr


def lambda_range(n1: int, n2: int,
                 segment_bits: int = DEFAULT_SEGMENT_BITS) -> np.ndarray:
    """Lambda(n) for n in (n1, n2], as a float64 array of length n2-n1."""
    out = np.zeros(n2 - n1, dtype=np.float64)
    for ps in primes_in_range(n1 + 1, n2 + 1, segment_bits):
        out[ps - (n1 + 1)] = np.log(ps.astype(np.float64))
    for p in base_primes(math.isqrt(n2)):
        p = int(p)
        logp = math.log(p)
        pk = p * p
        while pk <= n2:
            if pk > n1:
                out[pk - (n1 + 1)] = logp
            pk *= p
    return out


# ---------------------------------------------------------------------------
# Piatetski-Shapiro membership

@dataclass(frozen=True)
class PsWeight:
    p: int
    weight: int


def check_gamma(gamma) -> None:
    g = Fraction(gamma)
    if not GAMMA_MIN < g < 1:
        raise GammaOutOfRange(
            f"gamma={gamma} outside (205/243, 1); no PS-prime lower bound there")


def out_of_theorem_range(gamma) -> bool:
    g = Fraction(gamma)
    return g <= THEOREM_GAMMA_MIN


def ps_weight(p: int, gamma) -> PsWeight:
    """Weight [-p^gamma] - [-(p+1)^gamma] in {0, 1} via certified floors."""
    check_gamma(gamma)
    lo = pow_floor(p, gamma)
    hi = pow_floor(p + 1, gamma)
    w = (hi.value - lo.value
         + int(lo.is_integer_power) - int(hi.is_integer_power))
    return PsWeight(p, w)


def ps_weight_batch(ps: np.ndarray, gamma) -> np.ndarray:
    """Vectorized PS weights for an array of primes."""
    check_gamma(gamma)
    k1, x1 = pow_floor_batch(ps, gamma)
    k2, x2 = pow_floor_batch(ps + 1, gamma)
    w = k2 - k1 + x1.astype(np.int64) - x2.astype(np.int64)
    return w


@dataclass(frozen=True)
class PsCountReport:
    x: int
    gamma: float
    count: int
    reference: float
    ratio: float
    out_of_theorem_range: bool


def ps_count(x: int, gamma, segment_bits: int = DEFAULT_SEGMENT_BITS) -> PsCountReport:
    """Count PS primes <= x and compare with x^gamma / log x."""
    if x < 3:
        raise ValueError("ps_count needs x >= 3")
    check_gamma(gamma)
    gf = float(gamma)
    count = 0
    for ps in primes_in_range(2, x + 1, segment_bits):
        count += int(ps_weight_batch(ps, gamma).sum())
    reference = x ** gf / math.log(x)
    return PsCountReport(x, gf, count, reference, count / reference,
                         out_of_theorem_range(gamma))


def pside_ps_primes(x: int, gamma,
                    segment_bits: int = DEFAULT_SEGMENT_BITS) -> np.ndarray:
    """PS primes <= x via the weight route (primary)."""
    chunks = []
    for ps in primes_in_range(2, x + 1, segment_bits):
        w = ps_weight_batch(ps, gamma)
        chunks.append(ps[w >= 1])
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def nside_ps_primes(x: int, gamma,
                    segment_bits: int = DEFAULT_SEGMENT_BITS) -> np.ndarray:
    """PS primes <= x via {[n^(1/gamma)]} (independent cross-check route)."""
    check_gamma(gamma)
    if x > 1 << 26:
        raise ValueError("n-side enumeration is a cross-check tool; x too large")
    theta = (Fraction(1) / Fraction(gamma)) if isinstance(gamma, (Fraction, int)) \
        else 1.0 / gamma
    is_p = small_sieve(x)
    n_hi = int(math.ceil((x + 1) ** float(gamma))) + 2
    found = []
    for start in range(1, n_hi + 1, 1 << 20):
        stop = min(n_hi + 1, start + (1 << 20))
        ns = np.arange(start, stop, dtype=np.int64)
        ms, _ = pow_floor_batch(ns, theta)
        keep = ms <= x
        ms = ms[keep]
        found.append(ms[is_p[ms]])
    out = np.unique(np.concatenate(found)) if found else np.empty(0, np.int64)
    return out.astype(np.int64)
