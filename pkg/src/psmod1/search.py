"""Record search for small ||alpha p + beta|| over PS primes.

Streams PS primes p <= N_max, scores each window distance against the
target shape p^((11-12 gamma)/26) * log^6 p and emits every new minimum.
Every emitted distance is re-verified by an independent high-precision
evaluation (MPFR from the original spec strings, a code path disjoint
from the fixed-point route).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .core_arith import SCALE, FixedPointReal, is_rational_spec, pow_floor_batch
from .errors import PsToolError
from .ps_primes import (DEFAULT_SEGMENT_BITS, check_gamma, out_of_theorem_range,
                        primes_in_range, ps_weight_batch)

_VERIFY_BITS = 768
_VERIFY_TOL = 2.0 ** -100


@dataclass(frozen=True)
class SearchRecord:
    p: int
    n: int
    dist: float
    score: float
    is_record: bool


@dataclass
class SearchResult:
    records: list[SearchRecord]
    summary: dict


def _hp_real(spec: str, bits: int) -> gmpy2.mpfr:
    """Re-derive a spec string in MPFR, independent of the grid parser."""
    body = spec.strip()
    sign = 1
    if body.startswith("-"):
        sign, body = -1, body[1:].strip()
    if body.startswith("sqrt:"):
        val = gmpy2.sqrt(gmpy2.mpz(int(body[5:])))
    elif body == "golden":
        val = (1 + gmpy2.sqrt(gmpy2.mpz(5))) / 2
    elif body == "pi":
        val = gmpy2.const_pi()
    elif body == "e":
        val = gmpy2.exp(gmpy2.mpfr(1))
    else:
        fr = Fraction(body)
        val = gmpy2.mpfr(gmpy2.mpq(fr.numerator, fr.denominator))
    return sign * val


def hp_dist(alpha_spec: str, beta_spec: str, p: int,
            bits: int = _VERIFY_BITS) -> float:
    """||alpha p + beta|| via high-precision MPFR re-derivation."""
    with gmpy2.context(precision=bits):
        x = _hp_real(alpha_spec, bits) * p + _hp_real(beta_spec, bits)
        f = x - gmpy2.floor(x)
        return float(min(f, 1 - f))


def run_search(alpha: FixedPointReal, beta: FixedPointReal, gamma,
               n_max: int, delta: float | None = None,
               segment_bits: int = DEFAULT_SEGMENT_BITS,
               verify_specs: tuple[str, str] | None = None) -> SearchResult:
    """Score-record stream over PS primes up to n_max, plus a summary.

    Scores use the natural logarithm to the sixth power, exactly as the
    target inequality states; the raw distance is co-reported since the
    log factor dominates at desk scale.
    """
    check_gamma(gamma)
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    gf = float(gamma)
    expo = (11.0 - 12.0 * gf) / 26.0
    sa, sb = alpha.scaled, beta.scaled
    best = math.inf
    records: list[SearchRecord] = []
    ps_count = 0
    hits = 0
    for ps in primes_in_range(2, n_max + 1, segment_bits):
        w = ps_weight_batch(ps, gamma)
        sel = w >= 1
        if not sel.any():
            continue
        k1, ex1 = pow_floor_batch(ps[sel], gamma)
        ns = k1 + 1 - ex1.astype(k1.dtype)
        for p, n in zip(ps[sel].tolist(), ns.tolist()):
            ps_count += 1
            t = (sa * p + sb) & (SCALE - 1)
            d_scaled = min(t, SCALE - t)
            dist = d_scaled / SCALE
            if delta is not None and dist <= delta:
                hits += 1
            score = dist / (p ** expo * math.log(p) ** 6)
            if score < best:
                best = score
                records.append(SearchRecord(p, n, dist, score, True))
    if verify_specs is not None:
        a_spec, b_spec = verify_specs
        for rec in records:
            ref = hp_dist(a_spec, b_spec, rec.p)
            if abs(ref - rec.dist) > _VERIFY_TOL:
                raise PsToolError(
                    f"record at p={rec.p} failed high-precision re-verification "
                    f"({rec.dist} vs {ref})")
    degenerate = bool(verify_specs) and is_rational_spec(verify_specs[0])
    summary = {
        "n_max": n_max,
        "gamma": gf,
        "ps_prime_count": ps_count,
        "record_count": len(records),
        "min_score": records[-1].score if records else None,
        "min_dist": min((r.dist for r in records), default=None),
        "hits_within_delta": hits if delta is not None else None,
        "delta": delta,
        "degenerate_rational_alpha": degenerate,
        "out_of_theorem_range": out_of_theorem_range(gamma),
        "verified": verify_specs is not None,
    }
    return SearchResult(records, summary)
