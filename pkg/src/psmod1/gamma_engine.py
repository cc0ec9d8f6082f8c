"""Parameter schedule, discrepancy sums and their envelope audits.

Two labeled modes: "schedule" derives every quantity from the convergent
denominator q (faithful to the asymptotic schedule, whose window width
only drops below 1/4 at astronomically large N), and "desk" takes N and
the window width directly so equidistribution can be measured at feasible
sizes.  The window sums run over primes only; Lambda-weighted prime-power
sums live in expsums.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core_arith import SCALE, FixedPointReal, pow_floor_batch
from .errors import GammaOutOfRange, InvalidDelta
from .ps_primes import (DEFAULT_SEGMENT_BITS, THEOREM_GAMMA_MIN, check_gamma,
                        iter_prime_logs, out_of_theorem_range, sieve)
from .summation import Kahan


@dataclass(frozen=True)
class ParamSet:
    """The derived parameter collection {q, gamma, C, N, Delta, H, M, v}."""

    gamma: float
    gamma_exact: Fraction
    C: float
    q: int | None
    N: float
    Delta: float
    H: int
    M: float
    v: float
    mode: str
    delta_too_large: bool
    out_of_theorem_range: bool

    def to_dict(self) -> dict:
        return {
            "mode": self.mode, "q": self.q, "gamma": self.gamma,
            "gamma_exact": str(self.gamma_exact), "C": self.C, "N": self.N,
            "Delta": self.Delta, "H": self.H, "M": self.M, "v": self.v,
            "delta_too_large": self.delta_too_large,
            "out_of_theorem_range": self.out_of_theorem_range,
        }


def _exponents(gf: float) -> tuple[float, float, float]:
    """(Delta, M, v) exponents in N."""
    return ((11.0 - 12.0 * gf) / 26.0,
            (15.0 - 14.0 * gf) / 26.0,
            (29.0 - 8.0 * gf) / 52.0)


def derive_params(q: int, gamma, C: float = 1.0) -> ParamSet:
    """Schedule mode: N = q^(13/(12-6 gamma)) and everything from it.

    Requires gamma in (11/12, 1).  DeltaTooLarge is flagged (not raised):
    at feasible q the schedule window always exceeds 1/4.
    """
    gx = Fraction(gamma)
    if not THEOREM_GAMMA_MIN < gx < 1:
        raise GammaOutOfRange(f"schedule mode needs gamma in (11/12, 1), got {gamma}")
    if q < 2:
        raise ValueError("q must be >= 2")
    if C <= 0:
        raise ValueError("C must be positive")
    gf = float(gamma)
    N = q ** (13.0 / (12.0 - 6.0 * gf))
    e_delta, e_m, e_v = _exponents(gf)
    delta = C * N ** e_delta * math.log(N) ** 6
    return ParamSet(gf, gx, C, q, N, delta, math.isqrt(q),
                    N ** e_m, N ** e_v, "schedule",
                    delta >= 0.25, out_of_theorem_range(gx))


def desk_params(N: float, gamma, delta: float | None = None,
                C: float = 1.0) -> ParamSet:
    """Desk mode: N chosen directly, window width usually overridden.

    q is back-solved from N so H = [sqrt(q)], M and v keep their N-shape.
    gamma may range over (205/243, 1); out-of-theorem-range runs are
    tagged.
    """
    check_gamma(gamma)
    if N < 10:
        raise ValueError("N too small")
    gf = float(gamma)
    q_eff = max(2, round(N ** ((12.0 - 6.0 * gf) / 13.0)))
    e_delta, e_m, e_v = _exponents(gf)
    if delta is None:
        delta = C * N ** e_delta * math.log(N) ** 6
    return ParamSet(gf, Fraction(gamma), C, q_eff, float(N), float(delta),
                    math.isqrt(q_eff), N ** e_m, N ** e_v, "desk",
                    delta >= 0.25, out_of_theorem_range(gamma))


@dataclass(frozen=True)
class GammaReport:
    gamma_total: float          # Gamma = hits_weighted - expected, exactly
    gamma1: float
    gamma2: float
    hits_weighted: float        # sum F * weight * log p
    expected: float             # 2 Delta * sum weight * log p
    mass: float                 # sum weight * log p
    discrepancy_ratio: float | None
    envelope: float
    envelope_ratio: float
    identity_residual: float
    prime_count: int
    ps_prime_count: int
    hit_count: int
    N_used: int
    params: ParamSet
    alpha_label: str
    beta_label: str
    segment_bits: int
    workers: int

    def to_dict(self) -> dict:
        return {
            "Gamma": self.gamma_total, "Gamma1": self.gamma1,
            "Gamma2": self.gamma2, "hits_weighted": self.hits_weighted,
            "expected": self.expected, "mass": self.mass,
            "discrepancy_ratio": self.discrepancy_ratio,
            "envelope": self.envelope, "envelope_ratio": self.envelope_ratio,
            "identity_residual": self.identity_residual,
            "prime_count": self.prime_count,
            "ps_prime_count": self.ps_prime_count,
            "hit_count": self.hit_count, "N_used": self.N_used,
            "alpha": self.alpha_label, "beta": self.beta_label,
            "segment_bits": self.segment_bits, "workers": self.workers,
            "params": self.params.to_dict(),
        }


def _scan_args(params: ParamSet, alpha: FixedPointReal, beta: FixedPointReal,
               delta: FixedPointReal, segment_bits: int):
    n_used = int(params.N)
    gx = params.gamma_exact
    seg_len = 1 << segment_bits
    args = []
    base = 0
    while base <= n_used:
        args.append((base, min(base + seg_len, n_used + 1),
                     alpha.scaled, beta.scaled, delta.scaled,
                     gx.numerator, gx.denominator, segment_bits))
        base += seg_len
    return args


def _scan_segment(arg) -> tuple:
    """Window statistics for primes in [lo, hi): pure function of its args."""
    (lo, hi, sa, sb, sd, gnum, gden, segment_bits) = arg
    gamma = Fraction(gnum, gden)
    gf = float(gamma)
    mask = SCALE - 1
    cut_hi = SCALE - sd
    n_primes = n_ps = n_hits = 0
    mass = hits_w = g1 = g2 = 0.0
    for seg in sieve(lo, hi, segment_bits):
        ps = seg.primes()
        if not len(ps):
            continue
        k1, ex1 = pow_floor_batch(ps, gamma)
        k2, ex2 = pow_floor_batch(ps + 1, gamma)
        w = (k2 - k1 + ex1.astype(np.int64) - ex2.astype(np.int64))
        x1 = np.power(ps.astype(np.float64), gf)
        x2 = np.power((ps + 1).astype(np.float64), gf)
        smooth = x2 - x1
        # psi(-x) = 1/2 - {x} - [x integer]; the exact-integer-power flags
        # carry the correction (triggers e.g. at Mersenne p+1 = 2^b)
        psidiff = (x1 - k1) - (x2 - k2) + ex1 - ex2
        logs = np.log(ps.astype(np.float64))
        hits = np.empty(len(ps), dtype=bool)
        for i, p in enumerate(ps.tolist()):
            t = (sa * p + sb) & mask
            hits[i] = t < sd or t >= cut_hi
        two_delta = 2.0 * (sd / SCALE)
        coef = hits.astype(np.float64) - two_delta
        wf = w.astype(np.float64)
        n_primes += len(ps)
        n_ps += int(w.sum())
        n_hits += int(np.count_nonzero(hits & (w >= 1)))
        mass += float(np.sum(wf * logs))
        hits_w += float(np.sum(logs[hits & (w >= 1)] * w[hits & (w >= 1)]))
        g1 += float(np.sum(smooth * coef * logs))
        g2 += float(np.sum(psidiff * coef * logs))
    return (lo, n_primes, n_ps, n_hits, mass, hits_w, g1, g2)


def gamma_sum(params: ParamSet, alpha: FixedPointReal, beta: FixedPointReal,
              delta: FixedPointReal | None = None,
              segment_bits: int = DEFAULT_SEGMENT_BITS,
              workers: int = 1) -> GammaReport:
    """The discrepancy sum over PS primes p <= N with its decomposition.

    Gamma = sum (F_Delta(alpha p + beta) - 2 Delta) weight(p) log p, split
    into the smooth part (gamma1) and the sawtooth part (gamma2).  Partial
    sums are per fixed-size segment and folded in ascending order, so the
    result is bit-stable for a given segment_bits regardless of workers.
    """
    if delta is None:
        delta = FixedPointReal.from_fraction(Fraction(params.Delta), "Delta")
    dval = delta.scaled / SCALE
    if not 0.0 < dval < 0.25:
        raise InvalidDelta(
            f"window width {dval} outside (0, 1/4); use desk mode with an "
            "explicit --delta at feasible N")
    args = _scan_args(params, alpha, beta, delta, segment_bits)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_scan_segment, args))
    else:
        partials = [_scan_segment(a) for a in args]
    partials.sort(key=lambda t: t[0])
    n_primes = n_ps = n_hits = 0
    mass_k, hits_k, g1_k, g2_k = Kahan(), Kahan(), Kahan(), Kahan()
    for (_, np_, nps_, nh_, mass_, hw_, g1_, g2_) in partials:
        n_primes += np_
        n_ps += nps_
        n_hits += nh_
        mass_k.add(mass_)
        hits_k.add(hw_)
        g1_k.add(g1_)
        g2_k.add(g2_)
    two_delta = 2.0 * dval
    mass = mass_k.total
    expected = two_delta * mass
    gamma_total = hits_k.total - expected
    g1, g2 = g1_k.total, g2_k.total
    residual = abs(gamma_total - (g1 + g2))
    gf = params.gamma
    n_used = int(params.N)
    envelope = n_used ** ((14.0 * gf + 11.0) / 26.0) * math.log(n_used) ** 5
    return GammaReport(
        gamma_total, g1, g2, hits_k.total, expected, mass,
        (abs(gamma_total) / expected) if expected > 0 else None,
        envelope, abs(gamma_total) / envelope, residual,
        n_primes, n_ps, n_hits, n_used, params,
        alpha.label, beta.label, segment_bits, workers)


def gamma_split(params: ParamSet, alpha: FixedPointReal, beta: FixedPointReal,
                delta: FixedPointReal | None = None,
                segment_bits: int = DEFAULT_SEGMENT_BITS,
                workers: int = 1) -> tuple[float, float, float]:
    """(Gamma1, Gamma2, identity residual) from the same scan as gamma_sum."""
    rep = gamma_sum(params, alpha, beta, delta, segment_bits, workers)
    return rep.gamma1, rep.gamma2, rep.identity_residual


@dataclass(frozen=True)
class FrakSReport:
    value: float
    envelope: float
    ratio: float
    per_h: tuple[float, ...]
    u: int
    N: int
    gamma: float


def frak_s(u: int, N: int, gamma, alpha: FixedPointReal,
           segment_bits: int = DEFAULT_SEGMENT_BITS) -> FrakSReport:
    """sum_{h<=u} |sum_{p<=N} p^(gamma-1) e(alpha h p) log p|.

    Envelope u * N^((14 gamma + 11)/26) * log^4 N; nondecreasing in u by
    construction.
    """
    if u < 1 or N < 3:
        raise ValueError("need u >= 1 and N >= 3")
    gf = float(gamma)
    per_h = []
    total = Kahan()
    for h in range(1, u + 1):
        sah = alpha.mul_int(h).scaled
        re_k, im_k = Kahan(), Kahan()
        for ps, logs in iter_prime_logs(N, segment_bits):
            coeff = np.power(ps.astype(np.float64), gf - 1.0) * logs
            if sah == 0:
                re_k.add(float(np.sum(coeff)))
            else:
                top = [((sah * int(p)) & (SCALE - 1)) >> (192 - 64)
                       for p in ps]
                w = (2.0 * math.pi / float(1 << 64)) * np.array(top, dtype=np.float64)
                re_k.add(float(np.sum(np.cos(w) * coeff)))
                im_k.add(float(np.sum(np.sin(w) * coeff)))
        mag = math.hypot(re_k.total, im_k.total)
        per_h.append(mag)
        total.add(mag)
    envelope = u * N ** ((14.0 * gf + 11.0) / 26.0) * math.log(N) ** 4
    return FrakSReport(total.total, envelope, total.total / envelope,
                       tuple(per_h), u, N, gf)


@dataclass(frozen=True)
class EnvelopeAuditRow:
    N: int
    envelope_ratio: float
    discrepancy_ratio: float | None


@dataclass(frozen=True)
class EnvelopeAudit:
    rows: tuple[EnvelopeAuditRow, ...]
    trend_nonincreasing: bool

    def to_dict(self) -> dict:
        return {
            "rows": [{"N": r.N, "envelope_ratio": r.envelope_ratio,
                      "discrepancy_ratio": r.discrepancy_ratio}
                     for r in self.rows],
            "trend_nonincreasing": self.trend_nonincreasing,
        }


def envelope_audit(reports: list[GammaReport]) -> EnvelopeAudit:
    """Ratio table across an N-ladder of gamma reports.

    The equidistribution trend flag records whether the discrepancy ratio
    is nonincreasing in N; it is reported, not asserted.
    """
    rows = sorted(
        (EnvelopeAuditRow(r.N_used, r.envelope_ratio, r.discrepancy_ratio)
         for r in reports), key=lambda row: row.N)
    trend = all(
        a.discrepancy_ratio is not None and b.discrepancy_ratio is not None
        and b.discrepancy_ratio <= a.discrepancy_ratio
        for a, b in zip(rows, rows[1:]))
    return EnvelopeAudit(tuple(rows), trend)
