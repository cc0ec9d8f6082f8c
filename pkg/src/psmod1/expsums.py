"""Prime exponential sums, the Vaughan decomposition and inequality checks.

Values are computed by direct summation (phases of alpha*h*n taken on the
exact fixed-point grid); each comes paired with its bound envelope at
implied constant 1, so the primary outputs are ratios, not pass/fail.
Lambda-weighted sums include prime powers (the definition of the von
Mangoldt weight); the window sums over primes live in gamma_engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_arith import SCALE, FixedPointReal
from .errors import InvalidLambda, RegimeViolation
from .ps_primes import (DEFAULT_SEGMENT_BITS, iter_prime_logs, lambda_,
                        lambda_range, mobius_upto)
from .rational_approx import DirichletApprox
from .summation import Kahan, KahanComplex

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ExpSumReport:
    value: complex
    abs: float
    bound: float
    ratio: float
    parameters: dict


def _phase_fracs(scaled_multiplier: int, ns) -> np.ndarray:
    """{multiplier * n} for integer n, exactly on the grid, as float64.

    Only the top 64 fractional bits survive the float conversion, which is
    far below any phase resolution e() can see.
    """
    top = [((scaled_multiplier * int(n)) & (SCALE - 1)) >> (192 - 64) for n in ns]
    return np.array(top, dtype=np.float64) / float(1 << 64)


def make_phase(alpha: FixedPointReal, h: int, m: int, gamma
               ) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized phase n -> alpha*h*n - m*n^gamma, reduced near [-1, 1).

    The linear part is exact on the fixed-point grid; the power part is
    reduced modulo one in 80-bit extended precision (error ~ |m| n^gamma
    * 2^-63).
    """
    sah = alpha.mul_int(h).scaled
    gf = float(gamma)

    def phase(ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        a = _phase_fracs(sah, ns) if sah else np.zeros(len(ns))
        if m:
            g = np.power(ns.astype(np.longdouble), np.longdouble(gf)) * m
            b = (g - np.floor(g)).astype(np.float64)
        else:
            b = np.zeros(len(ns))
        return a - b

    return phase


def s_of_x(alpha: FixedPointReal, X: int, approx: DirichletApprox,
           segment_bits: int = DEFAULT_SEGMENT_BITS) -> ExpSumReport:
    """S(X) = sum_{p<=X} e(alpha p) log p with its bound envelope.

    Bound: (X q^(-1/2) + X^(4/5) + X^(1/2) q^(1/2)) log^4 X at q = approx.q_h.
    """
    if X < 2:
        raise ValueError("X must be >= 2")
    acc = KahanComplex()
    sa = alpha.scaled
    for ps, logs in iter_prime_logs(X, segment_bits):
        if sa == 0:
            re = float(np.sum(logs))
            im = 0.0
        else:
            w = _TWO_PI * _phase_fracs(sa, ps)
            re = float(np.sum(np.cos(w) * logs))
            im = float(np.sum(np.sin(w) * logs))
        acc.add(complex(re, im))
    value = acc.total
    q = approx.q_h
    logx = math.log(X)
    bound = (X / math.sqrt(q) + X ** 0.8 + math.sqrt(X * q)) * logx ** 4
    return ExpSumReport(value, abs(value), bound, abs(value) / bound,
                        {"X": X, "alpha": alpha.label, "q_h": q,
                         "bound_Q": approx.bound_Q})


def theta_sum(N1: int, N2: int, alpha: FixedPointReal, h: int, m: int, gamma,
              segment_bits: int = DEFAULT_SEGMENT_BITS) -> ExpSumReport:
    """Theta(N1, N2) = sum_{N1<n<=N2} Lambda(n) e(alpha h n - m n^gamma).

    The linear part of the phase is exact on the grid; the m n^gamma part
    is reduced in 80-bit extended precision (phase error ~ |m| N2^gamma
    * 2^-63, recorded in the report parameters).  Bound:
    N2^((gamma+11)/13) log^3 N2.
    """
    if not 2 <= N1 < N2:
        raise ValueError("need 2 <= N1 < N2")
    gf = float(gamma)
    lam = lambda_range(N1, N2, segment_bits)
    nz = np.nonzero(lam)[0]
    ns = nz + N1 + 1
    w = _TWO_PI * make_phase(alpha, h, m, gamma)(ns)
    lamnz = lam[nz]
    acc = KahanComplex()
    step = 1 << segment_bits
    for i in range(0, len(ns), step):
        sl = slice(i, i + step)
        acc.add(complex(float(np.sum(np.cos(w[sl]) * lamnz[sl])),
                        float(np.sum(np.sin(w[sl]) * lamnz[sl]))))
    value = acc.total
    bound = N2 ** ((gf + 11.0) / 13.0) * math.log(N2) ** 3
    phase_ulp = abs(m) * N2 ** gf * 2.0 ** -63
    return ExpSumReport(value, abs(value), bound, abs(value) / bound,
                        {"N1": N1, "N2": N2, "alpha": alpha.label, "h": h,
                         "m": m, "gamma": gf, "phase_ulp": phase_ulp})


# ---------------------------------------------------------------------------
# Vaughan's identity

@dataclass(frozen=True)
class VaughanParts:
    """The four pieces with reconstruction = U1 - U2 - U3 - U4."""

    U1: complex
    U2: complex
    U3: complex
    U4: complex
    v: int
    reconstruction: complex


def vaughan_coefficients(d: int, v: int) -> tuple[float, int]:
    """(c(d), a(d)) for the decomposition at cutoff v.

    c(d) = sum_{rs=d, r<=v, s<=v} mu(r) Lambda(s), |c(d)| <= log d;
    a(d) = sum_{r|d, r<=v} mu(r), |a(d)| <= tau(d).
    """
    if d < 1 or v < 1:
        raise ValueError("need d >= 1 and v >= 1")
    mob = mobius_upto(min(v, d))
    c = 0.0
    a = 0
    for r in range(1, min(v, d) + 1):
        if d % r or not mob[r]:
            continue
        a += int(mob[r])
        s = d // r
        if s <= v:
            c += int(mob[r]) * lambda_(s)
    return c, a


def _c_array(v: int) -> np.ndarray:
    """c(d) for d = 0..v^2 by sieving mu(r) against Lambda(s), r,s <= v."""
    mob = mobius_upto(v)
    lam = lambda_range(0, v)  # Lambda(1..v)
    c = np.zeros(v * v + 1, dtype=np.float64)
    s_vals = np.nonzero(lam)[0] + 1
    for r in range(1, v + 1):
        if mob[r]:
            c[r * s_vals] += int(mob[r]) * lam[s_vals - 1]
    return c


def _a_array(dmax: int, v: int) -> np.ndarray:
    """a(d) for d = 0..dmax via divisor sieve over r <= v."""
    mob = mobius_upto(v)
    a = np.zeros(dmax + 1, dtype=np.int64)
    for r in range(1, min(v, dmax) + 1):
        if mob[r]:
            a[r::r] += int(mob[r])
    return a


def _phase_table(N1: int, N2: int, f: Callable[[np.ndarray], np.ndarray]
                 ) -> np.ndarray:
    """e(f(n)) for n in (N1, N2] as a complex vector."""
    ns = np.arange(N1 + 1, N2 + 1, dtype=np.int64)
    w = _TWO_PI * np.asarray(f(ns), dtype=np.float64)
    return np.cos(w) + 1j * np.sin(w)


def vaughan_decompose(N1: int, N2: int, f: Callable[[np.ndarray], np.ndarray],
                      v: int) -> VaughanParts:
    """Vaughan decomposition of sum_{N1<n<=N2} Lambda(n) e(f(n)).

    f maps an int64 array of n values to real phases.  Valid regime
    N1 >= v^2 is enforced; there reconstruction = U1 - U2 - U3 - U4 equals
    the direct sum up to float rounding.
    """
    if v < 2:
        raise ValueError("v must be >= 2")
    if not N1 < N2:
        raise ValueError("need N1 < N2")
    if N1 < v * v:
        raise RegimeViolation(f"identity asserted only for N1 >= v^2 "
                              f"(N1={N1}, v^2={v * v})")
    E = _phase_table(N1, N2, f)
    base = N1 + 1

    def dot_range(d: int, weights_fn, lo: int | None = None) -> complex:
        l0 = (N1 // d + 1) if lo is None else max(lo, N1 // d) + 1
        l1 = N2 // d
        if l0 > l1:
            return 0.0 + 0.0j
        ls = np.arange(l0, l1 + 1, dtype=np.int64)
        return complex(np.dot(weights_fn(ls), E[ls * d - base]))

    mob = mobius_upto(v)
    u1 = KahanComplex()
    for d in range(1, v + 1):
        if mob[d]:
            u1.add(int(mob[d]) * dot_range(d, lambda ls: np.log(ls.astype(float))))
    carr = _c_array(v)
    u2 = KahanComplex()
    u3 = KahanComplex()
    ones = np.ones
    for d in np.nonzero(carr)[0]:
        d = int(d)
        if d > N2:
            break
        piece = float(carr[d]) * dot_range(d, lambda ls: ones(len(ls)))
        if d <= v:
            u2.add(piece)
        else:
            u3.add(piece)
    dmax = N2 // (v + 1)
    aarr = _a_array(dmax, v)
    lam_l = lambda_range(0, dmax)
    u4 = KahanComplex()
    for d in np.nonzero(aarr[v + 1:])[0] + v + 1:
        d = int(d)
        u4.add(int(aarr[d]) * dot_range(d, lambda ls: lam_l[ls - 1], lo=v))
    U1, U2, U3, U4 = u1.total, u2.total, u3.total, u4.total
    return VaughanParts(U1, U2, U3, U4, v, U1 - U2 - U3 - U4)


def direct_lambda_sum(N1: int, N2: int, f: Callable[[np.ndarray], np.ndarray],
                      segment_bits: int = DEFAULT_SEGMENT_BITS) -> complex:
    """sum_{N1<n<=N2} Lambda(n) e(f(n)) by direct evaluation."""
    lam = lambda_range(N1, N2, segment_bits)
    nz = np.nonzero(lam)[0]
    ns = nz + N1 + 1
    w = _TWO_PI * np.asarray(f(ns), dtype=np.float64)
    return complex(np.dot(lam[nz], np.cos(w) + 1j * np.sin(w)))


# ---------------------------------------------------------------------------
# inequality checkers

@dataclass(frozen=True)
class VdcReport:
    lhs: float
    rhs: float
    ratio: float
    interval: tuple[int, int]
    lam: float


def van_der_corput_check(f: Callable[[np.ndarray], np.ndarray],
                         a: int, b: int, lam: float) -> VdcReport:
    """|sum_{a<n<=b} e(f(n))| against (b-a) lambda^(1/2) + lambda^(-1/2).

    The caller vouches that f'' is comparable to lam on [a, b].
    """
    if lam <= 0:
        raise InvalidLambda(f"lambda must be positive, got {lam}")
    if b <= a:
        raise ValueError("need a < b")
    ns = np.arange(a + 1, b + 1, dtype=np.int64)
    w = _TWO_PI * np.asarray(f(ns), dtype=np.float64)
    lhs = abs(complex(np.sum(np.cos(w)), np.sum(np.sin(w))))
    rhs = (b - a) * math.sqrt(lam) + 1.0 / math.sqrt(lam)
    return VdcReport(lhs, rhs, lhs / rhs, (a, b), lam)


@dataclass(frozen=True)
class WeylReport:
    lhs: float
    rhs: float
    holds: bool
    length: int
    Q: int


def weyl_shift_check(seq: np.ndarray, Q: int) -> WeylReport:
    """Shifted-correlation inequality for an arbitrary complex sequence.

    lhs = |sum a(n)|^2; rhs = (1 + L/Q) sum_{|q|<=Q} (1-|q|/Q)
    sum_n conj(a(n+q)) a(n), real by conjugate symmetry.
    """
    if Q < 1:
        raise ValueError("Q must be a positive integer")
    seq = np.asarray(seq, dtype=np.complex128)
    L = len(seq)
    lhs = abs(np.sum(seq)) ** 2
    rhs_inner = float(np.vdot(seq, seq).real)
    for q in range(1, min(Q, L) + 1):
        corr = np.vdot(seq[q:], seq[:L - q])
        rhs_inner += 2.0 * (1.0 - q / Q) * corr.real
    rhs = (1.0 + L / Q) * rhs_inner
    holds = lhs <= rhs + 1e-9 * abs(rhs)
    return WeylReport(lhs, rhs, holds, L, Q)


@dataclass(frozen=True)
class Q0Choice:
    value: int
    clamped: bool
    raw: float


def q0_choice(m: int, D: int, L: int, gamma) -> Q0Choice:
    """Shift count Q0 = m^(-1/3) D^(2/3-gamma/3) L^(1/3-gamma/3), rounded
    and clamped to [1, L/2]."""
    if min(m, D, L) < 1:
        raise ValueError("m, D, L must be >= 1")
    gf = float(gamma)
    raw = m ** (-1 / 3) * D ** (2 / 3 - gf / 3) * L ** (1 / 3 - gf / 3)
    q0 = round(raw)
    upper = max(1, L // 2)
    clamped = q0 < 1 or q0 > upper
    return Q0Choice(min(max(q0, 1), upper), clamped, raw)


def type2_envelope_terms(D: float, L: float, m: float, gamma) -> tuple[float, float, float, float]:
    """The four terms of the bilinear |U4'|^2 bound (without log factors)."""
    gf = float(gamma)
    t1 = D * D * L
    t2 = m ** (1 / 3) * D ** (4 / 3 + gf / 3) * L ** (5 / 3 + gf / 3)
    t3 = m ** (-1 / 2) * (D * L) ** (2 - gf / 2)
    t4 = m ** (-1 / 3) * D ** (5 / 3 - gf / 3) * L ** (7 / 3 - gf / 3)
    return (t1, t2, t3, t4)


def type2_envelope(D: float, L: float, m: float, gamma, v: float, N: float) -> float:
    """Envelope for |U4'|: sqrt of the four-term bound times log^2 N.

    v is carried for report context (the bilinear regime is
    v/2 <= D <= v^2); it does not enter the formula.
    """
    if min(D, L, m, v, N) <= 0:
        raise ValueError("all parameters must be positive")
    terms = type2_envelope_terms(D, L, m, gamma)
    return math.sqrt(sum(terms)) * math.log(N) ** 2
