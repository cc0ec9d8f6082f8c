"""Sawtooth and window-indicator expansions with their error envelopes.

The truncated series are evaluated in folded real form (cosine/sine pairs),
so the "value is real" invariant holds structurally rather than up to
rounding.  Error envelopes carry implied constant 1; the empirical constant
is measured by the test suite, never asserted here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_arith import (SCALE, FixedPointReal, dist_nearest_int, float_frac,
                         pow_floor_batch)
from .errors import InvalidDelta
from .rational_approx import Convergent
from .summation import Kahan

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TruncatedExpansion:
    """Truncated-series value with its error envelope."""

    value: float
    truncation: int
    error_envelope: float


def _as_float(t) -> float:
    if isinstance(t, FixedPointReal):
        return t.frac().to_float()
    return float(t)


def psi(t) -> float:
    """Sawtooth {t} - 1/2, in [-1/2, 1/2)."""
    if isinstance(t, FixedPointReal):
        return t.frac().to_float() - 0.5
    return float_frac(t) - 0.5


def psi_truncated(t, M: int) -> TruncatedExpansion:
    """Fourier partial sum of the sawtooth up to frequency M.

    value = -sum_{1<=|m|<=M} e(mt)/(2 pi i m), folded to
    -sum_{m=1..M} sin(2 pi m t)/(pi m); envelope = min(1, 1/(M*||t||)).
    """
    if M < 2:
        raise ValueError("M must be >= 2")
    x = _as_float(t)
    m = np.arange(1, M + 1, dtype=np.float64)
    value = -float(np.sum(np.sin(_TWO_PI * m * x) / (math.pi * m)))
    d = dist_nearest_int(x)
    envelope = 1.0 if d == 0 else min(1.0, 1.0 / (M * d))
    return TruncatedExpansion(value, M, envelope)


def psi_truncated_batch(ts: np.ndarray, Ms: np.ndarray) -> np.ndarray:
    """Truncated-sawtooth values for many (t, M) pairs at once.

    Writes sin(2 pi m t) = Im(z^m) with z = e(t) and builds the powers by
    cumulative products (one transcendental call per sample instead of one
    per term).  Samples are sorted by M descending so each frequency block
    touches only the still-active prefix; total work is sum(M_i) complex
    multiplies.  Power-chain rounding stays below ~1e-12 for M <= 10^5.
    """
    ts = np.asarray(ts, dtype=np.float64)
    Ms = np.asarray(Ms, dtype=np.int64)
    if len(ts) == 0:
        return np.zeros(0, dtype=np.float64)
    order = np.argsort(-Ms, kind="stable")
    t_s = ts[order]
    m_s = Ms[order]
    z = np.exp(2j * math.pi * (t_s - np.floor(t_s)))
    carry = np.ones(len(ts), dtype=np.complex128)
    vals = np.zeros(len(ts), dtype=np.float64)
    m_desc = -m_s  # ascending for searchsorted
    m = 1
    m_max = int(m_s[0])
    block = 512
    chunk = 8192
    while m <= m_max:
        hi = min(m_max, m + block - 1)
        width = hi - m + 1
        cnt_any = int(np.searchsorted(m_desc, -m, side="right"))
        cnt_full = int(np.searchsorted(m_desc, -hi, side="right"))
        w = 1.0 / (math.pi * np.arange(m, hi + 1, dtype=np.float64))
        for r0 in range(0, cnt_full, chunk):
            r1 = min(cnt_full, r0 + chunk)
            tmp = np.tile(z[r0:r1, None], (1, width))
            np.cumprod(tmp, axis=1, out=tmp)
            s = tmp @ w
            vals[r0:r1] -= (carry[r0:r1] * s).imag
            carry[r0:r1] *= tmp[:, -1]
        for i in range(cnt_full, cnt_any):
            # sample finishes inside this block; it never reappears
            width_i = int(m_s[i]) - m + 1
            pw = np.cumprod(np.full(width_i, z[i]))
            vals[i] -= (carry[i] * (pw @ w[:width_i])).imag
        m = hi + 1
    out = np.empty_like(vals)
    out[order] = vals
    return out


def f_delta(theta, delta: float) -> int:
    """Periodized indicator of [-Delta, Delta) mod 1."""
    _check_delta(delta)
    if isinstance(theta, FixedPointReal):
        x = theta.frac().to_float()
    else:
        x = float_frac(theta)
    return 1 if (x < delta or x >= 1.0 - delta) else 0


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 0.25:
        raise InvalidDelta(f"Delta must lie in (0, 1/4), got {delta}")


def f_delta_fourier(theta, delta: float, H: int) -> TruncatedExpansion:
    """Truncated Fourier expansion of F_Delta(theta) - 2*Delta.

    value = sum_{h=1..H} 2 sin(2 pi h Delta) cos(2 pi h theta) / (pi h);
    envelope = min(1, 1/(H*||theta+Delta||)) + min(1, 1/(H*||theta-Delta||)).
    """
    _check_delta(delta)
    if H < 1:
        raise ValueError("H must be >= 1")
    x = _as_float(theta)
    h = np.arange(1, H + 1, dtype=np.float64)
    value = float(np.sum(
        2.0 * np.sin(_TWO_PI * h * delta) * np.cos(_TWO_PI * h * x) / (math.pi * h)))
    envelope = 0.0
    for shift in (delta, -delta):
        d = dist_nearest_int(x + shift)
        envelope += 1.0 if d == 0 else min(1.0, 1.0 / (H * d))
    return TruncatedExpansion(value, H, envelope)


def fourier_coefficient_bound(h: int, delta: float) -> float:
    """|sin(2 pi h Delta)/(pi h)| <= min(2*Delta, 1/(pi h))."""
    return min(2.0 * delta, 1.0 / (math.pi * h))


@dataclass(frozen=True)
class SigmaSumReport:
    value: float
    bound: float
    ratio: float | None
    N: int
    H: int
    q: int


def sigma_sum(N: int, alpha: FixedPointReal, beta: FixedPointReal,
              delta: FixedPointReal, H: int, conv: Convergent) -> SigmaSumReport:
    """sum_{n<=N} of the two saturated reciprocals at alpha n + beta +- Delta.

    Distances are taken on the exact fixed-point grid.  Bound is
    N * q^(-1/2) * log N (recommended H = [sqrt(q)]).
    """
    if N < 1 or H < 1:
        raise ValueError("need N >= 1 and H >= 1")
    sa = alpha.scaled
    plus = (beta.add(delta)).scaled
    minus = (beta.sub(delta)).scaled
    acc = Kahan()
    tp, tm = plus, minus
    for _ in range(N):
        tp += sa
        tm += sa
        for t in (tp, tm):
            f = t & (SCALE - 1)
            d = min(f, SCALE - f)
            if d == 0:
                acc.add(1.0)
            else:
                acc.add(min(1.0, float(SCALE) / (H * float(d))))
    bound = N * math.log(N) / math.sqrt(conv.q) if N > 1 else 0.0
    ratio = acc.total / bound if bound > 0 else None
    return SigmaSumReport(acc.total, bound, ratio, N, H, conv.q)


@dataclass(frozen=True)
class XiSumReport:
    value: float
    envelope: float
    ratio: float
    N1: int
    M: float
    gamma: float


def xi_sum(N1: int, gamma, M: float, segment_bits: int = 20) -> XiSumReport:
    """sum_{N1 < n <= 2 N1} min(1, 1/(M*||n^gamma||)) with its envelope.

    ||n^gamma|| uses certified floors.  Envelope is
    (N/M + N^(gamma/2) M^(1/2) + N^(1-gamma/2) M^(-1/2)) * log M at N = 2*N1.
    """
    if N1 < 2 or M < 2:
        raise ValueError("need N1 >= 2 and M >= 2")
    gf = float(gamma)
    acc = Kahan()
    step = 1 << segment_bits
    for start in range(N1 + 1, 2 * N1 + 1, step):
        ns = np.arange(start, min(2 * N1 + 1, start + step), dtype=np.int64)
        ks, _ = pow_floor_batch(ns, gamma)
        x = np.power(ns.astype(np.float64), gf)
        fracs = x - ks
        d = np.minimum(fracs, 1.0 - fracs)
        with np.errstate(divide="ignore"):
            terms = np.minimum(1.0, 1.0 / (M * d))
        acc.add(float(np.sum(terms)))
    N = 2.0 * N1
    envelope = (N / M + N ** (gf / 2) * M ** 0.5 + N ** (1 - gf / 2) * M ** -0.5) \
        * math.log(M)
    return XiSumReport(acc.total, envelope, acc.total / envelope, N1, M, gf)
