"""Continued-fraction convergents and Dirichlet approximations.

All expansions run on the exact fixed-point enclosure of the input, so a
partial quotient is only emitted when both interval endpoints agree on it;
the expansion halts (precision_exhausted) rather than fabricate convergents
beyond the input's precision.  Every returned approximation re-verifies its
defining inequality in exact rational arithmetic before being handed out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core_arith import SCALE, FixedPointReal
from .errors import PrecisionExhausted
from .summation import Kahan


@dataclass(frozen=True)
class Convergent:
    """Best rational approximation a/q with |alpha - a/q| < 1/q^2, a != 0."""

    a: int
    q: int


@dataclass(frozen=True)
class DirichletApprox:
    """Fraction a_h/q_h with q_h <= bound_Q and |x - a_h/q_h| <= 1/(q_h*bound_Q)."""

    a_h: int
    q_h: int
    bound_Q: int


@dataclass
class ConvergentScan:
    items: list[Convergent]
    terminated: bool            # continued fraction ended (rational input)
    precision_exhausted: bool   # grid uncertainty stopped the expansion
    q_max: int


def _cf_quotients(x: FixedPointReal):
    """Yield certified partial quotients of x; generator return value is
    (terminated, exhausted)."""
    lo, hi = x.interval()
    # denominators grow at least like Fibonacci; cap terms defensively
    for _ in range(600):
        al = lo.numerator // lo.denominator
        ah = hi.numerator // hi.denominator
        if al != ah:
            return (False, True)
        yield al
        lo -= al
        hi -= al
        if hi == 0:
            return (True, False)
        if lo == 0:
            # true value may or may not terminate here
            return (False, True)
        lo, hi = 1 / hi, 1 / lo
    return (False, True)


class _CfRun:
    """Drives the quotient generator and records how it stopped."""

    def __init__(self, x: FixedPointReal):
        self._gen = _cf_quotients(x)
        self.terminated = False
        self.exhausted = False

    def __iter__(self):
        while True:
            try:
                yield next(self._gen)
            except StopIteration as stop:
                if stop.value is not None:
                    self.terminated, self.exhausted = stop.value
                return


def _verify_convergent(x: FixedPointReal, a: int, q: int) -> bool:
    # worst case over the input enclosure; the defining inequality is strict
    lo, hi = x.interval()
    target = Fraction(a, q)
    err = max(abs(lo - target), abs(hi - target))
    return err < Fraction(1, q * q)


def convergents(alpha: FixedPointReal, q_max: int) -> ConvergentScan:
    """All continued-fraction best approximations of alpha with q <= q_max.

    Follows the classical best-approximation rule: the floor convergent
    p0/q0 is dropped when the second partial quotient is 1 (it is not a
    best approximation then), and a = 0 entries are dropped.  A rational
    input ends the scan early with terminated=True.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    run = _CfRun(alpha)
    h2, h1 = 0, 1   # p_{-2}, p_{-1}
    k2, k1 = 1, 0   # q_{-2}, q_{-1}
    raw: list[tuple[int, int]] = []
    quotients: list[int] = []
    for a_i in run:
        h1, h2 = a_i * h1 + h2, h1
        k1, k2 = a_i * k1 + k2, k1
        if k1 > q_max:
            break
        quotients.append(a_i)
        raw.append((h1, k1))
    items = []
    drop_first = len(quotients) >= 2 and quotients[1] == 1
    for idx, (a, q) in enumerate(raw):
        if idx == 0 and drop_first:
            continue
        if a == 0:
            continue
        if not _verify_convergent(alpha, a, q):
            raise PrecisionExhausted(
                f"convergent {a}/{q} failed its certified inequality")
        items.append(Convergent(a, q))
    return ConvergentScan(items, run.terminated, run.exhausted, q_max)


def dirichlet_approx(x: FixedPointReal, Q: int) -> DirichletApprox:
    """Fraction a/q with q <= Q and |x - a/q| <= 1/(qQ).

    Built from the continued fraction truncated at the last denominator
    <= Q, refined by the extreme intermediate fraction when that still
    satisfies the certified inequality and approximates better.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    run = _CfRun(x)
    h2, h1 = 0, 1
    k2, k1 = 1, 0
    last: tuple[int, int] | None = None
    overshoot_quotient = None
    for a_i in run:
        nh, nk = a_i * h1 + h2, a_i * k1 + k2
        if nk > Q:
            overshoot_quotient = a_i
            break
        h1, h2 = nh, h1
        k1, k2 = nk, k1
        last = (h1, k1)
    if last is None:
        raise PrecisionExhausted("input precision cannot support any convergent")

    lo, hi = x.interval()

    def worst_err(a: int, q: int) -> Fraction:
        t = Fraction(a, q)
        return max(abs(lo - t), abs(hi - t))

    def satisfies(a: int, q: int) -> bool:
        return worst_err(a, q) <= Fraction(1, q * Q)

    candidates: list[tuple[int, int]] = []
    a, q = last
    if satisfies(a, q):
        candidates.append((a, q))
    if overshoot_quotient is not None:
        # extreme intermediate fraction still within the denominator budget
        # (t < overshoot quotient holds automatically since nk > Q)
        t_max = (Q - k2) // k1 if k1 else 0
        if t_max >= 1:
            sa, sq = t_max * h1 + h2, t_max * k1 + k2
            if sq <= Q and satisfies(sa, sq):
                candidates.append((sa, sq))
    if not candidates:
        raise PrecisionExhausted(
            f"cannot certify a Dirichlet approximation at Q={Q}")
    best = min(candidates, key=lambda aq: (worst_err(*aq), aq[1]))
    g = math.gcd(best[0], best[1])
    return DirichletApprox(best[0] // g, best[1] // g, Q)


@dataclass(frozen=True)
class WindowRow:
    h: int
    a_h: int
    q_h: int
    above_cube_root: bool


@dataclass(frozen=True)
class WindowAudit:
    rows: tuple[WindowRow, ...]
    violations: int
    q: int
    H: int


def qh_window_audit(alpha: FixedPointReal, conv: Convergent, H: int) -> WindowAudit:
    """For each h <= H, the Dirichlet approximation of alpha*h at Q = q^2
    and whether its denominator exceeds q^(1/3) (it always should)."""
    if H < 1:
        raise ValueError("H must be >= 1")
    if H > math.isqrt(conv.q):
        raise ValueError(f"H={H} exceeds [sqrt(q)]={math.isqrt(conv.q)}")
    Q = conv.q * conv.q
    rows = []
    violations = 0
    for h in range(1, H + 1):
        da = dirichlet_approx(alpha.mul_int(h), Q)
        above = da.q_h ** 3 > conv.q
        if not above:
            violations += 1
        rows.append(WindowRow(h, da.a_h, da.q_h, above))
    return WindowAudit(tuple(rows), violations, conv.q, H)


@dataclass(frozen=True)
class MinSumReport:
    value: float
    bound: float
    ratio: float
    X: int
    Y: float
    q: int


def min_sum(X: int, Y: float, alpha: FixedPointReal, beta: FixedPointReal,
            conv: Convergent) -> MinSumReport:
    """sum_{n<=X} min(Y, 1/||alpha n + beta||) against its bound.

    The bound is X*Y/q + Y + (X+q)*log(2q); the ratio (empirical implied
    constant) is the primary output.
    """
    if X < 1 or Y < 1:
        raise ValueError("need X >= 1 and Y >= 1")
    sa, sb = alpha.scaled, beta.scaled
    acc = Kahan()
    t = sb
    for _ in range(X):
        t += sa
        f = t & (SCALE - 1)
        d = min(f, SCALE - f)
        if d == 0:
            acc.add(Y)
        else:
            acc.add(min(Y, float(SCALE) / float(d)))
    q = conv.q
    bound = X * Y / q + Y + (X + q) * math.log(2 * q)
    return MinSumReport(acc.total, bound, acc.total / bound, X, Y, q)
