"""Certified real arithmetic on a 192-bit fixed-point grid.

Doubles lose roughly nine digits of the fractional part of alpha*p already
at p ~ 1e9, which corrupts every ||alpha*p + beta|| statistic downstream.
The multipliers therefore live on an exact 2^-192 grid: multiplying a
:class:`FixedPointReal` by a machine integer is exact modulo one up to the
grid quantum, and each value carries its own uncertainty in grid units so
derived quantities stay certified.

Floors of n^theta are certified by directed-rounding interval evaluation
(MPFR via gmpy2) with precision escalation; exact rational exponents go
through integer root extraction instead, which also detects exact integer
powers such as 8^(1/3) = 2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .errors import InvalidConfig, PrecisionExhausted

FRAC_BITS = 192
SCALE = 1 << FRAC_BITS

# float64 floor proposals are trusted only when the value is at least this
# far from an integer and small enough for float64 to resolve integers at
# all; everything else goes through the rigorous interval path.
_BULK_GUARD = 1e-5
_BULK_MAGNITUDE_LIMIT = float(1 << 30)

_START_PRECISION = 128
_MAX_PRECISION = 1 << 14


@dataclass(frozen=True)
class FixedPointReal:
    """A real number as scaled/2^192 with uncertainty ulp grid units.

    The true value lies in [scaled, scaled + ulp] * 2^-192.  Exact inputs
    (integers, dyadic rationals) have ulp = 0; named irrationals and
    non-dyadic rationals are floored onto the grid with ulp = 1.
    """

    scaled: int
    ulp: int = 0
    label: str = ""

    @classmethod
    def from_int(cls, n: int, label: str = "") -> "FixedPointReal":
        return cls(n * SCALE, 0, label or str(n))

    @classmethod
    def from_fraction(cls, fr: Fraction, label: str = "") -> "FixedPointReal":
        num = fr.numerator * SCALE
        scaled, rem = divmod(num, fr.denominator)
        return cls(scaled, 0 if rem == 0 else 1, label or str(fr))

    @classmethod
    def from_float(cls, x: float, label: str = "") -> "FixedPointReal":
        # floats are dyadic, hence exact on the grid
        return cls.from_fraction(Fraction(x), label or repr(x))

    @classmethod
    def sqrt_int(cls, n: int, label: str = "") -> "FixedPointReal":
        if n < 0:
            raise InvalidConfig(f"sqrt of negative integer {n}")
        s = math.isqrt(n << (2 * FRAC_BITS))
        exact = s * s == n << (2 * FRAC_BITS)
        return cls(s, 0 if exact else 1, label or f"sqrt:{n}")

    @property
    def integer_part(self) -> int:
        return self.scaled >> FRAC_BITS

    @property
    def frac_scaled(self) -> int:
        return self.scaled & (SCALE - 1)

    def is_exact(self) -> bool:
        return self.ulp == 0

    def interval(self) -> tuple[Fraction, Fraction]:
        """Enclosure [lo, hi] of the true value as exact rationals."""
        return (Fraction(self.scaled, SCALE),
                Fraction(self.scaled + self.ulp, SCALE))

    def mul_int(self, k: int) -> "FixedPointReal":
        if k >= 0:
            return FixedPointReal(self.scaled * k, self.ulp * k)
        return FixedPointReal(self.scaled * k - self.ulp * (-k), self.ulp * (-k))

    def add(self, other: "FixedPointReal") -> "FixedPointReal":
        return FixedPointReal(self.scaled + other.scaled, self.ulp + other.ulp)

    def add_int(self, k: int) -> "FixedPointReal":
        return FixedPointReal(self.scaled + k * SCALE, self.ulp)

    def neg(self) -> "FixedPointReal":
        return FixedPointReal(-self.scaled - self.ulp, self.ulp)

    def sub(self, other: "FixedPointReal") -> "FixedPointReal":
        return self.add(other.neg())

    def frac(self) -> "FixedPointReal":
        return FixedPointReal(self.scaled & (SCALE - 1), self.ulp)

    def dist_scaled(self) -> int:
        """||x|| in grid units (midpoint of the enclosure)."""
        f = self.frac_scaled
        return min(f, SCALE - f)

    def dist_nearest_int(self) -> float:
        return self.dist_scaled() / SCALE

    def to_float(self) -> float:
        return float(self.scaled) / float(SCALE)

    def __float__(self) -> float:
        return self.to_float()

    def __repr__(self) -> str:
        tag = self.label or "fixed"
        return f"FixedPointReal({tag}={self.to_float():.15f}, ulp={self.ulp})"


def _const_scaled(maker, what: str) -> int:
    """floor(x * 2^192) for a computed constant, certified by agreement
    of two consecutive working precisions."""
    prec = FRAC_BITS + 64
    prev = None
    while prec <= _MAX_PRECISION:
        with gmpy2.context(precision=prec):
            x = maker()
            s = int(gmpy2.mpz(gmpy2.floor(gmpy2.mul_2exp(x, FRAC_BITS))))
        if s == prev:
            return s
        prev, prec = s, prec * 2
    raise PrecisionExhausted(f"could not pin {what} onto the fixed-point grid")


def _pi_scaled() -> int:
    return _const_scaled(gmpy2.const_pi, "pi")


def _e_scaled() -> int:
    return _const_scaled(lambda: gmpy2.exp(gmpy2.mpfr(1)), "e")


def parse_real(spec: str, label: str | None = None) -> FixedPointReal:
    """Parse a real-number spec string onto the fixed-point grid.

    Accepted forms: "sqrt:K", "golden", "pi", "e", decimal strings
    ("0.05", "-1.25") and rationals ("22/7").  Named irrationals are
    generated to full grid precision internally, never via a truncated
    decimal.  A leading "-" negates any form.
    """
    spec = spec.strip()
    if not spec:
        raise InvalidConfig("empty real-number spec")
    sign, body = 1, spec
    if body.startswith("-"):
        sign, body = -1, body[1:].strip()
    if body.startswith("sqrt:"):
        try:
            n = int(body[5:])
        except ValueError as exc:
            raise InvalidConfig(f"bad sqrt spec {spec!r}") from exc
        out = FixedPointReal.sqrt_int(n, label or spec)
    elif body == "golden":
        s = (SCALE + math.isqrt(5 << (2 * FRAC_BITS))) // 2
        out = FixedPointReal(s, 1, label or spec)
    elif body == "pi":
        out = FixedPointReal(_pi_scaled(), 1, label or spec)
    elif body == "e":
        out = FixedPointReal(_e_scaled(), 1, label or spec)
    else:
        try:
            fr = Fraction(body)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidConfig(f"unrecognized real-number spec {spec!r}") from exc
        out = FixedPointReal.from_fraction(fr, label or spec)
    if sign < 0:
        neg = out.neg()
        out = FixedPointReal(neg.scaled, neg.ulp, label or spec)
    return out


def is_rational_spec(spec: str) -> bool:
    """True when the spec string denotes an exact rational (decimal or a/b)."""
    body = spec.strip().lstrip("-").strip()
    if body.startswith("sqrt:"):
        n = int(body[5:])
        return math.isqrt(n) ** 2 == n
    return body not in ("golden", "pi", "e")


def float_frac(t: float) -> float:
    """{t} for a float, wrapped so the result is strictly below 1.

    t - floor(t) can round up to exactly 1.0 when t sits a hair below an
    integer; that case wraps to 0.0.
    """
    f = t - math.floor(t)
    return 0.0 if f >= 1.0 else f


def frac(t):
    """Fractional part {t} in [0, 1); t - frac(t) is an integer."""
    if isinstance(t, FixedPointReal):
        return t.frac()
    return float_frac(t)


def dist_nearest_int(t) -> float:
    """Distance ||t|| from t to the nearest integer, in [0, 1/2]."""
    if isinstance(t, FixedPointReal):
        return t.dist_nearest_int()
    f = float_frac(t)
    return min(f, 1.0 - f)


def e(t) -> complex:
    """exp(2*pi*i*t), reduced modulo one first so e(t+1) == e(t)."""
    if isinstance(t, FixedPointReal):
        x = t.frac().to_float()
    else:
        x = float_frac(t)
    return cmath.exp(2j * math.pi * x)


@dataclass(frozen=True)
class CertifiedFloor:
    """floor(n^theta) together with its certification record."""

    value: int
    certified: bool
    guard_margin: float
    is_integer_power: bool = False


def _theta_as_number(theta) -> float:
    return float(theta)


# cost cap for the exact integer-root path: n^numerator stays manageable
_EXACT_NUMERATOR_LIMIT = 4096


def _theta_bounds(theta, prec: int):
    """(lower, upper) mpfr enclosures of theta at the given precision."""
    if isinstance(theta, Fraction):
        q = gmpy2.mpq(theta.numerator, theta.denominator)
        with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
            lo = gmpy2.mpfr(q)
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
            hi = gmpy2.mpfr(q)
        return lo, hi
    t = gmpy2.mpfr(theta)  # floats are dyadic: exact
    return t, t


def pow_floor(n: int, theta) -> CertifiedFloor:
    """Certified floor of n^theta for n >= 1, 0 < theta < 2.

    Fraction exponents with a small numerator take the exact integer-root
    path, which also detects exact integer powers such as 8^(1/3).  Other
    exponents (floats, or rationals too large to power exactly) go through
    directed-rounding interval evaluation with precision escalation;
    PrecisionExhausted signals a floor still unresolved at the cap.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    tf = _theta_as_number(theta)
    if not 0.0 < tf < 2.0:
        raise ValueError(f"theta must lie in (0, 2), got {theta}")

    if isinstance(theta, (Fraction, int)):
        theta = Fraction(theta)
        if theta.numerator <= _EXACT_NUMERATOR_LIMIT:
            a, b = theta.numerator, theta.denominator
            root, exact = gmpy2.iroot(gmpy2.mpz(n) ** a, b)
            k = int(root)
            if exact:
                return CertifiedFloor(k, True, 0.0, True)
            x = math.pow(n, tf)
            guard = max(0.0, min(x - k, k + 1 - x))
            return CertifiedFloor(k, True, guard)

    prec = _START_PRECISION
    while prec <= _MAX_PRECISION:
        t_lo, t_hi = _theta_bounds(theta, prec)
        # n >= 1 makes n^t monotone in t, so endpoint rounding is sound
        # floor taken inside the context: n^theta < 2^126 always fits the
        # mantissa, so the floor value is exact
        with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
            lo = gmpy2.mpfr(n) ** t_lo
            kl = int(gmpy2.mpz(gmpy2.floor(lo)))
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
            hi = gmpy2.mpfr(n) ** t_hi
            kh = int(gmpy2.mpz(gmpy2.floor(hi)))
        if kl == kh:
            guard = max(0.0, min(float(lo) - kl, kl + 1 - float(hi)))
            if lo == hi and gmpy2.is_integer(lo):
                return CertifiedFloor(kl, True, 0.0, True)
            return CertifiedFloor(kl, True, guard)
        prec *= 2
    raise PrecisionExhausted(
        f"floor of {n}^{theta!r} straddles an integer at {_MAX_PRECISION} bits; "
        "pass theta as an exact Fraction with a small numerator to resolve "
        "the boundary")


def pow_floor_batch(ns: np.ndarray, theta) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized certified floors of n^theta for an int array.

    Returns (floors, is_integer_power).  float64 proposals are accepted
    when the value is far from an integer (guard > 1e-5, magnitude < 2^30,
    far outside any libm error); the rare near-boundary or oversized
    entries are re-done through pow_floor.
    """
    ns = np.asarray(ns, dtype=np.int64)
    tf = _theta_as_number(theta)
    x = np.power(ns.astype(np.float64), tf)
    k = np.floor(x)
    guard = np.minimum(x - k, k + 1.0 - x)
    suspect = (guard < _BULK_GUARD) | (x >= _BULK_MAGNITUDE_LIMIT)
    floors = k.astype(np.int64)
    exact = np.zeros(ns.shape, dtype=bool)
    for i in np.nonzero(suspect)[0]:
        cf = pow_floor(int(ns[i]), theta)
        floors[i] = cf.value
        exact[i] = cf.is_integer_power
    return floors, exact
