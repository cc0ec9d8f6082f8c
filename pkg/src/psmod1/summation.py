"""Deterministic compensated summation.

Long sums are evaluated per segment with numpy (pairwise, deterministic
for a given array) and folded across segments in ascending order with
Kahan compensation, so results are bit-stable for a fixed segment size
regardless of how many workers produced the partials.
"""

from __future__ import annotations


class Kahan:
    """Compensated accumulator for float64 partial sums."""

    __slots__ = ("total", "_c")

    def __init__(self) -> None:
        self.total = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        y = x - self._c
        t = self.total + y
        self._c = (t - self.total) - y
        self.total = t


class KahanComplex:
    """Compensated accumulator for complex partial sums."""

    __slots__ = ("_re", "_im")

    def __init__(self) -> None:
        self._re = Kahan()
        self._im = Kahan()

    def add(self, z: complex) -> None:
        self._re.add(z.real)
        self._im.add(z.imag)

    @property
    def total(self) -> complex:
        return complex(self._re.total, self._im.total)
