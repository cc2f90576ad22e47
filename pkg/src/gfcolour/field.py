"""Exact arithmetic on the Moser lattice.

A lattice point is stored by its four integer Moser coefficients
``(a, b, c, d)`` standing for ``a + b*w1 + c*w3 + d*w1*w3`` where
``w1 = 1/2 + i*sqrt(3)/2`` and ``w3 = 5/6 + i*sqrt(11)/6``.

Real parts live in ``Q + Q*sqrt(33)`` and imaginary parts in
``Q*sqrt(3) + Q*sqrt(11)``, so every squared modulus lies in
``Q + Q*sqrt(33)``.  Scaling by 12 makes all four parts integers, which is
what the hot paths use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import NamedTuple, Sequence

Coeffs = Sequence[int]


class MoserPoint(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    def __add__(self, other: Coeffs) -> MoserPoint:  # type: ignore[override]
        return MoserPoint(self[0] + other[0], self[1] + other[1],
                          self[2] + other[2], self[3] + other[3])

    def __sub__(self, other: Coeffs) -> MoserPoint:
        return MoserPoint(self[0] - other[0], self[1] - other[1],
                          self[2] - other[2], self[3] - other[3])

    def __neg__(self) -> MoserPoint:
        return MoserPoint(-self[0], -self[1], -self[2], -self[3])

    def __str__(self) -> str:
        return f"{self.a} {self.b} {self.c} {self.d}"


ORIGIN = MoserPoint(0, 0, 0, 0)
ONE = MoserPoint(1, 0, 0, 0)
OMEGA1 = MoserPoint(0, 1, 0, 0)
OMEGA3 = MoserPoint(0, 0, 1, 0)
OMEGA13 = MoserPoint(0, 0, 0, 1)

#: the eight lattice steps of length one used to grow graphs
UNIT_STEPS = (ONE, -ONE, OMEGA1, -OMEGA1, OMEGA3, -OMEGA3, OMEGA13, -OMEGA13)


@dataclass(frozen=True)
class ComplexParts:
    """Real part ``re0 + re33*sqrt(33)``, imaginary part ``im3*sqrt(3) + im11*sqrt(11)``."""

    re0: Fraction
    re33: Fraction
    im3: Fraction
    im11: Fraction

    def to_complex(self) -> complex:
        s3, s11, s33 = math.sqrt(3), math.sqrt(11), math.sqrt(33)
        return complex(float(self.re0) + float(self.re33) * s33,
                       float(self.im3) * s3 + float(self.im11) * s11)


def _scaled_parts(p: Coeffs) -> tuple[int, int, int, int]:
    # 12 * (re0, re33, im3, im11)
    a, b, c, d = p
    return 12 * a + 6 * b + 10 * c + 5 * d, -d, 6 * b + 5 * d, 2 * c + d


def to_complex(p: Coeffs) -> ComplexParts:
    r0, r33, i3, i11 = _scaled_parts(p)
    return ComplexParts(Fraction(r0, 12), Fraction(r33, 12),
                        Fraction(i3, 12), Fraction(i11, 12))


def to_complex_float(p: Coeffs) -> complex:
    """Double precision position, for plotting and numeric cross-checks only."""
    a, b, c, d = p
    w1 = complex(0.5, math.sqrt(3) / 2)
    w3 = complex(5 / 6, math.sqrt(11) / 6)
    return a + b * w1 + c * w3 + d * w1 * w3


@total_ordering
@dataclass(frozen=True)
class QuadValue:
    """The real number ``u + v*sqrt(33)`` with rational ``u``, ``v``."""

    u: Fraction
    v: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "u", Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.v))

    def sign(self) -> int:
        u, v = self.u, self.v
        su = (u > 0) - (u < 0)
        sv = (v > 0) - (v < 0)
        if su == sv or sv == 0:
            return su
        if su == 0:
            return sv
        # opposite signs: compare u^2 against 33 v^2
        diff = u * u - 33 * v * v
        return su if diff > 0 else -su

    def _coerce(self, other) -> QuadValue | None:
        if isinstance(other, QuadValue):
            return other
        if isinstance(other, (int, Fraction)):
            return QuadValue(Fraction(other))
        return None

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.u == o.u and self.v == o.v

    def __hash__(self) -> int:
        return hash((self.u, self.v))

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __add__(self, other) -> QuadValue:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadValue(self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __sub__(self, other) -> QuadValue:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadValue(self.u - o.u, self.v - o.v)

    def __mul__(self, other) -> QuadValue:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadValue(self.u * o.u + 33 * self.v * o.v,
                         self.u * o.v + self.v * o.u)

    __rmul__ = __mul__

    def __float__(self) -> float:
        return float(self.u) + float(self.v) * math.sqrt(33)

    def __repr__(self) -> str:
        return f"QuadValue({self.u}, {self.v})"

    def __str__(self) -> str:
        if self.v == 0:
            return str(self.u)
        return f"{self.u}{'+' if self.v > 0 else '-'}{abs(self.v)}*sqrt(33)"


def sq_dist_key(p: Coeffs, q: Coeffs) -> tuple[int, int]:
    """Integer pair ``(P, Q)`` with ``|p - q|^2 = (P + Q*sqrt(33)) / 144``."""
    r0, r33, i3, i11 = _scaled_parts((p[0] - q[0], p[1] - q[1], p[2] - q[2], p[3] - q[3]))
    return (r0 * r0 + 33 * r33 * r33 + 3 * i3 * i3 + 11 * i11 * i11,
            2 * (r0 * r33 + i3 * i11))


def sq_dist(p: Coeffs, q: Coeffs) -> QuadValue:
    P, Q = sq_dist_key(p, q)
    return QuadValue(Fraction(P, 144), Fraction(Q, 144))


def is_unit_distance(p: Coeffs, q: Coeffs) -> bool:
    return sq_dist_key(p, q) == (144, 0)


def mul_omega1(p: Coeffs) -> MoserPoint:
    """Multiply by w1, i.e. rotate by pi/3 (uses w1^2 = w1 - 1)."""
    a, b, c, d = p
    return MoserPoint(-b, a + b, -d, c + d)


def mul_conj_omega1(p: Coeffs) -> MoserPoint:
    """Multiply by 1 - w1 = conj(w1), i.e. rotate by -pi/3."""
    a, b, c, d = p
    return MoserPoint(a + b, -a, c + d, -c)
