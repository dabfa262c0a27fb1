"""Nonnegative binary floating point numbers with a per-value precision.

A :class:`UFloat` of precision ``u`` stores ``u + 1`` significant bits: the
leading one plus ``u`` fraction bits, exactly like the 52-bit fractions of an
IEEE double.  With round-to-nearest this gives a unit roundoff of
``2**-(u+1)``, which is what the multiplicative closeness relation below needs.

Every operation is computed exactly on integers and then rounded once, with
ties going to the even mantissa.  Exponents are unbounded Python ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


class PrecisionMismatch(ValueError):
    """Raised when two values of different precision are combined."""


@dataclass(frozen=True)
class UFloat:
    """The value ``mantissa * 2**(exponent - u)``.

    A nonzero mantissa satisfies ``2**u <= mantissa < 2**(u+1)``, so
    ``exponent`` is ``floor(log2(value))``.  Zero is stored as ``(0, 0)``.
    """

    mantissa: int
    exponent: int
    u: int

    def __post_init__(self) -> None:
        if self.u < 1:
            raise ValueError("precision must be at least 1")
        if self.mantissa == 0:
            if self.exponent != 0:
                raise ValueError("zero must have exponent 0")
        elif not (1 << self.u) <= self.mantissa < (1 << (self.u + 1)):
            raise ValueError("mantissa is not normalized")

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    def to_fraction(self) -> Fraction:
        shift = self.exponent - self.u
        if shift >= 0:
            return Fraction(self.mantissa << shift)
        return Fraction(self.mantissa, 1 << -shift)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __repr__(self) -> str:
        return f"UFloat({self.to_fraction()}, u={self.u})"

    def to_json(self) -> dict:
        return {"m": format(self.mantissa, "x"), "e": self.exponent, "u": self.u}

    @classmethod
    def from_json(cls, data: dict) -> "UFloat":
        try:
            return cls(int(str(data["m"]), 16), int(data["e"]), int(data["u"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed float value {data!r}") from exc

    @classmethod
    def zero(cls, u: int) -> "UFloat":
        return cls(0, 0, u)


def _floor_log2(num: int, den: int) -> int:
    """floor(log2(num/den)) for positive integers."""
    e = num.bit_length() - den.bit_length()
    if e >= 0:
        if num < (den << e):
            e -= 1
    elif (num << -e) < den:
        e -= 1
    return e


def _round_ratio(num: int, den: int, scale: int, u: int) -> UFloat:
    """Round ``num/den * 2**scale`` (num, den > 0) to precision u."""
    e = _floor_log2(num, den)
    shift = u - e
    if shift >= 0:
        q, r = divmod(num << shift, den)
        half = 2 * r
        d = den
    else:
        d = den << -shift
        q, r = divmod(num, d)
        half = 2 * r
    if half > d or (half == d and q & 1):
        q += 1
    if q == 1 << (u + 1):
        q >>= 1
        e += 1
    return UFloat(q, e + scale, u)


def round_to(x: Number, u: int) -> UFloat:
    """Nearest value of precision ``u`` to the nonnegative rational ``x``."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("cannot round a negative value")
    if u < 1:
        raise ValueError("precision must be at least 1")
    if x == 0:
        return UFloat.zero(u)
    return _round_ratio(x.numerator, x.denominator, 0, u)


def _same_u(x: UFloat, y: UFloat) -> int:
    if x.u != y.u:
        raise PrecisionMismatch(f"precisions differ: {x.u} and {y.u}")
    return x.u


def add_u(x: UFloat, y: UFloat) -> UFloat:
    u = _same_u(x, y)
    if x.is_zero:
        return y
    if y.is_zero:
        return x
    if x.exponent < y.exponent:
        x, y = y, x
    # y is below half an ulp of x, so x + y rounds back to x.
    if y.exponent < x.exponent - u - 1:
        return x
    lo = y.exponent
    total = (x.mantissa << (x.exponent - lo)) + y.mantissa
    return _round_ratio(total, 1, lo - u, u)


def mul_u(x: UFloat, y: UFloat) -> UFloat:
    u = _same_u(x, y)
    if x.is_zero or y.is_zero:
        return UFloat.zero(u)
    return _round_ratio(x.mantissa * y.mantissa, 1, x.exponent + y.exponent - 2 * u, u)


def div_u(x: UFloat, y: UFloat) -> UFloat:
    u = _same_u(x, y)
    if y.is_zero:
        raise ZeroDivisionError("division by a zero float")
    if x.is_zero:
        return UFloat.zero(u)
    return _round_ratio(x.mantissa, y.mantissa, x.exponent - y.exponent, u)


def sum_u(values: Iterable[UFloat], u: int) -> UFloat:
    """Left-to-right rounded sum."""
    total = UFloat.zero(u)
    for v in values:
        total = add_u(total, v)
    return total


def rel_dist(x: Number | UFloat, y: Number | UFloat) -> Fraction | float:
    """max(x/y, y/x) - 1, with 0 for two zeros and infinity for one zero."""
    fx = x.to_fraction() if isinstance(x, UFloat) else Fraction(x)
    fy = y.to_fraction() if isinstance(y, UFloat) else Fraction(y)
    if fx < 0 or fy < 0:
        raise ValueError("relative distance needs nonnegative inputs")
    if fx == 0 and fy == 0:
        return Fraction(0)
    if fx == 0 or fy == 0:
        return math.inf
    return max(fx / fy, fy / fx) - 1


def closeness_base(u: int) -> Fraction:
    """1 - 2**-(u+1), the per-step ratio of the closeness relation."""
    return 1 - Fraction(1, 1 << (u + 1))


def is_close(x: Number | UFloat, y: Number | UFloat, u: int, i: int) -> bool:
    """Whether x and y are (u, i)-close."""
    fx = x.to_fraction() if isinstance(x, UFloat) else Fraction(x)
    fy = y.to_fraction() if isinstance(y, UFloat) else Fraction(y)
    if fx == 0 or fy == 0:
        return fx == fy
    if fx < 0 or fy < 0:
        return False
    lo = closeness_base(u) ** i
    ratio = fx / fy
    return lo <= ratio and ratio * lo <= 1


def closeness_steps(x: Number | UFloat, y: Number | UFloat, u: int) -> int | None:
    """Smallest i with x, y (u, i)-close, or None when no i works."""
    d = rel_dist(x, y)
    if d == math.inf:
        return None
    if d == 0:
        return 0
    hi = 1
    while not is_close(x, y, u, hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if is_close(x, y, u, mid):
            hi = mid
        else:
            lo = mid
    i = hi
    return i


@dataclass(frozen=True)
class ClosenessBudget:
    """A closeness guarantee ``(u, i)`` and how it propagates through operations."""

    u: int
    i: int

    def __post_init__(self) -> None:
        if self.i < 0:
            raise ValueError("step count must be nonnegative")

    def _check(self, other: "ClosenessBudget") -> None:
        if self.u != other.u:
            raise PrecisionMismatch("budgets at different precisions")

    def then(self, other: "ClosenessBudget") -> "ClosenessBudget":
        """Transitivity: x ~i y and y ~j z give x ~(i+j) z."""
        self._check(other)
        return ClosenessBudget(self.u, self.i + other.i)

    def exact_add(self, other: "ClosenessBudget") -> "ClosenessBudget":
        self._check(other)
        return ClosenessBudget(self.u, max(self.i, other.i))

    def exact_mul(self, other: "ClosenessBudget") -> "ClosenessBudget":
        self._check(other)
        return ClosenessBudget(self.u, self.i + other.i)

    exact_div = exact_mul

    def float_add(self, other: "ClosenessBudget") -> "ClosenessBudget":
        self._check(other)
        return ClosenessBudget(self.u, max(self.i, other.i) + 1)

    def float_mul(self, other: "ClosenessBudget") -> "ClosenessBudget":
        self._check(other)
        return ClosenessBudget(self.u, self.i + other.i + 1)

    def float_div(self, other: "ClosenessBudget") -> "ClosenessBudget":
        # Two budgets are on record for rounded division (i*j+1 and i+j+1).
        # Only the larger one is sound for all inputs, so that is the one kept.
        self._check(other)
        return ClosenessBudget(self.u, max(self.i * other.i, self.i + other.i) + 1)


@dataclass(frozen=True)
class UDist:
    """A rounded, approximately normalized probability distribution."""

    entries: tuple[UFloat, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty distribution")
        u = self.entries[0].u
        for e in self.entries:
            _same_u(self.entries[0], e)
            if e.to_fraction() > 1:
                raise ValueError("distribution entry above 1")
        slack = Fraction(len(self.entries) * 4, 1 << u)
        total = self.exact_sum()
        if not 1 - slack <= total <= 1 + slack:
            raise ValueError(f"distribution sum {float(total)} outside tolerance band")

    @property
    def u(self) -> int:
        return self.entries[0].u

    def exact_sum(self) -> Fraction:
        return sum((e.to_fraction() for e in self.entries), Fraction(0))

    def normalized(self) -> tuple[Fraction, ...]:
        """The exact normalization p_i / sum(p)."""
        total = self.exact_sum()
        return tuple(e.to_fraction() / total for e in self.entries)


def normalize_dist(values: Sequence[UFloat]) -> UDist:
    """Divide every entry by the rounded sum of all entries."""
    if not values:
        raise ValueError("empty distribution")
    u = values[0].u
    total = sum_u(values, u)
    if total.is_zero:
        raise ValueError("cannot normalize an all-zero distribution")
    return UDist(tuple(div_u(v, total) for v in values))


def round_dist(probabilities: Sequence[Number], u: int) -> UDist:
    """Round each probability and normalize the result."""
    return normalize_dist([round_to(p, u) for p in probabilities])


def fits_exponent(x: UFloat) -> bool:
    """Whether the exponent magnitude fits in u bits (u-bit represented)."""
    return abs(x.exponent) < (1 << x.u)
