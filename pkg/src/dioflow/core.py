"""Exact arithmetic scaffolding and closed-form formulas.

Real coordinates are held as dyadic rationals so that the diagonal flow,
which only multiplies by powers of two, acts exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction, str]

INFINITY = math.inf


class DomainError(ValueError):
    """Argument outside the domain of a formula."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, DyadicReal):
        return value.to_fraction()
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


_POW_RE = re.compile(r"^\s*([+-]?\d+)\s*\^\s*([+-]?\d+)\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse an integer, decimal, ``p/q`` or power ``b^k`` literal exactly.

    >>> parse_rational("2^-3")
    Fraction(1, 8)
    >>> parse_rational("3/12")
    Fraction(1, 4)
    """
    m = _POW_RE.match(text)
    if m:
        base, exp = int(m.group(1)), int(m.group(2))
        if base == 0 and exp < 0:
            raise ValueError(f"malformed rational literal: {text!r}")
        return Fraction(base) ** exp
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed rational literal: {text!r}") from None


def fraction_str(x: Fraction) -> str:
    """Serialize an exact rational as ``p/q`` (or ``p`` for integers)."""
    return str(Fraction(x))


@dataclass(frozen=True, order=False)
class DyadicReal:
    """The number ``mantissa / 2**scale`` in canonical form."""

    mantissa: int
    scale: int = 0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("scale must be non-negative")
        m, s = self.mantissa, self.scale
        if m == 0:
            s = 0
        else:
            tz = (m & -m).bit_length() - 1
            shift = min(tz, s)
            m >>= shift
            s -= shift
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "scale", s)

    @classmethod
    def from_fraction(cls, x: Fraction) -> "DyadicReal":
        x = Fraction(x)
        den = x.denominator
        if den & (den - 1):
            raise ValueError(f"{x} is not a dyadic rational")
        return cls(x.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.scale)

    def __float__(self) -> float:
        return self.mantissa / (1 << self.scale)

    def _coerce(self, other) -> "DyadicReal | None":
        if isinstance(other, DyadicReal):
            return other
        if isinstance(other, int):
            return DyadicReal(other, 0)
        return None

    def _aligned(self, other: "DyadicReal") -> tuple[int, int, int]:
        s = max(self.scale, other.scale)
        return self.mantissa << (s - self.scale), other.mantissa << (s - other.scale), s

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b, s = self._aligned(o)
        return DyadicReal(a + b, s)

    __radd__ = __add__

    def __neg__(self):
        return DyadicReal(-self.mantissa, self.scale)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return DyadicReal(self.mantissa * o.mantissa, self.scale + o.scale)

    __rmul__ = __mul__

    def __abs__(self):
        return DyadicReal(abs(self.mantissa), self.scale)

    def ldexp(self, k: int) -> "DyadicReal":
        """Multiply by ``2**k`` (the only division allowed)."""
        if k >= 0:
            if k <= self.scale:
                return DyadicReal(self.mantissa, self.scale - k)
            return DyadicReal(self.mantissa << (k - self.scale), 0)
        return DyadicReal(self.mantissa, self.scale - k)

    def _cmp(self, other) -> int:
        if isinstance(other, Fraction):
            d = self.to_fraction() - other
            return (d > 0) - (d < 0)
        o = self._coerce(other)
        if o is None:
            raise TypeError
        a, b, _ = self._aligned(o)
        return (a > b) - (a < b)

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __repr__(self):
        return f"DyadicReal({self.mantissa}, {self.scale})"

    def __str__(self):
        return fraction_str(self.to_fraction())


def quantize(literal: Union[str, Fraction, int], precision_bits: int) -> DyadicReal:
    """Nearest dyadic rational with scale at most ``precision_bits``.

    Ties round half to even. Accepts decimal literals and ``p/q``.
    """
    if precision_bits < 0:
        raise ValueError("precision_bits must be non-negative")
    x = parse_rational(literal) if isinstance(literal, str) else Fraction(literal)
    # round() on a Fraction rounds half to even
    return DyadicReal(round(x * (1 << precision_bits)), precision_bits)


_SURD_RE = re.compile(
    r"^\s*\(?\s*sqrt\(\s*(\d+)\s*\)\s*(?:([+-])\s*(\d+)\s*)?\)?\s*(?:/\s*(\d+))?\s*$")


def quadratic_surd(a: int, b: int, c: int, precision_bits: int) -> DyadicReal:
    """(sqrt(a) + b) / c rounded to the nearest multiple of 2^-precision_bits."""
    if a < 0 or c <= 0:
        raise ValueError("need a >= 0 and c > 0")
    # floor(sqrt(a) 2^(P+2)) with two guard bits, then round to P bits
    P = precision_bits
    r = math.isqrt(a << (2 * P + 4))
    exact = r * r == a << (2 * P + 4)
    num = r + (b << (P + 2))
    q, rem = divmod(num, c)
    # q approximates 4 * value * 2^P from below; round half up, breaking exact ties to even
    base, low = divmod(q, 4)
    if low > 2 or (low == 2 and (rem or not exact or base & 1)):
        base += 1
    return DyadicReal(base, P)


def parse_real(text: str, precision_bits: int) -> DyadicReal:
    """A rational literal (see parse_rational) or a surd ``(sqrt(a)+b)/c``, rounded to P bits."""
    m = _SURD_RE.match(text)
    if m:
        a = int(m.group(1))
        b = int(m.group(3) or 0) * (-1 if m.group(2) == "-" else 1)
        c = int(m.group(4) or 1)
        return quadratic_surd(a, b, c, precision_bits)
    return quantize(text, precision_bits)


def default_precision(n: int, t_max: int) -> int:
    return (n + 1) * t_max + 64


@dataclass(frozen=True)
class TargetVector:
    """A point y in R^n with exact dyadic coordinates."""

    coords: tuple[DyadicReal, ...]
    precision_bits: int

    def __post_init__(self):
        coords = tuple(c if isinstance(c, DyadicReal) else DyadicReal.from_fraction(as_fraction(c))
                       for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise ValueError("a target vector needs at least one coordinate")
        worst = max(c.scale for c in coords)
        if worst > self.precision_bits:
            raise ValueError(f"coordinate scale {worst} exceeds precision_bits={self.precision_bits}")

    @property
    def n(self) -> int:
        return len(self.coords)

    @classmethod
    def from_literals(cls, literals: Sequence[str], precision_bits: int) -> "TargetVector":
        return cls(tuple(parse_real(s, precision_bits) for s in literals), precision_bits)

    @classmethod
    def exact(cls, values: Iterable, precision_bits: int | None = None) -> "TargetVector":
        """Wrap values that are already dyadic; precision defaults to their largest scale."""
        coords = tuple(v if isinstance(v, DyadicReal) else DyadicReal.from_fraction(as_fraction(v))
                       for v in values)
        if precision_bits is None:
            precision_bits = max(c.scale for c in coords)
        return cls(coords, precision_bits)

    def fractions(self) -> tuple[Fraction, ...]:
        return tuple(c.to_fraction() for c in self.coords)

    def common_scale(self) -> int:
        return max(c.scale for c in self.coords)

    def integer_numerators(self, scale: int | None = None) -> tuple[list[int], int]:
        """Numerators of the coordinates over a common ``2**scale``."""
        if scale is None:
            scale = self.common_scale()
        return [c.mantissa << (scale - c.scale) for c in self.coords], scale

    def linear_form(self, p: int, q: Sequence[int]) -> Fraction:
        """The exact value of ``y.q + p``."""
        nums, s = self.integer_numerators()
        return Fraction(sum(a * b for a, b in zip(nums, q)) + (p << s), 1 << s)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class ApproximationQuery:
    v: Fraction
    norm_bound: int
    multiplicative: bool = False
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "v", as_fraction(self.v))
        if self.v < self.n:
            raise DomainError(f"v={self.v} must be at least n={self.n}")
        if self.norm_bound < 1:
            raise DomainError("norm bound Q must be a positive integer")


def _pow2_le(x: Fraction, exponent: Fraction) -> int:
    """Sign of ``x - 2**exponent`` for x > 0, computed exactly."""
    exponent = Fraction(exponent)
    a, b = exponent.numerator, exponent.denominator
    # compare x**b with 2**a
    lhs = x ** b
    rhs = Fraction(2) ** a
    return (lhs > rhs) - (lhs < rhs)


@dataclass(frozen=True)
class BoxSpec:
    """The box {|x_0| < 2^(-vs), |x_i| < 2^(s+1)} in R^(n+1)."""

    v: Fraction
    s: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "v", as_fraction(self.v))
        if self.s < 0 or self.n < 1:
            raise ValueError("need s >= 0 and n >= 1")

    @property
    def log2_half_sides(self) -> tuple[Fraction, ...]:
        return (-self.v * self.s,) + (Fraction(self.s + 1),) * self.n

    def contains(self, x: Sequence[Fraction]) -> bool:
        """Open-box membership, exact even when ``v*s`` is not an integer."""
        if len(x) != self.n + 1:
            raise ValueError("dimension mismatch")
        for xi, e in zip(x, self.log2_half_sides):
            xi = abs(Fraction(xi))
            if xi != 0 and _pow2_le(xi, e) >= 0:
                return False
        return True


def box_log2_volume(b: BoxSpec) -> Fraction:
    # each side has full length 2 * half-side
    return sum((1 + e for e in b.log2_half_sides), Fraction(0))


def box_volume(b: BoxSpec) -> Fraction:
    """Lebesgue volume of the box, as the product of its side lengths.

    Raises DomainError if ``v*s`` is not an integer (volume then irrational).
    """
    vol = Fraction(1)
    for e in b.log2_half_sides:
        if e.denominator != 1:
            raise DomainError(f"side 2^{e} is irrational; use box_log2_volume")
        vol *= 2 * Fraction(2) ** int(e)
    return vol


def gamma_of_v(n: int, v: RationalLike) -> Fraction:
    """Decay rate (v-n)/(n(v+1)) attached to the approximation exponent v."""
    v = as_fraction(v)
    if n < 1 or v < n:
        raise DomainError(f"need v >= n >= 1, got n={n}, v={v}")
    return (v - n) / (n * (v + 1))


def gamma_sharp(n: int, v: RationalLike) -> Fraction:
    """Rate (v-n)/(v+1) obtained by balancing 2^(nt) Q^(-v) = 2^(-t) Q."""
    v = as_fraction(v)
    if n < 1 or v < n:
        raise DomainError(f"need v >= n >= 1, got n={n}, v={v}")
    return (v - n) / (v + 1)


def v_of_gamma(n: int, gamma, convention: str = "sharp"):
    """Invert a decay rate back to an approximation exponent.

    Exact for rational input, float for float input; ``math.inf`` at or
    beyond the pole (gamma >= 1/n for 'scaled', gamma >= 1 for 'sharp').
    """
    if gamma < 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    if isinstance(gamma, (int, str)):
        gamma = Fraction(gamma)
    if convention == "scaled":
        denom = 1 - n * gamma
        if denom <= 0:
            return INFINITY
        return n * (1 + gamma) / denom
    if convention == "sharp":
        denom = 1 - gamma
        if denom <= 0:
            return INFINITY
        return (n + gamma) / denom
    raise ValueError(f"unknown convention {convention!r}")


@dataclass(frozen=True)
class CorrespondenceParams:
    n: int
    v: Fraction
    gamma_scaled: Fraction = field(init=False)
    gamma_sharp: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "v", as_fraction(self.v))
        object.__setattr__(self, "gamma_scaled", gamma_of_v(self.n, self.v))
        object.__setattr__(self, "gamma_sharp", gamma_sharp(self.n, self.v))


def log2_fraction(x: Fraction) -> float:
    """log2 of a positive rational, accurate for huge numerators/denominators."""
    x = Fraction(x)
    if x <= 0:
        raise DomainError("log2 of a non-positive number")
    return math.log2(x.numerator) - math.log2(x.denominator)
