"""Outward-rounded interval arithmetic on IEEE double endpoints.

Every operation returns an interval that contains the exact image set of
its operand intervals.  Endpoints are ordinary binary doubles; results are
widened by one ulp past the round-to-nearest value except where the result
is provably exact (error-free sums, multiplication by 0), so structural
zeros stay exact.  Library log/exp are faithfully rounded on this platform;
they are widened by two ulps.

Decimal constants must enter through :meth:`Interval.from_decimal`, which
returns the tightest double enclosure of the exact decimal value.  Plain
``int``/``float`` scalars mixed into arithmetic are taken at face value as
exact doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, localcontext, ROUND_CEILING, ROUND_FLOOR
from fractions import Fraction
from typing import Iterable, Union

from .errors import SaddleCertError

_INF = math.inf


class IntervalError(SaddleCertError):
    """Malformed interval or invalid interval operation."""


class DivisionByZeroInterval(IntervalError):
    """The divisor interval contains zero."""


class DomainError(IntervalError):
    """Argument leaves the operation's domain (log, sqrt, real power)."""


class AmbiguousInteger(IntervalError):
    """ceil/floor differs between the endpoints; the input must be tightened."""


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _add_down(a: float, b: float) -> float:
    s = a + b
    if s - a == b and s - b == a:  # error-free sum
        return s
    return _down(s)


def _add_up(a: float, b: float) -> float:
    s = a + b
    if s - a == b and s - b == a:
        return s
    return _up(s)


def _mul_down(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    if a == 1.0:
        return b
    if b == 1.0:
        return a
    return _down(a * b)


def _mul_up(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    if a == 1.0:
        return b
    if b == 1.0:
        return a
    return _up(a * b)


def _prod_bounds(xs) -> tuple[float, float]:
    """min/max of candidate endpoint products, mapping 0*inf -> 0."""
    lo = _INF
    hi = -_INF
    for a, b in xs:
        if a == 0.0 or b == 0.0:
            p = 0.0
        else:
            p = a * b
        lo = min(lo, p)
        hi = max(hi, p)
    return lo, hi


Scalar = Union[int, float]


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi]; endpoints may be -inf/+inf, never NaN."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise IntervalError("NaN endpoint")
        if self.lo > self.hi:
            raise IntervalError(f"inverted endpoints [{self.lo!r}, {self.hi!r}]")

    # -- construction -------------------------------------------------

    @classmethod
    def point(cls, x: Scalar) -> "Interval":
        x = float(x)
        return cls(x, x)

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Interval":
        """Tightest double enclosure of an exact rational."""
        _MAX = 1.7976931348623157e308
        try:
            f = float(q)  # int/int true division is correctly rounded
        except OverflowError:
            return cls(_MAX, _INF) if q > 0 else cls(-_INF, -_MAX)
        if math.isinf(f):
            return cls(_MAX, _INF) if f > 0 else cls(-_INF, -_MAX)
        exact = Fraction(f)
        if exact == q:
            return cls(f, f)
        if exact < q:
            return cls(f, _up(f))
        return cls(_down(f), f)

    @classmethod
    def from_decimal(cls, s: str) -> "Interval":
        """Enclosure of the exact value of a decimal literal like '-0.2' or '1e-3'.

        An optional ``A/B`` form (both decimal literals) denotes the exact
        quotient, for coefficients such as ``-741.0341/3``.
        """
        s = s.strip()
        try:
            if "/" in s:
                num, den = s.split("/", 1)
                q = Fraction(Decimal(num.strip())) / Fraction(Decimal(den.strip()))
            else:
                q = Fraction(Decimal(s))
        except (InvalidOperation, ZeroDivisionError, ValueError) as exc:
            raise IntervalError(f"bad decimal literal {s!r}") from exc
        return cls.from_fraction(q)

    @staticmethod
    def _lift(x: "Interval | Scalar") -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)):
            return Interval.point(x)
        return NotImplemented  # type: ignore[return-value]

    # -- set queries ---------------------------------------------------

    @property
    def sup(self) -> float:
        return self.hi

    @property
    def inf(self) -> float:
        return self.lo

    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def width(self) -> float:
        return self.hi - self.lo

    def mag(self) -> float:
        """max |endpoint|."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """Distance from the interval to zero (0 when the interval contains it)."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: "Interval | Scalar") -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= float(x) <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def issubset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def hull(self, other: "Interval | Scalar") -> "Interval":
        o = Interval._lift(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def intersect(self, other: "Interval") -> "Interval | None":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def strictly_less(self, other: "Interval | Scalar") -> bool:
        """Certified self < other: true for every point pair."""
        o = Interval._lift(other)
        return self.hi < o.lo

    def strictly_positive(self) -> bool:
        return self.lo > 0.0

    def strictly_negative(self) -> bool:
        return self.hi < 0.0

    def ceil_sup(self) -> int:
        """The common ceiling of every point, or AmbiguousInteger."""
        lo_c, hi_c = math.ceil(self.lo), math.ceil(self.hi)
        if lo_c != hi_c:
            raise AmbiguousInteger(f"ceil ranges over [{lo_c}, {hi_c}] on {self}")
        return hi_c

    def floor_inf(self) -> int:
        """The common floor of every point, or AmbiguousInteger."""
        lo_f, hi_f = math.floor(self.lo), math.floor(self.hi)
        if lo_f != hi_f:
            raise AmbiguousInteger(f"floor ranges over [{lo_f}, {hi_f}] on {self}")
        return lo_f

    def excludes_integers(self) -> bool:
        """Certified: no integer lies in the interval."""
        if self.hi - self.lo >= 1.0:
            return False
        return math.ceil(self.lo) > math.floor(self.hi)

    # -- arithmetic ----------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def __add__(self, other: "Interval | Scalar") -> "Interval":
        o = Interval._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(_add_down(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other: "Interval | Scalar") -> "Interval":
        o = Interval._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return Interval(_add_down(self.lo, -o.hi), _add_up(self.hi, -o.lo))

    def __rsub__(self, other: Scalar) -> "Interval":
        return Interval.point(other) - self

    def __mul__(self, other: "Interval | Scalar") -> "Interval":
        o = Interval._lift(other)
        if o is NotImplemented:
            return NotImplemented
        if (self.lo == 0.0 and self.hi == 0.0) or (o.lo == 0.0 and o.hi == 0.0):
            return Interval(0.0, 0.0)
        pairs = ((self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi))
        lo, hi = _prod_bounds(pairs)
        if self.is_point() and (self.lo == 1.0 or self.lo == -1.0):
            return Interval(lo, hi)  # exact sign flip / identity
        if o.is_point() and (o.lo == 1.0 or o.lo == -1.0):
            return Interval(lo, hi)
        return Interval(_down(lo), _up(hi))

    __rmul__ = __mul__

    def __truediv__(self, other: "Interval | Scalar") -> "Interval":
        o = Interval._lift(other)
        if o is NotImplemented:
            return NotImplemented
        if o.lo <= 0.0 <= o.hi:
            raise DivisionByZeroInterval(f"divisor {o} contains zero")
        if self.lo == 0.0 and self.hi == 0.0:
            return Interval(0.0, 0.0)
        quots = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(_down(min(quots)), _up(max(quots)))

    def __rtruediv__(self, other: Scalar) -> "Interval":
        return Interval.point(other) / self

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise DomainError(f"sqrt of {self}")
        lo = math.sqrt(self.lo)
        hi = math.sqrt(self.hi)
        if Fraction(lo) * Fraction(lo) != Fraction(self.lo):
            lo = max(0.0, _down(lo))
        if Fraction(hi) * Fraction(hi) != Fraction(self.hi):
            hi = _up(hi)
        return Interval(lo, hi)

    def log(self) -> "Interval":
        if self.lo <= 0.0:
            raise DomainError(f"log of {self}")
        lo = 0.0 if self.lo == 1.0 else _down(_down(math.log(self.lo)))
        hi = 0.0 if self.hi == 1.0 else _up(_up(math.log(self.hi)))
        return Interval(lo, hi)

    def exp(self) -> "Interval":
        lo = 1.0 if self.lo == 0.0 else max(0.0, _down(_down(math.exp(self.lo))))
        hi = 1.0 if self.hi == 0.0 else _up(_up(math.exp(self.hi)))
        return Interval(lo, hi)

    def pow_int(self, n: int) -> "Interval":
        """n-th power with tight handling of even powers across zero."""
        if n == 0:
            return Interval(1.0, 1.0)
        if n < 0:
            return Interval(1.0, 1.0) / self.pow_int(-n)
        if n % 2 == 0 and self.lo < 0.0 < self.hi:
            m = max(-self.lo, self.hi)
            return Interval(0.0, _pow_up(m, n))
        e1 = _pow_down(self.lo, n), _pow_up(self.lo, n)
        e2 = _pow_down(self.hi, n), _pow_up(self.hi, n)
        return Interval(min(e1[0], e2[0]), max(e1[1], e2[1]))

    def pow_real(self, p: "Interval | Scalar") -> "Interval":
        """Real power exp(p*log(self)); requires a strictly positive base."""
        if self.lo <= 0.0:
            raise DomainError(f"real power of non-positive base {self}")
        return (Interval._lift(p) * self.log()).exp()

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return format_interval(self)


def _pow_down(x: float, n: int) -> float:
    """Lower bound on x**n (n >= 1) by directed repeated squaring."""
    if x == 0.0:
        return 0.0
    if x < 0.0:
        up = _pow_up_abs(-x, n)
        dn = _pow_down_abs(-x, n)
        return -up if n % 2 else dn
    return _pow_down_abs(x, n)


def _pow_up(x: float, n: int) -> float:
    if x == 0.0:
        return 0.0
    if x < 0.0:
        up = _pow_up_abs(-x, n)
        dn = _pow_down_abs(-x, n)
        return -dn if n % 2 else up
    return _pow_up_abs(x, n)


def _pow_down_abs(x: float, n: int) -> float:
    acc, base = 1.0, x
    while n:
        if n & 1:
            acc = _mul_down(acc, base)
        n >>= 1
        if n:
            base = _mul_down(base, base)
    return acc


def _pow_up_abs(x: float, n: int) -> float:
    acc, base = 1.0, x
    while n:
        if n & 1:
            acc = _mul_up(acc, base)
        n >>= 1
        if n:
            base = _mul_up(base, base)
    return acc


ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


def hull_of(items: Iterable[Interval]) -> Interval:
    out = None
    for it in items:
        out = it if out is None else out.hull(it)
    if out is None:
        raise IntervalError("hull of empty collection")
    return out


def imin(a: Interval, b: Interval) -> Interval:
    """Enclosure of min(x, y) over the operands."""
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi))


def format_interval(iv: Interval, sig: int = 6) -> str:
    """Render [lo, hi] in decimal, rounded outward to `sig` significant digits.

    Re-parsing the printed endpoints as decimals yields an enclosure of the
    original interval.
    """
    with localcontext() as ctx:
        ctx.prec = sig
        ctx.rounding = ROUND_FLOOR
        lo = ctx.plus(Decimal(iv.lo))
        ctx.rounding = ROUND_CEILING
        hi = ctx.plus(Decimal(iv.hi))
    return f"[{lo}, {hi}]"
