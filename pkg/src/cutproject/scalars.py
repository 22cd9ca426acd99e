"""Exact scalars: rationals together with real quadratic irrationals a + b*sqrt(d).

Signs, comparisons, and floors are decided by integer arithmetic alone, so
half-open membership tests never depend on rounding.  A scalar is stored in
the normal form (a, b, d) with d squarefree; two scalars are equal exactly
when their normal forms agree.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import isqrt

import mpmath

from .errors import BoundaryAmbiguousError, FieldMismatchError

__all__ = [
    "Surd",
    "sqrt_int",
    "golden_ratio",
    "scalar_sign",
    "exact_floor",
    "exact_ceil",
    "float_sign",
    "parse_scalar",
    "format_scalar",
    "to_mpf",
    "from_number",
]


def _square_free(d: int) -> tuple[int, int]:
    # d = s*s*d0 with d0 squarefree
    s = 1
    p = 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            s *= p
        p += 1 if p == 2 else 2
    return s, d


def _sign_rational(a: Fraction) -> int:
    if a > 0:
        return 1
    if a < 0:
        return -1
    return 0


class Surd:
    """a + b*sqrt(d) with a, b rational and d a squarefree integer >= 2.

    Rationals are represented with b == 0, d == 0.  Arithmetic with ints and
    Fractions promotes them; mixing two different irrational discriminants
    raises FieldMismatchError rather than silently leaving the field.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a=0, b=0, d=0):
        a = Fraction(a)
        b = Fraction(b)
        d = int(d)
        if b == 0:
            d = 0
        else:
            if d < 2:
                raise ValueError("discriminant must be an integer >= 2")
            r = isqrt(d)
            if r * r == d:
                a += b * r
                b = Fraction(0)
                d = 0
            else:
                s, d = _square_free(d)
                if s != 1:
                    b *= s
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Surd is immutable")

    # -- coercion ---------------------------------------------------------

    def _compat(self, other) -> "Surd":
        """Return other as a Surd in a field compatible with self."""
        if isinstance(other, Surd):
            if self.d and other.d and self.d != other.d:
                raise FieldMismatchError(
                    f"cannot combine sqrt({self.d}) with sqrt({other.d})"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Surd(other)
        return NotImplemented

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return NotImplemented
        d = self.d or o.d
        return Surd(self.a + o.a, self.b + o.b, d or 0) if d else Surd(self.a + o.a)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d) if self.d else Surd(-self.a)

    def __sub__(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return NotImplemented
        d = self.d or o.d
        a = self.a * o.a
        if d:
            a += self.b * o.b * d
            b = self.a * o.b + self.b * o.a
            return Surd(a, b, d)
        return Surd(a)

    __rmul__ = __mul__

    def _inverse(self) -> "Surd":
        if self.d == 0:
            if self.a == 0:
                raise ZeroDivisionError("division by zero scalar")
            return Surd(1 / self.a)
        n = self.a * self.a - self.b * self.b * self.d
        # n == 0 would force a/b = +-sqrt(d), impossible for rationals
        return Surd(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o._inverse()

    def __rtruediv__(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self._inverse()

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Surd(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- exact decisions --------------------------------------------------

    def sign(self) -> int:
        a, b, d = self.a, self.b, self.d
        if b == 0:
            return _sign_rational(a)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        t = a * a - b * b * d
        # t == 0 cannot happen: d is squarefree >= 2 and a, b nonzero
        if a > 0:
            return 1 if t > 0 else -1
        return -1 if t > 0 else 1

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def conjugate(self) -> "Surd":
        return Surd(self.a, -self.b, self.d) if self.d else Surd(self.a)

    def floor(self) -> int:
        if self.b == 0:
            return self.a.numerator // self.a.denominator
        # bracket sqrt(d) between s/2^k and (s+1)/2^k, then correct exactly
        k = 32
        s = isqrt(self.d << (2 * k))
        lo = self.a + self.b * Fraction(s if self.b > 0 else s + 1, 1 << k)
        f = lo.numerator // lo.denominator
        while (self - f).sign() < 0:
            f -= 1
        while (self - (f + 1)).sign() >= 0:
            f += 1
        return f

    def ceil(self) -> int:
        return -((-self).floor())

    # -- comparisons ------------------------------------------------------

    def _diff_sign(self, other):
        o = self._compat(other)
        if o is NotImplemented:
            return None
        return (self - o).sign()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, Surd):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other):
        s = self._diff_sign(other)
        if s is None:
            return NotImplemented
        return s < 0

    def __le__(self, other):
        s = self._diff_sign(other)
        if s is None:
            return NotImplemented
        return s <= 0

    def __gt__(self, other):
        s = self._diff_sign(other)
        if s is None:
            return NotImplemented
        return s > 0

    def __ge__(self, other):
        s = self._diff_sign(other)
        if s is None:
            return NotImplemented
        return s >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return not (self.a == 0 and self.b == 0)

    # -- output -----------------------------------------------------------

    def evaluate(self, bits: int = 53) -> mpmath.mpf:
        with mpmath.workprec(bits + 16):
            v = mpmath.mpf(self.a.numerator) / self.a.denominator
            if self.b:
                v += (mpmath.mpf(self.b.numerator) / self.b.denominator) * mpmath.sqrt(self.d)
            return +v

    def __float__(self):
        return float(self.evaluate(80))

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"Surd({format_scalar(self)!r})"


def sqrt_int(d: int) -> Surd:
    """Exact square root of a positive integer."""
    if d < 0:
        raise ValueError("negative discriminant")
    return Surd(0, 1, d) if isqrt(d) ** 2 != d else Surd(isqrt(d))


def golden_ratio() -> Surd:
    return Surd(Fraction(1, 2), Fraction(1, 2), 5)


# -- helpers over the scalar protocol (int | Fraction | Surd) -------------


def scalar_sign(x) -> int:
    """Exact sign of an exact scalar."""
    if isinstance(x, Surd):
        return x.sign()
    if isinstance(x, (int, Fraction)):
        return (x > 0) - (x < 0)
    raise TypeError(f"not an exact scalar: {x!r}")


def exact_floor(x) -> int:
    if isinstance(x, Surd):
        return x.floor()
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    raise TypeError(f"not an exact scalar: {x!r}")


def exact_ceil(x) -> int:
    return -exact_floor(-x)


def float_sign(x, margin) -> int:
    """Sign of a floating scalar, refusing to answer within margin of zero."""
    if abs(x) < margin:
        raise BoundaryAmbiguousError(
            f"value {x} lies within {margin} of a facet; precision exhausted"
        )
    return 1 if x > 0 else -1


def to_mpf(x, bits: int = 256) -> mpmath.mpf:
    """Evaluate any supported scalar to an mpf with the requested precision."""
    if isinstance(x, Surd):
        return x.evaluate(bits)
    with mpmath.workprec(bits):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return +mpmath.mpf(x)


def from_number(x):
    """Coerce a number to an exact scalar, converting floats by exact value."""
    if isinstance(x, (int, Fraction, Surd)):
        return x
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("not a finite number")
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise ValueError("not a finite number")
        sign, man, exp, _ = x._mpf_
        num = -man if sign else man
        f = Fraction(num * 2**exp) if exp >= 0 else Fraction(num, 2**-exp)
        return f
    raise TypeError(f"cannot represent {x!r} exactly")


# -- parsing and formatting ----------------------------------------------

_ROOT = r"(?:√|sqrt\s*)(?P<d>\d+)"
_RE_RATIONAL = re.compile(r"^\s*(?P<a>[+-]?\d+(?:/\d+)?)\s*$")
_RE_SURD = re.compile(rf"^\s*(?P<bsign>[+-])?\s*(?P<b>\d+(?:/\d+)?)?\s*{_ROOT}\s*$")
_RE_BOTH = re.compile(
    rf"^\s*(?P<a>[+-]?\d+(?:/\d+)?)\s*(?P<sign>[+-])\s*(?P<b>\d+(?:/\d+)?)?\s*{_ROOT}\s*$"
)


def parse_scalar(text: str):
    """Parse 'a', 'a+b√d', '-b√d', 'sqrt d' forms into Fraction or Surd."""
    m = _RE_RATIONAL.match(text)
    if m:
        return Fraction(m.group("a"))
    m = _RE_SURD.match(text)
    if m:
        a = Fraction(0)
        b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
        if m.group("bsign") == "-":
            b = -b
    else:
        m = _RE_BOTH.match(text)
        if not m:
            raise ValueError(f"cannot parse scalar {text!r}")
        a = Fraction(m.group("a"))
        b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
        if m.group("sign") == "-":
            b = -b
    v = Surd(a, b, int(m.group("d")))
    return v.as_fraction() if v.is_rational() else v


def format_scalar(x) -> str:
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Surd):
        if x.b == 0:
            return str(x.a)
        b = x.b
        head = "" if x.a == 0 else str(x.a)
        sign = "-" if b < 0 else ("+" if head else "")
        mag = abs(b)
        coeff = "" if mag == 1 else str(mag)
        return f"{head}{sign}{coeff}√{x.d}"
    raise TypeError(f"not an exact scalar: {x!r}")
