"""Exact Gaussian rationals ``a + b*i`` with ``a, b`` in Q."""
from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq

__all__ = ["Scalar", "ZERO", "ONE", "I", "as_scalar", "rational"]


def rational(x) -> mpq:
    """Coerce ints, strings like ``"3/4"``, Fractions and mpq to mpq."""
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class Scalar:
    """Element of Q(i).  Immutable; hashable; compares exactly."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is type(_Q0) else rational(re)
        self.im = im if type(im) is type(_Q0) else rational(im)

    # construction helpers -------------------------------------------------
    @classmethod
    def parse(cls, obj) -> "Scalar":
        """Accept ``{"re": "p/q", "im": "r/s"}``, a rational string or a number."""
        if isinstance(obj, Scalar):
            return obj
        if isinstance(obj, dict):
            return cls(rational(obj.get("re", 0)), rational(obj.get("im", 0)))
        return cls(rational(obj))

    def to_json(self) -> dict:
        return {"re": str(self.re), "im": str(self.im)}

    # arithmetic -----------------------------------------------------------
    def __add__(self, o):
        if not isinstance(o, Scalar):
            o = as_scalar(o)
        return Scalar(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        if not isinstance(o, Scalar):
            o = as_scalar(o)
        return Scalar(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return as_scalar(o) - self

    def __neg__(self):
        return Scalar(-self.re, -self.im)

    def __mul__(self, o):
        if not isinstance(o, Scalar):
            o = as_scalar(o)
        a, b, c, d = self.re, self.im, o.re, o.im
        return Scalar(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, Scalar):
            o = as_scalar(o)
        return self * o.inverse()

    def __rtruediv__(self, o):
        return as_scalar(o) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "Scalar":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero Scalar")
        return Scalar(self.re / n, -self.im / n)

    def conjugate(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def norm2(self) -> mpq:
        """|a|^2, an exact rational."""
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        if not isinstance(o, Scalar):
            try:
                o = as_scalar(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


_Q0 = mpq(0)


def as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, complex):
        raise TypeError("floating-point complex values are not exact")
    if isinstance(x, float):
        raise TypeError("floating-point values are not exact")
    return Scalar(rational(x))


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)
