"""Exact ordered fields: the rationals and real quadratic extensions.

Rational scalars are plain ``gmpy2.mpq`` values.  Elements of Q(sqrt d) that
are not rational are :class:`QuadraticElement` instances; arithmetic between
the two kinds is transparent and results collapse back to ``mpq`` whenever the
irrational part vanishes.

>>> f = QuadraticField(5)
>>> phi = (1 + f.sqrt) / 2
>>> phi * phi - phi - 1
mpq(0,1)
>>> sign(phi - 2), sign(phi - 1)
(-1, 1)
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from gmpy2 import mpq

Scalar = Union[mpq, "QuadraticElement"]
OrderedFieldElement = Scalar

_RATIONAL_TYPES = (int, type(mpq(0)), Fraction)


def _q(x) -> mpq:
    return x if type(x) is type(mpq(0)) else mpq(x)


def _sign_rational(x) -> int:
    return (x > 0) - (x < 0)


class QuadraticElement:
    """a + b*sqrt(d) with rational a, b and b != 0 (d square-free, d > 1)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int) -> None:
        self.a = _q(a)
        self.b = _q(b)
        self.d = d

    @staticmethod
    def make(a, b, d: int) -> Scalar:
        if b == 0:
            return _q(a)
        return QuadraticElement(a, b, d)

    def _parts(self, other):
        if isinstance(other, QuadraticElement):
            if other.d != self.d:
                raise ValueError(f"mixing sqrt({self.d}) and sqrt({other.d})")
            return other.a, other.b
        if isinstance(other, _RATIONAL_TYPES):
            return _q(other), mpq(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return QuadraticElement.make(self.a + p[0], self.b + p[1], self.d)

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return QuadraticElement.make(self.a - p[0], self.b - p[1], self.d)

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return QuadraticElement.make(p[0] - self.a, p[1] - self.b, self.d)

    def __neg__(self):
        return QuadraticElement(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, e = p
        return QuadraticElement.make(
            self.a * c + self.d * self.b * e, self.a * e + self.b * c, self.d
        )

    __rmul__ = __mul__

    def norm(self) -> mpq:
        return self.a * self.a - self.d * self.b * self.b

    def conjugate(self) -> QuadraticElement:
        return QuadraticElement(self.a, -self.b, self.d)

    def inverse(self) -> Scalar:
        n = self.norm()
        return QuadraticElement.make(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadraticElement):
            return self * other.inverse()
        if isinstance(other, _RATIONAL_TYPES):
            return QuadraticElement.make(self.a / other, self.b / other, self.d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _RATIONAL_TYPES):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out: Scalar = mpq(1)
        base: Scalar = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, QuadraticElement):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, _RATIONAL_TYPES):
            return False  # b != 0 by construction
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.d))

    def __bool__(self) -> bool:
        return True

    def sign(self) -> int:
        sa, sb = _sign_rational(self.a), _sign_rational(self.b)
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        # opposite signs: compare a^2 with d*b^2
        return sa if self.a * self.a > self.d * self.b * self.b else sb

    def __lt__(self, other) -> bool:
        return sign(self - other) < 0

    def __le__(self, other) -> bool:
        return sign(self - other) <= 0

    def __gt__(self, other) -> bool:
        return sign(self - other) > 0

    def __ge__(self, other) -> bool:
        return sign(self - other) >= 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * self.d**0.5

    def __repr__(self) -> str:
        return f"QuadraticElement({self.a}, {self.b}, {self.d})"

    def __str__(self) -> str:
        return format_scalar(self)


def sign(x: Scalar) -> int:
    """Exact sign (-1, 0 or 1) of a field element."""
    if isinstance(x, QuadraticElement):
        return x.sign()
    return _sign_rational(x)


def format_scalar(x: Scalar) -> str:
    if isinstance(x, QuadraticElement):
        if x.a == 0:
            return f"{x.b}*sqrt({x.d})"
        op = "+" if x.b > 0 else "-"
        return f"{x.a}{op}{abs(x.b)}*sqrt({x.d})"
    return str(x)


def scalar_to_json(x: Scalar) -> list[str] | str:
    if isinstance(x, QuadraticElement):
        return [str(x.a), str(x.b)]
    return str(_q(x))


def _squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


class QuadraticField:
    """Q(sqrt d); ``d == 1`` is treated as the rationals."""

    def __init__(self, d: int = 1) -> None:
        if d != 1 and not _squarefree(d):
            raise ValueError(f"d = {d} must be 1 or a square-free integer > 1")
        self.d = d

    @property
    def is_rational(self) -> bool:
        return self.d == 1

    @property
    def sqrt(self) -> Scalar:
        if self.is_rational:
            return mpq(1)
        return QuadraticElement(0, 1, self.d)

    def __call__(self, a, b=0) -> Scalar:
        if b and self.is_rational:
            raise ValueError("irrational part given for the rational field")
        return QuadraticElement.make(a, b, self.d)

    def parse(self, value) -> Scalar:
        """Accept ints, fraction strings, or ``[a, b]`` pairs meaning a + b*sqrt d."""
        if isinstance(value, QuadraticElement):
            if value.d != self.d:
                raise ValueError(f"element of Q(sqrt {value.d}) given for {self!r}")
            return value
        if isinstance(value, (list, tuple)):
            a, b = value
            return self(mpq(str(a)) if isinstance(a, str) else a, mpq(str(b)) if isinstance(b, str) else b)
        if isinstance(value, str):
            return mpq(value)
        if isinstance(value, float):
            raise ValueError("floats are not exact; give integers or fraction strings")
        return _q(value)

    def __eq__(self, other) -> bool:
        return isinstance(other, QuadraticField) and other.d == self.d

    def __hash__(self) -> int:
        return hash(("QuadraticField", self.d))

    def __repr__(self) -> str:
        return "QQ" if self.is_rational else f"QQ(sqrt({self.d}))"


def unify_fields(*fields: QuadraticField) -> QuadraticField:
    ds = {f.d for f in fields if not f.is_rational}
    if len(ds) > 1:
        raise ValueError(f"no single quadratic field contains sqrt of {sorted(ds)}")
    return QuadraticField(ds.pop() if ds else 1)
