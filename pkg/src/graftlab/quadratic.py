"""Exact arithmetic in real quadratic fields.

Saddle-connection detection and Rauzy-Veech comparisons must be exact, so
flat surfaces with irrational directions store their coordinates as numbers
``a + b*sqrt(D)`` with rational ``a`` and ``b``. Rationals are the special
case ``b == 0`` and mix freely with any field.
"""

import math
from fractions import Fraction
from functools import total_ordering

__all__ = ["QuadraticIrrational", "Scalar", "as_quadratic", "parse_scalar"]


@total_ordering
class QuadraticIrrational:
    __slots__ = ("a", "b", "D")

    def __init__(self, a: int | Fraction = 0, b: int | Fraction = 0, D: int = 0):
        a = Fraction(a)
        b = Fraction(b)
        if b != 0 and (D < 2 or math.isqrt(D) ** 2 == D):
            raise ValueError(f"D={D} must be a positive non-square integer")
        self.a = a
        self.b = b
        self.D = D if b != 0 else 0

    @classmethod
    def sqrt(cls, D: int) -> "QuadraticIrrational":
        return cls(0, 1, D)

    def _field(self, other: "QuadraticIrrational") -> int:
        if self.D and other.D and self.D != other.D:
            raise ValueError(f"cannot mix sqrt({self.D}) and sqrt({other.D})")
        return self.D or other.D

    def __add__(self, other):
        other = as_quadratic(other)
        return QuadraticIrrational(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-as_quadratic(other))

    def __rsub__(self, other):
        return as_quadratic(other) - self

    def __mul__(self, other):
        other = as_quadratic(other)
        D = self._field(other)
        return QuadraticIrrational(
            self.a * other.a + self.b * other.b * D,
            self.a * other.b + self.b * other.a,
            D,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticIrrational":
        return QuadraticIrrational(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def __truediv__(self, other):
        other = as_quadratic(other)
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return self * other.conjugate() * QuadraticIrrational(1 / n)

    def __rtruediv__(self, other):
        return as_quadratic(other) / self

    def sign(self) -> int:
        """Exact sign of ``a + b*sqrt(D)``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 D
        diff = self.a * self.a - self.b * self.b * self.D
        return sa if diff > 0 else (-sa if diff < 0 else 0)

    def __eq__(self, other):
        try:
            return (self - other).sign() == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.D)

    def is_rational(self) -> bool:
        return self.b == 0

    def to_json(self) -> str | dict:
        if self.b == 0:
            return str(self.a)
        return {"a": str(self.a), "b": str(self.b), "D": self.D}

    def __repr__(self):
        if self.b == 0:
            return f"{self.a}"
        return f"({self.a} + {self.b}*sqrt({self.D}))"


Scalar = QuadraticIrrational | Fraction | int


def as_quadratic(x) -> QuadraticIrrational:
    if isinstance(x, QuadraticIrrational):
        return x
    if isinstance(x, int | Fraction):
        return QuadraticIrrational(x)
    if isinstance(x, str):
        return QuadraticIrrational(Fraction(x))
    raise TypeError(f"cannot use {type(x).__name__} in exact arithmetic")


def parse_scalar(raw) -> QuadraticIrrational:
    """Parse the JSON scalar forms ``"p/q"``, integers and ``{"a", "b", "D"}``."""
    if isinstance(raw, dict):
        return QuadraticIrrational(Fraction(str(raw.get("a", 0))), Fraction(str(raw.get("b", 0))), int(raw.get("D", 0)))
    if isinstance(raw, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(raw, float):
        # decimal literal from JSON, kept exact as written
        return QuadraticIrrational(Fraction(repr(raw)))
    return as_quadratic(raw)
