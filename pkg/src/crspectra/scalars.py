"""Exact scalars: Gaussian rationals and the perturbation parameter t."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

__all__ = ["GaussianRational", "PerturbationParam", "to_scalar", "parse_rational", "is_exact"]


def parse_rational(text: str | int | float | Fraction) -> Fraction:
    """Parse ``"1/2"``, ``"0.3"``, ``"-2"`` (or a number) into a Fraction.

    Floats are taken at their exact binary value, decimal strings at their
    decimal value.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, float)):
        return Fraction(text)
    return Fraction(text.strip())


_FZERO = Fraction(0)


class GaussianRational:
    """An element ``re + i*im`` of Q(i) with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Rational | int | str = 0, im: Rational | int | str = 0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot represent {x!r} exactly as a Gaussian rational")

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """|z|^2, exactly."""
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __pos__(self) -> "GaussianRational":
        return self

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re - other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) - other
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b and not d:
                return GaussianRational(a * c, _FZERO)
            return GaussianRational(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, Fraction)):
            if not self.im:
                return GaussianRational(self.re * other, _FZERO)
            return GaussianRational(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return GaussianRational(self.re / other, self.im / other)
        if isinstance(other, GaussianRational):
            n = other.norm2()
            if n == 0:
                raise ZeroDivisionError("division by zero")
            num = self * other.conjugate()
            return GaussianRational(num.re / n, num.im / n)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other) / self
        if isinstance(other, (float, complex)):
            return other / complex(self)
        return NotImplemented

    def __pow__(self, n: int) -> "GaussianRational":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return GaussianRational(1) / (self ** (-n))
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result


Scalar = Union[GaussianRational, complex]


def is_exact(x) -> bool:
    return isinstance(x, (GaussianRational, int, Fraction))


def to_scalar(x) -> Scalar:
    """Normalize a number to GaussianRational when exact, complex otherwise."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    return complex(x)


def conj(x):
    if isinstance(x, GaussianRational):
        return x.conjugate()
    return complex(x).conjugate()


class PerturbationParam:
    """The complex perturbation parameter t with |t| < 1, held exactly.

    Any float input is an exact dyadic rational, so both parts are always
    stored as Fractions and every downstream quantity depending only on
    t, conj(t) and |t|^2 stays exact.
    """

    __slots__ = ("value",)

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational) and im == 0:
            value = re
        elif isinstance(re, complex) and im == 0:
            value = GaussianRational(Fraction(re.real), Fraction(re.imag))
        else:
            value = GaussianRational(parse_rational(re), parse_rational(im))
        if value.norm2() >= 1:
            raise ValueError(f"perturbation parameter must satisfy |t| < 1, got t = {value}")
        self.value = value

    @classmethod
    def parse(cls, text: str) -> "PerturbationParam":
        """Parse ``"re,im"`` (each part rational or decimal) or a single real."""
        parts = [p for p in text.split(",")]
        if len(parts) == 1:
            return cls(parse_rational(parts[0]), 0)
        if len(parts) != 2:
            raise ValueError(f"expected 're,im', got {text!r}")
        return cls(parse_rational(parts[0]), parse_rational(parts[1]))

    @property
    def t(self) -> GaussianRational:
        return self.value

    @property
    def tbar(self) -> GaussianRational:
        return self.value.conjugate()

    @property
    def abs2(self) -> Fraction:
        return self.value.norm2()

    def h(self) -> Fraction:
        """The scaling (1 + |t|^2) / (1 - |t|^2)^2 of the physical operator."""
        a = self.abs2
        return (1 + a) / (1 - a) ** 2

    def is_zero(self) -> bool:
        return not self.value

    def rotated(self, unit: GaussianRational) -> "PerturbationParam":
        if unit.norm2() != 1:
            raise ValueError("rotation must be by a unit Gaussian rational")
        return PerturbationParam(self.value * unit)

    def to_json(self) -> dict:
        return {"re": str(self.value.re), "im": str(self.value.im)}

    @classmethod
    def from_json(cls, obj) -> "PerturbationParam | None":
        if obj is None:
            return None
        return cls(parse_rational(str(obj["re"])), parse_rational(str(obj["im"])))

    def __eq__(self, other) -> bool:
        return isinstance(other, PerturbationParam) and self.value == other.value

    def __hash__(self) -> int:
        return hash(self.value)

    def __repr__(self) -> str:
        return f"PerturbationParam({self.value})"

    def __str__(self) -> str:
        return f"{self.value.re},{self.value.im}"
