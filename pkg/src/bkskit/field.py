"""Exact arithmetic in the quadratic field Q(sqrt2).

Every coordinate of the built-in sets lives in this field, so orthogonality
is decided with zero numerical error.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "FieldElement",
    "ExactVector",
    "add",
    "mul",
    "inner_product",
    "parse_element",
    "format_element",
    "canonical_ray",
]

Number = Union[int, Fraction, "FieldElement"]

SQRT2_FLOAT = math.sqrt(2.0)


class FieldElement:
    """The number ``rational + radical * sqrt2`` with rational ``rational`` and ``radical``."""

    __slots__ = ("_a", "_b", "_hash")

    def __init__(self, rational: int | Fraction | str = 0, radical: int | Fraction | str = 0) -> None:
        self._a = Fraction(rational)
        self._b = Fraction(radical)
        self._hash = hash((self._a, self._b))

    @property
    def rational_part(self) -> Fraction:
        return self._a

    @property
    def radical_part(self) -> Fraction:
        return self._b

    @classmethod
    def coerce(cls, x: Number) -> FieldElement:
        if isinstance(x, FieldElement):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot interpret {x!r} as an element of Q(sqrt2)")

    def is_zero(self) -> bool:
        # sqrt2 is irrational, so a + b*sqrt2 = 0 forces a = b = 0
        return self._a == 0 and self._b == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = FieldElement(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self._a == other._a and self._b == other._b

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"FieldElement({format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)

    def __neg__(self) -> FieldElement:
        return FieldElement(-self._a, -self._b)

    def __add__(self, other: Number) -> FieldElement:
        o = FieldElement.coerce(other)
        return FieldElement(self._a + o._a, self._b + o._b)

    __radd__ = __add__

    def __sub__(self, other: Number) -> FieldElement:
        o = FieldElement.coerce(other)
        return FieldElement(self._a - o._a, self._b - o._b)

    def __rsub__(self, other: Number) -> FieldElement:
        return FieldElement.coerce(other) - self

    def __mul__(self, other: Number) -> FieldElement:
        o = FieldElement.coerce(other)
        a1, b1, a2, b2 = self._a, self._b, o._a, o._b
        return FieldElement(a1 * a2 + 2 * b1 * b2, a1 * b2 + a2 * b1)

    __rmul__ = __mul__

    def conjugate(self) -> FieldElement:
        """Galois conjugate ``a - b*sqrt2``."""
        return FieldElement(self._a, -self._b)

    def norm(self) -> Fraction:
        return self._a * self._a - 2 * self._b * self._b

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse in Q(sqrt2)")
        n = self.norm()
        return FieldElement(self._a / n, -self._b / n)

    def __truediv__(self, other: Number) -> FieldElement:
        return self * FieldElement.coerce(other).inverse()

    def __rtruediv__(self, other: Number) -> FieldElement:
        return FieldElement.coerce(other) * self.inverse()

    def __float__(self) -> float:
        return float(self._a) + float(self._b) * SQRT2_FLOAT


ExactVector = tuple  # tuple[FieldElement, ...]; nonzero, length = ambient dimension


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def inner_product(u: Sequence[FieldElement], v: Sequence[FieldElement]) -> FieldElement:
    """Exact real inner product. Coordinates are real, so nothing is conjugated."""
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    a = Fraction(0)
    b = Fraction(0)
    for x, y in zip(u, v):
        x = FieldElement.coerce(x)
        y = FieldElement.coerce(y)
        a += x._a * y._a + 2 * x._b * y._b
        b += x._a * y._b + x._b * y._a
    return FieldElement(a, b)


def canonical_ray(v: Sequence[FieldElement]) -> tuple[FieldElement, ...]:
    """Representative of the ray through ``v``: divide by the first nonzero coordinate."""
    coords = tuple(FieldElement.coerce(x) for x in v)
    for x in coords:
        if not x.is_zero():
            inv = x.inverse()
            return tuple(c * inv for c in coords)
    raise ValueError("the zero vector does not span a ray")


# Serialization --------------------------------------------------------------
#
# Canonical output: "p/q" for the rational part, "(r/s)sqrt2" for the radical
# part, joined by "+", e.g. "1/3+(-3/2)sqrt2".  The parser is more lenient and
# also accepts forms such as "-3t/2", "2*sqrt2", "sqrt2/3" or "1-sqrt2".

def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_element(x: FieldElement) -> str:
    a, b = x.rational_part, x.radical_part
    if b == 0:
        return _fmt_q(a)
    rad = f"({_fmt_q(b)})sqrt2"
    if a == 0:
        return rad
    return f"{_fmt_q(a)}+{rad}"


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
    (?:
        \((?P<paren>[^()]*)\)\s*\*?\s*(?P<prad>sqrt2|t)
      | (?P<num>\d+(?:/\d+)?)?\s*\*?\s*(?P<rad>sqrt2|t)?\s*(?:/\s*(?P<den>\d+))?
    )\s*""",
    re.VERBOSE,
)


def parse_element(text: str | int) -> FieldElement:
    """Parse a serialized field element. Raises ``ValueError`` on malformed input."""
    if isinstance(text, int):
        return FieldElement(text)
    s = text.strip()
    if not s:
        raise ValueError("empty field element")
    a = Fraction(0)
    b = Fraction(0)
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"malformed field element {text!r}")
        if not first and m.group("sign") is None:
            raise ValueError(f"malformed field element {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        if m.group("prad"):
            coeff = Fraction(m.group("paren").replace(" ", ""))
            b += sign * coeff
        else:
            num, rad, den = m.group("num"), m.group("rad"), m.group("den")
            if num is None and rad is None:
                raise ValueError(f"malformed field element {text!r}")
            coeff = Fraction(num) if num is not None else Fraction(1)
            if den is not None:
                coeff /= int(den)
            if rad:
                b += sign * coeff
            else:
                a += sign * coeff
        pos = m.end()
        first = False
    return FieldElement(a, b)


def parse_vector(items: Iterable[str | int]) -> tuple[FieldElement, ...]:
    return tuple(parse_element(x) for x in items)
