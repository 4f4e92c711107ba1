"""Extended rationals, decorated endpoints, intervals and rectangles.

Finite coordinates are ``fractions.Fraction``; the two infinities are the
float values ``-math.inf`` and ``math.inf``.  Finite floats are rejected so
that no rounding can sneak into the decoration calculus.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

INF = math.inf
XReal = Union[Fraction, float]

MINUS = -1
PLUS = 1

Multiset = Counter


def xreal(value) -> XReal:
    """Coerce ints, Fractions, infinite floats and text to an extended rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coordinates")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value):
            return value
        raise TypeError(f"finite float {value!r} would lose exactness; pass a Fraction or a string")
    if isinstance(value, str):
        text = value.strip()
        if text in ("inf", "+inf"):
            return INF
        if text == "-inf":
            return -INF
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as an extended rational")


def is_finite(value: XReal) -> bool:
    return not (isinstance(value, float) and math.isinf(value))


def format_xreal(value: XReal) -> str:
    if not is_finite(value):
        return "+inf" if value > 0 else "-inf"
    return str(value)


@dataclass(frozen=True, order=True)
class DecoratedValue:
    """An extended rational with a tick: ``p^-`` sits just below ``p^+``."""

    value: XReal
    decoration: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", xreal(self.value))
        if self.decoration not in (MINUS, PLUS):
            raise ValueError(f"decoration must be MINUS or PLUS, got {self.decoration!r}")
        if self.value == -INF:
            object.__setattr__(self, "decoration", PLUS)
        elif self.value == INF:
            object.__setattr__(self, "decoration", MINUS)

    @classmethod
    def parse(cls, text: str) -> "DecoratedValue":
        text = text.strip()
        if text in ("-inf", "+inf", "inf"):
            return cls(xreal(text), PLUS)
        if text.endswith("+"):
            return cls(xreal(text[:-1]), PLUS)
        if text.endswith("-"):
            return cls(xreal(text[:-1]), MINUS)
        raise ValueError(f"decorated value {text!r} needs a trailing + or -")

    @property
    def finite(self) -> bool:
        return is_finite(self.value)

    def shifted(self, amount: XReal) -> "DecoratedValue":
        return DecoratedValue(self.value + amount, self.decoration)

    def __str__(self) -> str:
        if not self.finite:
            return format_xreal(self.value)
        return f"{self.value}{'+' if self.decoration == PLUS else '-'}"


def minus(value) -> DecoratedValue:
    return DecoratedValue(xreal(value), MINUS)


def plus(value) -> DecoratedValue:
    return DecoratedValue(xreal(value), PLUS)


def compare_decorated(x: DecoratedValue, y: DecoratedValue) -> int:
    """Three-way comparison: -1, 0 or 1."""
    kx, ky = (x.value, x.decoration), (y.value, y.decoration)
    return (kx > ky) - (kx < ky)


@dataclass(frozen=True, order=True)
class DecoratedPoint:
    """A point ``(p^*, q^*)`` of a decorated diagram, i.e. the interval ``<p^*, q^*>``."""

    birth: DecoratedValue
    death: DecoratedValue

    def __post_init__(self) -> None:
        if not self.birth < self.death:
            raise ValueError(f"birth {self.birth} must precede death {self.death}")

    @classmethod
    def of(cls, birth, death) -> "DecoratedPoint":
        """Build from ``DecoratedValue`` objects or their text forms such as ``"1/2+"``."""
        if not isinstance(birth, DecoratedValue):
            birth = DecoratedValue.parse(str(birth))
        if not isinstance(death, DecoratedValue):
            death = DecoratedValue.parse(str(death))
        return cls(birth, death)

    @property
    def coordinates(self) -> tuple[XReal, XReal]:
        return self.birth.value, self.death.value

    @property
    def on_diagonal(self) -> bool:
        return self.birth.value == self.death.value

    def contains(self, t: XReal) -> bool:
        """Whether the real number ``t`` lies in the interval this point names."""
        key = (t, 0)
        return (self.birth.value, self.birth.decoration) < key < (self.death.value, self.death.decoration)

    def __str__(self) -> str:
        return f"({self.birth}, {self.death})"


Interval = DecoratedPoint


@dataclass(frozen=True)
class Rect:
    """The closed rectangle ``[a,b] x [c,d]`` in the extended plane."""

    a: XReal
    b: XReal
    c: XReal
    d: XReal

    def __post_init__(self) -> None:
        for name in "abcd":
            object.__setattr__(self, name, xreal(getattr(self, name)))
        if not (self.a < self.b and self.c < self.d):
            raise ValueError(f"degenerate rectangle {self}")

    @classmethod
    def parse(cls, text: str) -> "Rect":
        parts = [p for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"rectangle needs four comma-separated sides, got {text!r}")
        return cls(*(xreal(p) for p in parts))

    @property
    def in_half_plane(self) -> bool:
        return self.b <= self.c

    def contains_rect(self, other: "Rect") -> bool:
        return self.a <= other.a and other.b <= self.b and self.c <= other.c and other.d <= self.d

    def __str__(self) -> str:
        a, b, c, d = (format_xreal(v) for v in (self.a, self.b, self.c, self.d))
        return f"[{a},{b}]x[{c},{d}]"


def in_rect(pt: DecoratedPoint, r: Rect) -> bool:
    """Tick-rule membership, valid for any rectangle of the extended plane."""
    return plus(r.a) <= pt.birth <= minus(r.b) and plus(r.c) <= pt.death <= minus(r.d)


def point_in_rect(pt: DecoratedPoint, r: Rect) -> bool:
    """Membership of a decorated point in a rectangle of the half-plane.

    ``(p^*, q^*)`` lies in ``[a,b] x [c,d]`` exactly when the interval it names
    contains ``[b,c]`` and is contained in ``(a,d)``.
    """
    if not r.in_half_plane:
        raise ValueError(f"rectangle {r} crosses the diagonal (b > c)")
    return in_rect(pt, r)


def thicken(r: Rect, delta) -> Rect:
    delta = xreal(delta)
    if delta < 0:
        raise ValueError("thickening amount must be nonnegative")
    return Rect(r.a - delta, r.b + delta, r.c - delta, r.d + delta)


def split_rect(r: Rect, axis: str, at) -> tuple[Rect, Rect]:
    """Cut ``r`` along a vertical (``axis="x"``) or horizontal (``axis="y"``) line."""
    at = xreal(at)
    if axis == "x":
        if not r.a < at < r.b:
            raise ValueError("split coordinate must be interior")
        return Rect(r.a, at, r.c, r.d), Rect(at, r.b, r.c, r.d)
    if axis == "y":
        if not r.c < at < r.d:
            raise ValueError("split coordinate must be interior")
        return Rect(r.a, r.b, r.c, at), Rect(r.a, r.b, at, r.d)
    raise ValueError("axis must be 'x' or 'y'")
