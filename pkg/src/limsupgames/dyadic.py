"""Exact arithmetic on dyadic rationals and their two-point extension.

Every numeric quantity in this package (machine outputs, game values, grid
thresholds) is a dyadic rational z / 2**e kept in normal form.  Exactness is
the point: equality and order are decidable, so verdicts and construction
checks are reported exactly instead of within a float tolerance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Union

_DYADIC_RE = re.compile(r"^(-?\d+)(?:/2\^(\d+))?$")


@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """z / 2**e in normal form: e == 0 or z odd."""

    num: int
    exp: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.num, int) or not isinstance(self.exp, int):
            raise TypeError("dyadic parts must be ints")
        if self.exp < 0:
            raise ValueError(f"negative exponent {self.exp}")
        num, exp = self.num, self.exp
        while exp > 0 and num % 2 == 0:
            num //= 2
            exp -= 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "exp", exp)

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        m = _DYADIC_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a dyadic literal: {text!r}")
        return cls(int(m.group(1)), int(m.group(2) or 0))

    @classmethod
    def from_int(cls, n: int) -> "Dyadic":
        return cls(n, 0)

    def __str__(self) -> str:
        return f"{self.num}/2^{self.exp}"

    def __repr__(self) -> str:
        return f"Dyadic({self.num}, {self.exp})"

    def __float__(self) -> float:
        # diagnostics only, never used in decisions
        return self.num / (1 << self.exp)

    def __bool__(self) -> bool:
        return self.num != 0

    def __add__(self, other: "DyadicLike") -> "Dyadic":
        o = as_dyadic(other)
        e = max(self.exp, o.exp)
        return Dyadic((self.num << (e - self.exp)) + (o.num << (e - o.exp)), e)

    def __sub__(self, other: "DyadicLike") -> "Dyadic":
        return self + (-as_dyadic(other))

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.num, self.exp)

    def __mul__(self, other: "DyadicLike") -> "Dyadic":
        o = as_dyadic(other)
        return Dyadic(self.num * o.num, self.exp + o.exp)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.num), self.exp)

    def __lt__(self, other: "DyadicLike") -> bool:
        if not isinstance(other, (Dyadic, int)):
            return NotImplemented
        o = as_dyadic(other)
        return (self.num << o.exp) < (o.num << self.exp)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Dyadic(other, 0)
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.num == other.num and self.exp == other.exp

    def __hash__(self) -> int:
        return hash((self.num, self.exp))

    def is_integer(self) -> bool:
        return self.exp == 0

    def ceil_to_grid(self, n: int) -> "Dyadic":
        """Least multiple of 2**-n that is >= self."""
        if n < 0:
            raise ValueError("grid exponent must be >= 0")
        if n >= self.exp:
            return Dyadic(self.num << (n - self.exp), n)
        # ceil division by 2**(exp - n)
        shift = self.exp - n
        return Dyadic(-((-self.num) >> shift), n)


DyadicLike = Union[Dyadic, int]


def as_dyadic(v: "DyadicLike | str") -> Dyadic:
    if isinstance(v, Dyadic):
        return v
    if isinstance(v, int):
        return Dyadic(v, 0)
    if isinstance(v, str):
        return Dyadic.parse(v)
    raise TypeError(f"cannot interpret {v!r} as a dyadic")


ZERO = Dyadic(0)
ONE = Dyadic(1)


def half_pow(k: int) -> Dyadic:
    """2**-k."""
    return Dyadic(1, k)


def dyadic_ceil_to_grid(v: "DyadicLike", n: int) -> Dyadic:
    """Least grid point z * 2**-n with z * 2**-n >= v."""
    return as_dyadic(v).ceil_to_grid(n)


@total_ordering
@dataclass(frozen=True)
class ExtValue:
    """A dyadic extended with a bottom and top element.

    tag -1 sits below every real, tag +1 above; tag 0 wraps a finite Dyadic.
    Infima over empty or unbounded collections land on the tagged ends.
    """

    tag: int
    value: Dyadic | None = None

    def __post_init__(self) -> None:
        if self.tag not in (-1, 0, 1):
            raise ValueError(f"bad tag {self.tag}")
        if (self.tag == 0) != (self.value is not None):
            raise ValueError("finite iff a value is carried")

    @classmethod
    def finite(cls, v: "DyadicLike") -> "ExtValue":
        return cls(0, as_dyadic(v))

    @property
    def is_finite(self) -> bool:
        return self.tag == 0

    def require_finite(self) -> Dyadic:
        if self.tag != 0:
            raise ValueError(f"expected a finite value, got {self}")
        assert self.value is not None
        return self.value

    def ceil_to_grid(self, n: int) -> "ExtValue":
        if self.tag != 0:
            return self
        assert self.value is not None
        return ExtValue.finite(self.value.ceil_to_grid(n))

    def __lt__(self, other: "ExtValue") -> bool:
        if not isinstance(other, (ExtValue, Dyadic, int)):
            return NotImplemented
        o = as_ext(other)
        if self.tag != o.tag:
            return self.tag < o.tag
        if self.tag != 0:
            return False
        assert self.value is not None and o.value is not None
        return self.value < o.value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (Dyadic, int)):
            other = ExtValue.finite(as_dyadic(other))
        if not isinstance(other, ExtValue):
            return NotImplemented
        return self.tag == other.tag and self.value == other.value

    def __hash__(self) -> int:
        return hash((self.tag, self.value))

    def __str__(self) -> str:
        if self.tag == -1:
            return "-inf"
        if self.tag == 1:
            return "+inf"
        return str(self.value)

    def __repr__(self) -> str:
        return f"ExtValue({self})"


NEG_INF = ExtValue(-1)
POS_INF = ExtValue(1)


def as_ext(v: "ExtValue | DyadicLike") -> ExtValue:
    if isinstance(v, ExtValue):
        return v
    return ExtValue.finite(as_dyadic(v))


def ext_min(values: Iterable["ExtValue | DyadicLike"]) -> ExtValue:
    """Minimum, POS_INF on empty input (the neutral element)."""
    best = POS_INF
    for v in values:
        e = as_ext(v)
        if e < best:
            best = e
    return best


def ext_max(values: Iterable["ExtValue | DyadicLike"]) -> ExtValue:
    """Maximum, NEG_INF on empty input."""
    best = NEG_INF
    for v in values:
        e = as_ext(v)
        if best < e:
            best = e
    return best
