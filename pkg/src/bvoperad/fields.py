"""Exact scalar arithmetic over the rationals and over prime fields.

Scalars are plain Python values: ``fractions.Fraction`` for the rational
field, ``int`` residues in ``0..p-1`` for a prime field.  A :class:`FieldSpec`
bundles the arithmetic on those values, and every module downstream threads
the spec through explicitly instead of wrapping each scalar in an object.
The text encoding ("a" or "a/b") is the one used verbatim in all JSON files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, int]


class FieldError(ValueError):
    """Malformed scalar text, a bad modulus, or a value outside the field."""


_SCALAR_RE = re.compile(r"^([+-]?\d+)(?:/([+-]?\d+))?$")


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Arithmetic context: the rationals, or the prime field of order ``p``."""

    kind: str
    p: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "rational":
            if self.p is not None:
                raise FieldError("rational field carries no modulus")
        elif self.kind == "prime":
            if self.p is None or not _is_prime(self.p):
                raise FieldError(f"modulus {self.p!r} is not prime")
        else:
            raise FieldError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rational(cls) -> "FieldSpec":
        return cls("rational")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("prime", p)

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.kind == "rational" else 0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.kind == "rational" else 1

    def from_int(self, n: int) -> Scalar:
        if self.kind == "rational":
            return Fraction(n)
        return n % self.p  # type: ignore[operator]

    def coerce(self, value) -> Scalar:
        """Validate and canonicalize a scalar; reject values of the wrong kind."""
        if self.kind == "rational":
            if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
                raise FieldError(f"not a rational scalar: {value!r}")
            return Fraction(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise FieldError(f"not a residue mod {self.p}: {value!r}")
        return value % self.p  # type: ignore[operator]

    def add(self, a: Scalar, b: Scalar) -> Scalar:
        if self.kind == "rational":
            return a + b
        return (a + b) % self.p  # type: ignore[operator]

    def sub(self, a: Scalar, b: Scalar) -> Scalar:
        if self.kind == "rational":
            return a - b
        return (a - b) % self.p  # type: ignore[operator]

    def neg(self, a: Scalar) -> Scalar:
        if self.kind == "rational":
            return -a
        return (-a) % self.p  # type: ignore[operator]

    def mul(self, a: Scalar, b: Scalar) -> Scalar:
        if self.kind == "rational":
            return a * b
        return (a * b) % self.p  # type: ignore[operator]

    def inv(self, a: Scalar) -> Scalar:
        if self.kind == "rational":
            if a == 0:
                raise FieldError("inversion of zero")
            return 1 / Fraction(a)
        if a % self.p == 0:  # type: ignore[operator]
            raise FieldError("inversion of zero")
        return pow(a, -1, self.p)

    def div(self, a: Scalar, b: Scalar) -> Scalar:
        return self.mul(a, self.inv(b))

    def parse(self, text: str) -> Scalar:
        """Parse "a" or "a/b"; in a prime field "a/b" means a * b^-1 mod p."""
        m = _SCALAR_RE.match(text.strip())
        if m is None:
            raise FieldError(f"malformed scalar {text!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise FieldError(f"zero denominator in {text!r}")
        if self.kind == "rational":
            return Fraction(num, den)
        if den % self.p == 0:  # type: ignore[operator]
            raise FieldError(f"denominator of {text!r} vanishes mod {self.p}")
        return self.mul(self.from_int(num), self.inv(self.from_int(den)))

    def render(self, a: Scalar) -> str:
        return str(a)

    def to_json(self) -> dict:
        if self.kind == "rational":
            return {"kind": "rational"}
        return {"kind": "prime", "p": self.p}

    @classmethod
    def from_json(cls, obj) -> "FieldSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise FieldError(f"bad field descriptor {obj!r}")
        if obj["kind"] == "rational":
            return cls.rational()
        if obj["kind"] == "prime":
            return cls.prime(obj.get("p", 0))
        raise FieldError(f"unknown field kind {obj['kind']!r}")

    def __str__(self) -> str:
        return "Q" if self.kind == "rational" else f"F{self.p}"
