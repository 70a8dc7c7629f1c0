"""Exact base fields: odd prime fields F_p and the rationals.

Field objects are lightweight contexts.  Elements are plain Python values
(`int` reduced mod p, or `fractions.Fraction`), which keeps the hot
arithmetic paths free of wrapper overhead.
"""

from __future__ import annotations

import math
from fractions import Fraction

DEFAULT_PRIME = 32003

# numpy int64 row reduction needs p*(p-1) + (p-1) < 2**63
_MAX_PRIME = 1 << 25


class FieldError(ValueError):
    pass


def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for desk-scale moduli."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, int(math.isqrt(n)) + 1, 2):
        if n % d == 0:
            return False
    return True


class PrimeField:
    """The field F_p for an odd prime p, elements stored as ints in [0, p)."""

    kind = "Fp"
    __slots__ = ("p",)

    def __init__(self, p: int = DEFAULT_PRIME):
        if p < 3 or p >= _MAX_PRIME or not is_prime(p):
            raise FieldError(f"modulus must be an odd prime below 2^25, got {p}")
        self.p = p

    # -- element constructors -------------------------------------------
    @property
    def zero(self):
        return 0

    @property
    def one(self):
        return 1

    def normalize(self, v):
        if isinstance(v, Fraction):
            return self.mul(v.numerator % self.p, self.inv(v.denominator % self.p))
        return int(v) % self.p

    # -- arithmetic ------------------------------------------------------
    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_p")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def sqrt(self, a):
        """A square root of a mod p, or None if a is a non-residue."""
        p = self.p
        a %= p
        if a == 0:
            return 0
        if pow(a, (p - 1) // 2, p) != 1:
            return None
        if p % 4 == 3:
            return pow(a, (p + 1) // 4, p)
        # Tonelli-Shanks
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            t2, i = t, 0
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
        return r

    # -- randomness ------------------------------------------------------
    def rand(self, rng):
        return rng.randrange(self.p)

    def rand_nonzero(self, rng):
        return rng.randrange(1, self.p)

    # -- serialization ---------------------------------------------------
    def coeff_str(self, v) -> str:
        return str(v % self.p)

    def parse_coeff(self, s: str):
        return int(s) % self.p

    def to_json(self):
        return {"type": "Fp", "p": self.p}

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))


class RationalField:
    """The rationals, elements stored as fractions.Fraction."""

    kind = "Q"
    __slots__ = ()

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def normalize(self, v):
        return Fraction(v)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / Fraction(a)

    def div(self, a, b):
        return Fraction(a) / b

    def is_zero(self, a) -> bool:
        return a == 0

    def sqrt(self, a):
        a = Fraction(a)
        if a < 0:
            return None
        rn = math.isqrt(a.numerator)
        rd = math.isqrt(a.denominator)
        r = Fraction(rn, rd)
        return r if r * r == a else None

    def rand(self, rng):
        return Fraction(rng.randrange(-50, 51))

    def rand_nonzero(self, rng):
        v = rng.randrange(1, 101)
        return Fraction(v if rng.randrange(2) else -v)

    def coeff_str(self, v) -> str:
        f = Fraction(v)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

    def parse_coeff(self, s: str):
        return Fraction(s)

    def to_json(self):
        return {"type": "Q"}

    def __repr__(self):
        return "RationalField()"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")


QQ = RationalField()


def field_from_json(obj) -> "PrimeField | RationalField":
    if not isinstance(obj, dict) or "type" not in obj:
        raise FieldError(f"bad field description: {obj!r}")
    if obj["type"] == "Fp":
        return PrimeField(int(obj.get("p", DEFAULT_PRIME)))
    if obj["type"] == "Q":
        return QQ
    raise FieldError(f"unknown field type {obj['type']!r}")


def parse_field_flag(s: str) -> "PrimeField | RationalField":
    """Parse a --field flag value of the form 'Fp:32003' or 'Q'."""
    s = s.strip()
    if s == "Q":
        return QQ
    if s.startswith("Fp:"):
        return PrimeField(int(s[3:]))
    if s == "Fp":
        return PrimeField()
    raise FieldError(f"bad field flag {s!r}, expected 'Fp:P' or 'Q'")
