"""Exact rational functions of one formal variable ``q``.

Numerator and denominator are integer polynomials stored as ascending
coefficient tuples.  Every instance is kept in a canonical reduced form:
polynomial gcd removed, integer contents coprime, positive leading
coefficient in the denominator.  Two equal rational functions therefore
compare equal field-by-field and hash identically.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from numbers import Rational
from typing import Iterable, Mapping

Poly = tuple  # ascending integer coefficients, no trailing zeros; () is zero


def _trim(coeffs: Iterable) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    return _trim(x + (b[i] if i < len(b) else 0) for i, x in enumerate(a))


def _pneg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _valuation(a: Poly) -> int:
    for i, x in enumerate(a):
        if x:
            return i
    raise ValueError("valuation of the zero polynomial")


def _pdivmod(a: Poly, b: Poly) -> tuple[list, list]:
    """Division with remainder over the rationals."""
    rem = [Fraction(x) for x in a]
    quo = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = Fraction(b[-1])
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        coef = rem[-1] / lead
        quo[shift] = coef
        for i, y in enumerate(b):
            rem[shift + i] -= coef * y
        rem = list(_trim(rem))
    return quo, rem


def _content(a: Poly) -> int:
    g = 0
    for x in a:
        g = gcd(g, int(x))
    return g


def _primitive(a) -> Poly:
    """Scale a rational polynomial to a primitive integer one, leading coeff > 0."""
    den = 1
    for x in a:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in a]
    c = _content(ints)
    if ints[-1] < 0:
        c = -c
    return tuple(x // c for x in ints)


def _pgcd(a: Poly, b: Poly) -> Poly:
    x, y = list(a), list(b)
    while y:
        _, r = _pdivmod(tuple(x), tuple(y))
        x, y = y, r
    return _primitive(x)


def _pexact_div(a: Poly, b: Poly) -> Poly:
    quo, rem = _pdivmod(a, b)
    if rem or any(Fraction(c).denominator != 1 for c in quo):
        raise ArithmeticError("inexact polynomial division")
    return _trim(int(c) for c in quo)


def _peval(a: Poly, x):
    acc = 0 * x
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _as_poly(value) -> tuple[Poly, int]:
    """Coerce an int/Fraction/tuple to (integer poly, positive integer divisor)."""
    if isinstance(value, tuple):
        return _trim(int(c) for c in value), 1
    if isinstance(value, Rational):
        f = Fraction(value)
        return _trim((f.numerator,)), f.denominator
    raise TypeError(f"cannot interpret {value!r} as an exact polynomial")


class RationalFunction:
    """Element of Q(q) in canonical reduced form."""

    __slots__ = ("num", "den")

    def __init__(self, num=(0,), den=(1,)):
        n, dn = _as_poly(num)
        d, dd = _as_poly(den)
        if not d:
            raise ZeroDivisionError("zero denominator")
        if dn != 1:
            d = tuple(c * dn for c in d)
        if dd != 1:
            n = tuple(c * dd for c in n)
        self.num, self.den = self._reduce(n, d)

    @staticmethod
    def _reduce(n: Poly, d: Poly) -> tuple[Poly, Poly]:
        if not n:
            return (), (1,)
        v = min(_valuation(n), _valuation(d))
        if v:
            n, d = n[v:], d[v:]
        if len(d) > 1 and len(n) > 1:
            g = _pgcd(n, d)
            if len(g) > 1:
                n, d = _pexact_div(n, g), _pexact_div(d, g)
        c = gcd(_content(n), _content(d))
        if d[-1] < 0:
            c = -c
        if c != 1:
            n = tuple(x // c for x in n)
            d = tuple(x // c for x in d)
        return n, d

    @classmethod
    def _raw(cls, n: Poly, d: Poly) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj.num, obj.den = cls._reduce(n, d)
        return obj

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, c) -> "RationalFunction":
        return cls(Fraction(c))

    @classmethod
    def q_power(cls, k: int) -> "RationalFunction":
        mono = (0,) * abs(k) + (1,)
        return cls._raw(mono, (1,)) if k >= 0 else cls._raw((1,), mono)

    @classmethod
    def from_laurent(cls, terms: Mapping[int, int]) -> "RationalFunction":
        """Build sum_k terms[k] q^k (k may be negative)."""
        terms = {k: c for k, c in terms.items() if c}
        if not terms:
            return cls()
        lo = min(terms)
        shift = -lo if lo < 0 else 0
        coeffs = [0] * (max(terms) + shift + 1)
        for k, c in terms.items():
            coeffs[k + shift] += int(c)
        mono = (0,) * shift + (1,)
        return cls._raw(_trim(coeffs), mono)

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Rational):
            return RationalFunction(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RationalFunction._raw(_padd(self.num, o.num), self.den)
        return RationalFunction._raw(
            _padd(_pmul(self.num, o.den), _pmul(o.num, self.den)), _pmul(self.den, o.den)
        )

    __radd__ = __add__

    def __neg__(self):
        obj = RationalFunction.__new__(RationalFunction)
        obj.num, obj.den = _pneg(self.num), self.den
        return obj

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RationalFunction._raw(_pmul(self.num, o.num), _pmul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction._raw(_pmul(self.num, o.den), _pmul(self.den, o.num))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if k < 0:
            return RationalFunction(1) / (self ** -k)
        out = RationalFunction(1)
        for _ in range(k):
            out = out * self
        return out

    # -- comparison / evaluation ------------------------------------------
    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return not self.num

    def __call__(self, q):
        """Evaluate at a numeric q (exact for int/Fraction input)."""
        if isinstance(q, int):
            q = Fraction(q)
        den = _peval(self.den, q)
        if den == 0:
            raise ZeroDivisionError(f"pole at q={q}")
        return _peval(self.num, q) / den

    def __float__(self):
        if len(self.den) == 1 and len(self.num) <= 1:
            return float(Fraction(self.num[0] if self.num else 0, self.den[0]))
        raise TypeError("rational function is not constant")

    def to_json(self) -> dict:
        return {"num": list(self.num), "den": list(self.den)}

    @classmethod
    def from_json(cls, data: Mapping) -> "RationalFunction":
        return cls(tuple(data["num"]), tuple(data["den"]))

    @staticmethod
    def _fmt(p: Poly) -> str:
        if not p:
            return "0"
        out = []
        for k, c in enumerate(p):
            if not c:
                continue
            mono = "" if k == 0 else ("q" if k == 1 else f"q^{k}")
            if mono and abs(c) == 1:
                term = mono
            else:
                term = f"{abs(c)}{'*' + mono if mono else ''}"
            out.append(("-" if c < 0 else "+", term))
        text = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, term in out[1:]:
            text += f" {sign} {term}"
        return text

    def __str__(self):
        n = self._fmt(self.num)
        if self.den == (1,):
            return n
        num = n if len([c for c in self.num if c]) == 1 else f"({n})"
        return f"{num}/({self._fmt(self.den)})"

    def __repr__(self):
        return f"RationalFunction({self})"


ONE = RationalFunction(1)
ZERO = RationalFunction(0)
Q = RationalFunction.q_power(1)
