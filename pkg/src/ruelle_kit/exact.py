"""Exact arithmetic for exponential weights.

Ruelle operators multiply by ``exp(phi)``.  When every potential value is
rational, the weights live in the Q-span of ``{exp(q) : q in Q}``, and by
Lindemann-Weierstrass those exponentials are linearly independent over Q.
A formal sum ``sum_k c_k exp(q_k)`` with rational ``c_k, q_k`` is therefore a
faithful exact representation, and equality of two such sums is decided by
comparing their coefficients.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

__all__ = ["ExpSum", "is_exact", "exp_weight", "close", "to_float", "as_exact"]


class ExpSum:
    """Immutable formal sum ``sum c * exp(q)`` with rational ``c`` and ``q``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        acc: dict[Fraction, Fraction] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for q, c in items:
                q = Fraction(q)
                acc[q] = acc.get(q, Fraction(0)) + Fraction(c)
        self._terms = tuple(sorted((q, c) for q, c in acc.items() if c != 0))
        self._hash = None

    @classmethod
    def exp(cls, q) -> "ExpSum":
        return cls({Fraction(q): Fraction(1)})

    @classmethod
    def const(cls, c) -> "ExpSum":
        return cls({Fraction(0): Fraction(c)})

    @property
    def terms(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return self._terms

    def _coerce(self, other):
        if isinstance(other, ExpSum):
            return other
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return ExpSum.const(other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ExpSum(list(self._terms) + list(other._terms))

    def __radd__(self, other):
        if isinstance(other, float):
            return other + float(self)
        return self.__add__(other)

    def __neg__(self):
        return ExpSum([(q, -c) for q, c in self._terms])

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return ExpSum([(q1 + q2, c1 * c2) for q1, c1 in self._terms for q2, c2 in other._terms])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)) and not isinstance(other, bool):
            return ExpSum([(q, c / Fraction(other)) for q, c in self._terms])
        if isinstance(other, ExpSum) and len(other._terms) == 1:
            q2, c2 = other._terms[0]
            return ExpSum([(q - q2, c / c2) for q, c in self._terms])
        return float(self) / float(other)

    def __rtruediv__(self, other):
        if len(self._terms) == 1 and isinstance(other, (int, Rational)) and not isinstance(other, bool):
            q, c = self._terms[0]
            return ExpSum([(-q, Fraction(other) / c)])
        return float(other) / float(self)

    def __eq__(self, other):
        if isinstance(other, float):
            return float(self) == other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            if len(self._terms) == 1 and self._terms[0][0] == 0:
                self._hash = hash(self._terms[0][1])
            elif not self._terms:
                self._hash = hash(0)
            else:
                self._hash = hash(self._terms)
        return self._hash

    def __float__(self):
        return math.fsum(float(c) * math.exp(float(q)) for q, c in self._terms)

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][0] == 0)

    def __repr__(self):
        if not self._terms:
            return "ExpSum(0)"
        parts = [f"{c}*e^({q})" if q else f"{c}" for q, c in self._terms]
        return "ExpSum(" + " + ".join(parts) + ")"


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction, ExpSum)) and not isinstance(value, bool)


def as_exact(value):
    """Collapse an ExpSum that is plainly rational back to a Fraction."""
    if isinstance(value, ExpSum) and value.is_rational():
        return value.terms[0][1] if value.terms else Fraction(0)
    return value


def exp_weight(value, exact: bool):
    if exact and isinstance(value, (int, Fraction)):
        return ExpSum.exp(value)
    return math.exp(float(value))


def to_float(value) -> float:
    return float(value)


def close(a, b, tol: float = 1e-12) -> bool:
    """Exact equality for exact operands, relative tolerance otherwise."""
    if is_exact(a) and is_exact(b):
        if isinstance(a, ExpSum) or isinstance(b, ExpSum):
            return ExpSum.const(0) + a == ExpSum.const(0) + b
        return a == b
    fa, fb = float(a), float(b)
    return abs(fa - fb) <= tol * max(1.0, abs(fa), abs(fb))
