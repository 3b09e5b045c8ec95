"""Exact rational and delta-rational arithmetic.

Rationals are plain ``fractions.Fraction`` values; everything downstream
assumes exact arithmetic, never floats.  Delta-rationals are pairs
(real, eps) denoting real + eps * delta for a positive infinitesimal
delta, which is how strict inequalities are represented inside the
simplex core: (t < c) becomes an upper bound (c, -1) and (t > c) a lower
bound (c, +1).
"""

from __future__ import annotations

from fractions import Fraction

Rational = Fraction

LE = "<="
LT = "<"
EQ = "="


def rat(value, den=None) -> Fraction:
    """Build a Fraction from ints, strings ('3', '-7/2', '3.5') or Fractions."""
    if den is not None:
        return Fraction(value, den)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str) and "." in value:
        num, _, frac = value.partition(".")
        sign = -1 if num.strip().startswith("-") else 1
        whole = int(num) if num not in ("", "-", "+") else 0
        return Fraction(whole) + sign * Fraction(int(frac or 0), 10 ** len(frac))
    return Fraction(value)


class DeltaRational:
    """real + eps * delta, ordered lexicographically on (real, eps)."""

    __slots__ = ("real", "eps")

    def __init__(self, real, eps=0):
        self.real = Fraction(real)
        self.eps = Fraction(eps)

    def __add__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.real + other.real, self.eps + other.eps)

    def __sub__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.real - other.real, self.eps - other.eps)

    def __neg__(self) -> "DeltaRational":
        return DeltaRational(-self.real, -self.eps)

    def scaled(self, k) -> "DeltaRational":
        k = Fraction(k)
        return DeltaRational(self.real * k, self.eps * k)

    def divided(self, k) -> "DeltaRational":
        k = Fraction(k)
        return DeltaRational(self.real / k, self.eps / k)

    def _key(self):
        return (self.real, self.eps)

    def __eq__(self, other):
        return isinstance(other, DeltaRational) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        return self._key() < other._key()

    def __le__(self, other):
        return self._key() <= other._key()

    def __gt__(self, other):
        return self._key() > other._key()

    def __ge__(self, other):
        return self._key() >= other._key()

    def is_rational(self) -> bool:
        return self.eps == 0

    def substitute(self, epsilon) -> Fraction:
        """Concrete value once delta is fixed to a positive rational."""
        return self.real + self.eps * Fraction(epsilon)

    def __repr__(self):
        if self.eps == 0:
            return f"{self.real}"
        return f"({self.real} + {self.eps}d)"


DELTA_ZERO = DeltaRational(0)


def delta_of(value) -> DeltaRational:
    if isinstance(value, DeltaRational):
        return value
    return DeltaRational(value)


def delta_cmp(a: DeltaRational, b: DeltaRational) -> int:
    """Total order on delta-rationals: -1, 0 or 1."""
    ka, kb = a._key(), b._key()
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def materialize_epsilon(valuation, literals) -> Fraction:
    """Largest eps0 in (0, 1] such that substituting any eps in (0, eps0]
    for delta keeps every literal satisfied.

    ``valuation`` maps variables to DeltaRational, ``literals`` is an
    iterable of (atom, polarity) pairs where atoms expose delta_value()
    and rel.  Raises ValueError if some literal is already violated
    symbolically; strict constraints contribute half their critical
    slack so the returned bound is always usable inclusively.
    """
    bound = Fraction(1)
    for atom, polarity in literals:
        val = atom.delta_value(valuation)
        if polarity:
            rel = atom.rel
            r, k = val.real, val.eps
        else:
            if atom.rel == EQ:
                raise ValueError("negated equality cannot be materialized")
            # not (t <= 0) is (-t < 0); not (t < 0) is (-t <= 0)
            rel = LT if atom.rel == LE else LE
            r, k = -val.real, -val.eps
        if rel == EQ:
            if r != 0 or k != 0:
                raise ValueError(f"equality violated symbolically: {atom}")
            continue
        strict = rel == LT
        # need r + k*eps (rel) 0 for all eps in (0, eps0]
        if k > 0:
            if r >= 0:
                raise ValueError(f"literal violated symbolically: {atom}")
            limit = -r / k
            if strict:
                limit = limit / 2
            bound = min(bound, limit)
        else:
            ok = r < 0 or (r == 0 and (not strict or k < 0))
            if not ok:
                raise ValueError(f"literal violated symbolically: {atom}")
    return bound


def format_rat(q: Fraction) -> str:
    """p/q form, denominator omitted when 1."""
    return str(q)


def parse_rat(text: str) -> Fraction:
    """Parse 'p', 'p/q' or a decimal literal, with optional sign."""
    text = text.strip()
    try:
        return rat(text) if "." in text else Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc
