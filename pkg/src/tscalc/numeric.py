"""Mixing exact rationals with mpmath floats.

Scale points are always exact rationals (``gmpy2.mpq``, exported here as
:data:`Rational`; it hashes and compares like :class:`fractions.Fraction`
and is an order of magnitude faster).  Function values may be rationals,
``mpf`` (high precision) or plain floats; ``mpf`` does not interoperate with
rationals on every operator, so arithmetic that can mix them goes through
:func:`unify`.
"""
from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq, mpz
from mpmath import mpf

Rational = mpq

DEFAULT_TOL = 1e-12


def exact(x) -> Rational:
    """Exact rational from an int, Fraction, decimal string or float.

    Floats go through ``repr`` so that ``0.3`` becomes ``3/10`` rather than
    the nearest binary double.
    """
    if type(x) is mpq:
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a real number")
    if isinstance(x, (int, mpz)):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        return mpq(repr(x))
    if isinstance(x, str):
        try:
            return mpq(x.strip())
        except ValueError:
            f = Fraction(x.strip())  # accepts forms like "1e-3" and "2.5e1"
            return mpq(f.numerator, f.denominator)
    if isinstance(x, mpf):
        man, e = x.man_exp
        return mpq(int(man)) * mpq(2) ** int(e)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def is_exact(x) -> bool:
    return isinstance(x, (int, mpq, mpz, Fraction)) and not isinstance(x, bool)


def to_mpf(x) -> mpf:
    if isinstance(x, (mpq, Fraction)):
        return mpf(int(x.numerator)) / int(x.denominator)
    if isinstance(x, mpz):
        return mpf(int(x))
    return mpf(x)


_EXACT_TYPES = (mpq, int, Fraction)


def unify(*xs):
    """Bring values to a common representation (exact, mpf, or float)."""
    if all(type(x) in _EXACT_TYPES for x in xs):
        return xs
    if all(is_exact(x) for x in xs):
        return xs
    if any(isinstance(x, mpf) for x in xs):
        return tuple(to_mpf(x) for x in xs)
    return tuple(float(x) for x in xs)


def quotient(num, den):
    if type(num) not in _EXACT_TYPES or type(den) not in _EXACT_TYPES:
        num, den = unify(num, den)
    return num / den


def difference(x, y):
    if type(x) not in _EXACT_TYPES or type(y) not in _EXACT_TYPES:
        x, y = unify(x, y)
    return x - y


def sign(x) -> int:
    return (x > 0) - (x < 0)


def as_float(x) -> float:
    return float(x)
