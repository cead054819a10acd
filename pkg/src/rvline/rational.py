"""Exact rational arithmetic and polynomial root isolation.

All solver paths in this package run on arbitrary-precision rationals
(gmpy2.mpq); no floating point enters any certified computation.  Values
are canonical by construction: positive denominator, reduced to lowest
terms, zero represented as 0/1.
"""

from fractions import Fraction

import gmpy2
from gmpy2 import mpq

Rational = mpq

ZERO = mpq(0)
ONE = mpq(1)

#: significant digits used when rendering rationals as decimals for display
DECIMAL_DIGITS = 12


def rational(value, denom=None):
    """Coerce a value to an exact rational.

    Accepts ints, strings ("3/4", "0.618"), Fractions and mpq instances.
    A two-argument call builds numerator/denominator directly.
    """
    if denom is not None:
        return mpq(value, denom)
    if isinstance(value, float):
        raise TypeError("refusing to coerce a float; pass a string or Fraction")
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    return mpq(value)


def arithmetic(a, b, op):
    """Apply one exact field operation; op is one of add/sub/mul/div."""
    a = rational(a)
    b = rational(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def to_fraction_str(x):
    """Canonical "p/q" text form ("p" when q == 1)."""
    return str(mpq(x))


def to_decimal_str(x, digits=DECIMAL_DIGITS):
    """Decimal rendering with a fixed number of significant digits.

    Uses exact integer arithmetic (round half away from zero), so the
    rendering itself is deterministic and never passes through floats.
    """
    x = mpq(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    num, den = x.numerator, x.denominator
    # exponent e such that 10^e <= x < 10^(e+1)
    e = len(str(num)) - len(str(den))
    if num * 10 ** max(0, -e) < den * 10 ** max(0, e):
        e -= 1
    shift = digits - 1 - e
    if shift >= 0:
        scaled, rem = divmod(num * 10**shift, den)
    else:
        scaled, rem = divmod(num, den * 10**-shift)
    if 2 * rem >= (den if shift >= 0 else den * 10**-shift):
        scaled += 1
    s = str(scaled)
    if len(s) > digits:  # rounding carried into a new digit
        e += 1
        s = s[:digits]
    point = e + 1
    if 0 < point <= digits:
        out = s[:point] + "." + s[point:]
    elif point <= 0:
        out = "0." + "0" * (-point) + s
    else:
        out = s + "0" * (point - digits)
    if "." in out:
        out = out.rstrip("0").rstrip(".")
    return sign + out


def poly_eval(coeffs, x):
    """Evaluate a polynomial given by ascending-degree rational coefficients."""
    x = mpq(x)
    acc = ZERO
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def isolate_root(coeffs, bracket, width):
    """Shrink a sign-change bracket of a polynomial to the requested width.

    Bisection in exact arithmetic.  The polynomial must take opposite
    (nonzero) signs at the bracket endpoints; the returned sub-bracket
    keeps that property and has width <= ``width``.
    """
    coeffs = [rational(c) for c in coeffs]
    if all(c == 0 for c in coeffs):
        raise ValueError("zero polynomial has no isolated root")
    lo, hi = rational(bracket[0]), rational(bracket[1])
    width = rational(width)
    if width <= 0:
        raise ValueError("width must be positive")
    flo, fhi = poly_eval(coeffs, lo), poly_eval(coeffs, hi)
    if flo == 0 or fhi == 0 or (flo > 0) == (fhi > 0):
        raise ValueError("bracket endpoints must have opposite nonzero signs")
    while hi - lo > width:
        mid = (lo + hi) / 2
        fmid = poly_eval(coeffs, mid)
        if fmid == 0:
            # exact hit: return a straddling bracket of the requested width
            half = width / 2
            nlo, nhi = max(lo, mid - half), min(hi, mid + half)
            if poly_eval(coeffs, nlo) == 0 or poly_eval(coeffs, nhi) == 0:
                raise ValueError("could not straddle an exact root cluster")
            return [nlo, nhi]
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return [lo, hi]
