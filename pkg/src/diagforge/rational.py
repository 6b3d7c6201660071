"""Exact rational helpers built on :class:`fractions.Fraction`."""

import math
from fractions import Fraction

import numpy as np

from .errors import InvalidInput

# Floats are snapped to the closest fraction with denominator below this.
RATIONALIZE_DENOMINATOR = 10**12


def to_fraction(x, max_denominator=RATIONALIZE_DENOMINATOR):
    """Convert ``x`` to a Fraction.

    Ints, Fractions and "p/q" strings convert exactly; floats are snapped to
    the nearest fraction with denominator at most ``max_denominator``, so
    ``0.1`` becomes ``1/10`` rather than its binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not a rational: {x!r}") from exc
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise InvalidInput(f"not a finite number: {x!r}")
        return Fraction(float(x)).limit_denominator(max_denominator)
    raise InvalidInput(f"cannot convert {type(x).__name__} to a rational")


def to_complex_fraction(z, max_denominator=RATIONALIZE_DENOMINATOR):
    """Return ``(re, im)`` as Fractions from a complex, real or pair."""
    if isinstance(z, (tuple, list)) and len(z) == 2:
        return (to_fraction(z[0], max_denominator), to_fraction(z[1], max_denominator))
    if isinstance(z, (complex, np.complexfloating)):
        return (to_fraction(z.real, max_denominator), to_fraction(z.imag, max_denominator))
    return (to_fraction(z, max_denominator), Fraction(0))


def fraction_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def is_exact(x):
    return isinstance(x, (Fraction, int, np.integer)) and not isinstance(x, bool)


def lcm_of_denominators(values):
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def simplest_between(lo, hi, lo_closed=True, hi_closed=False):
    """Smallest-denominator rational in the interval between ``lo`` and ``hi``.

    Walks the Stern-Brocot tree via continued fractions. Requires
    ``0 <= lo < hi`` (``hi`` may be ``math.inf``).
    """
    lo = Fraction(lo)
    if hi != math.inf:
        hi = Fraction(hi)
        if not lo < hi:
            raise ValueError("empty interval")
    if lo < 0:
        raise ValueError("simplest_between expects a nonnegative interval")
    fl = math.floor(lo)
    if lo == fl and lo_closed:
        return lo
    n = Fraction(fl + 1)
    if n < hi or (n == hi and hi_closed):
        return n
    # No integer inside: both ends lie in [fl, fl + 1]; recurse on reciprocals.
    upper = math.inf if lo == fl else 1 / (lo - fl)
    y = simplest_between(1 / (hi - fl), upper, lo_closed=hi_closed, hi_closed=lo_closed)
    return fl + 1 / y


def round_counts(targets, total, lo=0, hi=None):
    """Integers in ``[lo, hi]`` summing to ``total`` that track ``targets``.

    Greedy largest-remainder rounding: start from clipped floors, then add
    units where the deficit ``t - a`` is largest, or remove them where it is
    most negative. Returns a list of ints.
    """
    t = [float(x) for x in targets]
    if hi is None:
        hi = total
    n = len(t)
    if n * lo > total or n * hi < total:
        raise ValueError("bounds incompatible with total")
    a = [min(max(math.floor(x), lo), hi) for x in t]
    s = sum(a)
    while s < total:
        k = max((k for k in range(n) if a[k] < hi), key=lambda k: (t[k] - a[k], -k))
        a[k] += 1
        s += 1
    while s > total:
        k = min((k for k in range(n) if a[k] > lo), key=lambda k: (t[k] - a[k], k))
        a[k] -= 1
        s -= 1
    return a
