"""Exact rational parsing/formatting and certified log/exp enclosures."""
from __future__ import annotations

import re
from fractions import Fraction

import mpmath

_RAT = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ValidationError(ValueError):
    """Bad user input (maps to CLI exit code 2)."""


class ResourceLimit(RuntimeError):
    """Requested size exceeds a configured limit (CLI exit code 3)."""


def parse_rational(s) -> Fraction:
    """Parse 'p/q' or an integer. Decimal strings are rejected on purpose."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int) and not isinstance(s, bool):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValidationError(f"expected a rational string, got {type(s).__name__}")
    m = _RAT.match(s)
    if not m:
        raise ValidationError(f"not an exact rational (use p/q): {s!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValidationError(f"zero denominator: {s!r}")
    return Fraction(num, den)


def fmt_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _iv(q: Fraction):
    q = Fraction(q)
    return mpmath.iv.mpf(q.numerator) / mpmath.iv.mpf(q.denominator)


class _ivprec:
    def __init__(self, prec):
        self.prec = prec

    def __enter__(self):
        self.old = mpmath.iv.prec
        mpmath.iv.prec = self.prec

    def __exit__(self, *exc):
        mpmath.iv.prec = self.old


def _to_fraction_bounds(x) -> tuple[Fraction, Fraction]:
    return tuple(_mpf_tuple_to_fraction(t) for t in x._mpi_)


def _mpf_tuple_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    if not man and exp:
        raise ValidationError("non-finite interval endpoint")
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def log_enclosure(q, prec: int = 200) -> tuple[Fraction, Fraction]:
    """Rationals lo <= log(q) <= hi."""
    q = Fraction(q)
    if q <= 0:
        raise ValidationError("log of a non-positive number")
    if q == 1:
        return Fraction(0), Fraction(0)
    with _ivprec(prec):
        return _to_fraction_bounds(mpmath.iv.log(_iv(q)))


def exp_enclosure(q, prec: int = 200) -> tuple[Fraction, Fraction]:
    """Rationals lo <= exp(q) <= hi."""
    q = Fraction(q)
    if q == 0:
        return Fraction(1), Fraction(1)
    with _ivprec(prec):
        return _to_fraction_bounds(mpmath.iv.exp(_iv(q)))


def log_value(q) -> float:
    q = Fraction(q)
    if q <= 0:
        return float("-inf")
    return float(mpmath.log(mpmath.mpf(q.numerator)) - mpmath.log(mpmath.mpf(q.denominator)))
