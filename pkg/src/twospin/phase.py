"""Finite-m phase marginals p_eq(m), p_neq(m) and related exact helpers."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .gadget import Gadget, cylinder, goalpost, parity_pin
from .rational import ValidationError
from .spin import SpinParams
from .transfer import cylinder_Z

M_RANGE = range(2, 7)


@dataclass(frozen=True)
class PhaseMarginals:
    m: int
    p_eq_m: Fraction
    p_neq_m: Fraction
    params: SpinParams


def estimate_p(m: int, p: SpinParams, hat: SpinParams | None = None,
               neq_boundary: str = "algorithm") -> PhaseMarginals:
    """Pr((0,0)=1) and Pr((1,0)=1) on C_m with B_{0,m} pinned to parity-0 ones.

    neq_boundary="definition" pins B_{1,m} (parity-0 ones) for the second
    marginal instead of B_{0,m}.
    """
    if m not in M_RANGE:
        raise ValidationError(f"m must be in 2..6, got {m}")
    q = hat if hat is not None else p
    g = cylinder(m)
    pin0 = parity_pin(g, goalpost(g, 0, m), 0)
    Z = cylinder_Z(g, q, pin0)
    if Z == 0:
        raise ValidationError("pinned partition function vanishes")
    Z1 = cylinder_Z(g, q, {**pin0, g.vid(0, 0): 1})
    if neq_boundary == "algorithm":
        Z2 = cylinder_Z(g, q, {**pin0, g.vid(1, 0): 1})
        Zn = Z
    elif neq_boundary == "definition":
        pin1 = parity_pin(g, goalpost(g, 1, m), 0)
        Zn = cylinder_Z(g, q, pin1)
        Z2 = cylinder_Z(g, q, {**pin1, g.vid(1, 0): 1})
    else:
        raise ValidationError(f"unknown neq_boundary {neq_boundary!r}")
    return PhaseMarginals(m, Z1 / Z, Z2 / Zn, q)


def complement_approx(p_hat, p_prime, delta):
    """Bracket (lo, hi) for 1-p given exp(-d')p_hat <= p <= exp(d')p_hat, d' = delta(1-p')/2.

    From |p - p_hat| <= d' and d' <= delta(1-p)/2 one gets
    (1-p)(1-delta/2) <= 1-p_hat <= (1-p)(1+delta/2), and 1-delta/2 >= e^-delta,
    1+delta/2 <= e^delta, so lo/hi certify the multiplicative e^{+-delta} bracket.
    """
    p_hat, p_prime, delta = Fraction(p_hat), Fraction(p_prime), Fraction(delta)
    if not 0 < p_hat < 1:
        raise ValidationError("need 0 < p_hat < 1")
    if not 0 < p_prime < 1:
        raise ValidationError("need 0 < p' < 1")
    if not 0 < delta < 1:
        raise ValidationError("need 0 < delta < 1")
    dp = delta * (1 - p_prime) / 2
    # p <= e^{d'} p_hat <= p_hat / (1 - d'), which must stay below p'
    if not p_hat / (1 - dp) < p_prime:
        raise ValidationError("cannot certify p < p' from p_hat")
    lo = (1 - p_hat) / (1 + delta / 2)
    hi = (1 - p_hat) / (1 - delta / 2)
    return lo, hi


def contour_series_bound(a) -> Fraction:
    """a^2 * sum_{r>=1} r (3a)^r = a^2 * 3a / (1-3a)^2."""
    a = Fraction(a)
    if not 0 <= a or not 3 * a < 1:
        raise ValidationError("series diverges unless 3a < 1")
    return a * a * 3 * a / (1 - 3 * a) ** 2


def separation_bound() -> Fraction:
    v = contour_series_bound(Fraction(119, 500))
    assert v == Fraction(119, 500) ** 2 * Fraction(357, 500) / Fraction(143, 500) ** 2
    assert v < Fraction(1, 2)
    return v
