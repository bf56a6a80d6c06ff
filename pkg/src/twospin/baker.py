"""Baker-style approximation scheme for log Z on planar graphs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .graph import EmbeddedGraph, build_tree_decomposition, induced_subgraph, layer_sets
from .rational import ValidationError, fmt_rational, log_enclosure
from .spin import SpinParams, dp_Z


@dataclass(frozen=True)
class BakerParams:
    epsilon: Fraction
    beta_minus: Fraction
    beta_plus: Fraction
    gamma_minus: Fraction
    gamma_plus: Fraction
    lambda_minus: Fraction
    lambda_plus: Fraction

    def __post_init__(self):
        for f in self.__dataclass_fields__:
            object.__setattr__(self, f, Fraction(getattr(self, f)))
        if not 0 < self.epsilon <= 1:
            raise ValidationError("epsilon must lie in (0,1]")
        if not self.beta_plus >= self.beta_minus >= 1:
            raise ValidationError("need beta+ >= beta- >= 1")
        if not 1 > self.gamma_plus >= self.gamma_minus >= 0:
            raise ValidationError("need 1 > gamma+ >= gamma- >= 0")
        if not self.lambda_plus >= self.lambda_minus >= 1:
            raise ValidationError("need lambda+ >= lambda- >= 1")

    @classmethod
    def around(cls, eps, p: SpinParams):
        """Degenerate brackets equal to p itself."""
        return cls(eps, p.beta, p.beta, p.gamma, p.gamma, p.lam, p.lam)

    def clamp(self, p: SpinParams) -> SpinParams:
        c = lambda v, lo, hi: min(max(v, lo), hi)
        return SpinParams(c(p.beta, self.beta_minus, self.beta_plus),
                          c(p.gamma, self.gamma_minus, self.gamma_plus),
                          c(p.lam, self.lambda_minus, self.lambda_plus))


def _k_ok(k, eps, bp, lp, lm):
    """Exact test of k * eps * log(1+lm) >= 32 log(2 lp) + 96 log(bp)."""
    a, b = eps.numerator, eps.denominator
    lhs = ((2 * lp) ** 32 * bp ** 96) ** b
    return lhs <= (1 + lm) ** (k * a)


def choose_k(eps, beta_plus, lambda_plus, lambda_minus) -> int:
    """Smallest k >= (32 log(2 lambda+) + 96 log beta+) / (eps log(1 + lambda-))."""
    eps, bp, lp, lm = (Fraction(x) for x in (eps, beta_plus, lambda_plus, lambda_minus))
    if not 0 < eps:
        raise ValidationError("epsilon must be positive")
    if bp < 1 or lp < 1 or lm < 1 or lm > lp:
        raise ValidationError("bracket violation")
    num_lo = 32 * log_enclosure(2 * lp)[0] + 96 * log_enclosure(bp)[0]
    num_hi = 32 * log_enclosure(2 * lp)[1] + 96 * log_enclosure(bp)[1]
    den = log_enclosure(1 + lm)
    klo = math.ceil(num_lo / (eps * den[1]))
    khi = math.ceil(num_hi / (eps * den[0]))
    k = max(1, klo)
    while k < khi and not _k_ok(k, eps, bp, lp, lm):
        k += 1
    return max(k, 1)


def choose_delta(n: int, m: int, k: int, lambda_plus) -> Fraction:
    """Rational lower enclosure of 2n log(2 lambda+) / (k (n+m))."""
    if n < 1 or k < 1:
        raise ValidationError("need n, k >= 1")
    return 2 * n * log_enclosure(2 * Fraction(lambda_plus))[0] / (k * (n + m))


def choose_layer(g: EmbeddedGraph, k: int):
    """(i, V_i, kept vertices, removed edge endpoints) with i in I minimising endpoints."""
    V = layer_sets(g, k)
    n = g.n
    I = [i for i in range(k) if len(V[i]) * k <= 2 * n]
    if not I:
        raise ValidationError("no admissible layer")
    ends = [sum(g.degree(v) for v in V[i]) for i in range(k)]
    i = min(I, key=lambda j: (ends[j], j))
    keep = [v for v in range(n) if v not in V[i]]
    return i, V[i], keep, ends[i], I


@dataclass(frozen=True)
class PrasCertificate:
    k: int
    layer: int
    layer_size: int
    removed_endpoints: int
    width: int
    log_z_hat: float
    delta: Fraction
    log_upper_factor: float

    def to_json(self):
        d = asdict(self)
        d["delta"] = fmt_rational(self.delta)
        return d


def upper_factor_log(n, k, lambda_plus, beta_plus) -> float:
    return (2 * n / k) * math.log(2 * lambda_plus) + (12 * n / k) * math.log(beta_plus)


def log_pras(g: EmbeddedGraph, eps, bounds: BakerParams, hatted: SpinParams):
    """log Z(G_i) for the chosen layer, with its certificate."""
    if g.n < 3:
        raise ValidationError("need n >= 3")
    k = choose_k(eps, bounds.beta_plus, bounds.lambda_plus, bounds.lambda_minus)
    q = bounds.clamp(hatted)
    i, Vi, keep, ends, _ = choose_layer(g, k)
    sub, _ = induced_subgraph(g, keep)
    td = build_tree_decomposition(sub, "min_fill")
    z = dp_Z(sub, q, td=td, backend="log")
    lz = 0.0 if sub.n == 0 else z.log
    cert = PrasCertificate(k, i, len(Vi), ends, td.width, lz,
                           choose_delta(g.n, g.m, k, bounds.lambda_plus),
                           upper_factor_log(g.n, k, float(bounds.lambda_plus), float(bounds.beta_plus)))
    return lz, cert


def verify_sandwich(g: EmbeddedGraph, p: SpinParams, k: int, lambda_plus=None, beta_plus=None) -> bool:
    """Zhat <= Z <= (2 lam+)^{2n/k} (beta+)^{12n/k} Zhat, exact (powers raised by k)."""
    lp = Fraction(lambda_plus if lambda_plus is not None else p.lam)
    bp = Fraction(beta_plus if beta_plus is not None else p.beta)
    _, _, keep, _, _ = choose_layer(g, k)
    sub, _ = induced_subgraph(g, keep)
    zhat = dp_Z(sub, p) if sub.n else Fraction(1)
    Z = dp_Z(g, p)
    n = g.n
    return zhat <= Z and Z ** k <= (2 * lp) ** (2 * n) * bp ** (12 * n) * zhat ** k


def volume_lower_bound_holds(g: EmbeddedGraph, p: SpinParams, Z=None) -> bool:
    """Z >= (1+lam)^{n/4}, checked as Z^4 >= (1+lam)^n."""
    Z = dp_Z(g, p) if Z is None else Z
    return Z ** 4 >= (1 + p.lam) ** g.n
