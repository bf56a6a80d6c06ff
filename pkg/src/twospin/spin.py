"""Two-spin partition functions: parameters, brute force, tree-decomposition DP."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .graph import EmbeddedGraph, TreeDecomposition, build_tree_decomposition, verify_decomposition
from .rational import ResourceLimit, ValidationError, fmt_rational, log_value, parse_rational

BRUTE_LIMIT = 30
DP_WIDTH_EXACT = 24
DP_WIDTH_LOG = 30

# 0.238 written exactly
C238 = Fraction(119, 500)


@dataclass(frozen=True)
class SpinParams:
    """Weight of a configuration is beta^b gamma^c lam^l (0^0 = 1)."""

    beta: Fraction
    gamma: Fraction
    lam: Fraction

    def __post_init__(self):
        for name in ("beta", "gamma", "lam"):
            v = getattr(self, name)
            if isinstance(v, float):
                raise ValidationError(f"{name} must be exact, not float")
            object.__setattr__(self, name, parse_rational(v) if isinstance(v, str) else Fraction(v))
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")

    @classmethod
    def parse(cls, beta, gamma, lam):
        return cls(parse_rational(beta), parse_rational(gamma), parse_rational(lam))

    @classmethod
    def hardcore(cls, lam):
        return cls(Fraction(1), Fraction(0), parse_rational(lam))

    def edge_matrix(self):
        return ((self.beta, Fraction(1)), (Fraction(1), self.gamma))

    def to_json(self):
        return {"beta": fmt_rational(self.beta), "gamma": fmt_rational(self.gamma),
                "lambda": fmt_rational(self.lam)}


@dataclass(frozen=True)
class LogWeight:
    """log-domain value; zero=True means the weight is exactly 0."""

    log: float
    zero: bool = False

    def to_json(self):
        return {"log": None if self.zero else self.log, "zero": self.zero}


def weight_json(w):
    if isinstance(w, LogWeight):
        return w.to_json()
    return {"exact": fmt_rational(w)}


def as_log(w) -> float:
    if isinstance(w, LogWeight):
        return -math.inf if w.zero else w.log
    return log_value(w)


def check_condition1(p: SpinParams):
    """Membership in the low-temperature region; returns (ok, violated clauses)."""
    bad = []
    if p.lam < 1:
        bad.append("lambda >= 1")
    if p.beta < 1:
        bad.append("beta >= 1")
    if not p.gamma < 1:
        bad.append("gamma < 1")
    if not p.beta * p.gamma < 1:
        bad.append("beta*gamma < 1")
    # beta * lam^(-1/4) <= 0.238  <=>  beta^4 <= 0.238^4 * lam
    if not p.beta ** 4 <= C238 ** 4 * p.lam:
        bad.append("beta*lambda^(-1/4) <= 0.238")
    # gamma * lam^(3/8) <= 0.238  <=>  gamma^8 lam^3 <= 0.238^8
    if not p.gamma ** 8 * p.lam ** 3 <= C238 ** 8:
        bad.append("gamma*lambda^(3/8) <= 0.238")
    return (not bad, bad)


@dataclass(frozen=True)
class ConfigStats:
    b: int
    c: int
    ell: int
    b_side: int = 0
    c_side: int = 0


def config_stats(g: EmbeddedGraph, sigma, side=None) -> ConfigStats:
    """b/c = monochromatic 0-0/1-1 edges, ell = ones; *_side over edges inside `side`."""
    if len(sigma) != g.n or any(s not in (0, 1) for s in sigma):
        raise ValidationError("configuration must be a 0/1 vector of length n")
    b = c = bs = cs = 0
    side = set(side) if side is not None else None
    for u, v in g.edges:
        su, sv = sigma[u], sigma[v]
        if su == sv:
            in_side = side is not None and u in side and v in side
            if su == 0:
                b += 1
                bs += in_side
            else:
                c += 1
                cs += in_side
    return ConfigStats(b, c, int(sum(sigma)), bs, cs)


def weight(g: EmbeddedGraph, sigma, p: SpinParams) -> Fraction:
    st = config_stats(g, sigma)
    return p.beta ** st.b * p.gamma ** st.c * p.lam ** st.ell


def _check_pin(g, pin):
    pin = dict(pin or {})
    for v, s in pin.items():
        if not (0 <= v < g.n) or s not in (0, 1):
            raise ValidationError(f"bad pin {v}:{s}")
    return pin


def brute_force_Z(g: EmbeddedGraph, p: SpinParams, pin=None) -> Fraction:
    """Exhaustive sum; counts (b, c, ell) with numpy then sums exactly."""
    pin = _check_pin(g, pin)
    free = [v for v in range(g.n) if v not in pin]
    f = len(free)
    if f > BRUTE_LIMIT:
        raise ResourceLimit(f"brute force limited to {BRUTE_LIMIT} free vertices, got {f}")
    nkeys = (g.m + 1) * (g.m + 1) * (g.n + 1)
    counts = np.zeros(nkeys, dtype=np.int64)
    chunk = 1 << min(f, 20)
    total = 1 << f
    fixed = np.array([pin.get(v, 0) for v in range(g.n)], dtype=np.int8)
    pos = {v: j for j, v in enumerate(free)}
    base = np.arange(chunk, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = base[: min(chunk, total - start)] + start
        bits = [((idx >> j) & 1).astype(np.int8) for j in range(f)]
        col = [bits[pos[v]] if v in pos else np.full(len(idx), fixed[v], dtype=np.int8) for v in range(g.n)]
        ell = np.zeros(len(idx), dtype=np.int64)
        for v in range(g.n):
            ell += col[v]
        b = np.zeros(len(idx), dtype=np.int64)
        c = np.zeros(len(idx), dtype=np.int64)
        for u, v in g.edges:
            both = col[u] + col[v]
            b += both == 0
            c += both == 2
        key = (b * (g.m + 1) + c) * (g.n + 1) + ell
        counts += np.bincount(key, minlength=nkeys)
    counts = {kk: int(cc) for kk, cc in enumerate(counts.tolist()) if cc}
    Z = Fraction(0)
    for kk, cc in counts.items():
        ell = kk % (g.n + 1)
        rest = kk // (g.n + 1)
        c, b = rest % (g.m + 1), rest // (g.m + 1)
        Z += cc * p.beta ** b * p.gamma ** c * p.lam ** ell
    return Z


# ---------------------------------------------------------------------------
# semirings for the DP

class _ExactRing:
    """Integer-scaled weights: edge entries times lcm of beta/gamma denominators."""

    def __init__(self, p: SpinParams):
        D = p.beta.denominator * p.gamma.denominator // gcd(p.beta.denominator, p.gamma.denominator)
        self.D = D
        self.E = ((int(p.beta * D), D), (D, int(p.gamma * D)))
        self.V = (p.lam.denominator, p.lam.numerator)
        self.one = 1
        self.zero = 0

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def is_zero(a):
        return a == 0

    def finish(self, total, n_vertices, n_edges):
        return Fraction(total, self.D ** n_edges * self.V[0] ** n_vertices)


def _lg(q):
    return -math.inf if q == 0 else log_value(q)


def _lae(a, b):
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class _LogRing:
    def __init__(self, p: SpinParams):
        self.E = ((_lg(p.beta), 0.0), (0.0, _lg(p.gamma)))
        self.V = (0.0, _lg(p.lam))
        self.one = 0.0
        self.zero = -math.inf

    @staticmethod
    def mul(a, b):
        return a + b

    add = staticmethod(_lae)

    @staticmethod
    def is_zero(a):
        return a == -math.inf

    def finish(self, total, n_vertices, n_edges):
        return LogWeight(0.0, True) if total == -math.inf else LogWeight(total, False)


def make_ring(p, backend):
    if backend == "exact":
        return _ExactRing(p)
    if backend == "log":
        return _LogRing(p)
    raise ValidationError(f"unknown backend {backend!r}")


def dp_Z(g: EmbeddedGraph, p: SpinParams, pin=None, td: TreeDecomposition | None = None,
         backend="exact", max_width=None):
    """Partition function by dynamic programming over a tree decomposition.

    Each vertex and edge factor is charged at the topmost bag containing it,
    so it is counted exactly once.
    """
    pin = _check_pin(g, pin)
    if td is None:
        td = build_tree_decomposition(g, "min_fill")
    else:
        probs = verify_decomposition(g, td)
        if probs:
            raise ValidationError("invalid tree decomposition: " + "; ".join(probs[:3]))
    limit = max_width if max_width is not None else (DP_WIDTH_EXACT if backend == "exact" else DP_WIDTH_LOG)
    if td.width > limit:
        raise ResourceLimit(f"tree width {td.width} exceeds limit {limit}")
    R = make_ring(p, backend)
    nb = len(td.bags)
    children = [[] for _ in range(nb)]
    for i, par in enumerate(td.parent):
        if par >= 0:
            children[par].append(i)
    root = td.root
    depth = [0] * nb
    order = [root]
    for i in order:
        for c in children[i]:
            depth[c] = depth[i] + 1
            order.append(c)
    top = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            if v not in top or depth[i] < depth[top[v]]:
                top[v] = i
    vert_at = [[] for _ in range(nb)]
    for v, i in top.items():
        vert_at[i].append(v)
    edge_at = [[] for _ in range(nb)]
    for u, v in g.edges:
        best = None
        for i, bag in enumerate(td.bags):
            if u in bag and v in bag and (best is None or depth[i] < depth[best]):
                best = i
        edge_at[best].append((u, v))

    msgs = {}
    total = R.zero
    for i in reversed(order):
        bag = sorted(td.bags[i])
        pos = {v: j for j, v in enumerate(bag)}
        doms = [(pin[v],) if v in pin else (0, 1) for v in bag]
        vf = [pos[v] for v in vert_at[i]]
        ef = [(pos[u], pos[v]) for u, v in edge_at[i]]
        ch = []
        for c in children[i]:
            sep = sorted(td.bags[c] & td.bags[i])
            ch.append(([pos[v] for v in sep], msgs.pop(c)))
        par = td.parent[i]
        up = [pos[v] for v in sorted(td.bags[par] & td.bags[i])] if par >= 0 else None
        out = {}
        for a in itertools.product(*doms):
            val = R.one
            for j in vf:
                val = R.mul(val, R.V[a[j]])
            for j, k in ef:
                val = R.mul(val, R.E[a[j]][a[k]])
            if R.is_zero(val):
                continue
            for sep, m in ch:
                x = m.get(tuple(a[j] for j in sep))
                if x is None:
                    val = R.zero
                    break
                val = R.mul(val, x)
            if R.is_zero(val):
                continue
            if up is None:
                total = R.add(total, val)
            else:
                key = tuple(a[j] for j in up)
                out[key] = R.add(out[key], val) if key in out else val
        if up is not None:
            msgs[i] = out
    return R.finish(total, g.n, g.m)


def marginal(target, p: SpinParams, v, pin=None, td=None, backend="exact"):
    """Pr(sigma(v)=1 | pin), using the cylinder solver for gadgets."""
    from .transfer import cylinder_Z
    from .gadget import Gadget

    pin = dict(pin or {})
    if v in pin:
        raise ValidationError("marginal vertex is pinned")
    if isinstance(target, Gadget):
        z = lambda pn: cylinder_Z(target, p, pn, backend=backend)
    else:
        z = lambda pn: dp_Z(target, p, pn, td=td, backend=backend)
    Z = z(pin)
    Z1 = z({**pin, v: 1})
    if backend == "exact":
        if Z == 0:
            raise ValidationError("conditioning event has zero weight")
        return Z1 / Z
    if Z.zero:
        raise ValidationError("conditioning event has zero weight")
    return 0.0 if Z1.zero else math.exp(Z1.log - Z.log)


# ---------------------------------------------------------------------------

def _iroot(a: int, k: int):
    """Exact integer k-th root or None."""
    if a < 0:
        return None
    if a in (0, 1):
        return a
    r = int(round(a ** (1.0 / k))) if a.bit_length() < 1000 else int(2 ** (a.bit_length() / k))
    for cand in range(max(0, r - 2), r + 3):
        if cand ** k == a:
            return cand
    lo, hi = 0, 1 << (a.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** k < a:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** k == a else None


@dataclass(frozen=True)
class Surd:
    """coeff * radicand^(1/root) with rational coeff and radicand."""

    coeff: Fraction
    radicand: Fraction
    root: int

    def exact(self):
        if self.coeff == 0:
            return Fraction(0)
        n = _iroot(self.radicand.numerator, self.root)
        d = _iroot(self.radicand.denominator, self.root)
        if n is None or d is None:
            return None
        return self.coeff * Fraction(n, d)

    def value(self) -> float:
        if self.coeff == 0:
            return 0.0
        return float(self.coeff) * math.exp(log_value(self.radicand) / self.root)


def regular_shift(p: SpinParams, delta: int, m: int):
    """For a delta-regular graph with m edges: Z_p = scale * Z_shifted.

    shifted = (beta lam^(-1/delta), gamma lam^(1/delta), 1), scale = lam^(m/delta).
    """
    if delta < 3 or p.lam == 0:
        raise ValidationError("regular_shift needs delta >= 3 and lambda > 0")
    b = Surd(p.beta, 1 / p.lam, delta)
    gm = Surd(p.gamma, p.lam, delta)
    scale = Surd(Fraction(1), p.lam ** m, delta)
    return (b, gm, Fraction(1)), scale


def lambda_c(delta: int) -> Fraction:
    """Hard-core uniqueness threshold on the delta-regular tree."""
    if delta < 3:
        raise ValidationError("lambda_c needs delta >= 3")
    return Fraction((delta - 1) ** (delta - 1), (delta - 2) ** delta)
