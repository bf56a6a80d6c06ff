"""Hardness-reduction instances J, J' built from planar cubic graphs, and the exact algebra behind them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .gadget import Gadget, build_gadget
from .graph import EmbeddedGraph
from .rational import ResourceLimit, ValidationError, exp_enclosure, log_enclosure
from .spin import LogWeight, SpinParams, brute_force_Z, dp_Z

IDEAL_LIMIT = 20


def _mat(p: SpinParams):
    return ((p.beta, Fraction(1)), (Fraction(1), p.gamma))


def build_matrices(p: SpinParams, p_eq, p_neq):
    """P = [[1-p_eq, p_eq], [1-p_neq, p_neq]], M = P A P^t, W = P A (1, lam)^t."""
    p_eq, p_neq = Fraction(p_eq), Fraction(p_neq)
    if not (0 <= p_neq <= p_eq <= 1):
        raise ValidationError("need 0 <= p_neq <= p_eq <= 1")
    P = ((1 - p_eq, p_eq), (1 - p_neq, p_neq))
    A = _mat(p)
    PA = tuple(tuple(sum(P[i][k] * A[k][j] for k in range(2)) for j in range(2)) for i in range(2))
    M = tuple(tuple(sum(PA[i][k] * P[j][k] for k in range(2)) for j in range(2)) for i in range(2))
    W = tuple(PA[i][0] + PA[i][1] * p.lam for i in range(2))
    return P, M, W


def det2(M):
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def derive_constants(p: SpinParams, p_eq, p_neq, delta):
    """(Delta-, Delta+, xi) valid for every hatted input within e^{+-delta}."""
    p_eq, p_neq, delta = Fraction(p_eq), Fraction(p_neq), Fraction(delta)
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0,1)")
    if not p.beta * p.gamma < 1:
        raise ValidationError("need beta*gamma < 1")
    if not p_eq > p_neq:
        raise ValidationError("need p_eq > p_neq")
    if not (0 < p_neq and p_eq < 1 and p.gamma < 1 and p.beta >= 1 and p.lam > 0):
        raise ValidationError("inputs outside the admissible region")
    _, M, W = build_matrices(p, p_eq, p_neq)
    ents = [M[0][0], M[0][1], M[1][1], W[0], W[1]]
    dminus = min(ents) * (1 - delta)        # e^-delta >= 1 - delta
    dplus = max(ents) * (1 + 2 * delta)     # e^delta <= 1 + 2 delta for delta < 1
    xi = min(p_eq - p_neq, 1 - p.gamma, p_neq, min(p.lam, Fraction(1)), 1 - p.beta * p.gamma) / 2
    return dminus, dplus, xi


def choose_k2(n: int, dplus, xi) -> int:
    """ceil((n^2+n) 2 log5 (Delta+)^2 / xi^3), using a certified enclosure of log 5."""
    lo, hi = log_enclosure(5)
    c = Fraction(n * n + n) * 2 * Fraction(dplus) ** 2 / Fraction(xi) ** 3
    k_lo, k_hi = math.ceil(c * lo), math.ceil(c * hi)
    if k_lo != k_hi:
        lo, hi = log_enclosure(5, prec=2000)
        k_hi = math.ceil(c * hi)
    return k_hi


def k1_interval(n: int, k2: int, M, W):
    """Real interval for k1 as rational (lower-bound-high, upper-bound-low) enclosures."""
    rw = Fraction(W[1]) / Fraction(W[0])
    rm = Fraction(M[1][1]) / Fraction(M[0][1])
    if rw <= 1 or rm <= 1:
        raise ValidationError("need W1 > W0 and M11 > M01")
    Lw = log_enclosure(rw)
    Lm = log_enclosure(rm)
    l41, l49 = log_enclosure(Fraction(41, 10)), log_enclosure(Fraction(49, 10))
    # lower endpoint: largest possible value; upper endpoint: smallest possible value
    lower = (3 * k2 * Lm[1] + l41[1] * n) / Lw[0]
    upper = (3 * k2 * Lm[0] + l49[0] * n) / Lw[1]
    return lower, upper


def choose_k1(n: int, k2: int, M, W) -> int:
    lower, upper = k1_interval(n, k2, M, W)
    k1 = max(1, math.ceil(lower))
    if k1 > upper:
        raise ValidationError(f"empty k1 interval [{float(lower):.6g}, {float(upper):.6g}]")
    return k1


def choose_d(n: int, k: int, user_override=None) -> int:
    if user_override is not None:
        d = int(user_override)
        if d < 1:
            raise ValidationError("d must be positive")
        return -(-d // 16) * 16
    return 16 * n


def compliant_delta(n: int, k1: int, k2: int, dplus, xi) -> Fraction:
    """Minimum of the accuracy requirements collected from the error analysis."""
    dplus, xi = Fraction(dplus), Fraction(xi)
    bounds = [
        xi ** 3 / (16 * dplus ** 2),                 # strictly below xi^3 / (8 Delta+^2)
        Fraction(1, n * n * math.isqrt(n - 1) + n * n) if n > 1 else Fraction(1, 2),  # <= n^-2.5
        xi / 2,
        n * log_enclosure(Fraction(41, 40))[0] / (2 * k1 + 6 * k2),
        n * log_enclosure(Fraction(50, 49))[0] / (2 * k1 + 6 * k2),
    ]
    return min(bounds)


def gamma_tilde_small(n: int, k2: int, M_hat, delta) -> bool:
    """Certified check of (e^{4 delta} M00 M11 / M01^2)^{k2} <= 5^{-n^2-n}."""
    r = Fraction(M_hat[0][0]) * M_hat[1][1] / Fraction(M_hat[0][1]) ** 2
    if r == 0:
        return True
    lhs_hi = k2 * (4 * Fraction(delta) + log_enclosure(r)[1])
    rhs_lo = -(n * n + n) * log_enclosure(5)[1]
    return lhs_hi <= rhs_lo


@dataclass
class ReductionParams:
    n: int
    m: int
    P: tuple
    M: tuple
    W: tuple
    delta: Fraction
    delta_minus: Fraction
    delta_plus: Fraction
    xi: Fraction
    k1: int
    k2: int
    k: int
    d: int

    @property
    def gamma_tilde(self) -> Fraction:
        return (self.M[0][0] * self.M[1][1] / self.M[0][1] ** 2) ** self.k2

    @property
    def lambda_tilde(self) -> Fraction:
        return (self.W[1] / self.W[0]) ** self.k1 * (self.M[0][1] / self.M[1][1]) ** (3 * self.k2)

    @property
    def K(self) -> Fraction:
        return Fraction(2 ** self.n) / (self.W[0] ** (self.k1 * self.n) * self.M[1][1] ** (self.k2 * self.m))

    def log_lambda_tilde_bounds(self):
        lw, lm = log_enclosure(self.W[1] / self.W[0]), log_enclosure(self.M[0][1] / self.M[1][1])
        return (self.k1 * lw[0] + 3 * self.k2 * lm[0], self.k1 * lw[1] + 3 * self.k2 * lm[1])


def derive_params(n: int, m: int, p: SpinParams, p_eq, p_neq, delta=None, d_override=None) -> ReductionParams:
    """Full parameter chain; delta defaults to the compliant minimum (computed iteratively)."""
    if n < 3:
        raise ValidationError("need n >= 3")
    P, M, W = build_matrices(p, p_eq, p_neq)
    d0 = Fraction(1, 2) if delta is None else Fraction(delta)
    dm, dp, xi = derive_constants(p, p_eq, p_neq, d0)
    k2 = choose_k2(n, dp, xi)
    k1 = choose_k1(n, k2, M, W)
    dl = compliant_delta(n, k1, k2, dp, xi) if delta is None else d0
    if delta is None:
        # the compliant delta is smaller than the provisional one, so the bounds stay valid
        dm, dp2, xi2 = derive_constants(p, p_eq, p_neq, dl)
        assert dp2 <= dp and xi2 == xi
    k = max(k1, 3 * k2)
    return ReductionParams(n, m, P, M, W, dl, dm, dp, xi, k1, k2, k, choose_d(n, k, d_override))


# ---------------------------------------------------------------------------
# instances

def half_edge_labels(G: EmbeddedGraph):
    """u_0 = half-edge to the lowest neighbour, then clockwise."""
    labs = []
    for u in range(G.n):
        r = list(G.rotation[u])
        s = r.index(min(r))
        labs.append(r[s:] + r[:s])
    return labs


@dataclass
class ReductionInstance:
    source: EmbeddedGraph
    gadget: Gadget
    k1: int
    k2: int
    labels: list
    J: EmbeddedGraph
    Jprime: EmbeddedGraph
    T0: list            # T0[u][j] -> vertex id in J / J'
    T1: list
    bristles: list      # bristles[u][j]
    E_B: list
    E_M: list
    matching: list = field(default_factory=list)   # (u, a, v, b)

    @property
    def terminal_ids(self):
        return sorted(v for row in self.T0 + self.T1 for v in row)

    def terminal_map(self):
        return {"T0": self.T0, "T1": self.T1, "bristles": self.bristles}


def build_instance(G: EmbeddedGraph, k1: int, k2: int, d: int) -> ReductionInstance:
    if any(G.degree(v) != 3 for v in range(G.n)):
        raise ValidationError("source graph must be cubic")
    if k1 < 1 or k2 < 1 or d < 1:
        raise ValidationError("k1, k2, d must be positive")
    k = max(k1, 3 * k2)
    gad = build_gadget(k, d)
    N = gad.n
    base = gad.graph
    n = G.n
    rot = []
    edges = []
    for u in range(n):
        off = u * N
        rot += [[off + w for w in r] for r in base.rotation]
        edges += [(off + a, off + b) for a, b in base.edges]
    J = EmbeddedGraph.build(n * N, edges, rot)

    T1 = [[u * N + gad.vid(*t) for t in gad.terminals1] for u in range(n)]
    T0 = [[u * N + gad.vid(*t) for t in gad.terminals0] for u in range(n)]
    labels = half_edge_labels(G)
    bristles = [[n * N + u * k1 + j for j in range(k1)] for u in range(n)]
    E_B = [(bristles[u][j], T1[u][j]) for u in range(n) for j in range(k1)]
    E_M, matching = [], []
    for u, v in G.edges:
        a, b = labels[u].index(v), labels[v].index(u)
        matching.append((u, a, v, b))
        for j in range(k2):
            E_M.append((T0[u][a * k2 + j], T0[v][b * k2 + k2 - 1 - j]))

    rot2 = [list(r) for r in rot] + [[] for _ in range(n * k1)]
    for x, t in E_B:
        rot2[x] = [t]
        rot2[t].insert(0, x)   # outer slot of a y=0 vertex
    for s, t in E_M:
        rot2[s].insert(0, t)
        rot2[t].insert(0, s)
    Jp = EmbeddedGraph.build(n * N + n * k1, edges + E_B + E_M, rot2)
    if Jp.max_degree > 4:
        raise ValidationError("J' has a vertex of degree > 4")
    return ReductionInstance(G, gad, k1, k2, labels, J, Jp, T0, T1, bristles, E_B, E_M, matching)


def eval_F(inst: ReductionInstance, tau, p: SpinParams) -> Fraction:
    """wt'(tau)/wt(tau): bristle factors times matching-edge factors."""
    tau = dict(tau)
    missing = [t for t in inst.terminal_ids if t not in tau]
    if missing:
        raise ValidationError(f"tau misses {len(missing)} terminals")
    A = _mat(p)
    brow = (p.beta + p.lam, 1 + p.gamma * p.lam)
    F = Fraction(1)
    for _, t in inst.E_B:
        F *= brow[tau[t]]
    for s, t in inst.E_M:
        F *= A[tau[s]][tau[t]]
    return F


def ideal_expectation(G: EmbeddedGraph, M, W, k1: int, k2: int) -> Fraction:
    """2^-n sum over phase vectors of prod_u W_{1-s(u)}^k1 prod_{uv} M_{s(u)s(v)}^k2."""
    n = G.n
    if n > IDEAL_LIMIT:
        raise ResourceLimit(f"ideal_expectation limited to n <= {IDEAL_LIMIT}")
    Wp = [Fraction(W[0]) ** k1, Fraction(W[1]) ** k1]
    Mp = [[Fraction(M[i][j]) ** k2 for j in range(2)] for i in range(2)]
    tot = Fraction(0)
    for s in itertools.product((0, 1), repeat=n):
        t = Fraction(1)
        for u in range(n):
            t *= Wp[1 - s[u]]
        for u, v in G.edges:
            t *= Mp[s[u]][s[v]]
        tot += t
    return tot / 2 ** n


def verify_identity(G: EmbeddedGraph, p: SpinParams, p_eq, p_neq, k1: int, k2: int) -> bool:
    """K * E[F] == Z_{1, gamma~, lambda~}(G), all exact."""
    if any(G.degree(v) != 3 for v in range(G.n)):
        raise ValidationError("source graph must be cubic")
    _, M, W = build_matrices(p, p_eq, p_neq)
    n, m = G.n, G.m
    if M[0][1] == 0 or W[0] == 0 or M[1][1] == 0:
        raise ValidationError("degenerate matrices")
    gt = (M[0][0] * M[1][1] / M[0][1] ** 2) ** k2
    lt = (W[1] / W[0]) ** k1 * (M[0][1] / M[1][1]) ** (3 * k2)
    K = Fraction(2 ** n) / (W[0] ** (k1 * n) * M[1][1] ** (k2 * m))
    lhs = K * ideal_expectation(G, M, W, k1, k2)
    q = SpinParams(Fraction(1), gt, lt)
    rhs = brute_force_Z(G, q) if n <= 16 else dp_Z(G, q)
    return lhs == rhs


def _to_mp(w):
    if isinstance(w, LogWeight):
        return mpmath.ninf if w.zero else mpmath.mpf(w.log)
    w = Fraction(w)
    if w <= 0:
        return mpmath.ninf
    return mpmath.log(mpmath.mpf(w.numerator)) - mpmath.log(mpmath.mpf(w.denominator))


def decide_is(h: int, z_ratio, lambda_hat, n: int) -> str:
    """yes if z >= e^-1 lam^h, no if z <= e 2^-n lam^h, else indeterminate."""
    if n < 1 or h < 0:
        raise ValidationError("need n >= 1 and h >= 0")
    with mpmath.workdps(80):
        lz, ll = _to_mp(z_ratio), _to_mp(lambda_hat)
        if ll == mpmath.ninf:
            raise ValidationError("lambda_hat must be positive")
        if lz == mpmath.ninf:
            return "no"
        L = lz - h * ll
        if L >= -1:
            return "yes"
        if L <= 1 - n * mpmath.log(2):
            return "no"
        return "indeterminate"
