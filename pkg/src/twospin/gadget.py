"""Cylinder gadgets C_nu: terminals, goalposts, dual contours, phases, sampling."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .graph import EmbeddedGraph
from .rational import ResourceLimit, ValidationError
from .spin import SpinParams, config_stats

TERMINAL_JOINT_LIMIT = 10


@dataclass(frozen=True)
class Gadget:
    """C_nu: vertices Z/2nu x {0..nu}; id(x, y) = x*(nu+1) + y.

    With nu = 2dk, parity-1 terminals are (4jd+1, 0) and parity-0 terminals
    are (4jd+2d, 0) for j < k. Gadgets built from nu alone have no terminals.
    """

    nu: int
    k: int = 0
    d: int = 0

    def __post_init__(self):
        if self.nu < 1:
            raise ValidationError("nu must be >= 1")
        if self.k and self.nu != 2 * self.d * self.k:
            raise ValidationError("nu must equal 2dk")

    @property
    def width(self):
        return 2 * self.nu

    @property
    def height(self):
        return self.nu + 1

    def vid(self, x, y):
        return (x % self.width) * (self.nu + 1) + y

    def cell(self, v):
        return divmod(v, self.nu + 1)

    @property
    def n(self):
        return self.width * self.height

    @staticmethod
    def parity(cell):
        return (cell[0] + cell[1]) % 2

    @cached_property
    def graph(self) -> EmbeddedGraph:
        nu, W = self.nu, self.width
        edges = set()
        rot = []
        for x in range(W):
            for y in range(nu + 1):
                v = self.vid(x, y)
                r = []
                # clockwise: outward, next column, inward, previous column
                for w in ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)):
                    if 0 <= w[1] <= nu:
                        wid = self.vid(*w)
                        if wid not in r:
                            r.append(wid)
                            edges.add((min(v, wid), max(v, wid)))
                rot.append(r)
        outer = [self.vid(x, 0) for x in range(W)]
        return EmbeddedGraph.build(self.n, sorted(edges), rot, outer if W > 2 else None)

    @property
    def terminals1(self):
        return [(4 * j * self.d + 1, 0) for j in range(self.k)]

    @property
    def terminals0(self):
        return [(4 * j * self.d + 2 * self.d, 0) for j in range(self.k)]

    @property
    def terminals(self):
        """All terminals sorted by x."""
        return sorted(self.terminals1 + self.terminals0)

    def dist(self, a, x):
        """*-distance from cell a to (x, 0)."""
        dx = (a[0] - x) % self.width
        return max(min(dx, self.width - dx), a[1])

    def star_neighbors(self, cell):
        x, y = cell
        out = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if (dx or dy) and 0 <= y + dy <= self.nu:
                    c = ((x + dx) % self.width, y + dy)
                    if c != (x % self.width, y) and c not in out:
                        out.append(c)
        return out

    def neighbors(self, cell):
        return [self.cell(w) for w in self.graph.rotation[self.vid(*cell)]]


def build_gadget(k: int, d: int) -> Gadget:
    if k < 1 or d < 1:
        raise ValidationError("k and d must be positive")
    return Gadget(2 * d * k, k, d)


def cylinder(nu: int) -> Gadget:
    return Gadget(nu)


def goalpost(g: Gadget, x: int, m: int) -> frozenset:
    """B_{x,m}; the keyhole when m = nu."""
    if not 0 <= m <= g.nu:
        raise ValidationError("goalpost needs 0 <= m <= nu")
    W = g.width
    s = set()
    for j in range(m + 1):
        for c in ((x - m, j), (x - j, m), (x + j, m), (x + m, j)):
            s.add((c[0] % W, c[1]))
    return frozenset(s)


def ball(g: Gadget, x: int, h) -> frozenset:
    """U_{x,h}: cells within *-distance h of (x, 0)."""
    return frozenset((a, b) for a in range(g.width) for b in range(g.nu + 1) if g.dist((a, b), x) <= h)


def as_config(g: Gadget, sigma) -> tuple:
    s = tuple(int(v) for v in np.asarray(sigma).reshape(-1))
    if len(s) != g.n or any(v not in (0, 1) for v in s):
        raise ValidationError(f"configuration must be a 0/1 vector of length {g.n}")
    return s


def parity_ones(g: Gadget, sigma, S):
    """s if the ones of sigma on S are exactly its parity-s cells, else None."""
    S = list(S)
    ones = {c for c in S if sigma[g.vid(*c)] == 1}
    for s in (0, 1):
        if ones == {c for c in S if Gadget.parity(c) == s}:
            return s
    return None


def parity_pin(g: Gadget, S, s) -> dict:
    """Pin of S with parity-s ones."""
    return {g.vid(*c): int(Gadget.parity(c) == s) for c in S}


def side_cells(g: Gadget):
    return [(x, y) for x in range(g.width) for y in (0, g.nu)]


def ell_identity_check(g: Gadget, sigma) -> bool:
    """ell = (c-b)/4 + (c'-b')/8 + nu(nu+1), primes counting side edges."""
    if g.nu <= 2:
        raise ValidationError("identity needs nu > 2")
    sigma = as_config(g, sigma)
    side = {g.vid(*c) for c in side_cells(g)}
    st = config_stats(g.graph, sigma, side)
    rhs = Fraction(st.c - st.b, 4) + Fraction(st.c_side - st.b_side, 8) + g.nu * (g.nu + 1)
    return rhs == st.ell


# ---------------------------------------------------------------------------
# dual graph and contours; dual vertex (i, j) stands for (i+1/2, j+1/2)

def dual_edge_to_primal(g: Gadget, a, b):
    (i1, j1), (i2, j2) = a, b
    W = g.width
    if i1 == i2:  # vertical dual edge crosses a horizontal primal edge
        j = max(j1, j2)
        return ((i1, j), ((i1 + 1) % W, j))
    # horizontal dual edge crosses a vertical primal edge
    i = i2 if (i1 + 1) % W == i2 else i1
    return ((i, j1), (i, j1 + 1))


def sigma_star(g: Gadget, sigma):
    """Adjacency (dual vertex -> set of dual neighbours) of the dual of monochromatic edges."""
    sigma = as_config(g, sigma)
    W, nu = g.width, g.nu
    adj = {}

    def add(a, b):
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    for x in range(W):
        for y in range(nu + 1):
            s = sigma[g.vid(x, y)]
            if sigma[g.vid(x + 1, y)] == s:
                add((x, y - 1), (x, y))
            if y < nu and sigma[g.vid(x, y + 1)] == s:
                add(((x - 1) % W, y), (x, y))
    return adj


@dataclass(frozen=True)
class Contour:
    trail: tuple        # dual vertices (i, j) meaning (i+1/2, j+1/2)
    closed: bool
    kind: str           # closed-simple, boundary-simple, cross
    wraps: bool

    def doubled(self):
        return [[2 * i + 1, 2 * j + 1] for i, j in self.trail]


def _step_dir(g, a, b):
    W = g.width
    if a[0] == b[0]:
        return (0, b[1] - a[1])
    return (1, 0) if (a[0] + 1) % W == b[0] else (-1, 0)


def extract_contours(g: Gadget, sigma):
    """Split sigma* into contours: open trails from boundary dual vertices first,
    then closed trails. Degree-4 vertices are always passed with a turn,
    alternating left and right along each trail."""
    if g.nu < 2:
        raise ValidationError("contours need nu >= 2")
    adj = sigma_star(g, sigma)
    used = set()
    nu = g.nu

    def unused(v):
        return [w for w in sorted(adj[v]) if frozenset((v, w)) not in used]

    def pick(prev, cur, state):
        cand = unused(cur)
        if not cand:
            return None
        if len(adj[cur]) < 4:
            return cand[0]
        din = _step_dir(g, prev, cur)
        perp = [w for w in cand if _step_dir(g, cur, w) not in (din, (-din[0], -din[1]))]
        if not perp:
            return None
        # alternate left and right turns along a trail (first one left)
        want = (-din[1], din[0]) if state[0] % 2 == 0 else (din[1], -din[0])
        state[0] += 1
        for w in perp:
            if _step_dir(g, cur, w) == want:
                return w
        return perp[0]

    def walk(start, closed_mode):
        trail = [start]
        nxt = unused(start)[0]
        first_dir = _step_dir(g, start, nxt)
        prev, cur = start, nxt
        used.add(frozenset((start, nxt)))
        trail.append(cur)
        state = [0]
        while True:
            if closed_mode and cur == start:
                din = _step_dir(g, prev, cur)
                if len(adj[start]) < 4 or din[0] * first_dir[0] + din[1] * first_dir[1] == 0:
                    return trail
            w = pick(prev, cur, state)
            if w is None:
                return trail
            used.add(frozenset((cur, w)))
            prev, cur = cur, w
            trail.append(cur)

    out = []
    boundary = sorted(v for v in adj if v[1] in (-1, nu) and len(adj[v]) == 1)
    for v in boundary:
        if unused(v):
            out.append(walk(v, False))
    for v in sorted(adj):
        while len(adj[v]) in (2, 4) and unused(v) and v[1] not in (-1, nu):
            out.append(walk(v, True))
    res = []
    for t in out:
        closed = t[0] == t[-1] and len(t) > 1 and t[0][1] not in (-1, nu)
        if closed:
            kind = "closed-simple"
        elif {t[0][1], t[-1][1]} == {-1, nu}:
            kind = "cross"
        else:
            kind = "boundary-simple"
        xs = [0]
        for a, b in zip(t, t[1:]):
            xs.append(xs[-1] + _step_dir(g, a, b)[0])
        wraps = max(xs) - min(xs) >= g.width or (closed and xs[-1] != 0)
        res.append(Contour(tuple(t), closed, kind, wraps))
    return res


def contour_sides(g: Gadget, contour: Contour):
    """(L, R): primal cells left and right of the direction of travel."""
    W = g.width
    L, R = set(), set()
    for a, b in zip(contour.trail, contour.trail[1:]):
        i, j = a
        dx, dy = _step_dir(g, a, b)
        if dx == 1:
            l, r = (i + 1, j + 1), (i + 1, j)
        elif dx == -1:
            l, r = (i, j), (i, j + 1)
        elif dy == 1:
            l, r = (i, j + 1), (i + 1, j + 1)
        else:
            l, r = (i + 1, j), (i, j)
        L.add((l[0] % W, l[1]))
        R.add((r[0] % W, r[1]))
    return frozenset(L), frozenset(R)


# ---------------------------------------------------------------------------
# boundaries and phases

def _comp_of(g: Gadget, start, blocked):
    if start in blocked:
        return set()
    seen = {start}
    q = deque([start])
    while q:
        c = q.popleft()
        for w in g.neighbors(c):
            if w not in blocked and w not in seen:
                seen.add(w)
                q.append(w)
    return seen


def separates(g: Gadget, B, x) -> bool:
    """B separates (x,0) from (x,nu)."""
    B = set(B)
    return (x % g.width, g.nu) not in _comp_of(g, (x % g.width, 0), B)


def _connected(g, S):
    S = set(S)
    if not S:
        return False
    return len(_comp_within(g, next(iter(S)), S)) == len(S)


def _comp_within(g, start, S):
    seen = {start}
    q = deque([start])
    while q:
        c = q.popleft()
        for w in g.neighbors(c):
            if w in S and w not in seen:
                seen.add(w)
                q.append(w)
    return seen


def is_h_boundary(g: Gadget, B, x, h) -> bool:
    B = {(c[0] % g.width, c[1]) for c in B}
    h = Fraction(h)
    if not B:
        return False
    for c in B:
        dist = g.dist(c, x)
        if dist <= h / 4 or dist > h / 2:
            return False
    return _connected(g, B) and separates(g, B, x)


def inside(g: Gadget, B, B2, x) -> bool:
    """True if every path from B2 to (x,0) passes through B."""
    comp = _comp_of(g, (x % g.width, 0), set(B))
    return not (comp & set(B2))


def nesting(g: Gadget, B, B2, x) -> str:
    if inside(g, B, B2, x):
        return "B_inside_B'"
    if inside(g, B2, B, x):
        return "B'_inside_B"
    return "neither"


def interior(g: Gadget, S, x) -> frozenset:
    """Cells cut off from (x, nu) by removing S."""
    S = set(S)
    reach = _comp_of(g, (x % g.width, g.nu), S)
    return frozenset(c for c in ((a, b) for a in range(g.width) for b in range(g.nu + 1))
                     if c not in S and c not in reach)


def annulus(g: Gadget, x, d) -> list:
    d = Fraction(d)
    return [(a, b) for a in range(g.width) for b in range(g.nu + 1)
            if d / 4 < g.dist((a, b), x) <= d / 2]


def consistent(g: Gadget, sigma, cell, s) -> bool:
    return sigma[g.vid(*cell)] == int(Gadget.parity(cell) == s)


def separating_components(g: Gadget, sigma, x, s, d):
    """Components of parity-s-consistent annulus cells that separate (x,0) from (x,nu)."""
    S = {c for c in annulus(g, x, d) if consistent(g, sigma, c, s)}
    comps = []
    while S:
        c = min(S)
        comp = _comp_within(g, c, S)
        S -= comp
        if separates(g, comp, x):
            comps.append(frozenset(comp))
    return comps


def _outermost(g, comps, others, x):
    """Component K with every member of `others` inside K, preferring the outermost."""
    good = [K for K in comps if all(inside(g, K2, K, x) for K2 in others)]
    for K in good:
        if all(inside(g, K2, K, x) for K2 in comps if K2 is not K):
            return K
    return good[0] if good else None


def _check_d(g, d, strict):
    if d is None:
        d = g.d
    if d < 1:
        raise ValidationError("d must be positive")
    if strict and d % 4:
        raise ValidationError("d must be divisible by 4")
    return d


def terminal_phase_ok(g: Gadget, sigma, x, s, d) -> bool:
    Ks = separating_components(g, sigma, x, s, d)
    Ko = separating_components(g, sigma, x, 1 - s, d)
    return _outermost(g, Ks, Ko, x) is not None


def classify_phase(g: Gadget, sigma, d=None, strict=True):
    """'phase0', 'phase1' or 'none'."""
    if not g.k:
        raise ValidationError("gadget has no terminals")
    d = _check_d(g, d, strict)
    sigma = as_config(g, sigma)
    xs = [t[0] for t in g.terminals]
    hits = [s for s in (0, 1) if all(terminal_phase_ok(g, sigma, x, s, d) for x in xs)]
    if len(hits) == 1:
        return f"phase{hits[0]}"
    return "none"


def canonical_boundary(g: Gadget, sigma, x, s=None, d=None, strict=True) -> frozenset:
    """Outer shell of the outermost consistent d-boundary around (x, 0)."""
    d = _check_d(g, d, strict)
    sigma = as_config(g, sigma)
    if s is None:
        ph = classify_phase(g, sigma, d, strict)
        if ph == "none":
            raise ValidationError("configuration has no phase")
        s = int(ph[-1])
    Ks = separating_components(g, sigma, x, s, d)
    Ko = separating_components(g, sigma, x, 1 - s, d)
    K = _outermost(g, Ks, Ko, x)
    if K is None:
        raise ValidationError("terminal has no consistent boundary")
    return shell(g, K, x)


def shell(g: Gadget, K, x) -> frozenset:
    """Cells of K that are *-adjacent to a cell *-reachable from (x,nu) avoiding K."""
    K = set(K)
    start = (x % g.width, g.nu)
    ext = {start}
    q = deque([start])
    while q:
        c = q.popleft()
        for w in g.star_neighbors(c):
            if w not in K and w not in ext:
                ext.add(w)
                q.append(w)
    return frozenset(c for c in K if any(w in ext for w in g.star_neighbors(c)))


# ---------------------------------------------------------------------------
# terminal joints, mixtures and sampling

def terminal_joint(g: Gadget, p: SpinParams) -> dict:
    """Exact law of the terminal spins (ordered by x) under the free measure."""
    from itertools import product
    from .transfer import cylinder_Z

    if not g.k:
        raise ValidationError("gadget has no terminals")
    if g.nu > TERMINAL_JOINT_LIMIT:
        raise ResourceLimit(f"terminal_joint limited to nu <= {TERMINAL_JOINT_LIMIT}")
    ts = g.terminals
    zs = {}
    for tau in product((0, 1), repeat=len(ts)):
        zs[tau] = cylinder_Z(g, p, {g.vid(*t): s for t, s in zip(ts, tau)})
    Z = sum(zs.values())
    if Z == 0:
        raise ValidationError("partition function vanishes")
    return {tau: z / Z for tau, z in zs.items()}


def mixture(g: Gadget, p_eq, p_neq) -> dict:
    """Average of the two product measures, one per phase.

    In phase s a parity-s terminal is 1 with prob p_eq, the others with p_neq.
    """
    from itertools import product

    ts = g.terminals
    out = {}
    for tau in product((0, 1), repeat=len(ts)):
        tot = Fraction(0)
        for s in (0, 1):
            pr = Fraction(1)
            for t, v in zip(ts, tau):
                q = p_eq if Gadget.parity(t) == s else p_neq
                pr *= q if v else 1 - q
            tot += pr / 2
        out[tau] = tot
    return out


def tv_distance(mu, nu_) -> Fraction:
    keys = set(mu) | set(nu_)
    return sum(abs(Fraction(mu.get(k, 0)) - Fraction(nu_.get(k, 0))) for k in keys) / 2


def glauber_sample(g: Gadget, p: SpinParams, sweeps: int, seed: int, init=None) -> tuple:
    """Heat-bath single-site dynamics, systematic scan; deterministic per seed."""
    rng = np.random.default_rng(seed)
    gr = g.graph
    sigma = np.zeros(g.n, dtype=np.int8) if init is None else np.array(as_config(g, init), dtype=np.int8)
    beta, gamma, lam = float(p.beta), float(p.gamma), float(p.lam)
    nbrs = [list(r) for r in gr.rotation]
    for _ in range(sweeps):
        us = rng.random(g.n)
        for v in range(g.n):
            ones = int(sum(sigma[w] for w in nbrs[v]))
            zeros = len(nbrs[v]) - ones
            w1 = lam * (gamma ** ones if ones else 1.0)
            w0 = beta ** zeros
            sigma[v] = 1 if us[v] * (w0 + w1) < w1 else 0
    return tuple(int(s) for s in sigma)
