import itertools
from collections import deque
from fractions import Fraction

import numpy as np
import pytest

from twospin import gadget as gd
from twospin.gadget import Gadget
from twospin.rational import ResourceLimit, ValidationError
from twospin.spin import SpinParams, brute_force_Z, dp_Z
from twospin.transfer import cylinder_Z


def parity_config(g, s):
    return tuple(int(Gadget.parity(g.cell(v)) == s) for v in range(g.n))


def noisy(g, s, q, rng):
    base = np.array(parity_config(g, s))
    flip = rng.random(g.n) < q
    return tuple(int(v) for v in np.where(flip, 1 - base, base))


# -- construction ----------------------------------------------------------

def test_build_gadget_sizes():
    g = gd.build_gadget(1, 2)
    assert g.nu == 4 and g.n == 40
    assert g.terminals == [(1, 0), (4, 0)]
    assert gd.build_gadget(2, 1).terminals == [(1, 0), (2, 0), (5, 0), (6, 0)]
    assert gd.cylinder(5).n == 60


@pytest.mark.parametrize("nu", [2, 3, 5])
def test_cylinder_degrees_and_planarity(nu):
    g = gd.cylinder(nu).graph
    for v in range(g.n):
        y = v % (nu + 1)
        assert g.degree(v) == (3 if y in (0, nu) else 4)
    assert g.m == 2 * nu * (2 * nu + 1)
    assert g.n - g.m + len(g.faces) == 2


def test_gadget_validation():
    with pytest.raises(ValidationError):
        Gadget(5, 1, 2)
    with pytest.raises(ValidationError):
        gd.build_gadget(0, 1)


def test_goalpost_shape():
    g = gd.cylinder(6)
    B = gd.goalpost(g, 3, 2)
    assert len(B) == 9
    assert all(g.dist(c, 3) == 2 for c in B)
    keyhole = gd.goalpost(g, 3, 6)
    assert {(x, 6) for x in range(12)} <= keyhole


# -- transfer matrix oracle --------------------------------------------------

@pytest.mark.parametrize("nu", [1, 2])
def test_cylinder_matches_brute_force(nu):
    g = gd.cylinder(nu)
    for p in (SpinParams(1, 0, 312), SpinParams(2, Fraction(1, 2), 3), SpinParams(1, Fraction(1, 3), Fraction(2, 5))):
        assert cylinder_Z(g, p) == brute_force_Z(g.graph, p)
        pin = {0: 1, g.n - 1: 0, 3 % g.n: 1}
        assert cylinder_Z(g, p, pin) == brute_force_Z(g.graph, p, pin)


@pytest.mark.parametrize("nu", [3, 4])
def test_cylinder_matches_dp(nu):
    g = gd.cylinder(nu)
    p = SpinParams(2, Fraction(1, 2), 3)
    assert cylinder_Z(g, p) == dp_Z(g.graph, p)
    pin = gd.parity_pin(g, gd.goalpost(g, 0, 2), 0)
    assert cylinder_Z(g, p, pin) == dp_Z(g.graph, p, pin)


def test_cylinder_log_backend():
    g = gd.cylinder(4)
    p = SpinParams(1, 0, 312)
    z = cylinder_Z(g, p)
    lw = cylinder_Z(g, p, backend="log")
    assert lw.log == pytest.approx(float(np.log(float(z.numerator)) - np.log(float(z.denominator))), rel=1e-12)


def test_cylinder_limit():
    with pytest.raises(ResourceLimit):
        cylinder_Z(gd.cylinder(13), SpinParams(1, 0, 1))


# -- edge-count identity -----------------------------------------------------

def test_ell_identity_alternating():
    g = gd.cylinder(4)
    for s in (0, 1):
        assert gd.ell_identity_check(g, parity_config(g, s))


@pytest.mark.parametrize("nu", [3, 4, 5])
def test_ell_identity_random(nu):
    g = gd.cylinder(nu)
    rng = np.random.default_rng(nu)
    for _ in range(200):
        assert gd.ell_identity_check(g, rng.integers(0, 2, g.n))
    assert gd.ell_identity_check(g, [1] * g.n)


def test_ell_identity_needs_nu_above_2():
    with pytest.raises(ValidationError):
        gd.ell_identity_check(gd.cylinder(2), [0] * 24)


# -- contours ------------------------------------------------------------------

def _contour_checks(g, sigma):
    cs = gd.extract_contours(g, sigma)
    star = gd.sigma_star(g, sigma)
    dual_edges = {frozenset((a, b)) for a in star for b in star[a]}
    covered = set()
    for c in cs:
        for a, b in zip(c.trail, c.trail[1:]):
            e = frozenset((a, b))
            assert e not in covered
            covered.add(e)
        L, R = gd.contour_sides(g, c)
        sl, sr = gd.parity_ones(g, sigma, L), gd.parity_ones(g, sigma, R)
        assert sl is not None and sr is not None and sl != sr
    assert covered == dual_edges
    return cs


def test_single_flip_gives_unit_square():
    g = gd.cylinder(4)
    sigma = list(parity_config(g, 0))
    v = g.vid(3, 2)
    sigma[v] = 1 - sigma[v]
    cs = [c for c in gd.extract_contours(g, sigma)]
    assert len(cs) == 1 and cs[0].closed and len(cs[0].trail) == 5 and cs[0].kind == "closed-simple"
    L, R = gd.contour_sides(g, cs[0])
    assert {L, R} == {frozenset({(3, 2)}), frozenset(g.neighbors((3, 2)))}


def test_parity_config_has_no_contours():
    g = gd.cylinder(3)
    assert gd.extract_contours(g, parity_config(g, 1)) == []


def test_all_zero_c3_cross_contours():
    g = gd.cylinder(3)
    cs = _contour_checks(g, [0] * g.n)
    crosses = [c for c in cs if c.kind == "cross"]
    assert len(crosses) == 6 and all(len(c.trail) == 8 for c in crosses)


@pytest.mark.parametrize("nu", [3, 4, 6])
def test_contours_random(nu):
    g = gd.cylinder(nu)
    rng = np.random.default_rng(100 + nu)
    for _ in range(100):
        _contour_checks(g, rng.integers(0, 2, g.n))


def test_contours_low_temperature_samples():
    g = gd.cylinder(6)
    rng = np.random.default_rng(5)
    for _ in range(50):
        _contour_checks(g, noisy(g, int(rng.integers(0, 2)), 0.1, rng))


# -- boundaries -----------------------------------------------------------------

def test_goalposts_are_boundaries():
    g = gd.build_gadget(1, 4)
    x = 1
    assert gd.is_h_boundary(g, gd.goalpost(g, x, 3), x, 8)
    assert gd.is_h_boundary(g, gd.goalpost(g, x, 4), x, 8)
    assert not gd.is_h_boundary(g, gd.goalpost(g, x, 2), x, 8)
    assert gd.is_h_boundary(g, gd.goalpost(g, x, 2), x, 4)
    assert not gd.is_h_boundary(g, gd.goalpost(g, x, 1), x, 4)
    assert not gd.is_h_boundary(g, gd.goalpost(g, x, 5), x, 8)
    B2, B3 = gd.goalpost(g, x, 2), gd.goalpost(g, x, 3)
    assert gd.nesting(g, B2, B3, x) == "B_inside_B'"
    assert gd.nesting(g, B3, B2, x) == "B'_inside_B"


# independent oracle: enumerate every subset of the annulus

def _nbrs(g, c):
    x, y = c
    W = g.width
    out = [((x + 1) % W, y), ((x - 1) % W, y)]
    out += [(x, y + dy) for dy in (-1, 1) if 0 <= y + dy <= g.nu]
    return out


def _reach(g, start, blocked, star=False):
    if start in blocked:
        return set()
    seen, q = {start}, deque([start])
    while q:
        c = q.popleft()
        nb = g.star_neighbors(c) if star else _nbrs(g, c)
        for w in nb:
            if w not in blocked and w not in seen:
                seen.add(w)
                q.append(w)
    return seen


def _boundaries(g, x, d):
    ring = [(a, b) for a in range(g.width) for b in range(g.nu + 1)
            if Fraction(d, 4) < g.dist((a, b), x) <= Fraction(d, 2)]
    out = []
    for r in range(1, len(ring) + 1):
        for B in itertools.combinations(ring, r):
            B = set(B)
            if (x, g.nu) in _reach(g, (x, 0), B):
                continue
            first = next(iter(B))
            comp = {first}
            q = deque([first])
            while q:
                c = q.popleft()
                for w in _nbrs(g, c):
                    if w in B and w not in comp:
                        comp.add(w)
                        q.append(w)
            if comp == B:
                out.append(frozenset(B))
    return out


def _is_inside(g, B, B2, x):
    # every path from B2 to (x,0) passes through B
    return not (_reach(g, (x, 0), B) & set(B2))


def _consistent(g, sigma, B, s):
    return all(sigma[g.vid(*c)] == int(Gadget.parity(c) == s) for c in B)


def oracle_phase(g, sigma, d, bcache):
    hits = []
    for s in (0, 1):
        ok = True
        for x, _ in g.terminals:
            bs = bcache[x]
            good = [B for B in bs if _consistent(g, sigma, B, s)]
            bad = [B for B in bs if _consistent(g, sigma, B, 1 - s)]
            if not any(all(_is_inside(g, B2, B, x) for B2 in bad) for B in good):
                ok = False
                break
        if ok:
            hits.append(s)
    return f"phase{hits[0]}" if len(hits) == 1 else "none"


def oracle_canonical(g, sigma, x, s, d, bs):
    cons = [B for B in bs if _consistent(g, sigma, B, s)]
    union = set().union(*cons)
    comps = []
    rest = set(union)
    while rest:
        c = min(rest)
        comp = {c}
        q = deque([c])
        while q:
            u = q.popleft()
            for w in _nbrs(g, u):
                if w in rest and w not in comp:
                    comp.add(w)
                    q.append(w)
        rest -= comp
        comps.append(comp)
    outer = [K for K in comps if all(_is_inside(g, K2, K, x) for K2 in comps if K2 is not K)]
    assert len(outer) == 1
    K = outer[0]
    ext = _reach(g, (x, g.nu), K, star=True)
    return frozenset(c for c in K if any(w in ext for w in g.star_neighbors(c)))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_phase_matches_enumeration(d):
    g = gd.build_gadget(1, d)
    bcache = {x: _boundaries(g, x, d) for x, _ in g.terminals}
    rng = np.random.default_rng(d)
    seen = set()
    trials = 150 if d < 4 else 60
    for t in range(trials):
        q = [0.0, 0.05, 0.15, 0.3, 0.5][t % 5]
        sigma = noisy(g, t % 2, q, rng)
        ph = gd.classify_phase(g, sigma, strict=False)
        assert ph == oracle_phase(g, sigma, d, bcache)
        seen.add(ph)
        if ph != "none":
            s = int(ph[-1])
            for x, _ in g.terminals:
                assert gd.canonical_boundary(g, sigma, x, strict=False) == \
                    oracle_canonical(g, sigma, x, s, d, bcache[x])
    assert seen == {"phase0", "phase1", "none"}


def test_phase_trivial_configs():
    g = gd.build_gadget(1, 4)
    assert gd.classify_phase(g, parity_config(g, 0)) == "phase0"
    assert gd.classify_phase(g, parity_config(g, 1)) == "phase1"


def test_phase_split_configuration():
    g = gd.build_gadget(2, 4)
    sigma = [0] * g.n
    for v in range(g.n):
        c = g.cell(v)
        s = 0 if c[0] < g.nu else 1
        sigma[v] = int(Gadget.parity(c) == s)
    assert gd.classify_phase(g, sigma) == "none"


def test_phase_requires_d_multiple_of_four():
    g = gd.build_gadget(1, 2)
    with pytest.raises(ValidationError):
        gd.classify_phase(g, parity_config(g, 0))


def test_canonical_boundary_trivial_is_outer_shell():
    g = gd.build_gadget(1, 8)
    sigma = parity_config(g, 0)
    for x, _ in g.terminals:
        B = gd.canonical_boundary(g, sigma, x)
        assert B == gd.goalpost(g, x, 4)
        assert gd.is_h_boundary(g, B, x, 8)


def test_canonical_boundary_canonicity():
    g = gd.build_gadget(1, 8)
    rng = np.random.default_rng(11)
    for t in range(40):
        sigma = list(noisy(g, t % 2, 0.04, rng))
        if gd.classify_phase(g, sigma) == "none":
            continue
        for x, _ in g.terminals:
            B = gd.canonical_boundary(g, sigma, x)
            assert gd.is_h_boundary(g, B, x, 8)
            assert gd.parity_ones(g, sigma, B) == t % 2
            inner = gd.interior(g, B, x)
            mutated = list(sigma)
            for c in inner:
                mutated[g.vid(*c)] = int(rng.integers(0, 2))
            assert gd.canonical_boundary(g, mutated, x, s=t % 2) == B


def test_canonical_boundary_deep_mutation():
    g = gd.build_gadget(1, 8)
    sigma = list(parity_config(g, 0))
    x = 1
    ref = gd.canonical_boundary(g, sigma, x)
    sigma[g.vid(x, 0)] = 1 - sigma[g.vid(x, 0)]
    assert gd.canonical_boundary(g, sigma, x, s=0) == ref


# -- terminal laws and sampling ------------------------------------------------------

def test_terminal_joint_normalised():
    g = gd.build_gadget(1, 1)
    j = gd.terminal_joint(g, SpinParams(2, Fraction(1, 2), 3))
    assert len(j) == 4 and sum(j.values()) == 1


def test_terminal_joint_hardcore_marginals():
    g = gd.build_gadget(1, 2)
    lam = Fraction(312)
    j = gd.terminal_joint(g, SpinParams(1, 0, lam))
    for i in range(2):
        m = sum(v for t, v in j.items() if t[i] == 1)
        assert 0 < m <= lam / (1 + lam)


def test_mixture_is_distribution():
    g = gd.build_gadget(2, 1)
    mu = gd.mixture(g, Fraction(9, 10), Fraction(1, 10))
    assert sum(mu.values()) == 1
    assert gd.tv_distance(mu, mu) == 0


def test_glauber_deterministic():
    g = gd.build_gadget(1, 2)
    p = SpinParams(1, 0, 312)
    a = gd.glauber_sample(g, p, 5, seed=3)
    assert a == gd.glauber_sample(g, p, 5, seed=3)
    assert len(a) == g.n


def test_glauber_hardcore_gives_independent_sets():
    g = gd.build_gadget(1, 2)
    s = gd.glauber_sample(g, SpinParams(1, 0, 312), 20, seed=1)
    assert all(not (s[u] and s[v]) for u, v in g.graph.edges)


def test_glauber_stationary_on_small_cylinder():
    # empirical vertex marginal vs exact value on C_1
    g = gd.cylinder(1)
    p = SpinParams(1, 0, 2)
    exact = brute_force_Z(g.graph, p, {0: 1}) / brute_force_Z(g.graph, p)
    hits = sum(gd.glauber_sample(g, p, 30, seed=s)[0] for s in range(600))
    assert abs(hits / 600 - float(exact)) < 0.07
