"""Exact partition functions on cylinders by a broken-profile sweep."""
from __future__ import annotations

from .gadget import Gadget
from .rational import ResourceLimit, ValidationError
from .spin import SpinParams, make_ring

CYLINDER_LIMIT = 12


def cylinder_Z(g: Gadget, p: SpinParams, pin=None, backend="exact"):
    """Z of C_nu with optional pins (vertex id -> spin).

    The start column (the one with fewest free cells) is enumerated; the sweep
    then adds one cell at a time keeping the latest spin of every row, and the
    wrap-around edges are closed against the start column at the end.
    Zero-weight profiles are dropped, which keeps hard-core runs small.
    """
    nu, W, H = g.nu, g.width, g.height
    if nu > CYLINDER_LIMIT:
        raise ResourceLimit(f"cylinder_Z limited to nu <= {CYLINDER_LIMIT}")
    pin = dict(pin or {})
    for v, s in pin.items():
        if not 0 <= v < g.n or s not in (0, 1):
            raise ValidationError(f"bad pin {v}:{s}")
    R = make_ring(p, backend)
    E, V, mul, add, is_zero = R.E, R.V, R.mul, R.add, R.is_zero

    def dom(x, y):
        v = g.vid(x, y)
        return (pin[v],) if v in pin else (0, 1)

    x0 = min(range(W), key=lambda x: (sum(len(dom(x, y)) for y in range(H)), x))

    starts = [(0, R.one)]
    for y in range(H):
        nxt = []
        for mask, val in starts:
            for s in dom(x0, y):
                w = mul(val, V[s])
                if y:
                    w = mul(w, E[(mask >> (y - 1)) & 1][s])
                if not is_zero(w):
                    nxt.append((mask | (s << y), w))
        starts = nxt

    total = R.zero
    cols = [(x0 + c) % W for c in range(1, W)]
    doms = [[dom(x, y) for y in range(H)] for x in cols]
    for s0, w0 in starts:
        states = {s0: w0}
        for ci in range(len(cols)):
            for y in range(H):
                new = {}
                bit = 1 << y
                for P, val in states.items():
                    left = (P >> y) & 1
                    below = (P >> (y - 1)) & 1 if y else None
                    for s in doms[ci][y]:
                        f = mul(mul(val, V[s]), E[left][s])
                        if below is not None:
                            f = mul(f, E[below][s])
                        if is_zero(f):
                            continue
                        key = (P & ~bit) | (s << y)
                        new[key] = add(new[key], f) if key in new else f
                states = new
        for P, val in states.items():
            if W > 2:
                for y in range(H):
                    val = mul(val, E[(P >> y) & 1][(s0 >> y) & 1])
            total = add(total, val)
    return R.finish(total, g.n, g.graph.m)
