"""Plane graphs with rotation systems, boundary levels and tree decompositions."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .rational import ValidationError


class GraphError(ValidationError):
    pass


@dataclass(frozen=True)
class EmbeddedGraph:
    """Simple undirected graph on 0..n-1 with a clockwise rotation system.

    outer_face, when given, is the vertex sequence of one face; otherwise the
    longest face of each component is used as its outer face.
    """

    n: int
    edges: tuple
    rotation: tuple
    outer_face: tuple | None = None
    coords: tuple | None = None

    def __post_init__(self):
        self._validate()

    # -- construction -------------------------------------------------
    @classmethod
    def build(cls, n, edges, rotation, outer_face=None, coords=None):
        es = sorted({(min(u, v), max(u, v)) for u, v in edges})
        if len(es) != len(list(edges)):
            raise GraphError("duplicate edges")
        return cls(
            n=int(n),
            edges=tuple(es),
            rotation=tuple(tuple(int(w) for w in r) for r in rotation),
            outer_face=None if outer_face is None else tuple(outer_face),
            coords=None if coords is None else tuple(tuple(c) for c in coords),
        )

    @classmethod
    def from_coords(cls, coords, edges, outer_face=None):
        """Rotation read off a straight-line drawing (clockwise = decreasing angle)."""
        n = len(coords)
        nbrs = [[] for _ in range(n)]
        for u, v in edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        rot = []
        for v in range(n):
            x0, y0 = coords[v]
            rot.append(sorted(nbrs[v], key=lambda w: -math.atan2(coords[w][1] - y0, coords[w][0] - x0)))
        return cls.build(n, edges, rot, outer_face, coords)

    def _validate(self):
        n = self.n
        if n < 0:
            raise GraphError("negative vertex count")
        if len(self.rotation) != n:
            raise GraphError("rotation mismatch: wrong number of rotation lists")
        nbrs = [set() for _ in range(n)]
        for u, v in self.edges:
            if u == v:
                raise GraphError("self-loop")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError("edge endpoint out of range")
            nbrs[u].add(v)
            nbrs[v].add(u)
        for v in range(n):
            r = self.rotation[v]
            if len(r) != len(set(r)) or set(r) != nbrs[v]:
                raise GraphError(f"rotation mismatch at vertex {v}")
        if self.coords is not None and len(self.coords) != n:
            raise GraphError("coords length mismatch")
        # Euler's formula per component
        for comp in self.components:
            cset = set(comp)
            e = sum(1 for u, v in self.edges if u in cset)
            f = sum(1 for fc in self.faces if fc[0][0] in cset) if e else 1
            if len(comp) - e + f != 2:
                raise GraphError("Euler check failed: rotation system is not planar")
        if self.outer_face is not None:
            self.outer_face_index  # raises when it does not match a face

    # -- basic structure ----------------------------------------------
    @cached_property
    def pos(self):
        return [{w: i for i, w in enumerate(r)} for r in self.rotation]

    def neighbors(self, v):
        return self.rotation[v]

    def degree(self, v):
        return len(self.rotation[v])

    @property
    def m(self):
        return len(self.edges)

    @property
    def max_degree(self):
        return max((len(r) for r in self.rotation), default=0)

    @cached_property
    def components(self):
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            stack, comp = [s], []
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.rotation[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def is_connected(self):
        return len(self.components) <= 1

    @cached_property
    def faces(self):
        """Faces as lists of darts (u, v); the next dart is (v, succ_v(u))."""
        rot, pos = self.rotation, self.pos
        seen = set()
        faces = []
        for u, v in self.edges:
            for d in ((u, v), (v, u)):
                if d in seen:
                    continue
                face = []
                a, b = d
                while (a, b) not in seen:
                    seen.add((a, b))
                    face.append((a, b))
                    r = rot[b]
                    a, b = b, r[(pos[b][a] + 1) % len(r)]
                faces.append(face)
        return faces

    @cached_property
    def dart_face(self):
        return {d: i for i, f in enumerate(self.faces) for d in f}

    def face_vertices(self, i):
        return [a for a, _ in self.faces[i]]

    @cached_property
    def outer_face_index(self):
        if self.outer_face is None:
            return None
        want = list(self.outer_face)
        k = len(want)
        for i, f in enumerate(self.faces):
            seq = [a for a, _ in f]
            if len(seq) != k:
                continue
            for cand in (seq, seq[::-1]):
                for s in range(k):
                    if cand[s:] + cand[:s] == want:
                        return i
        for i, f in enumerate(self.faces):
            seq = [a for a, _ in f]
            if len(seq) == k and sorted(seq) == sorted(want):
                return i
        raise GraphError("outer_face does not match any face of the embedding")

    @cached_property
    def outer_faces(self):
        """One outer face index per component with edges."""
        comp_of = {}
        for ci, comp in enumerate(self.components):
            for v in comp:
                comp_of[v] = ci
        best = {}
        declared = self.outer_face_index
        if declared is not None:
            best[comp_of[self.faces[declared][0][0]]] = declared
        for i, f in enumerate(self.faces):
            ci = comp_of[f[0][0]]
            if ci in best and best[ci] == declared:
                continue
            if ci not in best or len(f) > len(self.faces[best[ci]]):
                best[ci] = i
        return sorted(best.values())

    def to_json(self):
        d = {"n": self.n, "edges": [list(e) for e in self.edges],
             "rotation": [list(r) for r in self.rotation]}
        if self.outer_face is not None:
            d["outer_face"] = list(self.outer_face)
        if self.coords is not None:
            d["coords"] = [list(c) for c in self.coords]
        return d


def load_graph(src) -> EmbeddedGraph:
    """Load from a JSON path, JSON string or already-parsed dict."""
    if isinstance(src, dict):
        d = src
    else:
        p = Path(src)
        try:
            if p.exists():
                d = json.loads(p.read_text())
            elif isinstance(src, str) and src.lstrip().startswith("{"):
                d = json.loads(src)
            else:
                raise GraphError(f"no such graph file: {src}")
        except (OSError, json.JSONDecodeError) as e:
            raise GraphError(f"cannot read graph: {e}") from e
    try:
        return EmbeddedGraph.build(d["n"], [tuple(e) for e in d["edges"]], d["rotation"],
                                   d.get("outer_face"), d.get("coords"))
    except (KeyError, TypeError) as e:
        raise GraphError(f"malformed graph JSON: {e}") from e


# ---------------------------------------------------------------------------
# generators

def grid(w, h):
    coords = [(x, y) for y in range(h) for x in range(w)]
    vid = lambda x, y: y * w + x
    edges = [(vid(x, y), vid(x + 1, y)) for y in range(h) for x in range(w - 1)]
    edges += [(vid(x, y), vid(x, y + 1)) for y in range(h - 1) for x in range(w)]
    outer = None
    if w >= 2 and h >= 2:
        outer = [vid(x, 0) for x in range(w)] + [vid(w - 1, y) for y in range(1, h)]
        outer += [vid(x, h - 1) for x in range(w - 2, -1, -1)] + [vid(0, y) for y in range(h - 2, 0, -1)]
    return EmbeddedGraph.from_coords(coords, edges, outer)


def _circle(k, r=1.0, phase=90.0):
    return [(r * math.cos(math.radians(phase - 360.0 * i / k)),
             r * math.sin(math.radians(phase - 360.0 * i / k))) for i in range(k)]


def cycle(n):
    if n < 3:
        raise GraphError("cycle needs at least 3 vertices")
    return EmbeddedGraph.from_coords(_circle(n), [(i, (i + 1) % n) for i in range(n)], list(range(n)))


def triangle():
    return cycle(3)


def path(n):
    return EmbeddedGraph.from_coords([(i, 0) for i in range(n)], [(i, i + 1) for i in range(n - 1)])


def single_edge():
    return path(2)


def k4():
    coords = _circle(3) + [(0.0, 0.0)]
    edges = [(0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (2, 3)]
    return EmbeddedGraph.from_coords(coords, edges, [0, 1, 2])


def prism():
    coords = _circle(3) + _circle(3, 0.4)
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    return EmbeddedGraph.from_coords(coords, edges, [0, 1, 2])


def cube():
    coords = _circle(4, 1.0, 45) + _circle(4, 0.4, 45)
    edges = [(i, (i + 1) % 4) for i in range(4)] + [(4 + i, 4 + (i + 1) % 4) for i in range(4)]
    edges += [(i, i + 4) for i in range(4)]
    return EmbeddedGraph.from_coords(coords, edges, [0, 1, 2, 3])


def octahedron():
    coords = _circle(3) + _circle(3, 0.4, 270)
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5),
             (0, 4), (0, 5), (1, 5), (1, 3), (2, 3), (2, 4)]
    return EmbeddedGraph.from_coords(coords, edges, [0, 1, 2])


def disjoint_power(g: EmbeddedGraph, k: int) -> EmbeddedGraph:
    """k disjoint copies of g (vertex v of copy i is i*n + v)."""
    n = g.n
    edges = [(i * n + u, i * n + v) for i in range(k) for u, v in g.edges]
    rot = [[i * n + w for w in g.rotation[v]] for i in range(k) for v in range(n)]
    coords = None
    if g.coords is not None:
        span = 1 + max((c[0] for c in g.coords), default=0) - min((c[0] for c in g.coords), default=0)
        coords = [(c[0] + 2 * i * span, c[1]) for i in range(k) for c in g.coords]
    outer = g.outer_face if k == 1 else None
    return EmbeddedGraph.build(n * k, edges, rot, outer, coords)


def induced_subgraph(g: EmbeddedGraph, keep):
    """Sub-embedding on `keep`; returns (graph, old->new map)."""
    keep = sorted(set(keep))
    idx = {v: i for i, v in enumerate(keep)}
    edges = [(idx[u], idx[v]) for u, v in g.edges if u in idx and v in idx]
    rot = [[idx[w] for w in g.rotation[v] if w in idx] for v in keep]
    coords = None if g.coords is None else [g.coords[v] for v in keep]
    return EmbeddedGraph.build(len(keep), edges, rot, None, coords), idx


FAMILIES = {
    "grid": grid, "cycle": cycle, "triangle": triangle, "path": path, "edge": single_edge,
    "k4": k4, "prism": prism, "cube": cube, "octahedron": octahedron,
}


def family(spec: str) -> EmbeddedGraph:
    """'grid:3,4', 'cycle:5', 'k4', 'k4^3' (disjoint power)."""
    base, _, power = spec.partition("^")
    name, _, args = base.partition(":")
    if name not in FAMILIES:
        raise GraphError(f"unknown graph family {name!r}")
    try:
        vals = [int(a) for a in args.split(",")] if args else []
        g = FAMILIES[name](*vals)
        return disjoint_power(g, int(power)) if power else g
    except (TypeError, ValueError) as e:
        raise GraphError(f"bad family spec {spec!r}: {e}") from e


# ---------------------------------------------------------------------------
# levels (boundary peeling) and Baker layers

class _DSU:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, a):
        while self.p[a] != a:
            self.p[a] = self.p[self.p[a]]
            a = self.p[a]
        return a

    def union(self, a, b):
        self.p[self.find(a)] = self.find(b)


def compute_levels(g: EmbeddedGraph, removed=()) -> dict:
    """Level of every vertex of g - removed, peeling outer boundaries.

    A face of the current graph is a union of faces of g glued along deleted
    edges; the outer one is the class containing an original outer face.
    """
    faces = g.faces
    df = g.dart_face
    corners = [set(a for a, _ in f) for f in faces]
    deleted = set(removed)
    alive = set(range(g.n)) - deleted
    outer = g.outer_faces
    level = {}
    i = 0
    while alive:
        dsu = _DSU(len(faces))
        for u, v in g.edges:
            if u in deleted or v in deleted:
                dsu.union(df[(u, v)], df[(v, u)])
        oc = {dsu.find(f) for f in outer}
        bnd = set()
        for fi, cs in enumerate(corners):
            if dsu.find(fi) in oc:
                bnd |= cs & alive
        bnd |= {v for v in alive if g.degree(v) == 0}
        if not bnd:
            # a component nested strictly inside a face with nothing deleted
            # around it cannot occur for connected inputs
            raise GraphError("boundary peeling stalled")
        for v in bnd:
            level[v] = i
        deleted |= bnd
        alive -= bnd
        i += 1
    return level


def layer_sets(g: EmbeddedGraph, k: int):
    """V_i = vertices whose level is i mod k."""
    if k < 1:
        raise GraphError("k must be >= 1")
    lev = compute_levels(g)
    out = [set() for _ in range(k)]
    for v, l in lev.items():
        out[l % k].add(v)
    return [frozenset(s) for s in out]


# ---------------------------------------------------------------------------
# tree decompositions

@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple            # tuple of frozensets
    parent: tuple          # parent index per bag, -1 for the root

    @property
    def width(self):
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def root(self):
        return self.parent.index(-1)


def _min_fill(g):
    adj = {v: set(g.rotation[v]) for v in range(g.n)}
    order, bags = [], []
    remaining = set(range(g.n))
    while remaining:
        best = None
        for v in remaining:
            nb = list(adj[v])
            fill = sum(1 for i in range(len(nb)) for j in range(i + 1, len(nb)) if nb[j] not in adj[nb[i]])
            key = (fill, len(nb), v)
            if best is None or key < best:
                best = key
        v = best[2]
        nb = adj[v]
        for a in nb:
            adj[a] |= nb - {a}
            adj[a].discard(v)
        order.append(v)
        bags.append(frozenset(nb | {v}))
        remaining.discard(v)
        del adj[v]
    when = {v: i for i, v in enumerate(order)}
    parent = []
    for i, v in enumerate(order):
        later = [when[w] for w in bags[i] if w != v]
        parent.append(min(later) if later else -1)
    roots = [i for i, p in enumerate(parent) if p == -1]
    for a, b in zip(roots, roots[1:]):
        parent[a] = b
    if not bags:
        return TreeDecomposition((frozenset(),), (-1,))
    return TreeDecomposition(tuple(bags), tuple(parent))


def _column_sweep(g):
    c = g.coords
    if c is None or any(float(x) != int(x) or float(y) != int(y) for x, y in c):
        raise GraphError("column_sweep needs integer lattice coords")
    for u, v in g.edges:
        if abs(c[u][0] - c[v][0]) + abs(c[u][1] - c[v][1]) != 1:
            raise GraphError("column_sweep needs unit axis-aligned edges")
    best = None
    for key in (lambda v: (c[v][0], c[v][1], v), lambda v: (c[v][1], c[v][0], v)):
        order = sorted(range(g.n), key=key)
        pos = {v: i for i, v in enumerate(order)}
        win = max((abs(pos[u] - pos[v]) for u, v in g.edges), default=0)
        if best is None or win < best[0]:
            best = (win, order)
    win, order = best
    if g.n == 0:
        return TreeDecomposition((frozenset(),), (-1,))
    nb = max(1, g.n - win)
    bags = [frozenset(order[j:j + win + 1]) for j in range(nb)]
    parent = [j + 1 for j in range(nb - 1)] + [-1]
    return TreeDecomposition(tuple(bags), tuple(parent))


def build_tree_decomposition(g: EmbeddedGraph, heuristic="min_fill") -> TreeDecomposition:
    if heuristic == "min_fill":
        return _min_fill(g)
    if heuristic == "column_sweep":
        return _column_sweep(g)
    raise GraphError(f"unknown heuristic {heuristic!r}")


def verify_decomposition(g: EmbeddedGraph, td: TreeDecomposition) -> list:
    """Problems found (empty list means valid)."""
    probs = []
    nb = len(td.bags)
    if len(td.parent) != nb or list(td.parent).count(-1) != 1:
        return ["decomposition is not a rooted tree"]
    # acyclic: walk to root from every node
    for i in range(nb):
        seen, j = set(), i
        while j != -1:
            if j in seen:
                return ["decomposition has a cycle"]
            seen.add(j)
            j = td.parent[j]
    covered = set().union(*td.bags)
    if covered != set(range(g.n)):
        probs.append("vertex coverage")
    for u, v in g.edges:
        if not any(u in b and v in b for b in td.bags):
            probs.append(f"edge ({u},{v}) not covered")
    for v in range(g.n):
        nodes = {i for i, b in enumerate(td.bags) if v in b}
        tops = [i for i in nodes if td.parent[i] not in nodes]
        if len(tops) > 1:
            probs.append(f"bags of vertex {v} not connected")
    return probs
