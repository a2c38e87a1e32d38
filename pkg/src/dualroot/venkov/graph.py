"""Red Venkov graph of a Delone star and its basic cycles.

Vertices are the ±-classes of Delone edge vectors; two classes are adjacent
when they are edge vectors of a common Delone triangle.  Vertices are sorted
lexicographically and every edge is oriented from its smaller to its larger
endpoint, so a cycle is an integer (or rational) vector on edge indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..exactmath import (
    ModularEchelon,
    QVector,
    common_denominator,
    modular_primes,
    rank_int,
    solve_int_multimodular,
)
from ..lattice import canonical_edge_class
from ..delone.cells import DeloneStar
from ..delone.polytope import FaceLattice, mask_to_indices


class VenkovError(ValueError):
    pass


class NotInSpan(VenkovError):
    def __init__(self, message, functional):
        super().__init__(message)
        self.functional = functional


@dataclass
class VenkovGraph:
    vertices: list                      # sorted edge classes
    edges: list                         # (i, j) with i < j, sorted
    witnesses: list                     # (cell index, (a, b, c)) per edge
    index: dict = field(default_factory=dict, repr=False)
    edge_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.edge_index = {e: k for k, e in enumerate(self.edges)}

    def neighbours(self) -> dict[int, set[int]]:
        adj = {i: set() for i in range(len(self.vertices))}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def has_edge(self, u: tuple, v: tuple) -> bool:
        i, j = self.index.get(u), self.index.get(v)
        if i is None or j is None:
            return False
        return (min(i, j), max(i, j)) in self.edge_index

    def components(self) -> int:
        parent = list(range(len(self.vertices)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.edges:
            parent[find(i)] = find(j)
        return len({find(x) for x in range(len(self.vertices))})


def _diff(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _edge_class(fl: FaceLattice, i: int, j: int) -> tuple:
    return canonical_edge_class(_diff(fl.points[j], fl.points[i]))


def _triangles(fl: FaceLattice):
    for f in fl.faces(2):
        idx = mask_to_indices(f)
        if len(idx) == 3:
            yield idx


def build_venkov_graph(star: DeloneStar) -> VenkovGraph:
    classes = set()
    pairs: dict[tuple, tuple] = {}
    for k, cell in enumerate(star.cells):
        fl = cell.lattice
        for e in fl.faces(1):
            a, b = mask_to_indices(e)
            classes.add(_edge_class(fl, a, b))
        for tri in _triangles(fl):
            a, b, c = tri
            cls = {_edge_class(fl, a, b), _edge_class(fl, b, c), _edge_class(fl, a, c)}
            for u in cls:
                for v in cls:
                    if u < v:
                        pairs.setdefault((u, v), (k, tri))
    vertices = sorted(classes)
    index = {v: i for i, v in enumerate(vertices)}
    edges = sorted((index[u], index[v]) for u, v in pairs)
    witnesses = [pairs[(vertices[i], vertices[j])] for i, j in edges]
    return VenkovGraph(vertices, edges, witnesses)


def cycle_space_dim(g: VenkovGraph) -> int:
    return len(g.edges) - len(g.vertices) + g.components()


# -- cycles -----------------------------------------------------------------

def walk_to_cycle(g: VenkovGraph, walk) -> dict[int, Fraction]:
    """Edge vector of the closed walk ``walk[0] -> walk[1] -> ... -> walk[0]``
    given by vertex indices."""
    out: dict[int, Fraction] = {}
    n = len(walk)
    for t in range(n):
        u, v = walk[t], walk[(t + 1) % n]
        if u < v:
            k, s = g.edge_index.get((u, v)), 1
        else:
            k, s = g.edge_index.get((v, u)), -1
        if k is None:
            raise VenkovError(f"walk uses a non-edge {g.vertices[u]} - {g.vertices[v]}")
        out[k] = out.get(k, 0) + s
    return {k: Fraction(c) for k, c in out.items() if c}


def boundary(g: VenkovGraph, x: dict) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for k, c in x.items():
        i, j = g.edges[k]
        out[j] = out.get(j, 0) + c
        out[i] = out.get(i, 0) - c
    return {v: c for v, c in out.items() if c}


def is_cycle(g: VenkovGraph, x: dict) -> bool:
    return not boundary(g, x)


def _sign_canonical(x: dict) -> tuple:
    items = tuple(sorted((k, Fraction(c)) for k, c in x.items() if c))
    if items and items[0][1] < 0:
        items = tuple((k, -c) for k, c in items)
    return items


@dataclass
class BasicCycle:
    kind: str           # "HalfBelt" or "Contractible"
    coeffs: dict
    cell: int
    face: tuple         # triangle, or the 3-face vertex indices
    apex: int | None = None


def _vertex_cycle(fl: FaceLattice, face_mask: int, apex: int):
    """Neighbours of ``apex`` in the 3-face in cyclic order, or None when
    some 2-face of the 3-face through the apex is not a triangle."""
    twofaces = [f for f in fl.facets_of(face_mask) if f >> apex & 1]
    nbrs: dict[int, list[int]] = {}
    for f in twofaces:
        idx = mask_to_indices(f)
        if len(idx) != 3:
            return None
        a, b = [i for i in idx if i != apex]
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    if not nbrs or any(len(v) != 2 for v in nbrs.values()):
        return None
    start = min(nbrs)
    order = [start]
    prev, cur = None, start
    while True:
        a, b = nbrs[cur]
        nxt = a if a != prev else b
        if nxt == start:
            break
        order.append(nxt)
        prev, cur = cur, nxt
    if len(order) != len(nbrs):
        return None
    return order


def halfbelt_cycle(g: VenkovGraph, fl: FaceLattice, tri) -> dict:
    a, b, c = tri
    walk = [g.index[_edge_class(fl, a, b)], g.index[_edge_class(fl, b, c)],
            g.index[_edge_class(fl, c, a)]]
    return walk_to_cycle(g, walk)


def contractible_cycle(g: VenkovGraph, fl: FaceLattice, face_mask: int, apex: int) -> dict | None:
    order = _vertex_cycle(fl, face_mask, apex)
    if order is None:
        return None
    return walk_to_cycle(g, [g.index[_edge_class(fl, apex, w)] for w in order]) or None


def cycle_key(x: dict) -> tuple:
    """Identity of a cycle up to sign."""
    return _sign_canonical(x)


def enumerate_basic_cycles(star: DeloneStar, g: VenkovGraph) -> list[BasicCycle]:
    out: list[BasicCycle] = []
    seen = set()
    for k, cell in enumerate(star.cells):
        fl = cell.lattice
        for tri in _triangles(fl):
            x = halfbelt_cycle(g, fl, tri)
            key = _sign_canonical(x)
            if key not in seen:
                seen.add(key)
                out.append(BasicCycle("HalfBelt", x, k, tri))
    for k, cell in enumerate(star.cells):
        fl = cell.lattice
        if fl.dim < 3:
            continue
        for f in fl.faces(3):
            for apex in mask_to_indices(f):
                x = contractible_cycle(g, fl, f, apex)
                if x is None:
                    continue
                key = _sign_canonical(x)
                if key not in seen:
                    seen.add(key)
                    out.append(BasicCycle("Contractible", x, k, mask_to_indices(f), apex))
    return out


# -- generation and certificates --------------------------------------------

def _dense(x: dict, n: int) -> list:
    row = [0] * n
    for k, c in x.items():
        row[k] = c
    return row


def _int_row(x: dict, n: int) -> list[int]:
    row = _dense(x, n)
    if any(Fraction(c).denominator != 1 for c in row):
        raise VenkovError("basic cycles must have integer coefficients")
    return [int(c) for c in row]


def check_basic_generation(g: VenkovGraph, basic: list[BasicCycle]):
    """(holds, span_rank, cycle_dim)."""
    dim = cycle_space_dim(g)
    n = len(g.edges)
    rows = [_int_row(b.coeffs, n) for b in basic]
    r = rank_int(rows, n, upper_bound=dim) if rows else 0
    return r == dim, r, dim


@dataclass
class Certificate:
    target: dict
    terms: list         # (coefficient, basic index)

    def residual(self, basic: list[BasicCycle]) -> dict:
        acc = {k: Fraction(c) for k, c in self.target.items()}
        for c, i in self.terms:
            for k, v in basic[i].coeffs.items():
                acc[k] = acc.get(k, 0) - c * v
        return {k: v for k, v in acc.items() if v}


def _independent_subset(rows: list[list[int]], n: int, p: int):
    """Indices of a maximal independent row subset mod p and pivot columns."""
    ech = ModularEchelon(n, p)
    chosen = []
    for i, row in enumerate(rows):
        if ech.add(row):
            chosen.append(i)
    return chosen, list(ech.pivots)


def _combine(sub: list[list[int]], pivots: list[int], target: list) -> QVector:
    """Coefficients c with sum_t c_t sub_t = target on the pivot columns."""
    m = [[sub[t][col] for t in range(len(sub))] for col in pivots]
    return solve_int_multimodular(m, [target[col] for col in pivots])


def decompose_cycle(g: VenkovGraph, basic: list[BasicCycle], x: dict,
                    candidates: list[int] | None = None) -> Certificate:
    """Exact rational coefficients expressing x over the basic cycles.

    Only the basic cycles with indices in ``candidates`` are used (all by
    default).  Raises NotInSpan carrying a functional that vanishes on every
    candidate but not on x.
    """
    if not is_cycle(g, x):
        raise VenkovError("target is not a cycle")
    n = len(g.edges)
    pool = list(range(len(basic))) if candidates is None else list(candidates)
    rows = [_int_row(basic[i].coeffs, n) for i in pool]
    target = [Fraction(c) for c in _dense(x, n)]
    full_rank = None
    for p in modular_primes():
        chosen, pivots = _independent_subset(rows, n, p)
        if chosen:
            coef = _combine([rows[i] for i in chosen], pivots, target)
            cert = Certificate(dict(x), [(c, pool[i]) for c, i in zip(coef, chosen) if c])
            if not cert.residual(basic):
                return cert
        # Independent mod p implies independent over Q; if the subset is
        # also maximal over Q, x is genuinely outside the span.
        if full_rank is None:
            full_rank = rank_int(rows, n) if rows else 0
        if len(chosen) == full_rank:
            break
    aug = [rows[i] for i in chosen] + [_int_row(x, n) if all(c.denominator == 1 for c in target)
                                       else [int(c * common_denominator(target)) for c in target]]
    raise NotInSpan("not in span", _cokernel_functional(aug, rows, target, n))


def _cokernel_functional(aug: list[list[int]], rows: list[list[int]], target: list, n: int) -> dict:
    """y with r . y = 0 for every row r and x . y = 1.

    ``aug`` is an independent row set followed by (a multiple of) x; solve
    ``aug[:, piv] y_piv = (0, ..., 0, 1)`` on pivot columns of ``aug``.
    """
    for p in modular_primes():
        k = len(aug)
        _, piv = _independent_subset(aug, n, p)
        if len(piv) < k:
            continue
        m = [[aug[i][col] for col in piv] for i in range(k)]
        yp = solve_int_multimodular(m, [0] * (k - 1) + [1])
        y = {col: v for col, v in zip(piv, yp) if v}
        ok = all(sum(r[col] * v for col, v in y.items()) == 0 for r in rows)
        xy = sum(target[col] * v for col, v in y.items())
        if ok and xy != 0:
            return {col: v / xy for col, v in y.items()}
    raise VenkovError("no separating functional found")  # pragma: no cover


def fundamental_cycles(g: VenkovGraph) -> list[dict]:
    """Fundamental cycles of a deterministic BFS spanning forest, one per
    non-tree edge in edge order."""
    adj = g.neighbours()
    parent: dict[int, int | None] = {}
    depth: dict[int, int] = {}
    for root in range(len(g.vertices)):
        if root in parent:
            continue
        parent[root], depth[root] = None, 0
        queue = [root]
        for u in queue:
            for v in sorted(adj[u]):
                if v not in parent:
                    parent[v], depth[v] = u, depth[u] + 1
                    queue.append(v)
    tree = {(min(v, p), max(v, p)) for v, p in parent.items() if p is not None}
    out = []
    for i, j in g.edges:
        if (i, j) in tree:
            continue
        # path i -> ... -> lca <- ... <- j, then the edge j -> i
        a, b = [i], [j]
        while a[-1] != b[-1]:
            if depth[a[-1]] >= depth[b[-1]]:
                a.append(parent[a[-1]])
            else:
                b.append(parent[b[-1]])
        walk = a + b[-2::-1]
        out.append(walk_to_cycle(g, walk))
    return out
