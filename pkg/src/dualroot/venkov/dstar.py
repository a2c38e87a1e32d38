"""Structure of the red Venkov graphs of Dstar and its subdivisions.

Classes are read in doubled ambient coordinates (see ``lattice``): integer
classes have all entries even, half-integer classes all entries odd.

Vertex kinds: ``HalfInteger``; ``DVertex`` (even d only: integer class of
the form (+-1^m, 0^m)); ``IVertex`` (all other integer classes).
Edge kinds: ``IH``, ``II``, and for two half-integer classes, with j the
number of differing coordinates taken as min(j, d - j) over the sign
representatives: ``S`` (j = 1), ``Dd`` (even d, j = m) and ``H`` otherwise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from ..exactmath import common_denominator
from ..lattice import canonical_edge_class, dstar_from_ambient2, dstar_to_ambient2
from ..delone.cells import DeloneStar
from ..delone.polytope import mask_to_indices
from .graph import (
    BasicCycle,
    Certificate,
    NotInSpan,
    VenkovError,
    VenkovGraph,
    _edge_class,
    _triangles,
    contractible_cycle,
    cycle_key,
    decompose_cycle,
    halfbelt_cycle,
    walk_to_cycle,
)

HALF, DVERTEX, IVERTEX = "HalfInteger", "DVertex", "IVertex"
IH, II, DD, S, H = "IH", "II", "Dd", "S", "H"


@dataclass
class DStarTaxonomy:
    m: int
    parity: str
    vertex_kind: dict = field(default_factory=dict)     # vertex index -> kind
    edge_kind: dict = field(default_factory=dict)       # edge index -> kind
    ambient: dict = field(default_factory=dict)         # vertex index -> doubled ambient
    support: dict = field(default_factory=dict)         # integer vertex -> k


def _dim(m: int, parity: str) -> int:
    if parity not in ("even", "odd"):
        raise VenkovError("parity must be 'even' or 'odd'")
    return 2 * m if parity == "even" else 2 * m + 1


def half_distance(a, b) -> int:
    j = sum(1 for x, y in zip(a, b) if x != y)
    return min(j, len(a) - j)


def classify_dstar_elements(g: VenkovGraph, m: int, parity: str) -> DStarTaxonomy:
    d = _dim(m, parity)
    tax = DStarTaxonomy(m, parity)
    for i, v in enumerate(g.vertices):
        if len(v) != d:
            raise VenkovError("not a Dstar graph: wrong dimension")
        a = dstar_to_ambient2(v)
        tax.ambient[i] = a
        par = {x % 2 for x in a}
        if par == {1}:
            tax.vertex_kind[i] = HALF
        elif par == {0}:
            k = sum(1 for x in a if x)
            tax.support[i] = k
            diag = parity == "even" and k == m and all(abs(x) in (0, 2) for x in a)
            tax.vertex_kind[i] = DVERTEX if diag else IVERTEX
        else:
            raise VenkovError(f"not a Dstar graph: class {v}")
    for e, (i, j) in enumerate(g.edges):
        hi, hj = tax.vertex_kind[i] == HALF, tax.vertex_kind[j] == HALF
        if hi and hj:
            dist = half_distance(tax.ambient[i], tax.ambient[j])
            if dist == 1:
                kind = S
            elif parity == "even" and dist == m:
                kind = DD
            else:
                kind = H
        elif hi or hj:
            kind = IH
        else:
            kind = II
        tax.edge_kind[e] = kind
    return tax


def _half_neighbourhood(a, d: int) -> set[tuple]:
    """Half-integer classes agreeing with a/2 on the support of a."""
    supp = [i for i, x in enumerate(a) if x]
    if any(abs(a[i]) != 2 for i in supp):
        return set()
    free = [i for i in range(d) if not a[i]]
    out = set()
    for signs in product((1, -1), repeat=len(free)):
        t = [a[i] // 2 for i in range(d)]
        for i, s in zip(free, signs):
            t[i] = s
        out.add(canonical_edge_class(dstar_from_ambient2(t)))
    return out


def lemma_degree_check(g: VenkovGraph, tax: DStarTaxonomy) -> dict:
    d = _dim(tax.m, tax.parity)
    adj = g.neighbours()
    violations, checked, dvertex_degrees = [], 0, {}
    for i, kind in tax.vertex_kind.items():
        if kind == HALF:
            continue
        k = tax.support[i]
        nb = {g.vertices[j] for j in adj[i] if tax.vertex_kind[j] == HALF}
        if tax.parity == "even" and k == tax.m:
            dvertex_degrees[str(list(g.vertices[i]))] = len(nb)
            continue
        checked += 1
        expected = _half_neighbourhood(tax.ambient[i], d)
        if nb != expected or len(nb) != 2 ** (d - k):
            violations.append({"vertex": list(g.vertices[i]), "k": k, "expected": 2 ** (d - k),
                               "observed": len(nb)})
    return {"checked": checked, "violations": violations, "ok": not violations,
            "dvertex_degrees": dvertex_degrees}


def verify_dstar_graph_shape(g: VenkovGraph, m: int, parity: str) -> dict:
    tax = classify_dstar_elements(g, m, parity)
    ints = [i for i, k in tax.vertex_kind.items() if k != HALF]
    halves = [i for i, k in tax.vertex_kind.items() if k == HALF]
    n_int = 2 * m if parity == "even" else 2 * m + 1
    n_half = 2 ** (2 * m - 1) if parity == "even" else 2 ** (2 * m)
    edges = set(g.edges)
    kinds = list(tax.edge_kind.values())
    bip = all((min(i, j), max(i, j)) in edges for i in ints for j in halves)
    skel = all(((min(i, j), max(i, j)) in edges) == (half_distance(tax.ambient[i], tax.ambient[j]) == 1)
               for a, i in enumerate(halves) for j in halves[a + 1:])
    report = {
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "integer_vertices": len(ints),
        "half_vertices": len(halves),
        "vertex_count_ok": len(ints) == n_int and len(halves) == n_half,
        "no_integer_integer_edges": II not in kinds,
        "complete_bipartite": bip,
        "skeleton_adjacency": skel,
        "integer_vertices_are_unit": all(tax.support[i] == 1 for i in ints),
    }
    report["ok"] = all(v for k, v in report.items() if isinstance(v, bool))
    return report


# -- reduction --------------------------------------------------------------

@dataclass
class _Face:
    cell: int
    mask: int
    classes: frozenset
    adj: dict               # class -> set of classes (edges of G from the face's triangles)
    basic: list             # global indices of basic cycles living on the face


class _Witnesses:
    """3-faces and triangles of the star with their local basic cycles."""

    def __init__(self, star: DeloneStar, g: VenkovGraph, basic: list[BasicCycle]):
        self.g = g
        index = {cycle_key(b.coeffs): i for i, b in enumerate(basic)}
        self.key_index = index
        self.faces: list[_Face] = []
        self.triangles: list[_Face] = []
        self.by_class: dict[int, list[int]] = {}
        for k, cell in enumerate(star.cells):
            fl = cell.lattice
            tri_cls = {}
            for tri in _triangles(fl):
                a, b, c = tri
                cls = (g.index[_edge_class(fl, a, b)], g.index[_edge_class(fl, b, c)],
                       g.index[_edge_class(fl, a, c)])
                m = (1 << a) | (1 << b) | (1 << c)
                tri_cls[m] = cls
                hb = index.get(cycle_key(halfbelt_cycle(g, fl, tri)))
                adj = {u: {v for v in cls if v != u} for u in cls}
                self.triangles.append(_Face(k, m, frozenset(cls), adj, [hb] if hb is not None else []))
            if fl.dim < 3:
                continue
            for f in fl.faces(3):
                adj: dict[int, set] = {}
                loc = set()
                for t in fl.facets_of(f):
                    if t in tri_cls:
                        cls = tri_cls[t]
                        for u in cls:
                            adj.setdefault(u, set()).update(v for v in cls if v != u)
                        hb = index.get(cycle_key(halfbelt_cycle(g, fl, mask_to_indices(t))))
                        if hb is not None:
                            loc.add(hb)
                for apex in mask_to_indices(f):
                    x = contractible_cycle(g, fl, f, apex)
                    if x is not None and cycle_key(x) in index:
                        loc.add(index[cycle_key(x)])
                classes = frozenset(adj)
                fi = len(self.faces)
                self.faces.append(_Face(k, f, classes, adj, sorted(loc)))
                for u in classes:
                    self.by_class.setdefault(u, []).append(fi)

    def faces_with(self, *classes) -> list[_Face]:
        first = self.by_class.get(classes[0], [])
        return [self.faces[i] for i in first if all(c in self.faces[i].classes for c in classes)]


def _path_in(face: _Face, start: int, end: int, ok_vertex, ok_edge) -> list[int] | None:
    prev = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == end:
            break
        for v in sorted(face.adj.get(u, ())):
            if v in prev or not ok_edge(u, v) or (v != end and not ok_vertex(v)):
                continue
            prev[v] = u
            queue.append(v)
    if end not in prev:
        return None
    path = [end]
    while path[-1] != start:
        path.append(prev[path[-1]])
    return path[::-1]


def cycle_to_walks(g: VenkovGraph, x: dict) -> tuple[list[list[int]], int]:
    """Closed walks whose cycle vectors sum to den * x (Hierholzer)."""
    den = common_denominator(x.values()) if x else 1
    out_edges: dict[int, list[int]] = {}
    for k, c in sorted(x.items()):
        c = int(c * den)
        i, j = g.edges[k]
        src, dst = (i, j) if c > 0 else (j, i)
        out_edges.setdefault(src, []).extend([dst] * abs(c))
    for v in out_edges:
        out_edges[v].sort(reverse=True)
    walks = []
    while any(out_edges.values()):
        start = min(v for v, l in out_edges.items() if l)
        stack, circuit = [start], []
        while stack:
            u = stack[-1]
            if out_edges.get(u):
                stack.append(out_edges[u].pop())
            else:
                circuit.append(stack.pop())
        circuit.reverse()
        walks.append(circuit[:-1])
    return walks, den


def _simplify(walk: list[int]) -> list[int]:
    """Remove immediate backtracks u v u -> u (cycle vector unchanged)."""
    changed = True
    while changed and len(walk) > 2:
        changed = False
        n = len(walk)
        for i in range(n):
            if walk[i] == walk[(i + 2) % n]:
                j = (i + 1) % n
                keep = [walk[t] for t in range(n) if t != j and t != (j + 1) % n]
                walk = keep
                changed = True
                break
    if len(walk) == 2:
        return []
    return walk


class _Reducer:
    def __init__(self, g, tax, basic, witnesses):
        self.g, self.tax, self.basic = g, tax, basic
        self.w = witnesses
        self.trace: list[dict] = []
        self.terms: dict[int, Fraction] = {}

    def kind(self, u, v) -> str:
        i, j = min(u, v), max(u, v)
        return self.tax.edge_kind[self.g.edge_index[(i, j)]]

    def vk(self, u) -> str:
        return self.tax.vertex_kind[u]

    def certify(self, step, segment, path, faces, den):
        """Record old segment minus new path as a local combination."""
        closed = segment + path[-2:0:-1]
        diff = walk_to_cycle(self.g, closed) if len(closed) > 2 else {}
        local = sorted({i for f in faces for i in f.basic})
        entry = {"step": step, "segment": [list(self.g.vertices[u]) for u in segment],
                 "replacement": [list(self.g.vertices[u]) for u in path],
                 "witnesses": [{"cell": f.cell, "face": list(mask_to_indices(f.mask))} for f in faces],
                 "terms": []}
        if diff:
            try:
                cert = decompose_cycle(self.g, self.basic, diff, local)
            except NotInSpan:
                return False
            for c, i in cert.terms:
                self.terms[i] = self.terms.get(i, 0) + c / den
            entry["terms"] = [[c, i] for c, i in cert.terms]
        self.trace.append(entry)
        return True

    # Each rule returns the new walk after one splice, or None if no
    # position needs it.

    def _splice(self, walk, i, length, path):
        """Replace walk[i : i + length] (cyclically) by path."""
        n = len(walk)
        rest = [walk[(i + length + t) % n] for t in range(n - length)]
        return _simplify(path + rest)

    def _triple_rule(self, walk, den, step, is_bad, ok_vertex, ok_edge):
        """Replace b -> a -> c around a bad vertex a by paths through
        3-faces around a, chained through the link of a."""
        n = len(walk)
        for i in range(n):
            a = walk[i]
            if not is_bad(a):
                continue
            b, c = walk[i - 1], walk[(i + 1) % n]
            if b == c:
                path = [b]
                faces = []
            else:
                chain = self._link_chain(a, b, c, lambda z: z != a and ok_vertex(z), ok_edge)
                if chain is None:
                    raise VenkovError(f"witness not found ({step}): around {self.g.vertices[a]}")
                path, faces = [b], []
                for sub, f in chain:
                    path.extend(sub[1:])
                    faces.append(f)
            if not self.certify(step, [b, a, c], path, faces, den):
                raise VenkovError(f"witness not found ({step}): local certificate failed")
            return self._splice(walk, (i - 1) % n, 3, path)
        return None

    def _link_chain(self, a, b, c, ok_vertex, ok_edge):
        """Steps b = t0 -> ... -> tk = c between neighbours of a, each step a
        path avoiding a inside a 3-face that contains a, t_i and t_i+1."""
        faces = [self.w.faces[i] for i in self.w.by_class.get(a, [])]
        prev = {b: None}
        queue = deque([b])
        while queue and c not in prev:
            u = queue.popleft()
            for f in faces:
                if u not in f.classes:
                    continue
                for v in sorted(f.adj.get(a, ())):
                    if v in prev or v == a:
                        continue
                    sub = _path_in(f, u, v, ok_vertex, ok_edge)
                    if sub is not None:
                        prev[v] = (u, sub, f)
                        queue.append(v)
        if c not in prev:
            return None
        chain = []
        v = c
        while prev[v] is not None:
            u, sub, f = prev[v]
            chain.append((sub, f))
            v = u
        return chain[::-1]

    def _edge_rule(self, walk, den, step, is_bad, choose):
        n = len(walk)
        for i in range(n):
            u, v = walk[i], walk[(i + 1) % n]
            if not is_bad(u, v):
                continue
            tried = False
            for path, face in choose(u, v):
                tried = True
                if self.certify(step, [u, v], path, [face], den):
                    return self._splice(walk, i, 2, path)
            if not tried:
                raise VenkovError(f"witness not found ({step}): edge {self.g.vertices[u]} - {self.g.vertices[v]}")
            raise VenkovError(f"witness not found ({step}): local certificate failed")
        return None

    def _via_face(self, u, v, ok_mid, ok_edge, triangles=False):
        pool = self.w.triangles if triangles else self.w.faces_with(u, v)
        for f in pool:
            if u not in f.classes or v not in f.classes:
                continue
            for c in sorted(f.adj.get(u, set()) & f.adj.get(v, set())):
                if c in (u, v) or not ok_mid(c):
                    continue
                if ok_edge(u, c) and ok_edge(c, v):
                    yield [u, c, v], f

    def census(self, walk) -> dict:
        """Edge and vertex kinds along a closed walk."""
        out = {k: 0 for k in (II, DD, H, IH, S, DVERTEX, IVERTEX)}
        n = len(walk)
        for t in range(n):
            out[self.kind(walk[t], walk[(t + 1) % n])] += 1
            if self.vk(walk[t]) != HALF:
                out[self.vk(walk[t])] += 1
        return out

    def run_walk(self, walk, den):
        not_d = lambda z: self.vk(z) != DVERTEX
        any_edge = lambda p, q: True
        rules = [
            ("A.1", lambda w: self._triple_rule(w, den, "A.1", lambda z: self.vk(z) == DVERTEX,
                                               not_d, any_edge)),
            ("A.2", lambda w: self._edge_rule(
                w, den, "A.2", lambda p, q: self.kind(p, q) == II,
                lambda p, q: self._via_face(p, q, lambda z: self.vk(z) == HALF, any_edge))),
            ("A.3", lambda w: self._edge_rule(
                w, den, "A.3", lambda p, q: self.kind(p, q) == DD,
                lambda p, q: self._via_face(p, q, not_d,
                                            lambda r, s: self.kind(r, s) not in (DD, II)))),
            ("A.4", lambda w: self._edge_rule(
                w, den, "A.4", lambda p, q: self.kind(p, q) == H,
                lambda p, q: self._via_face(p, q, lambda z: self.vk(z) == IVERTEX, any_edge,
                                            triangles=True))),
            ("A.5", lambda w: self._i_vertex(w, den)),
        ]
        for name, rule in rules:
            for _ in range(100000):
                if not walk:
                    break
                new = rule(walk)
                if new is None:
                    break
                walk = new
                self.trace[-1]["after"] = self.census(walk)
            else:  # pragma: no cover
                raise VenkovError(f"reduction step {name} did not terminate")
        return walk

    def _i_vertex(self, walk, den):
        n = len(walk)
        for i in range(n):
            a = walk[i]
            if self.vk(a) != IVERTEX:
                continue
            b, c = walk[i - 1], walk[(i + 1) % n]
            if self.vk(b) != HALF or self.vk(c) != HALF:
                raise VenkovError("witness not found (A.5): I-vertex next to an integer vertex")
            path = self._s_path(a, b, c)
            faces = []
            for t in range(len(path) - 1):
                fs = self.w.faces_with(a, path[t], path[t + 1])
                if not fs:
                    raise VenkovError("witness not found (A.5): no 3-face for an S-step")
                faces.extend(fs)
            if not self.certify("A.5", [b, a, c], path, faces, den):
                raise VenkovError("witness not found (A.5): local certificate failed")
            return self._splice(walk, (i - 1) % n, 3, path)
        return None

    def _s_path(self, a, b, c) -> list[int]:
        """S-path from b to c through classes agreeing with a/2 on supp(a)."""
        amb = self.tax.ambient
        av = amb[a]
        supp = [i for i, x in enumerate(av) if x]

        def rep(t):
            x = amb[t]
            if all(x[i] == av[i] // 2 for i in supp):
                return list(x)
            return [-y for y in x]

        cur, goal = rep(b), rep(c)
        path = [b]
        for i in range(len(cur)):
            if cur[i] != goal[i]:
                cur[i] = goal[i]
                cls = canonical_edge_class(dstar_from_ambient2(cur))
                path.append(self.g.index[cls])
        if path[-1] != c:
            path.append(c)
        return path


def witness_index(star: DeloneStar, g: VenkovGraph, basic: list[BasicCycle]) -> _Witnesses:
    """Faces of the star with their local basic cycles; reusable across cycles."""
    return _Witnesses(star, g, basic)


def reduce_cycle_d2m(star: DeloneStar, g: VenkovGraph, tax: DStarTaxonomy,
                     basic: list[BasicCycle], x: dict, witnesses=None,
                     shortcut: bool = True) -> tuple[list[dict], Certificate]:
    """Run the reduction steps A.1-A.5 on x, then discharge the S-only rest.

    With ``shortcut``, a cycle that is itself +- a basic cycle is answered
    directly.
    """
    if tax.parity != "even":
        raise VenkovError("reduce_cycle_d2m needs an even-dimensional Dstar graph")
    red = _Reducer(g, tax, basic, witnesses or _Witnesses(star, g, basic))
    hit = red.w.key_index.get(cycle_key(x)) if x and shortcut else None
    if hit is not None:
        k = next(iter(x))
        cert = Certificate(dict(x), [(Fraction(x[k]) / basic[hit].coeffs[k], hit)])
        if not cert.residual(basic):
            return [{"step": "basic", "basic": hit, "terms": [[c, i] for c, i in cert.terms]}], cert
    walks, den = cycle_to_walks(g, x)
    rest: dict[int, Fraction] = {}
    for walk in walks:
        final = red.run_walk(_simplify(walk), den)
        if final:
            for k, c in walk_to_cycle(g, final).items():
                rest[k] = rest.get(k, 0) + c / den
    rest = {k: c for k, c in rest.items() if c}
    if any(tax.edge_kind[k] != S for k in rest):
        raise VenkovError("reduction left a non-S edge")
    kinds = sorted({tax.edge_kind[k] for k in rest})
    entry = {"step": "A.6", "s_edges": len(rest), "edge_kinds": kinds, "terms": []}
    if rest:
        cert = decompose_cycle(g, basic, rest)
        for c, i in cert.terms:
            red.terms[i] = red.terms.get(i, 0) + c
        entry["terms"] = [[c, i] for c, i in cert.terms]
    red.trace.append(entry)
    terms = [(c, i) for i, c in sorted(red.terms.items()) if c]
    cert = Certificate(dict(x), terms)
    if cert.residual(basic):
        raise VenkovError("reduction certificate has a nonzero residual")
    return red.trace, cert
