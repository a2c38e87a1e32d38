"""Exact face lattices of lattice polytopes given by their vertices.

Facets come from the double description method on the homogenized vertex
cone, in integer arithmetic.  Faces are vertex bitmasks; a vertex set is a
face iff it equals the intersection of the facets containing it, and the
faces of dimension j+1 covering a j-face f are the minimal closures of
``f + {v}``.  Every face therefore comes with a certificate: the sum of the
facet inequalities through it is tight on the face and strict elsewhere.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from ..exactmath import det_int, inverse_q, primitive_int_vector, rank_exact_int


class PolytopeError(ValueError):
    pass


def _int_rank(rows: Sequence[Sequence[int]]) -> int:
    return rank_exact_int(rows)


def affine_rank(points: Sequence[Sequence[int]]) -> int:
    if len(points) <= 1:
        return 0
    p0 = points[0]
    return _int_rank([[a - b for a, b in zip(p, p0)] for p in points[1:]])


def _independent_columns(diffs: list[list[int]], k: int) -> list[int]:
    """Greedy choice of k coordinates on which the differences keep rank k."""
    chosen: list[int] = []
    ncols = len(diffs[0])
    for c in range(ncols):
        trial = chosen + [c]
        if _int_rank([[row[j] for j in trial] for row in diffs]) == len(trial):
            chosen = trial
            if len(chosen) == k:
                break
    return chosen


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def _popcount(x: int) -> int:
    return bin(x).count("1")


def facet_inequalities(points: Sequence[Sequence[int]]):
    """Facets of conv(points) inside its affine hull.

    Returns ``(k, facets)`` where k is the affine dimension and each facet is
    ``(normal, offset, mask)``: ``normal . x <= offset`` holds on all points
    with equality exactly on the points in the bitmask ``mask``.  Normals are
    integer vectors in the ambient coordinates, supported on k coordinates
    that are affinely independent on the hull.
    """
    n = len(points)
    if n == 0:
        raise PolytopeError("empty point set")
    d = len(points[0])
    p0 = points[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in points]
    k = _int_rank(diffs[1:]) if n > 1 else 0
    if k == 0:
        return 0, []
    cols = _independent_columns(diffs[1:], k)
    proj = [[p[c] for c in cols] for p in points]
    rows = [[1] + p for p in proj]
    # Initial simplex cone from k+1 independent rows.
    basis_rows: list[int] = []
    for i in range(n):
        trial = basis_rows + [i]
        if _int_rank([rows[j] for j in trial]) == len(trial):
            basis_rows = trial
            if len(trial) == k + 1:
                break
    inv = inverse_q(tuple(tuple(Fraction(x) for x in rows[i]) for i in basis_rows))
    rays = []
    for j in range(k + 1):
        col = primitive_int_vector([inv[r][j] for r in range(k + 1)])
        zero = 0
        for i in basis_rows:
            if _dot(rows[i], col) == 0:
                zero |= 1 << i
        rays.append((col, zero))
    processed = 0
    for i in basis_rows:
        processed |= 1 << i
    for i in range(n):
        if processed >> i & 1:
            continue
        w = rows[i]
        pos, neg, zer = [], [], []
        for j, (vec, _) in enumerate(rays):
            s = _dot(w, vec)
            (pos if s > 0 else neg if s < 0 else zer).append((j, s))
        new_rays = [rays[j] for j, _ in pos] + [(rays[j][0], rays[j][1] | (1 << i)) for j, _ in zer]
        for (jp, sp), (jn, sn) in ((a, b) for a in pos for b in neg):
            common = rays[jp][1] & rays[jn][1]
            if _popcount(common) < k - 1:
                continue
            if any(j != jp and j != jn and (m & common) == common for j, (_, m) in enumerate(rays)):
                continue
            vec = primitive_int_vector([sp * b - sn * a for a, b in zip(rays[jp][0], rays[jn][0])])
            new_rays.append((vec, common | (1 << i)))
        rays = new_rays
        processed |= 1 << i
    facets = []
    seen = set()
    for vec, _ in rays:
        # vec . (1, x) >= 0  <=>  -vec[1:] . x <= vec[0]
        mask = 0
        for idx in range(n):
            if _dot(rows[idx], vec) == 0:
                mask |= 1 << idx
        if mask in seen:
            continue
        seen.add(mask)
        normal = [0] * d
        for c, a in zip(cols, vec[1:]):
            normal[c] = -a
        facets.append((tuple(normal), vec[0], mask))
    facets.sort(key=lambda f: f[2])
    return k, facets


def mask_to_indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class FaceLattice:
    """Face lattice of conv(points), built lazily dimension by dimension."""

    def __init__(self, points: Sequence[Sequence[int]]):
        self.points = [tuple(p) for p in points]
        self.n = len(self.points)
        self.dim, self.facets = facet_inequalities(self.points)
        self.full = (1 << self.n) - 1
        # For each vertex, the bitmask of facets through it.
        self._vf = [0] * self.n
        for j, (_, _, mask) in enumerate(self.facets):
            for i in mask_to_indices(mask):
                self._vf[i] |= 1 << j
        self._all_facets = (1 << len(self.facets)) - 1
        self._closure_cache: dict[int, int] = {}
        self._levels: list[list[int]] = [[1 << i for i in range(self.n)]]
        self._up: dict[int, list[int]] = {}
        self._down: dict[int, list[int]] = {}
        if self.dim == 0:
            self._levels = [[self.full]]

    def facets_through(self, mask: int) -> int:
        fm = self._all_facets
        for i in mask_to_indices(mask):
            fm &= self._vf[i]
        return fm

    def _closure_of_facetset(self, fm: int) -> int:
        hit = self._closure_cache.get(fm)
        if hit is None:
            hit = 0
            for i, vf in enumerate(self._vf):
                if vf & fm == fm:
                    hit |= 1 << i
            self._closure_cache[fm] = hit
        return hit

    def closure(self, mask: int) -> int:
        return self._closure_of_facetset(self.facets_through(mask))

    def is_face(self, mask: int) -> bool:
        return mask != 0 and self.closure(mask) == mask

    def faces(self, k: int) -> list[int]:
        """Bitmasks of all k-faces, sorted."""
        if k < 0 or k > self.dim:
            return []
        while len(self._levels) <= k:
            j = len(self._levels) - 1
            nxt = set()
            for f in self._levels[j]:
                fm = self.facets_through(f)
                # c = cl(f + v) covers f iff every vertex of c - f has closure c
                cl = {}
                for v in range(self.n):
                    if not f >> v & 1:
                        cl[v] = self._closure_of_facetset(fm & self._vf[v])
                ups = [c for c in set(cl.values())
                       if all(cl[v] == c for v in mask_to_indices(c & ~f))]
                self._up[f] = ups
                for c in ups:
                    nxt.add(c)
                    self._down.setdefault(c, []).append(f)
            self._levels.append(sorted(nxt))
        return self._levels[k]

    def facets_of(self, mask: int) -> list[int]:
        """The faces covered by a face of dimension >= 1, sorted."""
        k = affine_rank([self.points[i] for i in mask_to_indices(mask)])
        self.faces(k)
        return sorted(self._down.get(mask, []))

    def f_vector(self) -> list[int]:
        return [len(self.faces(k)) for k in range(self.dim + 1)]

    def certificate(self, mask: int):
        """Supporting functional for a proper face: sum of its facet normals."""
        fm = self.facets_through(mask)
        d = len(self.points[0])
        normal = [0] * d
        offset = 0
        for j in mask_to_indices(fm):
            nj, bj, _ = self.facets[j]
            normal = [a + b for a, b in zip(normal, nj)]
            offset += bj
        return tuple(normal), offset

    def check_certificate(self, mask: int) -> bool:
        normal, offset = self.certificate(mask)
        for i, p in enumerate(self.points):
            val = _dot(normal, p)
            if mask >> i & 1:
                if val != offset:
                    return False
            elif val >= offset:
                return False
        return True

    def edges_within(self, mask: int) -> list[tuple[int, int]]:
        out = []
        for e in self.faces(1):
            if e & mask == e:
                a, b = mask_to_indices(e)
                out.append((a, b))
        return out

    def edge_graph(self) -> dict[int, set[int]]:
        adj = {i: set() for i in range(self.n)}
        for e in self.faces(1):
            a, b = mask_to_indices(e)
            adj[a].add(b)
            adj[b].add(a)
        return adj


# -- classification ---------------------------------------------------------

TRIANGLE = "Triangle"
PARALLELOGRAM = "Parallelogram"
TETRAHEDRON = "Tetrahedron"
OCTAHEDRON = "Octahedron"
PYRAMID = "PyramidOverParallelogram"
PRISM = "TriangularPrism"
PARALLELEPIPED = "Parallelepiped"
OTHER = "Other"
DELONE_3_TYPES = (TETRAHEDRON, OCTAHEDRON, PYRAMID, PRISM, PARALLELEPIPED)


def is_parallelogram(pts: Sequence[Sequence[int]]) -> bool:
    if len(pts) != 4:
        return False
    a, b, c, d = pts
    for (p, q), (r, s) in (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))):
        if all(x + y == z + w for x, y, z, w in zip(p, q, r, s)):
            return True
    return False


def classify(lattice: FaceLattice, mask: int) -> str:
    idx = mask_to_indices(mask)
    pts = [lattice.points[i] for i in idx]
    dim = affine_rank(pts)
    if dim == 2:
        if len(idx) == 3:
            return TRIANGLE
        return PARALLELOGRAM if is_parallelogram(pts) else OTHER
    if dim != 3:
        raise PolytopeError("not a 2- or 3-face")
    nv = len(idx)
    if nv == 4:
        return TETRAHEDRON
    if nv == 5:
        return PYRAMID
    if nv == 6:
        deg = {i: 0 for i in idx}
        for a, b in lattice.edges_within(mask):
            deg[a] += 1
            deg[b] += 1
        degs = sorted(deg.values())
        if degs == [4] * 6:
            return OCTAHEDRON
        if degs == [3] * 6:
            return PRISM
        return OTHER
    if nv == 8:
        return PARALLELEPIPED
    return OTHER


# -- volume -----------------------------------------------------------------

def _pull(fl: FaceLattice, mask: int, k: int) -> list[tuple[int, ...]]:
    idx = mask_to_indices(mask)
    if len(idx) == k + 1:
        return [idx]
    apex = idx[0]
    out = []
    for f in fl.faces(k - 1):
        if f & mask == f and not f >> apex & 1:
            out.extend((apex,) + s for s in _pull(fl, f, k - 1))
    return out


def triangulate(points, lattice: FaceLattice | None = None) -> list[tuple[int, ...]]:
    """Pulling triangulation (always at the first vertex of each face)."""
    fl = lattice if lattice is not None else FaceLattice(points)
    return _pull(fl, fl.full, fl.dim)


def volume(points: Sequence[Sequence[int]], lattice: FaceLattice | None = None) -> Fraction:
    """Coordinate volume of a full-dimensional lattice polytope."""
    pts = [tuple(p) for p in points]
    d = len(pts[0])
    if affine_rank(pts) != d:
        raise PolytopeError("volume needs a full-dimensional point set")
    total = Fraction(0)
    for s in triangulate(pts, lattice):
        base = pts[s[0]]
        total += abs(det_int([[a - b for a, b in zip(pts[i], base)] for i in s[1:]]))
    return total / math.factorial(d)
