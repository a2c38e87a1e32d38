"""Delone stars of the dual root lattices from their explicit descriptions.

Dstar, d = 2m: the cell around the deep hole ``u = (1/2 on S, 0 off S)``
with |S| = m is the free sum of the half-integer cube ``S -> 1/2, T -> +-1/2``
and the integer cube ``S -> {0, 1}, T -> 0``.  Complementary S give
translates, so S is taken to contain the first coordinate.

Dstar, d = 2m + 1: the hole ``u = 1/4 e_p + 1/2 on S`` (|S| = m) carries
the join of the half-integer cube ``p -> 1/2, S -> 1/2, T -> +-1/2`` and the
integer cube ``p -> 0, S -> {0, 1}, T -> 0``.  Every (p, S) is listed; the
star keeps one cell per class up to central symmetry.

Astar: simplices spanned by the partial sums of the glue vectors taken in
every order.

E6star, E7star, E8: every cell with the origin as a vertex has a circumcentre
``c = v / k`` with v in the lattice and ``q(c) = R^2`` for the hole types
below.  Vertices are the points z with ``q(z) = 2 z^T G c`` and the sphere is
empty iff no point has ``q(z) < 2 z^T G c``; all points concerned satisfy
``q(z) <= 4 R^2``, so a finite pool decides everything exactly.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations, product

import numpy as np

from ..exactmath import integer_scaled
from ..lattice import Lattice, dstar_from_ambient2, named_lattice
from . import polytope
from .cells import DeloneCell, DeloneError, DeloneStar, points_in_ellipsoid

# (k, R^2) for each hole type
HOLE_TYPES = {
    "E6star": ((3, Fraction(2, 3)),),
    "E7star": ((2, Fraction(7, 8)),),
    "E8": ((2, Fraction(1)), (3, Fraction(8, 9))),
}


def _cell(vertices, gram) -> DeloneCell:
    return DeloneCell.from_vertices(vertices, gram).canonical()


def _dstar_even(lat: Lattice) -> list[DeloneCell]:
    d = lat.dim
    m = d // 2
    cells = []
    for rest in combinations(range(1, d), m - 1):
        s = (0,) + rest
        t = [i for i in range(d) if i not in s]
        verts = []
        for signs in product((1, -1), repeat=m):
            a = [1] * d
            for i, e in zip(t, signs):
                a[i] = e
            verts.append(dstar_from_ambient2(a))
        for bits in product((0, 2), repeat=m):
            a = [0] * d
            for i, b in zip(s, bits):
                a[i] = b
            verts.append(dstar_from_ambient2(a))
        cells.append(_cell(verts, lat.gram))
    return cells


def _dstar_odd(lat: Lattice) -> list[DeloneCell]:
    d = lat.dim
    m = d // 2
    cells = []
    for p in range(d):
        others = [i for i in range(d) if i != p]
        for s in combinations(others, m):
            t = [i for i in others if i not in s]
            verts = []
            for signs in product((1, -1), repeat=m):
                a = [1] * d
                for i, e in zip(t, signs):
                    a[i] = e
                verts.append(dstar_from_ambient2(a))
            for bits in product((0, 2), repeat=m):
                a = [0] * d
                for i, b in zip(s, bits):
                    a[i] = b
                verts.append(dstar_from_ambient2(a))
            cells.append(_cell(verts, lat.gram))
    return cells


def _astar(lat: Lattice) -> list[DeloneCell]:
    d = lat.dim
    glue = [tuple(int(i == j) for j in range(d)) for i in range(d)] + [(-1,) * d]
    seen = {}
    # cyclic shifts of an order give translates; fix the last glue vector last
    for order in permutations(range(d)):
        pt = (0,) * d
        verts = [pt]
        for i in order:
            pt = tuple(a + b for a, b in zip(pt, glue[i]))
            verts.append(pt)
        c = _cell(verts, lat.gram)
        seen.setdefault(c.vertices, c)
    return list(seen.values())


def _short_vectors(lat: Lattice, bound: Fraction):
    """Integer points z with q(z) <= bound, as an int64 array."""
    pts = list(points_in_ellipsoid(lat.gram, (0,) * lat.dim, bound))
    return np.array(pts, dtype=np.int64)


def _e_family(lat: Lattice, family: str) -> list[DeloneCell]:
    d = lat.dim
    gi, s = integer_scaled(lat.gram)
    gmat = np.array(gi, dtype=np.int64)
    holes = HOLE_TYPES[family]
    pool = _short_vectors(lat, 4 * max(r2 for _, r2 in holes))
    gpool = pool @ gmat
    qpool = np.einsum("ij,ij->i", gpool, pool)          # s * q(z)
    classes = {}
    for k, r2 in holes:
        target = k * k * r2 * s
        if target.denominator != 1:
            continue
        cand = _short_vectors(lat, k * k * r2)
        gc = cand @ gmat
        centres = cand[np.einsum("ij,ij->i", gc, cand) == int(target)]
        for row, v in _powers(centres, k, pool, qpool, gpool):
            if (row < 0).any():
                continue
            verts = [tuple(int(x) for x in pool[i]) for i in np.nonzero(row == 0)[0]]
            key = _key_only(verts)
            if key in classes:
                continue
            if polytope.affine_rank(verts) != d:
                classes[key] = None
                continue
            centre = tuple(Fraction(int(x), k) for x in v)
            classes[key] = DeloneCell(tuple(sorted(verts)), centre, r2, d).class_representative()
    return [c for c in classes.values() if c is not None]


def _powers(centres, k, pool, qpool, gpool, chunk=512):
    # s * k * (q(z) - 2 z^T G v / k) for every centre v / k and pool point z
    for i in range(0, len(centres), chunk):
        block = centres[i:i + chunk]
        yield from zip(k * qpool[None, :] - 2 * (block @ gpool.T), block)


def _key_only(verts) -> tuple:
    """Class key of a vertex set (translation and central symmetry)."""
    vs = sorted(set(verts))
    v0 = vs[0]
    a = tuple(sorted(tuple(x - y for x, y in zip(v, v0)) for v in vs))
    neg = sorted(tuple(-x for x in v) for v in vs)
    w0 = neg[0]
    b = tuple(tuple(x - y for x, y in zip(v, w0)) for v in neg)
    return min(a, b)


def delone_star_analytic(family: str, d: int | None = None) -> DeloneStar:
    if family not in ("Astar", "Dstar", "E6star", "E7star", "E8"):
        raise DeloneError(f"unsupported family: {family}")
    lat = named_lattice(family, d)
    if family == "Dstar":
        cells = _dstar_even(lat) if lat.dim % 2 == 0 else _dstar_odd(lat)
    elif family == "Astar":
        cells = _astar(lat)
    else:
        cells = _e_family(lat, family)
    return DeloneStar(lat, cells, "analytic")
