"""Delone cells, faces and stars over a Gram metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from ..exactmath import (
    ExactMathError,
    QMatrix,
    format_rational,
    integer_scaled,
    ldl_decomposition,
    parse_rational,
    quad_form,
    solve_q,
)
from ..lattice import Lattice, lattice_from_json, lattice_to_json
from . import polytope
from .polytope import FaceLattice, mask_to_indices


class DeloneError(ValueError):
    pass


Point = tuple  # tuple[int, ...]


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def circumsphere(vertices: Sequence[Sequence[int]], gram: QMatrix):
    """Center in the affine hull of the vertices and squared radius."""
    if len(vertices) < 2:
        raise DeloneError("circumsphere needs at least two points")
    gi, s = integer_scaled(gram)
    v0 = vertices[0]
    d = len(v0)
    # An affinely independent subset fixes the centre; the rest are checked.
    basis: list[tuple] = []
    for v in vertices[1:]:
        w = sub(v, v0)
        if polytope._int_rank(basis + [w]) > len(basis):
            basis.append(w)
    gw = [[sum(gi[i][j] * w[j] for j in range(d)) for i in range(d)] for w in basis]
    # c = v0 + sum lam_k w_k;  2 w_i^T G (c - v0) = q(w_i)
    a = tuple(tuple(Fraction(2 * sum(gwi[t] * wk[t] for t in range(d))) for wk in basis) for gwi in gw)
    rhs = tuple(Fraction(sum(gwi[t] * wi[t] for t in range(d))) for gwi, wi in zip(gw, basis))
    lam = solve_q(a, rhs)
    center = tuple(v0[t] + sum((lam[k] * basis[k][t] for k in range(len(basis))), Fraction(0))
                   for t in range(d))
    r2 = quad_form(gram, tuple(v0[t] - center[t] for t in range(d)))
    for v in vertices[1:]:
        if quad_form(gram, tuple(v[t] - center[t] for t in range(d))) != r2:
            raise DeloneError("degenerate: no equidistant center")
    return center, r2


def points_in_ellipsoid(gram: QMatrix, center: Sequence, sq_radius, strict: bool = False) -> Iterator[Point]:
    """All integer z with (z - c)^T G (z - c) <= r^2 (or < r^2).

    Fincke-Pohst recursion on ``G = L D L^T``: the form is a weighted sum of
    squares of triangular linear forms, which bounds the last coordinate,
    then the next, and so on.
    """
    lower, diag = ldl_decomposition(gram)
    n = len(gram)
    c = [Fraction(x) for x in center]
    r2 = Fraction(sq_radius)
    z = [0] * n

    # q(y) = sum_i d_i (y_i + sum_{j>i} L_ji y_j)^2 where y = z - c
    def rec(i: int, remaining: Fraction):
        shift = sum((lower[j][i] * (z[j] - c[j]) for j in range(i + 1, n)), Fraction(0))
        centre = c[i] - shift
        bound = remaining / diag[i]
        s = (math.isqrt(bound.numerator * bound.denominator) + 1) / Fraction(bound.denominator)
        lo = math.floor(centre - s)
        hi = math.ceil(centre + s)
        for x in range(lo, hi + 1):
            t = x - centre
            used = diag[i] * t * t
            rest = remaining - used
            if rest < 0 or (strict and i == 0 and rest == 0):
                continue
            z[i] = x
            if i == 0:
                yield tuple(z)
            else:
                yield from rec(i - 1, rest)
        z[i] = 0

    if r2 < 0:
        return
    yield from rec(n - 1, r2)


@dataclass(frozen=True)
class DeloneCell:
    vertices: tuple          # sorted tuple of integer tuples
    center: tuple            # rational vector
    sq_radius: Fraction
    dim: int

    @classmethod
    def from_vertices(cls, vertices, gram: QMatrix) -> "DeloneCell":
        verts = tuple(sorted({tuple(int(x) for x in v) for v in vertices}))
        center, r2 = circumsphere(verts, gram)
        return cls(verts, center, r2, polytope.affine_rank(verts))

    @cached_property
    def lattice(self) -> FaceLattice:
        return FaceLattice(self.vertices)

    def translate(self, t: Sequence[int]) -> "DeloneCell":
        verts = tuple(sorted(tuple(a + b for a, b in zip(v, t)) for v in self.vertices))
        center = tuple(c + b for c, b in zip(self.center, t))
        return DeloneCell(verts, center, self.sq_radius, self.dim)

    def negate(self) -> "DeloneCell":
        verts = tuple(sorted(tuple(-a for a in v) for v in self.vertices))
        return DeloneCell(verts, tuple(-c for c in self.center), self.sq_radius, self.dim)

    def canonical(self) -> "DeloneCell":
        """Translate so that the lexicographically smallest vertex is 0."""
        v0 = self.vertices[0]
        return self.translate(tuple(-a for a in v0))

    def class_key(self) -> tuple:
        """Identity up to translation and central symmetry."""
        return min(self.canonical().vertices, self.negate().canonical().vertices)

    def is_centrally_symmetric(self) -> bool:
        return self.canonical().vertices == self.negate().canonical().vertices

    def class_representative(self) -> "DeloneCell":
        a = self.canonical()
        b = self.negate().canonical()
        return a if a.vertices <= b.vertices else b


def verify_empty(cell: DeloneCell, lat: Lattice) -> bool:
    """No lattice point in the closed ball except the vertices themselves."""
    verts = set(cell.vertices)
    for v in cell.vertices:
        if quad_form(lat.gram, tuple(a - b for a, b in zip(v, cell.center))) != cell.sq_radius:
            return False
    for z in points_in_ellipsoid(lat.gram, cell.center, cell.sq_radius):
        if z not in verts:
            return False
    return True


# -- faces --------------------------------------------------------------------

@dataclass(frozen=True)
class Face:
    cell: DeloneCell = field(repr=False, compare=False, hash=False)
    cell_index: int
    vertex_subset: tuple
    dim: int

    @property
    def mask(self) -> int:
        m = 0
        for i in self.vertex_subset:
            m |= 1 << i
        return m

    @property
    def points(self) -> list[tuple]:
        return [self.cell.vertices[i] for i in self.vertex_subset]


def faces_k(cell: DeloneCell, k: int, cell_index: int = 0) -> list[Face]:
    if k < 0 or k > cell.dim:
        raise DeloneError(f"no {k}-faces in a {cell.dim}-cell")
    fl = cell.lattice
    return [Face(cell, cell_index, mask_to_indices(m), k) for m in fl.faces(k)]


def classify_face(face: Face) -> str:
    if face.dim not in (2, 3):
        raise DeloneError("not a 2- or 3-face")
    return polytope.classify(face.cell.lattice, face.mask)


def neighborliness_profile(cell: DeloneCell) -> tuple[bool, int]:
    if cell.dim < 2:
        raise DeloneError("neighborliness needs a cell of dimension >= 2")
    adj = cell.lattice.edge_graph()
    n = len(cell.vertices)
    worst = max(n - 1 - len(nb) for nb in adj.values())
    return worst == 0, worst


def cell_volume(cell: DeloneCell) -> Fraction:
    return polytope.volume(cell.vertices, cell.lattice)


# -- stars ------------------------------------------------------------------

@dataclass
class DeloneStar:
    lattice: Lattice
    cells: list
    provenance: str

    def __post_init__(self):
        reps = {}
        for c in self.cells:
            rep = c.class_representative()
            reps.setdefault(rep.vertices, rep)
        self.cells = [reps[k] for k in sorted(reps)]

    def translation_classes(self) -> list[DeloneCell]:
        """One cell per translation class (central symmetry not quotiented)."""
        out = []
        for c in self.cells:
            out.append(c)
            if not c.is_centrally_symmetric():
                out.append(c.negate().canonical())
        return out

    def cells_at_origin(self) -> list[DeloneCell]:
        """All translates of all cells that have the origin as a vertex."""
        seen = {}
        for c in self.translation_classes():
            for v in c.vertices:
                t = c.translate(tuple(-a for a in v))
                seen.setdefault(t.vertices, t)
        return [seen[k] for k in sorted(seen)]

    def total_volume(self) -> Fraction:
        return sum((cell_volume(c) for c in self.translation_classes()), Fraction(0))

    def keys(self) -> list[tuple]:
        return [c.vertices for c in self.cells]


def star_to_json(star: DeloneStar) -> dict:
    return {
        "lattice": lattice_to_json(star.lattice),
        "provenance": star.provenance,
        "cells": [
            {
                "vertices": [list(v) for v in c.vertices],
                "center": [format_rational(x) for x in c.center],
                "sq_radius": format_rational(c.sq_radius),
            }
            for c in star.cells
        ],
    }


def star_from_json(data: dict) -> DeloneStar:
    try:
        lat = lattice_from_json(data["lattice"])
        cells = []
        for entry in data["cells"]:
            verts = tuple(sorted(tuple(int(x) for x in v) for v in entry["vertices"]))
            if any(len(v) != lat.dim for v in verts):
                raise DeloneError("vertex of the wrong dimension")
            center = tuple(parse_rational(x) for x in entry["center"])
            r2 = parse_rational(entry["sq_radius"])
            cell = DeloneCell(verts, center, r2, polytope.affine_rank(verts))
            for v in verts:
                if quad_form(lat.gram, sub(v, center)) != r2:
                    raise DeloneError("cell vertex off its sphere")
            cells.append(cell)
        provenance = data.get("provenance", "unknown")
    except (KeyError, TypeError, ExactMathError) as exc:
        raise DeloneError(f"malformed star JSON: {exc}") from None
    return DeloneStar(lat, cells, provenance)
