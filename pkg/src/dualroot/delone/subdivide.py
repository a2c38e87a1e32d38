"""Delone subdivisions induced by a new metric on the same point lattice.

Under ``Gnew`` each old cell P is cut into the regular subdivision of its
vertex set by the heights ``v^T Gnew v``.  The pieces are kept only if each
is an empty sphere of the new metric and the pieces fill a fundamental
domain (translation-class volumes sum to one).  Together these say the
pieces are exactly the Delone cells of ``Gnew``.
"""

from __future__ import annotations

from fractions import Fraction

from ..exactmath import common_denominator, is_positive_definite, is_symmetric, qmatrix, shape
from ..lattice import LatticeError, blend_gram
from .cells import DeloneCell, DeloneError, DeloneStar, verify_empty
from .polytope import facet_inequalities, mask_to_indices


class SubdivisionError(DeloneError):
    pass


def _lower_pieces(vertices, gram) -> list[tuple]:
    """Vertex subsets of the lower facets of the lifted point set."""
    d = len(vertices[0])
    heights = [sum(v[i] * gram[i][j] * v[j] for i in range(d) for j in range(d)) for v in vertices]
    s = common_denominator(heights)
    lifted = [tuple(v) + (int(h * s),) for v, h in zip(vertices, heights)]
    k, facets = facet_inequalities(lifted)
    if k == d:
        return [tuple(vertices)]
    out = []
    for normal, _, mask in facets:
        # lower facets bound the heights from below: negative height coefficient
        if normal[d] < 0:
            out.append(tuple(vertices[i] for i in mask_to_indices(mask)))
    return out


def subdivide_star(star: DeloneStar, gnew) -> DeloneStar:
    gnew = qmatrix(gnew)
    d = star.lattice.dim
    if shape(gnew) != (d, d) or not is_symmetric(gnew) or not is_positive_definite(gnew):
        raise SubdivisionError("new Gram matrix must be symmetric positive definite of the same size")
    lat = star.lattice.with_gram(gnew)
    pieces = []
    for cell in star.cells:
        for verts in _lower_pieces(cell.vertices, gnew):
            try:
                piece = DeloneCell.from_vertices(verts, gnew)
            except DeloneError:
                raise SubdivisionError("inconsistent subdivision: piece without a sphere") from None
            if piece.dim != d:
                raise SubdivisionError("inconsistent subdivision: flat piece")
            pieces.append(piece)
    out = DeloneStar(lat, pieces, "subdivided")
    for c in out.cells:
        if not verify_empty(c, lat):
            raise SubdivisionError("inconsistent subdivision: a piece is not an empty sphere")
    if out.total_volume() != 1:
        raise SubdivisionError("inconsistent subdivision: pieces do not tile")
    return out


def _contained(fine: DeloneCell, coarse_classes: list[DeloneCell]) -> bool:
    f0 = fine.vertices[0]
    fset = fine.vertices
    for c in coarse_classes:
        cset = set(c.vertices)
        for v in c.vertices:
            t = tuple(a - b for a, b in zip(v, f0))
            if all(tuple(a + b for a, b in zip(p, t)) in cset for p in fset):
                return True
    return False


def refines(fine: DeloneStar, coarse: DeloneStar) -> bool:
    """Every fine cell lies in a translate of a single coarse cell."""
    if fine.lattice.dim != coarse.lattice.dim:
        return False
    coarse_classes = coarse.translation_classes()
    return all(_contained(c, coarse_classes) for c in fine.translation_classes())


def refining_subdivision(g, gp, star: DeloneStar, budget: int = 40):
    """First ``eps = 2^-k`` (k < budget) whose blend refines the star,
    together with the subdivided star."""
    eps = Fraction(1)
    for _ in range(budget):
        try:
            gnew = blend_gram(g, gp, eps)
            sub = subdivide_star(star, gnew)
            if refines(sub, star):
                return eps, sub
        except (LatticeError, SubdivisionError):
            pass
        eps /= 2
    raise SubdivisionError("no epsilon found within budget")


def find_refining_epsilon(g, gp, star: DeloneStar, budget: int = 40) -> Fraction:
    return refining_subdivision(g, gp, star, budget)[0]
