"""Lattices given by exact Gram matrices.

All lattice points are integer coordinate vectors in the lattice basis and
every metric quantity is a Gram form.  The named families use these bases:

``Zd``      standard basis, Gram = identity.
``A``       simple roots of A_d (Cartan matrix).
``Astar``   glue vectors ``g_i = e_i - (1/(d+1)) 1`` for i = 1..d, so
            ``g_i . g_j = [i = j] - 1/(d+1)``; ``g_{d+1} = -(g_1 + ... + g_d)``.
``D``       ``e_1 - e_2, ..., e_{d-1} - e_d, e_{d-1} + e_d``.
``Dstar``   ``e_1, ..., e_{d-1}`` and ``h = (1/2, ..., 1/2)``.  A point with
            basis coordinates ``c`` sits at ambient
            ``(c_1 + c_d/2, ..., c_{d-1} + c_d/2, c_d/2)``; it is an integer
            point iff ``c_d`` is even, otherwise all ambient coordinates are
            half-integers.
``E6``, ``E7``, ``E8``  simple roots (Cartan matrices, Bourbaki order).
``E6star``, ``E7star``  dual bases of the above (inverse Cartan matrices).

Parity classes are taken in basis coordinates: ``x (+) y`` is ``(x + y) mod 2``
coordinate-wise, which is the class of ``x + y`` modulo twice the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactmath import (
    ExactMathError,
    QMatrix,
    add,
    format_rational,
    identity_q,
    inverse_q,
    is_positive_definite,
    is_symmetric,
    parse_rational,
    qmatrix,
    scale,
    shape,
)

FAMILIES = ("Zd", "A", "Astar", "D", "Dstar", "E6", "E6star", "E7", "E7star", "E8")
_FIXED_DIM = {"E6": 6, "E6star": 6, "E7": 7, "E7star": 7, "E8": 8}
_DUAL = {"Zd": "Zd", "A": "Astar", "Astar": "A", "D": "Dstar", "Dstar": "D",
         "E6": "E6star", "E6star": "E6", "E7": "E7star", "E7star": "E7", "E8": "E8"}


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    dim: int
    gram: QMatrix
    family: str | None = None
    name: str | None = None

    def __post_init__(self):
        if shape(self.gram) != (self.dim, self.dim):
            raise LatticeError("Gram matrix has the wrong size")
        if not is_symmetric(self.gram):
            raise LatticeError("Gram matrix is not symmetric")
        if not is_positive_definite(self.gram):
            raise LatticeError("Gram matrix is not positive definite")
        if self.family is not None:
            if self.family not in FAMILIES:
                raise LatticeError(f"unknown family {self.family!r}")
            fixed = _FIXED_DIM.get(self.family)
            if fixed is not None and fixed != self.dim:
                raise LatticeError(f"{self.family} lives in dimension {fixed}")

    def norm(self, v: Sequence) -> Fraction:
        g = self.gram
        n = self.dim
        return sum((v[i] * g[i][j] * v[j] for i in range(n) if v[i] for j in range(n) if v[j]),
                   Fraction(0))

    def with_gram(self, gram: QMatrix) -> "Lattice":
        """Same points, new metric (family tag dropped)."""
        return Lattice(self.dim, qmatrix(gram), None, self.name)


def _cartan(kind: str) -> list[list[int]]:
    n = {"E6": 6, "E7": 7, "E8": 8}[kind]
    m = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    # Bourbaki: chain 1-3-4-5-...-n with node 2 attached to node 4.
    edges = [(0, 2), (2, 3), (1, 3)] + [(k, k + 1) for k in range(3, n - 1)]
    for i, j in edges:
        m[i][j] = m[j][i] = -1
    return m


def _gram_from_basis(rows: Sequence[Sequence[Fraction]]) -> QMatrix:
    return qmatrix([[sum(a * b for a, b in zip(u, v)) for v in rows] for u in rows])


def dstar_basis(d: int) -> list[list[Fraction]]:
    rows = [[Fraction(int(i == j)) for j in range(d)] for i in range(d - 1)]
    rows.append([Fraction(1, 2)] * d)
    return rows


def named_lattice(family: str, d: int | None = None) -> Lattice:
    """Textbook Gram matrix of a named family in the basis documented above."""
    if family in _FIXED_DIM:
        if d is None:
            d = _FIXED_DIM[family]
        if d != _FIXED_DIM[family]:
            raise LatticeError(f"unsupported family/dimension: {family} in dimension {d}")
    if family not in FAMILIES:
        raise LatticeError(f"unsupported family/dimension: {family!r}")
    if d is None or d < 1:
        raise LatticeError(f"unsupported family/dimension: {family} needs a dimension")
    if family == "Zd":
        gram = identity_q(d)
    elif family == "A":
        gram = qmatrix([[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(d)]
                        for i in range(d)])
    elif family == "Astar":
        gram = qmatrix([[int(i == j) - Fraction(1, d + 1) for j in range(d)] for i in range(d)])
    elif family == "D":
        if d < 3:
            raise LatticeError("unsupported family/dimension: D needs d >= 3")
        rows = []
        for i in range(d - 1):
            r = [0] * d
            r[i], r[i + 1] = 1, -1
            rows.append(r)
        r = [0] * d
        r[d - 2] = r[d - 1] = 1
        rows.append(r)
        gram = _gram_from_basis([[Fraction(x) for x in r] for r in rows])
    elif family == "Dstar":
        if d < 3:
            raise LatticeError("unsupported family/dimension: Dstar needs d >= 3")
        gram = _gram_from_basis(dstar_basis(d))
    elif family in ("E6", "E7", "E8"):
        gram = qmatrix(_cartan(family))
    else:  # E6star, E7star
        gram = inverse_q(qmatrix(_cartan(family[:2])))
    return Lattice(d, gram, family, f"{family}{d}" if family not in _FIXED_DIM else family)


def dual_lattice(lat: Lattice) -> Lattice:
    fam = _DUAL.get(lat.family) if lat.family else None
    name = f"dual({lat.name})" if lat.name else None
    return Lattice(lat.dim, inverse_q(lat.gram), fam, name)


def blend_gram(g: QMatrix, gp: QMatrix, eps) -> QMatrix:
    """``g + eps * gp``, checked to be symmetric positive definite."""
    eps = Fraction(eps)
    if shape(g) != shape(gp):
        raise LatticeError("Gram matrices of different sizes")
    if not (is_symmetric(g) and is_symmetric(gp)):
        raise LatticeError("blend_gram needs symmetric inputs")
    if eps < 0:
        raise LatticeError("eps must be nonnegative")
    out = add(g, scale(gp, eps))
    if not is_positive_definite(out):
        raise LatticeError("result not positive definite")
    return out


def parity_sum(x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    if len(x) != len(y):
        raise LatticeError("dimension mismatch")
    return tuple((a + b) % 2 for a, b in zip(x, y))


def canonical_edge_class(v: Sequence[int]) -> tuple[int, ...]:
    """Representative of ``{v, -v}`` whose first nonzero entry is positive."""
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    raise LatticeError("zero vector has no edge class")


# -- Dstar ambient coordinates ----------------------------------------------

def dstar_to_ambient2(c: Sequence[int]) -> tuple[int, ...]:
    """Twice the ambient coordinates of a Dstar point (all even or all odd)."""
    last = c[-1]
    return tuple(2 * x + last for x in c[:-1]) + (last,)


def dstar_from_ambient2(a: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`dstar_to_ambient2`; rejects points outside Dstar."""
    parities = {x % 2 for x in a}
    if len(parities) != 1:
        raise LatticeError(f"not a Dstar point: {tuple(Fraction(x, 2) for x in a)}")
    last = a[-1]
    return tuple((x - last) // 2 for x in a[:-1]) + (last,)


def dstar_ambient(c: Sequence[int]) -> tuple[Fraction, ...]:
    return tuple(Fraction(x, 2) for x in dstar_to_ambient2(c))


# -- JSON -------------------------------------------------------------------

def lattice_to_json(lat: Lattice) -> dict:
    out = {}
    if lat.name is not None:
        out["name"] = lat.name
    if lat.family is not None:
        out["family"] = lat.family
    out["dim"] = lat.dim
    out["gram"] = [[format_rational(x) for x in row] for row in lat.gram]
    return out


def lattice_from_json(data: dict) -> Lattice:
    try:
        dim = data["dim"]
        rows = data["gram"]
    except (KeyError, TypeError) as exc:
        raise LatticeError(f"malformed lattice JSON: missing {exc}") from None
    if not isinstance(dim, int) or not isinstance(rows, list):
        raise LatticeError("malformed lattice JSON")
    try:
        gram = qmatrix([[parse_rational(x) for x in row] for row in rows])
    except (ExactMathError, TypeError) as exc:
        raise LatticeError(f"malformed lattice JSON: {exc}") from None
    return Lattice(dim, gram, data.get("family"), data.get("name"))
