"""Generic Delone star by the paraboloid lifting ``x -> (x, x^T G x)``.

Lower facets of the lifted point set are the Delone cells.  Rather than
building the whole lower hull of a window we walk it locally: grow one empty
sphere through the origin, then cross every facet through the origin.
The next cell across a facet is found by sliding the sphere centre along
the facet's G-normal until it first meets a window point; cospherical ties
are taken all at once, so coplanar lifted facets are merged into one cell.

All arithmetic is in integers (numpy int64 for the window scans).  The
window is only a candidate set: every cell is certified afterwards with an
exhaustive emptiness check and every facet through the origin has to be
shared by exactly two cells.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..exactmath import (
    common_denominator,
    integer_scaled,
    inverse_q,
    matvec,
    nullspace_q,
    primitive_int_vector,
)
from ..lattice import Lattice
from .cells import DeloneCell, DeloneError, DeloneStar, verify_empty
from .polytope import mask_to_indices


class WindowTooSmall(DeloneError):
    pass


class _Scanner:
    """Window points with their integer-scaled norms."""

    def __init__(self, lat: Lattice, window: int):
        self.d = lat.dim
        self.ginv = inverse_q(lat.gram)
        self.gi, self.scale = integer_scaled(lat.gram)
        axes = [np.arange(-window, window + 1, dtype=np.int64)] * self.d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.d)
        self.z = grid[np.any(grid != 0, axis=1)]
        gmat = np.array(self.gi, dtype=np.int64)
        self.gz = self.z @ gmat
        self.qz = np.einsum("ij,ij->i", self.gz, self.z)
        self.gabs = int(np.abs(self.gz).max()) if len(self.z) else 0
        self.qmax = int(np.abs(self.qz).max()) if len(self.z) else 0

    def first_hit(self, center: tuple, direction: tuple):
        """Points first reached when the centre slides along ``direction``.

        The sphere passes through the origin and is centred at ``center``.
        For a point z the power w.r.t. the sphere centred at c + t n is
        ``q(z) - 2 z^T G c - 2 t z^T G n``; it vanishes at
        ``t_z = (q(z) - 2 z^T G c) / (2 z^T G n)`` for points ahead of the
        sweep (``z^T G n > 0``).  Returns (t_min, hit indices).
        """
        den_c = common_denominator(center)
        craw = [int(x * den_c) for x in center]
        # stay in int64 while every product is provably below 2^62
        big = max(self.gabs * max(map(abs, craw), default=0) * self.d * 4, self.qmax * den_c,
                  self.gabs * max(map(abs, direction), default=0) * self.d)
        if big >= 1 << 62:
            gz, qz = self.gz.astype(object), self.qz.astype(object)
            cnum, nvec = np.array(craw, dtype=object), np.array(direction, dtype=object)
        else:
            gz, qz = self.gz, self.qz
            cnum, nvec = np.array(craw, dtype=np.int64), np.array(direction, dtype=np.int64)
        power = qz * den_c - 2 * (gz @ cnum)     # scale * den_c * power
        speed = gz @ nvec                        # scale * z^T G n
        ahead = np.nonzero(speed > 0)[0]
        if ahead.size == 0:
            raise WindowTooSmall("no window point ahead of the sweep")
        # float ratios shortlist the minimum, exact cross-multiplication decides
        ratio = power[ahead].astype(float) / (2.0 * speed[ahead].astype(float) * den_c)
        lo = ratio.min()
        near = ahead[np.nonzero(ratio <= lo + 1e-9 * max(1.0, abs(lo)))[0]]
        num = {i: int(power[i]) for i in near}
        den = {i: 2 * int(speed[i]) * den_c for i in near}
        best = int(near[0])
        for i in near[1:]:
            if num[i] * den[best] < num[best] * den[i]:
                best = int(i)
        ties = [i for i in near if num[i] * den[best] == num[best] * den[i]]
        t = Fraction(num[best], den[best])
        if t < 0:
            raise WindowTooSmall("sphere is not empty on the window")
        return t, [tuple(int(x) for x in self.z[i]) for i in ties]


def _g_perp_direction(gram, points) -> tuple | None:
    """An integer n with p^T G n = 0 for all points, or None."""
    rows = tuple(tuple(sum(Fraction(p[i]) * gram[i][j] for i in range(len(p))) for j in range(len(p)))
                 for p in points if any(p))
    d = len(gram)
    basis = nullspace_q(rows, d) if rows else nullspace_q((), d)
    if not basis:
        return None
    return primitive_int_vector(basis[0])


def _initial_cell(lat: Lattice, scan: _Scanner) -> DeloneCell:
    d = lat.dim
    origin = (0,) * d
    pts = [origin]
    center = tuple(Fraction(0) for _ in range(d))
    while True:
        n = _g_perp_direction(lat.gram, pts)
        if n is None:
            break
        # Move along n; every point of pts keeps power zero.
        t, hits = scan.first_hit(center, n)
        center = tuple(c + t * x for c, x in zip(center, n))
        pts.extend(hits)
    return DeloneCell.from_vertices(pts, lat.gram)


def _facets_through_origin(cell: DeloneCell):
    origin_idx = cell.vertices.index((0,) * len(cell.vertices[0]))
    for normal, offset, mask in cell.lattice.facets:
        if mask >> origin_idx & 1:
            yield normal, mask


def _cross(lat: Lattice, scan: _Scanner, cell: DeloneCell, normal, mask, known: dict) -> DeloneCell:
    # Facet hyperplane normal . x = 0 with the cell on the <= side.  The
    # G-normal pointing away is G^{-1} normal^T; scanning uses z^T G n =
    # normal . z, so pass n = G^{-1} normal scaled to integers.
    n_rat = matvec(scan.ginv, normal)
    scale = common_denominator(n_rat)
    n_int = tuple(int(x * scale) for x in n_rat)
    t, hits = scan.first_hit(cell.center, n_int)
    facet_pts = [cell.vertices[i] for i in mask_to_indices(mask)]
    key = tuple(sorted(set(facet_pts + hits)))
    if key in known:
        return known[key]
    return DeloneCell.from_vertices(key, lat.gram)


def _walk(lat: Lattice, window: int) -> list[DeloneCell]:
    scan = _Scanner(lat, window)
    start = _initial_cell(lat, scan)
    cells = {start.vertices: start}
    queue = [start]
    facet_count: dict[frozenset, int] = {}
    while queue:
        cell = queue.pop()
        for normal, mask in _facets_through_origin(cell):
            key = frozenset(cell.vertices[i] for i in mask_to_indices(mask))
            facet_count[key] = facet_count.get(key, 0) + 1
            nxt = _cross(lat, scan, cell, normal, mask, cells)
            if nxt.vertices not in cells:
                cells[nxt.vertices] = nxt
                queue.append(nxt)
    if any(v != 2 for v in facet_count.values()):
        raise WindowTooSmall("a facet through the origin is not shared by exactly two cells")
    return [cells[k] for k in sorted(cells)]


def delone_star_lifted(lat: Lattice, window: int = 2, max_window: int = 16) -> DeloneStar:
    """Delone star from the lifted window; the window doubles until certified."""
    w = window
    while True:
        try:
            cells = _walk(lat, w)
            star = DeloneStar(lat, cells, "lifted")
            if all(verify_empty(c, lat) for c in star.cells):
                return star
        except WindowTooSmall:
            pass
        w *= 2
        if w > max_window:
            raise WindowTooSmall(f"window too small (tried up to {w // 2})")
