import random
from collections import Counter
from fractions import Fraction

import pytest

from dualroot.exactmath import scale
from dualroot.lattice import blend_gram
from dualroot.delone.analytic import delone_star_analytic
from dualroot.delone.cells import faces_k, classify_face, verify_empty
from dualroot.delone.lifted import delone_star_lifted
from dualroot.delone.subdivide import (
    SubdivisionError,
    find_refining_epsilon,
    refines,
    refining_subdivision,
    subdivide_star,
)

DELONE_3_TYPES = {"Tetrahedron", "Octahedron", "PyramidOverParallelogram", "TriangularPrism", "Parallelepiped"}


def perturbation(d, seed, q=64):
    rng = random.Random(seed)
    gp = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            gp[i][j] = gp[j][i] = Fraction(rng.randint(-q, q), q)
    return gp


@pytest.fixture(scope="module")
def d4():
    return delone_star_analytic("Dstar", 4)


def test_same_gram_is_trivial(d4):
    assert subdivide_star(d4, d4.lattice.gram).keys() == d4.keys()


def test_scaled_gram_is_trivial(d4):
    assert subdivide_star(d4, scale(d4.lattice.gram, 2)).keys() == d4.keys()


def test_rejects_bad_gram(d4):
    g = d4.lattice.gram
    with pytest.raises(SubdivisionError):
        subdivide_star(d4, scale(g, -1))
    with pytest.raises(SubdivisionError):
        subdivide_star(d4, [[1, 0], [0, 1]])


def test_too_large_perturbation_is_inconsistent(d4):
    # far from G the old cells are not unions of new Delone cells
    g = d4.lattice.gram
    identity = [[int(i == j) for j in range(4)] for i in range(4)]
    bad = blend_gram(g, identity, 1)
    with pytest.raises(SubdivisionError, match="inconsistent subdivision"):
        subdivide_star(d4, bad)


@pytest.mark.parametrize("seed", range(4))
def test_refining_subdivision_d4(d4, seed):
    g = d4.lattice.gram
    gp = perturbation(4, seed)
    eps, sub = refining_subdivision(g, gp, d4)
    assert eps == find_refining_epsilon(g, gp, d4)
    assert eps > 0 and refines(sub, d4)
    assert sub.total_volume() == 1
    assert all(verify_empty(c, sub.lattice) for c in sub.cells)
    # the lifted backend on the new form finds the same cells
    assert delone_star_lifted(sub.lattice).keys() == sub.keys()
    kinds = {classify_face(f) for c in sub.cells for f in faces_k(c, 3)}
    assert kinds <= DELONE_3_TYPES


def test_zero_perturbation(d4):
    zero = [[0] * 4 for _ in range(4)]
    eps, sub = refining_subdivision(d4.lattice.gram, zero, d4)
    assert eps == 1 and sub.keys() == d4.keys()


def test_budget_exhausted(d4):
    g = d4.lattice.gram
    with pytest.raises(SubdivisionError, match="no epsilon found within budget"):
        find_refining_epsilon(g, scale(g, -2), d4, budget=1)


def test_refines_is_not_symmetric(d4):
    sub = refining_subdivision(d4.lattice.gram, perturbation(4, 0), d4)[1]
    assert len(sub.cells) > len(d4.cells)
    assert refines(sub, d4) and refines(d4, d4)
    assert not refines(d4, sub)


def test_dstar6_subdivision_seed0():
    star = delone_star_analytic("Dstar", 6)
    eps, sub = refining_subdivision(star.lattice.gram, perturbation(6, 0), star)
    assert eps == Fraction(1, 8)
    assert Counter(len(c.vertices) for c in sub.translation_classes()) == {7: 720}
