import random
from fractions import Fraction

import pytest

from oracles import red_graph_by_lp
from dualroot.exactmath import rank_q, qmatrix
from dualroot.lattice import named_lattice
from dualroot.delone.analytic import delone_star_analytic
from dualroot.delone.cells import DeloneStar
from dualroot.delone.lifted import delone_star_lifted
from dualroot.delone.subdivide import refining_subdivision
from dualroot.venkov.graph import (
    NotInSpan,
    VenkovError,
    boundary,
    build_venkov_graph,
    check_basic_generation,
    cycle_key,
    cycle_space_dim,
    decompose_cycle,
    enumerate_basic_cycles,
    fundamental_cycles,
    is_cycle,
    walk_to_cycle,
)


@pytest.fixture(scope="module")
def d4():
    star = delone_star_analytic("Dstar", 4)
    g = build_venkov_graph(star)
    return star, g, enumerate_basic_cycles(star, g)


@pytest.fixture(scope="module")
def a3():
    star = delone_star_analytic("Astar", 3)
    g = build_venkov_graph(star)
    return star, g, enumerate_basic_cycles(star, g)


def test_zd_graph_is_empty():
    star = delone_star_lifted(named_lattice("Zd", 3))
    g = build_venkov_graph(star)
    assert len(g.vertices) == 3 and g.edges == []
    assert cycle_space_dim(g) == 0
    assert enumerate_basic_cycles(star, g) == []
    assert check_basic_generation(g, []) == (True, 0, 0)


def test_small_graph_sizes(d4, a3):
    _, g, basic = d4
    assert (len(g.vertices), len(g.edges), cycle_space_dim(g)) == (12, 48, 37)
    assert check_basic_generation(g, basic)[0]
    _, g, basic = a3
    assert (len(g.vertices), len(g.edges), cycle_space_dim(g)) == (7, 18, 12)
    assert check_basic_generation(g, basic)[0]


@pytest.mark.parametrize("family,d,r2", [("Dstar", 4, Fraction(1, 2)), ("Astar", 3, Fraction(5, 16))])
def test_graph_matches_lp_oracle(family, d, r2):
    star = delone_star_analytic(family, d)
    g = build_venkov_graph(star)
    verts, edges = red_graph_by_lp(star.lattice.gram, r2)
    assert g.vertices == verts
    assert {(g.vertices[i], g.vertices[j]) for i, j in g.edges} == edges


def test_edges_oriented_and_witnessed(d4):
    star, g, _ = d4
    assert g.vertices == sorted(g.vertices)
    for (i, j), (k, tri) in zip(g.edges, g.witnesses):
        assert i < j
        cell = star.cells[k]
        pts = [cell.vertices[t] for t in tri]
        diffs = {tuple(x - y for x, y in zip(p, q)) for p in pts for q in pts if p != q}
        assert g.vertices[i] in diffs and g.vertices[j] in diffs


def test_fundamental_cycles(d4):
    _, g, _ = d4
    cyc = fundamental_cycles(g)
    assert len(cyc) == cycle_space_dim(g)
    assert all(is_cycle(g, x) for x in cyc)
    dense = [[x.get(k, 0) for k in range(len(g.edges))] for x in cyc]
    assert rank_q(qmatrix(dense)) == len(cyc)
    assert g.components() == 1


def test_walk_to_cycle(d4):
    _, g, _ = d4
    i, j = g.edges[0]
    k = next(k for k in g.neighbours()[j] if k in g.neighbours()[i])
    x = walk_to_cycle(g, [i, j, k])
    assert is_cycle(g, x) and not boundary(g, x)
    assert walk_to_cycle(g, [i, j]) == {}
    non = next(v for v in range(len(g.vertices)) if v != i and v not in g.neighbours()[i])
    with pytest.raises(VenkovError):
        walk_to_cycle(g, [i, non, j])


def test_basic_cycles_are_cycles(d4):
    _, g, basic = d4
    assert all(is_cycle(g, b.coeffs) for b in basic)
    assert all(set(b.coeffs.values()) <= {1, -1} for b in basic)
    assert len({cycle_key(b.coeffs) for b in basic}) == len(basic)
    hb = [b for b in basic if b.kind == "HalfBelt"]
    assert hb and all(len(b.coeffs) == 3 for b in hb)
    assert any(b.kind == "Contractible" for b in basic)


def test_decompose_half_belt(d4):
    _, g, basic = d4
    cert = decompose_cycle(g, basic, basic[0].coeffs)
    assert cert.terms == [(1, 0)] and not cert.residual(basic)


def test_decompose_fundamental(d4):
    _, g, basic = d4
    for x in fundamental_cycles(g):
        cert = decompose_cycle(g, basic, x)
        assert not cert.residual(basic)
        # independent re-summation
        acc = {}
        for c, i in cert.terms:
            for k, v in basic[i].coeffs.items():
                acc[k] = acc.get(k, 0) + c * v
        assert {k: v for k, v in acc.items() if v} == x


def test_not_in_span_functional(d4):
    _, g, basic = d4
    few = list(range(5))
    x = next(x for x in fundamental_cycles(g)
             if not _in_span(g, [basic[i].coeffs for i in few], x))
    with pytest.raises(NotInSpan) as info:
        decompose_cycle(g, basic, x, few)
    y = info.value.functional
    assert sum(x.get(k, 0) * v for k, v in y.items()) == 1
    for i in few:
        assert sum(basic[i].coeffs.get(k, 0) * v for k, v in y.items()) == 0


def _in_span(g, rows, x):
    n = len(g.edges)
    m = [[r.get(k, 0) for k in range(n)] for r in rows]
    return rank_q(qmatrix(m)) == rank_q(qmatrix(m + [[x.get(k, 0) for k in range(n)]]))


def test_decompose_rejects_non_cycle(d4):
    _, g, basic = d4
    with pytest.raises(VenkovError, match="not a cycle"):
        decompose_cycle(g, basic, {0: Fraction(1)})


def test_generation_invariant_under_reordering(d4):
    star, g, basic = d4
    rng = random.Random(5)
    for _ in range(3):
        cells = list(star.cells)
        rng.shuffle(cells)
        shifted = [c.translate(tuple(rng.randint(-3, 3) for _ in range(4))) for c in cells]
        star2 = DeloneStar(star.lattice, shifted, "shuffled")
        g2 = build_venkov_graph(star2)
        assert (g2.vertices, g2.edges) == (g.vertices, g.edges)
        b2 = enumerate_basic_cycles(star2, g2)
        rng.shuffle(b2)
        assert check_basic_generation(g2, b2) == check_basic_generation(g, basic)


def test_removing_basic_cycles_lowers_rank(a3):
    _, g, basic = a3
    holds, r, dim = check_basic_generation(g, basic[:3])
    assert not holds and r == 3 < dim


def test_subgraph_monotonicity():
    star = delone_star_analytic("Dstar", 4)
    gp = [[Fraction((i * 7 + j * 3) % 5 - 2, 8) for j in range(4)] for i in range(4)]
    gp = [[gp[min(i, j)][max(i, j)] for j in range(4)] for i in range(4)]
    _, sub = refining_subdivision(star.lattice.gram, gp, star)
    base, fine = build_venkov_graph(star), build_venkov_graph(sub)
    assert set(base.vertices) <= set(fine.vertices)
    assert all(fine.has_edge(base.vertices[i], base.vertices[j]) for i, j in base.edges)
    assert check_basic_generation(fine, enumerate_basic_cycles(sub, fine))[0]
