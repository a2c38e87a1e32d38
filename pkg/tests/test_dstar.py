import random
from collections import Counter

import pytest

from dualroot.cli import sample_perturbation
from dualroot.lattice import canonical_edge_class, dstar_from_ambient2, dstar_to_ambient2
from dualroot.delone.analytic import delone_star_analytic
from dualroot.delone.subdivide import refining_subdivision
from dualroot.venkov.graph import (
    VenkovError,
    build_venkov_graph,
    check_basic_generation,
    enumerate_basic_cycles,
    cycle_key,
    fundamental_cycles,
)
from dualroot.venkov.dstar import (
    DD, DVERTEX, H, HALF, II, IH, IVERTEX, S,
    classify_dstar_elements,
    half_distance,
    lemma_degree_check,
    reduce_cycle_d2m,
    verify_dstar_graph_shape,
    witness_index,
)

# later steps never reintroduce what earlier steps removed
CLEARED = {"A.1": [], "A.2": [DVERTEX], "A.3": [DVERTEX, II],
           "A.4": [DVERTEX, II, DD], "A.5": [DVERTEX, II, DD, H]}


def setup(star, m):
    g = build_venkov_graph(star)
    tax = classify_dstar_elements(g, m, "even")
    basic = enumerate_basic_cycles(star, g)
    return star, g, tax, basic, witness_index(star, g, basic)


@pytest.fixture(scope="module")
def d6():
    return setup(delone_star_analytic("Dstar", 6), 3)


@pytest.fixture(scope="module")
def d6_sub():
    star = delone_star_analytic("Dstar", 6)
    _, sub = refining_subdivision(star.lattice.gram, sample_perturbation(6, 0), star)
    return setup(sub, 3)


def test_half_distance():
    assert half_distance((1, 1, 1, 1), (1, 1, 1, 1)) == 0
    assert half_distance((1, 1, 1, 1), (1, -1, 1, 1)) == 1
    assert half_distance((1, 1, 1, 1), (-1, -1, -1, 1)) == 1
    assert half_distance((1, 1, 1, 1), (-1, -1, 1, 1)) == 2


def test_base_taxonomy(d6):
    _, g, tax, _, _ = d6
    assert Counter(tax.vertex_kind.values()) == {HALF: 32, IVERTEX: 6}
    assert Counter(tax.edge_kind.values()) == {IH: 192, S: 96}
    assert set(tax.support.values()) == {1}


@pytest.mark.parametrize("d", [4, 5, 6, 7])
def test_base_shape(d):
    g = build_venkov_graph(delone_star_analytic("Dstar", d))
    m, parity = d // 2, "even" if d % 2 == 0 else "odd"
    rep = verify_dstar_graph_shape(g, m, parity)
    assert rep["ok"]
    assert rep["integer_vertices"] == d
    assert rep["half_vertices"] == 2 ** (d - 1)
    tax = classify_dstar_elements(g, m, parity)
    assert DVERTEX not in tax.vertex_kind.values()
    assert DD not in tax.edge_kind.values()
    assert lemma_degree_check(g, tax)["ok"]


def test_rejects_non_dstar():
    g = build_venkov_graph(delone_star_analytic("Dstar", 4))
    with pytest.raises(VenkovError, match="not a Dstar graph"):
        classify_dstar_elements(g, 3, "even")
    with pytest.raises(VenkovError, match="parity"):
        classify_dstar_elements(g, 2, "none")


def _signed_permutation(d, rng):
    perm = list(range(d))
    rng.shuffle(perm)
    signs = [rng.choice((1, -1)) for _ in range(d)]

    def act(v):
        a = dstar_to_ambient2(v)
        return canonical_edge_class(dstar_from_ambient2([signs[i] * a[perm[i]] for i in range(d)]))
    return act


@pytest.mark.parametrize("d", [5, 6])
def test_graph_invariant_under_signed_permutations(d):
    g = build_venkov_graph(delone_star_analytic("Dstar", d))
    verts = set(g.vertices)
    edges = {(g.vertices[i], g.vertices[j]) for i, j in g.edges}
    rng = random.Random(d)
    for _ in range(20):
        act = _signed_permutation(d, rng)
        assert {act(v) for v in verts} == verts
        assert {tuple(sorted((act(u), act(v)))) for u, v in edges} == edges


def test_subdivided_taxonomy(d6_sub):
    _, g, tax, basic, _ = d6_sub
    assert Counter(tax.vertex_kind.values()) == {HALF: 32, IVERTEX: 21, DVERTEX: 10}
    assert Counter(tax.edge_kind.values()) == {IH: 508, II: 141, H: 120, S: 96, DD: 38}
    deg = lemma_degree_check(g, tax)
    assert deg["ok"] and deg["checked"] == 21
    assert set(deg["dvertex_degrees"].values()) <= {6, 8}
    assert check_basic_generation(g, basic)[0]


def _check_trace(trace, cert, basic):
    assert not cert.residual(basic)
    assert trace[-1]["step"] == "A.6"
    order = [e["step"] for e in trace[:-1]]
    for e in trace[:-1]:
        after = e["after"]
        assert all(after[k] == 0 for k in CLEARED[e["step"]])
    # steps within one walk run in order, so the sequence only rewinds at walk starts
    return order


def non_basic(g, w):
    return [x for x in fundamental_cycles(g) if cycle_key(x) not in w.key_index]


def test_reduce_base(d6):
    star, g, tax, basic, w = d6
    for x in non_basic(g, w)[:5]:
        trace, cert = reduce_cycle_d2m(star, g, tax, basic, x, w)
        steps = set(_check_trace(trace, cert, basic))
        assert steps <= {"A.5"}


def test_reduce_subdivided(d6_sub):
    star, g, tax, basic, w = d6_sub
    seen = set()
    for x in non_basic(g, w)[::150]:
        trace, cert = reduce_cycle_d2m(star, g, tax, basic, x, w)
        seen |= set(_check_trace(trace, cert, basic))
    assert {"A.3", "A.4", "A.5"} <= seen


def test_reduce_basic_cycle_shortcut(d6_sub):
    star, g, tax, basic, w = d6_sub
    b = basic[7]
    neg = {k: -c for k, c in b.coeffs.items()}
    trace, cert = reduce_cycle_d2m(star, g, tax, basic, neg, w)
    assert len(trace) == 1 and cert.terms == [(-1, 7)]


def test_reduce_rejects_odd():
    star = delone_star_analytic("Dstar", 5)
    g = build_venkov_graph(star)
    tax = classify_dstar_elements(g, 2, "odd")
    with pytest.raises(VenkovError, match="even"):
        reduce_cycle_d2m(star, g, tax, [], {})
