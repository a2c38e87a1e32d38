import json
from fractions import Fraction

import pytest

from dualroot.lattice import named_lattice
from dualroot.delone.analytic import delone_star_analytic
from dualroot.delone.lifted import delone_star_lifted
from dualroot.venkov.graph import (
    Certificate,
    VenkovError,
    build_venkov_graph,
    decompose_cycle,
    enumerate_basic_cycles,
    fundamental_cycles,
)
from dualroot.venkov.report import (
    NO,
    VACUOUS,
    YES,
    all_two_faces_triangles,
    certificate_from_json,
    certificate_to_json,
    criteria_report,
    graph_from_json,
    graph_to_json,
    is_primitive,
    ordine_condition,
)


def test_astar_is_primitive():
    rep = criteria_report(delone_star_analytic("Astar", 3))
    assert rep["criteria"]["primitive"] and rep["conclusion"] == YES


def test_e6_triangle_faces():
    rep = criteria_report(delone_star_analytic("E6star"))
    c = rep["criteria"]
    assert not c["primitive"] and c["zhitomirski"] and c["ordine"]
    assert c["basic_generation"] == {"holds": True, "rank": 721, "dim": 721, "vacuous": False}
    assert rep["conclusion"] == YES


def test_e7_faces():
    star = delone_star_analytic("E7star")
    assert not is_primitive(star)
    assert all_two_faces_triangles(star) and ordine_condition(star)


def test_dstar6_only_ordine():
    rep = criteria_report(delone_star_analytic("Dstar", 6))
    c = rep["criteria"]
    assert (c["primitive"], c["zhitomirski"], c["ordine"]) == (False, False, True)
    assert c["basic_generation"]["holds"] and rep["conclusion"] == YES


def test_dstar7_fails_ordine():
    # the cube 3-faces break the face condition; a truncated cycle list gives "no"
    star = delone_star_analytic("Dstar", 7)
    assert not ordine_condition(star)
    g = build_venkov_graph(star)
    basic = enumerate_basic_cycles(star, g)
    rep = criteria_report(star, g, basic[:10])
    assert rep["criteria"]["basic_generation"]["holds"] is False
    assert rep["conclusion"] == NO


@pytest.mark.parametrize("d", [2, 3])
def test_cubic_lattice_is_vacuous(d):
    rep = criteria_report(delone_star_lifted(named_lattice("Zd", d)))
    c = rep["criteria"]
    assert not (c["primitive"] or c["zhitomirski"] or c["ordine"])
    assert c["basic_generation"] == {"holds": True, "rank": 0, "dim": 0, "vacuous": True}
    assert rep["conclusion"] == VACUOUS


def test_low_dimension_face_conditions():
    star = delone_star_lifted(named_lattice("A", 2))
    assert all_two_faces_triangles(star)
    assert not ordine_condition(star)


def test_report_is_json_serialisable():
    rep = criteria_report(delone_star_analytic("Dstar", 4))
    assert json.loads(json.dumps(rep)) == rep


@pytest.fixture(scope="module")
def d4():
    star = delone_star_analytic("Dstar", 4)
    g = build_venkov_graph(star)
    return star, g, enumerate_basic_cycles(star, g)


def test_graph_json_roundtrip(d4):
    _, g, _ = d4
    data = json.loads(json.dumps(graph_to_json(g)))
    back = graph_from_json(data)
    assert (back.vertices, back.edges, back.witnesses) == (g.vertices, g.edges, g.witnesses)


@pytest.mark.parametrize("mutate", [
    lambda j: j.pop("edges"),
    lambda j: j["vertices"].reverse(),
    lambda j: j["edges"].append([0, 0]),
    lambda j: j["witnesses"].pop(),
    lambda j: j["vertices"][0].append("x"),
])
def test_graph_json_malformed(d4, mutate):
    data = graph_to_json(d4[1])
    mutate(data)
    with pytest.raises(VenkovError, match="malformed graph JSON"):
        graph_from_json(data)


def test_certificate_json_roundtrip(d4):
    _, g, basic = d4
    x = {k: Fraction(c, 3) for k, c in fundamental_cycles(g)[-1].items()}
    cert = decompose_cycle(g, basic, x)
    data = json.loads(json.dumps(certificate_to_json(cert)))
    back = certificate_from_json(data)
    assert back.target == cert.target and back.terms == cert.terms
    assert not back.residual(basic)


@pytest.mark.parametrize("bad", [{}, {"target": {"0": "1/0"}, "terms": []},
                                 {"target": {"a": "1"}, "terms": []}, {"target": {}, "terms": [["1"]]}])
def test_certificate_json_malformed(bad):
    with pytest.raises(VenkovError, match="malformed certificate JSON"):
        certificate_from_json(bad)


def test_certificate_residual_detects_tampering(d4):
    _, g, basic = d4
    cert = decompose_cycle(g, basic, basic[0].coeffs)
    bad = Certificate(cert.target, [(2, 0)])
    assert bad.residual(basic)
