"""Combinatorial criteria on a Delone star and their JSON forms."""

from __future__ import annotations

from ..exactmath import format_rational, parse_rational
from ..delone.cells import DeloneStar
from ..delone.polytope import OCTAHEDRON, PYRAMID, TETRAHEDRON, TRIANGLE, classify
from .graph import (
    BasicCycle,
    Certificate,
    VenkovError,
    VenkovGraph,
    build_venkov_graph,
    check_basic_generation,
    enumerate_basic_cycles,
)

YES, NO, VACUOUS = "yes", "no", "unknown/vacuous"
ORDINE_TYPES = (TETRAHEDRON, OCTAHEDRON, PYRAMID)


def is_primitive(star: DeloneStar) -> bool:
    d = star.lattice.dim
    return all(len(c.vertices) == d + 1 for c in star.cells)


def all_two_faces_triangles(star: DeloneStar) -> bool:
    if star.lattice.dim < 2:
        return False
    for c in star.cells:
        fl = c.lattice
        if any(classify(fl, f) != TRIANGLE for f in fl.faces(2)):
            return False
    return True


def ordine_condition(star: DeloneStar) -> bool:
    """Every 3-face is a tetrahedron, octahedron or pyramid (needs d >= 3)."""
    if star.lattice.dim < 3:
        return False
    for c in star.cells:
        fl = c.lattice
        if any(classify(fl, f) not in ORDINE_TYPES for f in fl.faces(3)):
            return False
    return True


def criteria_report(star: DeloneStar, graph: VenkovGraph | None = None,
                    basic: list[BasicCycle] | None = None) -> dict:
    primitive = is_primitive(star)
    zhit = all_two_faces_triangles(star)
    ordine = ordine_condition(star)
    g = graph if graph is not None else build_venkov_graph(star)
    basic = basic if basic is not None else enumerate_basic_cycles(star, g)
    holds, rank, dim = check_basic_generation(g, basic)
    vacuous = dim == 0
    if primitive or zhit or ordine or (holds and not vacuous):
        conclusion = YES
    elif holds:
        conclusion = VACUOUS
    else:
        conclusion = NO
    return {
        "criteria": {
            "primitive": primitive,
            "zhitomirski": zhit,
            "ordine": ordine,
            "basic_generation": {"holds": holds, "rank": rank, "dim": dim, "vacuous": vacuous},
        },
        "conclusion": conclusion,
    }


# -- JSON ---------------------------------------------------------------------

def graph_to_json(g: VenkovGraph) -> dict:
    return {
        "orientation": "smaller class to larger class (lexicographic)",
        "vertices": [list(v) for v in g.vertices],
        "edges": [[i, j] for i, j in g.edges],
        "witnesses": [{"cell": k, "triangle": list(tri)} for k, tri in g.witnesses],
    }


def graph_from_json(data: dict) -> VenkovGraph:
    try:
        vertices = [tuple(int(x) for x in v) for v in data["vertices"]]
        edges = [(int(i), int(j)) for i, j in data["edges"]]
        witnesses = [(int(w["cell"]), tuple(int(x) for x in w["triangle"])) for w in data["witnesses"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise VenkovError(f"malformed graph JSON: {exc}") from None
    if vertices != sorted(set(vertices)):
        raise VenkovError("malformed graph JSON: vertices must be sorted and distinct")
    if any(not 0 <= i < j < len(vertices) for i, j in edges) or len(witnesses) != len(edges):
        raise VenkovError("malformed graph JSON: bad edge list")
    return VenkovGraph(vertices, edges, witnesses)


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "target": {str(k): format_rational(v) for k, v in sorted(cert.target.items())},
        "terms": [[format_rational(c), i] for c, i in cert.terms],
    }


def certificate_from_json(data: dict) -> Certificate:
    try:
        target = {int(k): parse_rational(v) for k, v in data["target"].items()}
        terms = [(parse_rational(c), int(i)) for c, i in data["terms"]]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise VenkovError(f"malformed certificate JSON: {exc}") from None
    return Certificate(target, terms)
