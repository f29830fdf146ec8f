import json
import math
from fractions import Fraction

import pytest

from kagome.chain import GENERAL, RESTRAINED, weighted
from kagome.errors import EnumerationCapExceeded, KagomeError
from kagome.exact import (
    TilingGraph,
    brute_force_tilings,
    diameter,
    enumerate_tilings,
    exact_mixing_time,
    exact_stationary,
    graph_to_dot,
    graph_to_json,
    height_extremes,
    max_distinct_heights,
    path_coupling_ledger,
    transition_kernel,
)
from kagome.lattice import make_lozenge_region, make_nonflat_lozenge, make_square_region
from kagome.tiling import fish_count, total_height

# frozen space sizes: (all nodes, all edges, restrained nodes)
SPACE_SIZES = {
    ("lozenge", 1): (1, 0, 1),
    ("lozenge", 2): (11, 14, 7),
    ("lozenge", 3): (1186, 4280, 257),
    ("square", 3): (527, 1745, 178),
    ("nonflat", 2): (3, 2, None),  # no fish-free tiling exists
    ("nonflat", 3): (335, 997, 6),
}


@pytest.mark.parametrize(("family", "n"), sorted(SPACE_SIZES))
def test_enumeration_counts_frozen(family, n):
    from kagome.lattice import make_region
    region = make_region(family, n)
    nodes, edges, rnodes = SPACE_SIZES[(family, n)]
    g = enumerate_tilings(region)
    assert (len(g.nodes), len(g.edges)) == (nodes, edges)
    if rnodes is None:
        with pytest.raises(KagomeError):
            enumerate_tilings(region, flips="restrained")
    else:
        gr = enumerate_tilings(region, flips="restrained")
        assert len(gr.nodes) == rnodes


def test_enumeration_matches_brute_force(loz2, nf3):
    for region in (loz2, nf3):
        bfs = {t.key for t in enumerate_tilings(region).nodes}
        brute = {t.key for t in brute_force_tilings(region)}
        assert bfs == brute


def test_enumeration_is_canonically_ordered(loz2, loz2_graph):
    again = enumerate_tilings(loz2)
    assert [t.key for t in again.nodes] == [t.key for t in loz2_graph.nodes]


def test_node_cap_raises(loz3):
    with pytest.raises(EnumerationCapExceeded):
        enumerate_tilings(loz3, cap=100)


def test_node_cap_env_override(loz3, monkeypatch):
    monkeypatch.setenv("KAGOME_NODE_CAP", "50")
    with pytest.raises(EnumerationCapExceeded):
        enumerate_tilings(loz3)
    monkeypatch.setenv("KAGOME_NODE_CAP", "2000")
    assert len(enumerate_tilings(loz3).nodes) == 1186


def test_kernel_rows_are_distributions(loz2_graph):
    for variant in (GENERAL, RESTRAINED, weighted("1/3")):
        kernel = transition_kernel(loz2_graph, variant)
        for row in kernel:
            assert sum(row.values()) == 1
            assert all(p >= 0 for p in row.values())


def test_stationary_uniform_for_general(loz2_graph):
    pi = exact_stationary(loz2_graph, GENERAL)
    assert set(pi) == {Fraction(1, 11)}


def test_stationary_fish_weighted(loz2_graph):
    lam = Fraction(1, 3)
    pi = exact_stationary(loz2_graph, weighted(lam))
    weights = [lam ** fish_count(t) for t in loz2_graph.nodes]
    z = sum(weights)
    assert list(pi) == [w / z for w in weights]


def test_stationary_uniform_for_restrained(loz2_graph_restrained):
    pi = exact_stationary(loz2_graph_restrained, RESTRAINED)
    assert set(pi) == {Fraction(1, 7)}


def test_mixing_time_frozen(loz2_graph):
    assert exact_mixing_time(loz2_graph, GENERAL) == 26
    # stricter epsilon cannot mix faster
    assert exact_mixing_time(loz2_graph, GENERAL, eps=Fraction(1, 8)) >= 26


def test_mixing_time_respects_node_cap(loz3_graph):
    with pytest.raises(KagomeError):
        exact_mixing_time(loz3_graph, GENERAL, node_cap=100)


# exact worst one-step drift of the height-distance coupling, per
# variant and region; every value is a hard equality
LEDGER_GOLDEN = {
    ("lozenge", 3, "general"): Fraction(1, 16),
    ("square", 3, "general"): Fraction(1, 14),
    ("square", 3, "weighted:1/10"): Fraction(27, 308),
    ("square", 3, "weighted:1/4"): Fraction(9, 140),
    ("square", 3, "weighted:1/3"): Fraction(3, 56),
    ("lozenge", 3, "weighted:1/10"): Fraction(27, 352),
    ("lozenge", 3, "weighted:1/4"): Fraction(9, 160),
    ("lozenge", 3, "weighted:1/3"): Fraction(3, 64),
}


def _variant_of(tag):
    if tag == "general":
        return GENERAL
    return weighted(tag.split(":")[1])


@pytest.mark.parametrize(("family", "n", "tag"), sorted(LEDGER_GOLDEN))
def test_ledger_worst_frozen(family, n, tag, loz3_graph, sq3_graph):
    graph = loz3_graph if family == "lozenge" else sq3_graph
    result = path_coupling_ledger(graph, _variant_of(tag))
    assert result.worst_delta == LEDGER_GOLDEN[(family, n, tag)]
    assert result.n_inner == len(graph.region.inner_vertices)


def test_restrained_ledger_extremes(loz2, sq3):
    for region, n_inner in ((loz2, 5), (sq3, 14)):
        g = enumerate_tilings(region, flips="restrained")
        result = path_coupling_ledger(g, RESTRAINED)
        best = min(e.expected_delta for e in result.entries)
        assert best == Fraction(-1, n_inner)


def test_ledger_contributions_sum(loz2_graph):
    result = path_coupling_ledger(loz2_graph, GENERAL)
    for e in result.entries:
        assert sum(e.contributions.values()) == e.expected_delta


def test_diameter_frozen(loz2_graph, loz2_graph_restrained):
    assert diameter(loz2_graph) == 6
    assert diameter(loz2_graph_restrained) == 4


def test_diameter_rejects_disconnected(loz2_graph):
    fake = TilingGraph(region=loz2_graph.region, flips="all",
                       nodes=loz2_graph.nodes, edges=())
    with pytest.raises(KagomeError):
        diameter(fake)


def test_height_extremes_are_unique_on_lozenges(loz3_graph):
    lo, hi = height_extremes(loz3_graph)
    assert len(lo) == 1 and len(hi) == 1
    totals = [total_height(t) for t in loz3_graph.nodes]
    assert totals[lo[0]] == min(totals) and totals[hi[0]] == max(totals)


def test_structure_bounds_on_every_enumerated_graph(
        loz2_graph, loz3_graph, sq3_graph, loz2_graph_restrained):
    for g in (loz2_graph, loz3_graph, sq3_graph, loz2_graph_restrained):
        n_verts = len(g.region.vertices)
        assert diameter(g) <= n_verts ** 1.5
        assert max_distinct_heights(g) <= math.sqrt(n_verts)


def test_graph_json_roundtrip_fields(loz2_graph):
    doc = graph_to_json(loz2_graph)
    json.dumps(doc)  # must be serializable as-is
    assert doc["schema_version"] == 1
    assert len(doc["nodes"]) == 11 and len(doc["edges"]) == 14
    assert doc["flips"] == "all"
    assert {e["i"] for e in doc["edges"]} <= set(range(11))


def test_graph_dot_styles_fish_edges(sq3_graph):
    dot = graph_to_dot(sq3_graph)
    assert dot.startswith("graph")
    assert "dashed" in dot  # fish-changing flips drawn dashed
    assert dot.count(" -- ") == len(sq3_graph.edges)


def test_edges_connect_distance_one_pairs(loz2_graph):
    from kagome.tiling import apply_flip
    for e in loz2_graph.edges:
        a = loz2_graph.nodes[e.i]
        b = loz2_graph.nodes[e.j]
        assert apply_flip(a, e.vertex) == b
        assert apply_flip(b, e.vertex) == a


def test_restrained_edges_subset_of_general(loz2, loz2_graph,
                                            loz2_graph_restrained):
    def key(graph, e):
        return frozenset((graph.nodes[e.i].key, graph.nodes[e.j].key))

    all_edges = {key(loz2_graph, e) for e in loz2_graph.edges}
    restrained = {key(loz2_graph_restrained, e)
                  for e in loz2_graph_restrained.edges}
    assert restrained <= all_edges
