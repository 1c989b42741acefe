import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from dpnetepi import (
    Stat,
    count_edges,
    count_nodes_with_min_degree,
    degree_histogram,
    from_edges,
    load_graph,
    mixing_matrix,
    nodefactor,
    nodematch_per_group,
    quality_metrics,
    total_nodematch,
    write_graph,
)
from dpnetepi.graph import GraphFormatError, statistics
from oracles import brute_degrees, brute_mixing, brute_nodefactor


def test_fig3_mixing_matrix(fig3):
    np.testing.assert_array_equal(mixing_matrix(fig3, "shape"), [[2, 2, 0], [2, 1, 2], [0, 2, 1]])


def test_fig3_scalar_statistics(fig3):
    assert count_edges(fig3) == 8
    assert count_nodes_with_min_degree(fig3, 3) == 2
    assert count_nodes_with_min_degree(fig3, 2) == 7
    assert total_nodematch(fig3, "shape") == 4
    np.testing.assert_array_equal(nodematch_per_group(fig3, "shape"), [2, 1, 1])
    np.testing.assert_array_equal(nodefactor(fig3, "shape"), [4, 5, 3])
    np.testing.assert_array_equal(degree_histogram(fig3), [0, 0, 5, 2])


edge_lists = st.integers(2, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]), max_size=40),
        st.lists(st.integers(0, 2), min_size=n, max_size=n),
    )
)


@settings(max_examples=200, deadline=None)
@given(edge_lists)
def test_statistics_match_brute_force(case):
    n, edges, labels = case
    g = from_edges(n, edges, {"a": labels}, {"a": ("x", "y", "z")})
    m = brute_mixing(n, edges, labels, 3)
    np.testing.assert_array_equal(mixing_matrix(g, "a"), m)
    np.testing.assert_array_equal(nodefactor(g, "a"), brute_nodefactor(edges, labels, 3))
    deg = brute_degrees(n, edges)
    np.testing.assert_array_equal(g.degree_array, deg)
    assert count_edges(g) == len({(min(u, v), max(u, v)) for u, v in edges})
    for d in (1, 2, 3):
        assert count_nodes_with_min_degree(g, d) == sum(x >= d for x in deg)
    # the mixing matrix is symmetric and its upper triangle counts every edge once
    assert np.array_equal(m, m.T)
    assert np.triu(mixing_matrix(g, "a")).sum() == count_edges(g)


def test_statistics_vector_matches_single_calls(rng):
    g = random_graph(rng, 40, 0.1, k=(4,))
    stats = [Stat.edges(), Stat.min_degree(3), Stat.mixing("a", 2, 1), Stat.nodematch("a", 0),
             Stat.total_nodematch("a"), Stat.nodefactor("a", 3)]
    m = mixing_matrix(g, "a")
    expect = [count_edges(g), count_nodes_with_min_degree(g, 3), m[1, 2], m[0, 0], np.trace(m), m[3].sum()]
    np.testing.assert_array_equal(statistics(g, stats), expect)


@pytest.mark.parametrize("text", ["edges", "min_degree(4)", "mixing(age,0,3)", "nodematch(race,2)",
                                  "total_nodematch(age)", "nodefactor(race,1)"])
def test_stat_string_round_trip(text):
    assert str(Stat.parse(text)) == text


def test_stat_mixing_is_unordered():
    assert Stat.mixing("a", 2, 0) == Stat.mixing("a", 0, 2)
    assert Stat.parse("mixing(a,2,0)") == Stat.mixing("a", 0, 2)


@pytest.mark.parametrize("text", ["", "edges(1)", "min_degree(0)", "nodematch(a)", "bogus(a,1)", "mixing(a,1)"])
def test_stat_parse_rejects(text):
    with pytest.raises(ValueError):
        Stat.parse(text)


def test_graph_validation():
    with pytest.raises(ValueError):
        from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        from_edges(3, [(0, 5)])
    with pytest.raises(ValueError):
        from_edges(3, [(0, 1)], {"a": [0, 1, 3]}, {"a": ("p", "q")})
    g = from_edges(3, [(1, 0), (0, 1), (2, 1)])
    np.testing.assert_array_equal(g.edges, [[0, 1], [1, 2]])


def test_csv_round_trip(tmp_path, rng):
    g = random_graph(rng, 30, 0.15, k=(3, 2), names=("age", "race"))
    write_graph(g, tmp_path / "n.csv", tmp_path / "e.csv")
    back = load_graph(tmp_path / "n.csv", tmp_path / "e.csv", categories=g.categories)
    assert back == g


def test_load_graph_errors(tmp_path):
    (tmp_path / "n.csv").write_text("node_id,age\na,x\nb,y\n")
    (tmp_path / "loop.csv").write_text("u,v\na,a\n")
    (tmp_path / "unknown.csv").write_text("u,v\na,c\n")
    with pytest.raises(GraphFormatError, match="self-loop"):
        load_graph(tmp_path / "n.csv", tmp_path / "loop.csv")
    with pytest.raises(GraphFormatError, match="unknown endpoint"):
        load_graph(tmp_path / "n.csv", tmp_path / "unknown.csv")
    with pytest.raises(GraphFormatError, match="unknown category"):
        load_graph(tmp_path / "n.csv", categories={"age": ("x",)})
    g = load_graph(tmp_path / "n.csv")
    assert g.edge_count == 0 and g.categories["age"] == ("x", "y")


def test_quality_metrics(fig3):
    sparser = fig3.with_edges(fig3.edges[:4])
    q = quality_metrics(sparser, fig3, ["shape"])
    assert q["edges"] == pytest.approx(-50.0)
    # degrees of the first four edges: A2 B2 C2 D1 E1 -> three concurrent nodes vs seven
    assert q["concurrent"] == pytest.approx(100.0 * (3 - 7) / 7)
    assert q["nodematch_shape"] == pytest.approx(-50.0)
    empty = fig3.with_edges([])
    assert np.isnan(quality_metrics(fig3, empty, ["shape"])["edges"])
