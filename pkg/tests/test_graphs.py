import numpy as np
import pytest

from qubograd import (
    Graph,
    GraphFormatError,
    cut_size,
    degree_stats,
    generate_graph,
    load_graph,
    save_graph,
)


def test_k3_is_forced_by_edge_bounds():
    g = generate_graph(3, 3, seed=123)
    assert g.edges == ((0, 1), (0, 2), (1, 2))


def test_generation_is_deterministic():
    a = generate_graph(100, 199, seed=7)
    b = generate_graph(100, 199, seed=7)
    assert a.edges == b.edges


@pytest.mark.parametrize("n,m", [(50, 89), (50, 499), (100, 199), (300, 399)])
def test_generated_degree_statistics(n, m):
    g = generate_graph(n, m, seed=1)
    assert g.m == m
    dmax, dmin, dmean = degree_stats(g)
    assert dmean == 2 * m / n
    assert dmin >= 1
    assert dmax <= n - 1


def test_average_degree_of_50_89_instance():
    g = generate_graph(50, 89, seed=11)
    assert degree_stats(g)[2] == 3.56


def test_edge_count_bounds_rejected():
    with pytest.raises(ValueError):
        generate_graph(5, 3, seed=0)  # below the spanning-tree floor
    with pytest.raises(ValueError):
        generate_graph(5, 11, seed=0)  # above n(n-1)/2


def test_degree_stats_regular_and_star():
    k3 = Graph(3, [(0, 1), (0, 2), (1, 2)])
    assert degree_stats(k3) == (2, 2, 2.0)
    star = Graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
    assert degree_stats(star) == (4, 1, 1.6)


def test_cut_size_cases():
    k3 = Graph(3, [(0, 1), (0, 2), (1, 2)])
    assert cut_size(k3, [1, 0, 0]) == 2
    assert cut_size(k3, [0, 0, 0]) == 0
    path = Graph(3, [(0, 1), (1, 2)])
    assert cut_size(path, [1, 0, 1]) == 2


def test_cut_size_dimension_mismatch():
    k3 = Graph(3, [(0, 1), (0, 2), (1, 2)])
    with pytest.raises(ValueError):
        cut_size(k3, [1, 0])


def test_constructor_rejects_bad_edges():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 3)])


def test_save_format_is_exact(tmp_path):
    k3 = Graph(3, [(0, 1), (0, 2), (1, 2)])
    path = tmp_path / "k3.txt"
    save_graph(k3, path)
    assert path.read_text() == "3 3\n0 1\n0 2\n1 2\n"


def test_round_trip_identity(tmp_path):
    g = generate_graph(50, 89, seed=4)
    path = tmp_path / "g.txt"
    save_graph(g, path)
    assert load_graph(path) == g


def test_self_loop_line_is_a_parse_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 2\n0 1\n2 2\n")
    with pytest.raises(GraphFormatError, match="line 3"):
        load_graph(path)


def test_duplicate_edge_is_a_parse_error(tmp_path):
    path = tmp_path / "dup.txt"
    path.write_text("3 3\n0 1\n0 2\n0 1\n")
    with pytest.raises(GraphFormatError, match="line 4"):
        load_graph(path)


def test_unordered_endpoints_are_a_parse_error(tmp_path):
    path = tmp_path / "ord.txt"
    path.write_text("3 1\n2 1\n")
    with pytest.raises(GraphFormatError, match="line 2"):
        load_graph(path)


def test_missing_header_and_wrong_edge_count(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(GraphFormatError, match="line 1"):
        load_graph(empty)
    short = tmp_path / "short.txt"
    short.write_text("3 3\n0 1\n")
    with pytest.raises(GraphFormatError):
        load_graph(short)


def test_adjacency_matches_edges():
    g = generate_graph(30, 60, seed=9)
    for u, v in g.edges:
        assert v in g.adjacency[u] and u in g.adjacency[v]
    assert sum(len(a) for a in g.adjacency) == 2 * g.m
