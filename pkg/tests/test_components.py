import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmgiant import (
    DegreeSequence,
    HalfEdgeGraph,
    component_decomposition,
    disconnected_pair_fraction,
    disjoint_union,
    giant_statistics,
    pair_half_edges,
    sum_squares_ratio,
)
from cmgiant.traversal import distances_from
from strategies import degree_lists


def graph_from(degrees, mate):
    seq = DegreeSequence(np.array(degrees, dtype=np.int64))
    g = HalfEdgeGraph.from_degrees(seq, np.array(mate, dtype=np.int64))
    g.validate()
    return g


def cycle_graph(n):
    """An n-cycle wired by hand (n >= 3): vertex v owns labels 2v, 2v+1."""
    mate = np.empty(2 * n, dtype=np.int64)
    for v in range(n):
        w = (v + 1) % n
        mate[2 * v + 1] = 2 * w
        mate[2 * w] = 2 * v + 1
    return graph_from([2] * n, mate)


def test_single_edge_component():
    g = graph_from([1, 1], [1, 0])
    cs = component_decomposition(g)
    assert cs.sizes.tolist() == [2]
    assert cs.per_cluster_edges.tolist() == [1]
    assert cs.per_cluster_degree_hist == [{1: 2}]
    assert cs.labels.tolist() == [0, 0]


def test_self_loop_component():
    g = graph_from([2], [1, 0])
    cs = component_decomposition(g)
    assert cs.sizes.tolist() == [1]
    # a self-loop is one edge even though it uses two half-edges
    assert cs.per_cluster_edges.tolist() == [1]


def test_four_cycle():
    g = cycle_graph(4)
    cs = component_decomposition(g)
    assert cs.sizes.tolist() == [4]
    assert cs.per_cluster_edges.tolist() == [4]
    assert cs.per_cluster_degree_hist == [{2: 4}]


def test_tie_break_goes_to_lowest_vertex():
    # two components of size 2: the one holding vertex 0 is ranked first
    g = graph_from([1, 1, 1, 1], [2, 3, 0, 1])
    cs = component_decomposition(g)
    assert cs.sizes.tolist() == [2, 2]
    assert cs.labels.tolist() == [0, 1, 0, 1]


def test_giant_statistics_two_components():
    # a 3-path {0,1,2} plus an isolated edge {3,4}
    g = graph_from([1, 2, 1, 1, 1], [1, 0, 3, 2, 5, 4])
    cs = component_decomposition(g)
    gs = giant_statistics(cs, g.n)
    assert gs.gmax_frac == pytest.approx(3 / 5)
    assert gs.second_frac == pytest.approx(2 / 5)
    assert gs.vk_frac == {1: 2 / 5, 2: 1 / 5}
    assert gs.edge_frac == pytest.approx(2 / 5)


def test_giant_statistics_single_cluster():
    gs = giant_statistics(component_decomposition(cycle_graph(5)), 5)
    assert gs.gmax_frac == 1.0
    assert gs.second_frac == 0.0
    assert gs.edge_frac == 1.0


def test_sum_squares_perfect_matching():
    n = 10000
    seq = DegreeSequence(np.ones(n, dtype=np.int64))
    g = pair_half_edges(seq, np.random.default_rng(11))
    cs = component_decomposition(g)
    ratio = sum_squares_ratio(cs, 3, n)
    assert ratio.all_clusters == pytest.approx(2 / n)
    assert ratio.large_only == 0.0


def test_sum_squares_single_cluster():
    ratio = sum_squares_ratio(component_decomposition(cycle_graph(6)), 2, 6)
    assert ratio.all_clusters == 1.0
    assert ratio.large_only == 1.0


def test_disconnected_pair_fraction_two_pairs():
    # components {0,1} and {2,3}: 8 of the 16 ordered pairs straddle them
    g = graph_from([1, 1, 1, 1], [1, 0, 3, 2])
    cs = component_decomposition(g)
    assert disconnected_pair_fraction(cs, 2, 4) == pytest.approx(0.5)
    # raising k past the cluster size removes all qualifying pairs
    assert disconnected_pair_fraction(cs, 3, 4) == 0.0


def test_disconnected_pair_fraction_single_cluster():
    cs = component_decomposition(cycle_graph(7))
    assert disconnected_pair_fraction(cs, 1, 7) == 0.0


@given(degree_lists(max_n=30), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_disconnected_pair_fraction_matches_brute_force(degrees, k, seed):
    seq = DegreeSequence(np.array(degrees))
    g = pair_half_edges(seq, np.random.default_rng(seed))
    cs = component_decomposition(g)
    n = g.n
    big = {c for c, s in enumerate(cs.sizes.tolist()) if s >= k}
    count = 0
    for u in range(n):
        for v in range(n):
            cu, cv = int(cs.labels[u]), int(cs.labels[v])
            if cu != cv and cu in big and cv in big:
                count += 1
    assert disconnected_pair_fraction(cs, k, n) == count / (n * n)


def test_boundary_pair_fraction_perfect_matching():
    from cmgiant import boundary_pair_fraction

    n = 200
    seq = DegreeSequence(np.ones(n, dtype=np.int64))
    g = pair_half_edges(seq, np.random.default_rng(3))
    # every sphere of radius 2 around a degree-1 vertex is empty
    assert boundary_pair_fraction(g, 2) == 0.0


def test_boundary_pair_fraction_two_cycles():
    from cmgiant import boundary_pair_fraction

    g = disjoint_union(cycle_graph(100), cycle_graph(100))
    # on a cycle every boundary has exactly 2 vertices, short of r=3
    assert boundary_pair_fraction(g, 3) == 0.0
    # at r=2 all 200 vertices qualify and the two clusters face each other
    assert boundary_pair_fraction(g, 2) == pytest.approx(
        2 * 100 * 100 / (200 * 200)
    )


@given(degree_lists(max_n=25), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_boundary_pair_fraction_matches_per_vertex_bfs(degrees, r, seed):
    from cmgiant import boundary_pair_fraction

    seq = DegreeSequence(np.array(degrees))
    g = pair_half_edges(seq, np.random.default_rng(seed))
    cs = component_decomposition(g)
    n = g.n
    dist = [distances_from(g, v) for v in range(n)]
    passing = [int(np.sum(dist[v] == r)) >= r for v in range(n)]
    count = 0
    for u in range(n):
        for v in range(n):
            if passing[u] and passing[v] and cs.labels[u] != cs.labels[v]:
                count += 1
    assert boundary_pair_fraction(g, r) == pytest.approx(count / (n * n))


def test_largest_cluster_bounded_by_tail_mass(mixture_components, mixture_graph):
    # anything the giant holds is also counted by every tail Z_{>=k} it meets
    _, g = mixture_graph
    sizes = mixture_components.sizes
    gmax = int(sizes[0])
    for k in (1, 2, 5, 50, gmax):
        z_tail = int(np.sum(sizes[sizes >= k]))
        assert gmax <= z_tail


@given(degree_lists(), st.integers(0, 2**32 - 1))
def test_component_fuzz_bookkeeping(degrees, seed):
    seq = DegreeSequence(np.array(degrees))
    g = pair_half_edges(seq, np.random.default_rng(seed))
    cs = component_decomposition(g)
    assert int(cs.sizes.sum()) == g.n
    assert np.all(cs.sizes[:-1] >= cs.sizes[1:])
    assert int(cs.per_cluster_edges.sum()) == g.num_edges
    # labels agree with sizes
    counted = np.bincount(cs.labels, minlength=cs.num_clusters)
    assert np.array_equal(counted, cs.sizes)
    # per-cluster degree histograms add up to the global census
    merged: dict[int, int] = {}
    for hist in cs.per_cluster_degree_hist:
        for d, c in hist.items():
            merged[d] = merged.get(d, 0) + c
    values, counts = np.unique(seq.degrees, return_counts=True)
    assert merged == dict(zip(values.tolist(), counts.tolist()))
