import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmgiant import DegreeSequence, pair_half_edges, sample_distances, scaling_report
from cmgiant.distances import DistanceSample
from cmgiant.traversal import distances_from, pair_distance
from strategies import degree_lists
from test_components import cycle_graph, graph_from


def test_pair_distance_on_cycles():
    g = cycle_graph(4)
    assert pair_distance(g, 0, 0) == 0
    assert pair_distance(g, 0, 1) == 1
    assert pair_distance(g, 0, 2) == 2
    assert pair_distance(g, 0, 3) == 1
    g6 = cycle_graph(6)
    assert pair_distance(g6, 0, 3) == 3
    assert pair_distance(g6, 1, 5) == 2


def test_pair_distance_disconnected():
    g = graph_from([1, 1, 1, 1], [1, 0, 3, 2])
    assert pair_distance(g, 0, 2) is None
    assert pair_distance(g, 0, 1) == 1


@given(degree_lists(max_n=25), st.integers(0, 2**32 - 1))
def test_pair_distance_fuzz_against_bfs(degrees, seed):
    seq = DegreeSequence(np.array(degrees))
    g = pair_half_edges(seq, np.random.default_rng(seed))
    for a in range(g.n):
        truth = distances_from(g, a)
        for b in range(g.n):
            d = pair_distance(g, a, b)
            if truth[b] < 0:
                assert d is None
            else:
                assert d == int(truth[b])
            assert d == pair_distance(g, b, a)


def test_sample_distances_perfect_matching():
    seq = DegreeSequence(np.ones(100, dtype=np.int64))
    g = pair_half_edges(seq, np.random.default_rng(4))
    sample = sample_distances(g, 500, np.random.default_rng(5))
    assert sample.pairs_attempted == 500
    assert len(sample.finite_distances) + sample.infinite_count == 500
    # components have two vertices, so connected pairs sit at distance 0 or 1
    assert set(sample.finite_distances) <= {0, 1}
    assert sample.infinite_count > 400


def test_sample_distances_single_vertex():
    g = graph_from([2], [1, 0])
    sample = sample_distances(g, 5, np.random.default_rng(6))
    assert sample.finite_distances == (0, 0, 0, 0, 0)
    assert sample.finite_fraction == 1.0
    assert sample.mean_finite() == 0.0
    assert sample.median_finite() == 0.0


def test_sample_distances_validation():
    g = cycle_graph(3)
    with pytest.raises(ValueError):
        sample_distances(g, 0, np.random.default_rng(0))


def test_empty_finite_sample_rejects_stats():
    sample = DistanceSample(pairs_attempted=3, finite_distances=(), infinite_count=3)
    assert sample.finite_fraction == 0.0
    with pytest.raises(ValueError):
        sample.mean_finite()
    with pytest.raises(ValueError):
        sample.median_finite()


def test_scaling_report_fields():
    sample = DistanceSample(
        pairs_attempted=4, finite_distances=(4, 6, 6, 8), infinite_count=0
    )
    report = scaling_report(sample, 1000, 2.0)
    ref = math.log(1000) / math.log(2.0)
    assert report.reference == pytest.approx(ref)
    assert report.mean_finite == 6.0
    assert report.median_finite == 6.0
    assert report.mean_ratio == pytest.approx(6.0 / ref)
    assert report.median_ratio == pytest.approx(6.0 / ref)
    assert report.finite_fraction == 1.0


def test_scaling_report_validation():
    sample = DistanceSample(pairs_attempted=1, finite_distances=(2,), infinite_count=0)
    with pytest.raises(ValueError):
        scaling_report(sample, 1000, 1.0)
    with pytest.raises(ValueError):
        scaling_report(sample, 2, 2.0)


def test_distances_rarely_fall_far_below_reference(mixture_graph, mixture_spec):
    # the short-distance tail: the chance a uniform pair sits below
    # 0.7 * log n / log nu is at most 10 n^(-0.3) at this size
    _, g = mixture_graph
    sample = sample_distances(g, 400, np.random.default_rng(21))
    ref = math.log(g.n) / math.log(mixture_spec.nu)
    short = sum(1 for d in sample.finite_distances if d <= 0.7 * ref)
    assert short / sample.pairs_attempted <= 10.0 * g.n ** (-0.3)


def test_mean_ratio_near_one_at_moderate_size(mixture_graph, mixture_spec):
    _, g = mixture_graph
    sample = sample_distances(g, 400, np.random.default_rng(22))
    report = scaling_report(sample, g.n, mixture_spec.nu)
    assert 0.7 <= report.mean_ratio <= 1.3
    # connectivity of a uniform pair approaches the squared giant fraction
    assert abs(report.finite_fraction - (22 / 27) ** 2) <= 0.05
