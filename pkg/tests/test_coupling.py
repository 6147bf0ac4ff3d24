import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from cmgiant import (
    DegreeSequence,
    Pmf,
    coupled_exploration,
    coupled_pair_exploration,
    discrepancy_estimate,
    reuse_bounds,
    sample_iid_degrees,
)
from strategies import degree_lists

MIXTURE = Pmf.from_dict({1: 0.5, 3: 0.5})


@pytest.fixture(scope="module")
def mixture_seq():
    return sample_iid_degrees(MIXTURE, 20000, np.random.default_rng(77))


def test_single_edge_clean_run():
    seq = DegreeSequence(np.array([1, 1]))
    t = coupled_exploration(seq, 0, 10, np.random.default_rng(0))
    assert len(t.steps) == 1
    assert t.steps[0].event == "none"
    assert t.steps[0].graph_children == 0
    assert t.steps[0].bp_children == 0
    assert t.first_divergence is None
    assert t.graph_generation_sizes == (1, 1)
    assert t.bp_generation_sizes == (1, 1)
    assert t.graph_vertices == 2
    assert t.exhausted
    assert t.half_edge_reuses == 0
    assert t.vertex_reuses == 0


def test_single_edge_reuse_run():
    # with this seed the raw draw lands on the pending half-edge itself,
    # forcing a redraw; the pairing is the same but the trace records it
    seq = DegreeSequence(np.array([1, 1]))
    t = coupled_exploration(seq, 0, 10, np.random.default_rng(1))
    assert t.steps[0].event == "half_edge_reuse"
    assert t.first_divergence == 0
    assert t.half_edge_reuses == 1
    assert t.graph_generation_sizes == (1, 1)


def test_budget_one_stops_before_any_step():
    seq = DegreeSequence(np.array([3, 1, 3, 3]))
    t = coupled_exploration(seq, 0, 1, np.random.default_rng(2))
    assert t.steps == ()
    assert t.graph_vertices == 1
    assert not t.exhausted


def test_argument_validation():
    seq = DegreeSequence(np.array([1, 1]))
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        coupled_exploration(seq, 0, 0, rng)
    with pytest.raises(ValueError):
        coupled_exploration(seq, 5, 3, rng)
    with pytest.raises(ValueError):
        coupled_pair_exploration(seq, (0, 0), 3, rng)


@given(degree_lists(max_n=30), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_trace_fuzz_invariants(degrees, budget, seed):
    seq = DegreeSequence(np.array(degrees))
    rng = np.random.default_rng(seed)
    root = int(rng.integers(0, seq.n))
    t = coupled_exploration(seq, root, budget, rng)
    assert 1 <= t.graph_vertices <= max(budget, 1)
    assert sum(t.graph_generation_sizes) == t.graph_vertices
    assert t.half_edge_reuses + t.vertex_reuses <= len(t.steps)
    d_cap = seq.max_degree - 1 if seq.n > 1 else seq.max_degree
    limit = max(d_cap, int(seq.degrees[root]))
    for i, s in enumerate(t.steps):
        assert 0 <= s.graph_children <= limit
        if s.bp_children is not None:
            assert 0 <= s.bp_children <= seq.max_degree - 1
            # per-step separation of the two sides is at most the degree cap
            assert abs(s.graph_children - s.bp_children) <= seq.max_degree
        before_divergence = t.first_divergence is None or i < t.first_divergence
        if before_divergence:
            assert s.event == "none"
            assert s.bp_children == s.graph_children
    if t.first_divergence is not None:
        s = t.steps[t.first_divergence]
        assert s.event != "none" or s.graph_children != s.bp_children
    if t.exhausted and t.first_divergence is None:
        # a clean fully-explored run is a tree matched step for step
        assert t.bp_generation_sizes == t.graph_generation_sizes
        assert t.bp_next_partial == 0
        assert t.bp_pending == 0


def test_bp_children_follow_size_biased_shifted_law(mixture_seq):
    # pooled across runs, the branching offspring stream is i.i.d. from the
    # shifted law of the sequence, mean nu-hat = sum d(d-1) / sum d
    d = mixture_seq.degrees.astype(np.float64)
    nu_hat = float(np.sum(d * (d - 1)) / np.sum(d))
    draws = []
    for seed in range(40):
        rng = np.random.default_rng(300 + seed)
        root = int(rng.integers(0, mixture_seq.n))
        t = coupled_exploration(mixture_seq, root, 200, rng)
        draws.extend(s.bp_children for s in t.steps if s.bp_children is not None)
    assert len(draws) > 2000
    assert abs(np.mean(draws) - nu_hat) <= 0.1
    assert set(draws) <= {0, 2}


def test_reuse_bounds_examples():
    b = reuse_bounds(100, 200, 10, 10)
    assert b.half_edge == pytest.approx(0.5)
    assert b.vertex == pytest.approx(5.0)
    b = reuse_bounds(500000, 10**6, 10, 100)
    assert b.half_edge == pytest.approx(0.01)
    assert b.vertex == pytest.approx(0.1)
    b = reuse_bounds(10, 20, 3, 0)
    assert b.half_edge == 0.0
    assert b.vertex == 0.0


def test_reuse_bounds_validation():
    with pytest.raises(ValueError):
        reuse_bounds(10, 0, 3, 5)
    with pytest.raises(ValueError):
        reuse_bounds(0, 20, 3, 5)
    with pytest.raises(ValueError):
        reuse_bounds(10, 20, -1, 5)
    with pytest.raises(ValueError):
        reuse_bounds(10, 20, 3, -1)


def test_mean_reuses_within_first_moment_bounds(mixture_seq):
    m = 100
    bounds = reuse_bounds(
        mixture_seq.n, mixture_seq.total_degree, mixture_seq.max_degree, m
    )
    he = []
    vr = []
    for seed in range(300):
        rng = np.random.default_rng(1000 + seed)
        root = int(np.random.default_rng(seed).integers(0, mixture_seq.n))
        t = coupled_exploration(mixture_seq, root, m, rng)
        he.append(t.half_edge_reuses)
        vr.append(t.vertex_reuses)
    assert np.mean(he) <= 1.1 * bounds.half_edge
    assert np.mean(vr) <= 1.1 * bounds.vertex


def test_divergence_free_fraction(mixture_seq):
    m = 20
    bounds = reuse_bounds(
        mixture_seq.n, mixture_seq.total_degree, mixture_seq.max_degree, m
    )
    free = 0
    runs = 300
    for seed in range(runs):
        rng = np.random.default_rng(5000 + seed)
        root = int(np.random.default_rng(seed).integers(0, mixture_seq.n))
        t = coupled_exploration(mixture_seq, root, m, rng)
        free += t.first_divergence is None
    assert free / runs >= 1.0 - 3.0 * (bounds.half_edge + bounds.vertex)


def test_two_root_runs_share_clock_but_not_state():
    seq = sample_iid_degrees(MIXTURE, 5000, np.random.default_rng(70))
    ta, tb = coupled_pair_exploration(seq, (3, 1234), 25, np.random.default_rng(8))
    for t, root in ((ta, 3), (tb, 1234)):
        assert t.root == root
        assert t.budget == 25
        assert t.graph_vertices <= 25
        assert sum(t.graph_generation_sizes) == t.graph_vertices


def test_two_root_bp_totals_uncorrelated():
    seq = sample_iid_degrees(MIXTURE, 5000, np.random.default_rng(70))
    tot_a, tot_b = [], []
    rng_roots = np.random.default_rng(123)
    for seed in range(1500):
        r0, r1 = rng_roots.choice(seq.n, size=2, replace=False)
        ta, tb = coupled_pair_exploration(
            seq, (int(r0), int(r1)), 30, np.random.default_rng(9000 + seed)
        )
        tot_a.append(ta.bp_total)
        tot_b.append(tb.bp_total)
    corr = np.corrcoef(tot_a, tot_b)[0, 1]
    assert abs(corr) <= 0.05


def test_two_root_bp_totals_match_single_root_law():
    seq = sample_iid_degrees(MIXTURE, 5000, np.random.default_rng(70))
    rng_roots = np.random.default_rng(123)
    paired, singles = [], []
    for seed in range(800):
        r0, r1 = rng_roots.choice(seq.n, size=2, replace=False)
        ta, tb = coupled_pair_exploration(
            seq, (int(r0), int(r1)), 30, np.random.default_rng(9000 + seed)
        )
        paired.append(ta.bp_total)
        paired.append(tb.bp_total)
    for seed in range(1600):
        r0 = int(rng_roots.integers(0, seq.n))
        t = coupled_exploration(seq, r0, 30, np.random.default_rng(40000 + seed))
        singles.append(t.bp_total)
    assert stats.ks_2samp(paired, singles).pvalue > 0.001


def test_trace_json_lines_roundtrip():
    seq = DegreeSequence(np.array([3, 1, 3, 3, 2, 2]))
    t = coupled_exploration(seq, 0, 6, np.random.default_rng(17))
    lines = t.to_json_lines().splitlines()
    header = json.loads(lines[0])
    assert header["root"] == 0
    assert header["budget"] == 6
    assert header["steps"] == len(t.steps) == len(lines) - 1
    assert header["bp_total"] == t.bp_total
    for i, line in enumerate(lines[1:]):
        rec = json.loads(line)
        assert rec["step"] == i
        assert rec["event"] in {"none", "half_edge_reuse", "vertex_reuse"}


def test_discrepancy_estimate_trivial_sequence():
    seq = DegreeSequence(np.ones(400, dtype=np.int64))
    est = discrepancy_estimate(seq, 1, 5, 0.1, 40, np.random.default_rng(3))
    assert est.violations == 0
    assert est.violation_rate == 0.0
    assert est.empirical_max_discrepancy == 0
    assert est.budget == 10
    assert est.runs == 40


def test_discrepancy_estimate_validation():
    seq = DegreeSequence(np.array([1, 3, 3, 1]))
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        discrepancy_estimate(seq, 2, 5, 0.1, 10, rng)  # degree above cutoff
    with pytest.raises(ValueError):
        discrepancy_estimate(seq, 3, 5, 0.0, 10, rng)
    with pytest.raises(ValueError):
        discrepancy_estimate(seq, 3, 0, 0.1, 10, rng)
    with pytest.raises(ValueError):
        discrepancy_estimate(seq, 3, 5, 0.1, 0, rng)


def test_discrepancy_estimate_mixture_smoke(mixture_seq):
    est = discrepancy_estimate(mixture_seq, 3, 40, 0.1, 50, np.random.default_rng(6))
    assert 0.0 <= est.violation_rate <= 1.0
    assert est.threshold == pytest.approx(
        (40 * 40 / mixture_seq.total_degree) ** 1.1
    )
    assert est.budget == 160
    assert 0 <= est.empirical_max_discrepancy <= est.budget
