"""Coupled exploration of a pairing alongside its branching approximation.

One run grows the component of a root breadth-first while a branching
process consumes the same randomness. At every step the next pending
half-edge x draws a partner y uniformly over all half-edge labels, paired
or not. The branching side always keeps the raw draw and gains
deg(owner(y)) - 1 children, which makes its offspring stream i.i.d. from
the size-biased-minus-one law of the degree sequence. The graph side keeps
y only when the draw is usable: hitting x itself or an already paired label
is a half-edge reuse and forces a uniform redraw among the remaining
unpaired labels (excluding x), while a usable draw landing on an already
visited vertex is a vertex reuse that closes a cycle and yields no new
vertices. The first step that is not clean, or where the two child counts
differ, is the moment the processes part ways.

Two-root runs share the matching and the draw clock but keep separate
visited sets and separate branching states; their offspring streams stay
independent because every branching draw is a fresh uniform label.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .degree_model import DegreeSequence

EVENT_NONE = "none"
EVENT_HALF_EDGE_REUSE = "half_edge_reuse"
EVENT_VERTEX_REUSE = "vertex_reuse"


@dataclass(frozen=True)
class TraceStep:
    """One pairing step: child counts on both sides and the event class.

    bp_children is None when the branching side had already died by the
    time this step ran.
    """

    graph_children: int
    bp_children: int | None
    event: str


@dataclass(frozen=True)
class CouplingTrace:
    """Record of one coupled run from a single root."""

    root: int
    budget: int
    steps: tuple[TraceStep, ...]
    first_divergence: int | None
    graph_generation_sizes: tuple[int, ...]
    graph_complete_through: int
    bp_generation_sizes: tuple[int, ...]
    bp_next_partial: int
    bp_pending: int
    graph_vertices: int
    half_edge_reuses: int
    vertex_reuses: int
    exhausted: bool

    @property
    def bp_total(self) -> int:
        return sum(self.bp_generation_sizes) + self.bp_next_partial

    def to_json_lines(self) -> str:
        header = {
            "root": self.root,
            "budget": self.budget,
            "first_divergence": self.first_divergence,
            "graph_generation_sizes": list(self.graph_generation_sizes),
            "graph_complete_through": self.graph_complete_through,
            "bp_generation_sizes": list(self.bp_generation_sizes),
            "bp_next_partial": self.bp_next_partial,
            "bp_pending": self.bp_pending,
            "graph_vertices": self.graph_vertices,
            "bp_total": self.bp_total,
            "half_edge_reuses": self.half_edge_reuses,
            "vertex_reuses": self.vertex_reuses,
            "exhausted": self.exhausted,
            "steps": len(self.steps),
        }
        lines = [json.dumps(header, sort_keys=True)]
        for i, s in enumerate(self.steps):
            lines.append(
                json.dumps(
                    {
                        "step": i,
                        "event": s.event,
                        "graph_children": s.graph_children,
                        "bp_children": s.bp_children,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"


class _RootState:
    """Mutable exploration state for one root."""

    __slots__ = (
        "root",
        "queue",
        "visited",
        "gen_counts",
        "last_popped_level",
        "steps",
        "first_divergence",
        "he_reuses",
        "v_reuses",
        "bp_gens",
        "bp_remaining",
        "bp_next",
        "bp_dead",
        "stopped",
        "exhausted",
    )

    def __init__(self, root: int, root_degree: int, half_edges):
        self.root = root
        self.queue = deque((h, 1) for h in half_edges)
        self.visited = {root}
        self.gen_counts = [1]
        self.last_popped_level = 0
        self.steps: list[TraceStep] = []
        self.first_divergence: int | None = None
        self.he_reuses = 0
        self.v_reuses = 0
        self.bp_gens = [1, root_degree]
        self.bp_remaining = root_degree
        self.bp_next = 0
        self.bp_dead = root_degree == 0
        self.stopped = False
        self.exhausted = False


class _SharedMatching:
    """Lazy uniform pairing shared by all roots of one run."""

    def __init__(self, degrees: np.ndarray, rng: np.random.Generator):
        self.degrees = degrees.tolist()
        self.offsets = np.concatenate(([0], np.cumsum(degrees))).tolist()
        self.owner = np.repeat(np.arange(len(degrees)), degrees).tolist()
        self.ell = self.offsets[-1]
        self.mate = [-1] * self.ell
        self.rng = rng
        self.pool: list[int] | None = None
        self.pos: list[int] | None = None

    def half_edges(self, v: int):
        return range(self.offsets[v], self.offsets[v + 1])

    def _build_pool(self, exclude: int) -> None:
        self.pool = [h for h in range(self.ell) if self.mate[h] < 0 and h != exclude]
        self.pos = [-1] * self.ell
        for j, h in enumerate(self.pool):
            self.pos[h] = j

    def _pool_remove(self, h: int) -> None:
        if self.pool is None:
            return
        j = self.pos[h]
        if j < 0:
            return
        last = self.pool[-1]
        self.pool[j] = last
        self.pos[last] = j
        self.pool.pop()
        self.pos[h] = -1

    def redraw(self, x: int) -> int:
        """Uniform unpaired label other than x."""
        if self.pool is None:
            self._build_pool(x)
        else:
            self._pool_remove(x)
        j = int(self.rng.integers(0, len(self.pool)))
        return self.pool[j]

    def pair(self, x: int, y: int) -> None:
        self.mate[x] = y
        self.mate[y] = x
        self._pool_remove(x)
        self._pool_remove(y)


def _step(sm: _SharedMatching, st: _RootState, budget: int) -> bool:
    """Advance one root by one pairing; False when it has nothing to do."""
    x = level = None
    while st.queue:
        h, lev = st.queue.popleft()
        if sm.mate[h] < 0:
            x, level = h, lev
            break
    if x is None:
        st.stopped = True
        st.exhausted = True
        return False
    st.last_popped_level = level

    y_raw = int(sm.rng.integers(0, sm.ell))
    if st.bp_dead:
        bp_children = None
    else:
        bp_children = sm.degrees[sm.owner[y_raw]] - 1
        st.bp_remaining -= 1
        st.bp_next += bp_children
        if st.bp_remaining == 0:
            if st.bp_next == 0:
                st.bp_dead = True
            else:
                st.bp_gens.append(st.bp_next)
                st.bp_remaining = st.bp_next
                st.bp_next = 0

    if y_raw == x or sm.mate[y_raw] >= 0:
        event = EVENT_HALF_EDGE_REUSE
        st.he_reuses += 1
        y = sm.redraw(x)
    else:
        y = y_raw
        event = EVENT_NONE
    sm.pair(x, y)

    w = sm.owner[y]
    if w in st.visited:
        if event == EVENT_NONE:
            event = EVENT_VERTEX_REUSE
            st.v_reuses += 1
        graph_children = 0
    else:
        st.visited.add(w)
        while len(st.gen_counts) <= level:
            st.gen_counts.append(0)
        st.gen_counts[level] += 1
        fresh = [h for h in sm.half_edges(w) if sm.mate[h] < 0]
        graph_children = len(fresh)
        st.queue.extend((h, level + 1) for h in fresh)

    st.steps.append(TraceStep(graph_children, bp_children, event))
    if st.first_divergence is None and (
        event != EVENT_NONE or bp_children != graph_children
    ):
        st.first_divergence = len(st.steps) - 1

    if len(st.visited) >= budget:
        st.stopped = True
    return True


def _finish(st: _RootState, budget: int) -> CouplingTrace:
    return CouplingTrace(
        root=st.root,
        budget=budget,
        steps=tuple(st.steps),
        first_divergence=st.first_divergence,
        graph_generation_sizes=tuple(st.gen_counts),
        graph_complete_through=st.last_popped_level,
        bp_generation_sizes=tuple(st.bp_gens),
        bp_next_partial=st.bp_next,
        bp_pending=0 if st.bp_dead else st.bp_remaining,
        graph_vertices=len(st.visited),
        half_edge_reuses=st.he_reuses,
        vertex_reuses=st.v_reuses,
        exhausted=st.exhausted,
    )


def _run(
    seq: DegreeSequence,
    roots: tuple[int, ...],
    budget: int,
    rng: np.random.Generator,
    bp_follow_levels: int = 0,
    bp_follow_cap: int = 0,
) -> list[CouplingTrace]:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if len(set(roots)) != len(roots):
        raise ValueError("roots must be distinct")
    for r in roots:
        if not 0 <= r < seq.n:
            raise ValueError(f"root {r} out of range")
    sm = _SharedMatching(seq.degrees, rng)
    states = [
        _RootState(r, sm.degrees[r], sm.half_edges(r)) for r in roots
    ]
    for st in states:
        if len(st.visited) >= budget:
            st.stopped = True
    active = [st for st in states if not st.stopped]
    while active:
        nxt = []
        for st in active:
            _step(sm, st, budget)
            if not st.stopped:
                nxt.append(st)
        active = nxt
    if bp_follow_levels:
        for st in states:
            _follow_bp(sm, st, bp_follow_levels, bp_follow_cap)
    return [_finish(st, budget) for st in states]


def _follow_bp(
    sm: _SharedMatching, st: _RootState, levels: int, cap: int
) -> None:
    """Keep running the branching side alone after its graph run stopped."""
    while (
        not st.bp_dead
        and len(st.bp_gens) - 1 <= levels
        and sum(st.bp_gens) + st.bp_next <= cap
    ):
        y = int(sm.rng.integers(0, sm.ell))
        st.bp_remaining -= 1
        st.bp_next += sm.degrees[sm.owner[y]] - 1
        if st.bp_remaining == 0:
            if st.bp_next == 0:
                st.bp_dead = True
            else:
                st.bp_gens.append(st.bp_next)
                st.bp_remaining = st.bp_next
                st.bp_next = 0


def coupled_exploration(
    seq: DegreeSequence, root: int, budget: int, rng: np.random.Generator
) -> CouplingTrace:
    """Coupled run from one root; stops at budget discovered vertices."""
    return _run(seq, (root,), budget, rng)[0]


def coupled_pair_exploration(
    seq: DegreeSequence,
    roots: tuple[int, int],
    budget: int,
    rng: np.random.Generator,
) -> tuple[CouplingTrace, CouplingTrace]:
    """Two coupled runs sharing one matching and one draw clock.

    Each root keeps its own visited set and its own branching state; budget
    applies to each root separately.
    """
    a, b = _run(seq, (roots[0], roots[1]), budget, rng)
    return a, b


@dataclass(frozen=True)
class ReuseBounds:
    """First-moment ceilings for reuse events within a vertex budget."""

    half_edge: float
    vertex: float


def reuse_bounds(n: int, ell_n: int, d_max: int, m_n: int) -> ReuseBounds:
    """Expected-count bounds for runs stopped at m_n discovered vertices.

    Both bounds are the crude union style: at most m_n steps matter per
    vertex discovered, each hitting an off-limits label with probability at
    most m_n/ell_n for half-edge reuse, and at most m_n * d_max / ell_n for
    vertex reuse.
    """
    if ell_n <= 0:
        raise ValueError("need a positive number of half-edges")
    if n <= 0 or d_max < 0 or m_n < 0:
        raise ValueError("counts must be nonnegative (n positive)")
    return ReuseBounds(
        half_edge=m_n * m_n / ell_n,
        vertex=m_n * m_n * d_max / ell_n,
    )


@dataclass(frozen=True)
class DiscrepancyEstimate:
    """Violation rate of the generation-size comparison over many runs."""

    violation_rate: float
    violations: int
    runs: int
    threshold: float
    budget: int
    empirical_max_discrepancy: int


def discrepancy_estimate(
    seq: DegreeSequence,
    b: int,
    m_bar: int,
    delta: float,
    runs: int,
    rng: np.random.Generator,
) -> DiscrepancyEstimate:
    """Fraction of coupled runs whose generation sizes separate too early.

    Each run starts at a uniform root with budget (b + 1) * m_bar. The
    boundary sizes of the graph ball are compared with the branching
    generation sizes for every depth k up to the first depth where the ball
    holds at least m_bar vertices (all recorded depths when the component
    is smaller). A run is a violation when any compared depth differs by
    more than (m_bar^2 / ell)^(1 + delta).

    Degrees above b are rejected: the comparison is calibrated for
    sequences already truncated at b.
    """
    if seq.max_degree > b:
        raise ValueError("degree sequence exceeds the stated cutoff b")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if m_bar < 1 or runs < 1:
        raise ValueError("m_bar and runs must be positive")
    budget = (b + 1) * m_bar
    ell = seq.total_degree
    threshold = (m_bar * m_bar / ell) ** (1.0 + delta)
    roots = rng.integers(0, seq.n, size=runs)
    violations = 0
    max_discrepancy = 0
    for root in roots:
        trace = _run(
            seq,
            (int(root),),
            budget,
            rng,
            bp_follow_levels=64,
            bp_follow_cap=budget,
        )[0]
        ggens = trace.graph_generation_sizes
        cum = 0
        k_bar = len(ggens) - 1
        for k, c in enumerate(ggens):
            cum += c
            if cum >= m_bar:
                k_bar = k
                break
        bgens = trace.bp_generation_sizes
        bad = False
        for k in range(1, k_bar + 1):
            g = ggens[k] if k < len(ggens) else 0
            if k < len(bgens):
                p = bgens[k]
            elif trace.bp_pending == 0 and trace.bp_next_partial == 0:
                p = 0
            else:
                p = trace.bp_next_partial if k == len(bgens) else 0
            gap = abs(g - p)
            if gap > max_discrepancy:
                max_discrepancy = gap
            if gap > threshold:
                bad = True
        if bad:
            violations += 1
    return DiscrepancyEstimate(
        violation_rate=violations / runs,
        violations=violations,
        runs=runs,
        threshold=threshold,
        budget=budget,
        empirical_max_discrepancy=max_discrepancy,
    )
