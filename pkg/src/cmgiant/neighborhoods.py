"""Rooted neighborhoods, canonical codes, and ball distributions.

A radius-r ball keeps every vertex within distance r of the root and every
edge whose two endpoints both lie in the ball (multiplicities and self-loops
included). Each vertex also records how many of its half-edges leave the
ball; those stubs let a radius-0 ball remember the root's degree, matching
what the branching-process side of the comparison knows about its leaves.

Canonical codes are computed by color refinement seeded with
(distance from root, degree inside the ball, loop count, stub count),
followed by individualization inside residual color classes. Two balls get
the same code exactly when some root- and stub-preserving isomorphism maps
one onto the other. Balls that exceed the size cap, or whose refinement
leaves a color class larger than the branching cap, collapse into a single
distinguished oversize code.
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass

import numpy as np

from .components import ComponentSummary
from .graph_build import HalfEdgeGraph
from .local_limit import OffspringSpec

DEFAULT_BALL_CAP = 1000
CLASS_CAP = 8
_OVERSIZE = b"!oversize"


@dataclass(frozen=True)
class RootedBall:
    """A finite rooted multigraph with stub marks on its vertices.

    Vertices are 0 .. num_vertices-1 with 0 the root. Edges are an ordered
    multiset of pairs (i, j) with i <= j; a self-loop (i, i) counts 2 toward
    i's incident half-edges. stubs[i] counts half-edges of i that leave the
    ball.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...]
    stubs: tuple[int, ...]
    radius: int
    boundary_size: int

    def degree_in_ball(self, v: int) -> int:
        d = 0
        for a, b in self.edges:
            d += (a == v) + (b == v)
        return d


@dataclass(frozen=True)
class CanonicalBall:
    """Byte code naming a rooted isomorphism class; hashable and comparable."""

    code: bytes

    @property
    def oversize(self) -> bool:
        return self.code == _OVERSIZE

    def hex_digest(self) -> str:
        return hashlib.sha1(self.code).hexdigest()[:12]


OVERSIZE_BALL = CanonicalBall(_OVERSIZE)


def _ball_structure(ball: RootedBall):
    """Adjacency dicts, loop counts, and root distances of a ball."""
    n = ball.num_vertices
    nbr: list[dict[int, int]] = [dict() for _ in range(n)]
    loops = [0] * n
    for a, b in ball.edges:
        if a == b:
            loops[a] += 1
        else:
            nbr[a][b] = nbr[a].get(b, 0) + 1
            nbr[b][a] = nbr[b].get(a, 0) + 1
    dist = [-1] * n
    dist[0] = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in nbr[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    if any(d < 0 for d in dist):
        raise ValueError("ball is not connected to its root")
    return nbr, loops, dist


def _dense_ranks(keys: list) -> list[int]:
    order = {key: i for i, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def _refine(ranks: list[int], nbr: list[dict[int, int]]) -> list[int]:
    """Iterate neighborhood signatures until the partition stabilizes."""
    classes = len(set(ranks))
    while True:
        sigs = [
            (
                ranks[u],
                tuple(sorted((ranks[v], m) for v, m in nbr[u].items())),
            )
            for u in range(len(ranks))
        ]
        ranks = _dense_ranks(sigs)
        new_classes = len(set(ranks))
        if new_classes == classes:
            return ranks
        classes = new_classes


def _serialize(ball: RootedBall, position: list[int]) -> bytes:
    edges = sorted(
        (min(position[a], position[b]), max(position[a], position[b]))
        for a, b in ball.edges
    )
    stubs = [0] * ball.num_vertices
    for v, s in enumerate(ball.stubs):
        stubs[position[v]] = s
    return repr((ball.num_vertices, tuple(edges), tuple(stubs))).encode()


def _canon_search(
    ball: RootedBall, ranks: list[int], nbr: list[dict[int, int]]
) -> bytes | None:
    """Individualization-refinement; None means a class exceeded CLASS_CAP."""
    ranks = _refine(ranks, nbr)
    n = ball.num_vertices
    members: dict[int, list[int]] = {}
    for v, rk in enumerate(ranks):
        members.setdefault(rk, []).append(v)
    target = None
    for rk in sorted(members):
        if len(members[rk]) > 1:
            target = members[rk]
            break
    if target is None:
        return _serialize(ball, ranks)
    if len(target) > CLASS_CAP:
        return None
    best: bytes | None = None
    for v in target:
        child = [(rk, 0 if u == v else 1) for u, rk in enumerate(ranks)]
        code = _canon_search(ball, _dense_ranks(child), nbr)
        if code is None:
            return None
        if best is None or code < best:
            best = code
    return best


def canonical_code(ball: RootedBall) -> CanonicalBall:
    """Canonical byte code of a rooted ball (oversize when refinement blows up)."""
    nbr, loops, dist = _ball_structure(ball)
    seeds = [
        (
            dist[u],
            sum(nbr[u].values()) + 2 * loops[u],
            loops[u],
            ball.stubs[u],
        )
        for u in range(ball.num_vertices)
    ]
    code = _canon_search(ball, _dense_ranks(seeds), nbr)
    if code is None:
        return OVERSIZE_BALL
    return CanonicalBall(b"G" + code)


def extract_ball(
    g: HalfEdgeGraph, v: int, r: int, cap: int = DEFAULT_BALL_CAP
) -> tuple[RootedBall, bool]:
    """The radius-r ball of v in g; the flag reports a cap overflow."""
    offsets, nbr = g.adjacency()
    dist = {v: 0}
    order = [v]
    queue = deque([v])
    overflow = False
    while queue:
        u = queue.popleft()
        if dist[u] == r:
            break
        for i in range(offsets[u], offsets[u + 1]):
            w = nbr[i]
            if w not in dist:
                if len(order) == cap:
                    overflow = True
                    queue.clear()
                    break
                dist[w] = dist[u] + 1
                order.append(w)
                queue.append(w)
        if overflow:
            break
    local = {u: i for i, u in enumerate(order)}
    mate = g.mate
    owner = g.owner
    goff = g.offsets
    edges = []
    stubs = [0] * len(order)
    for u in order:
        lu = local[u]
        for x in range(int(goff[u]), int(goff[u + 1])):
            y = int(mate[x])
            w = int(owner[y])
            if w in local:
                if x < y:
                    a, b = lu, local[w]
                    edges.append((a, b) if a <= b else (b, a))
            else:
                stubs[lu] += 1
    boundary = sum(1 for u in order if dist[u] == r)
    ball = RootedBall(
        num_vertices=len(order),
        edges=tuple(sorted(edges)),
        stubs=tuple(stubs),
        radius=r,
        boundary_size=boundary,
    )
    return ball, overflow


def canonical_ball(
    g: HalfEdgeGraph, v: int, r: int, cap: int = DEFAULT_BALL_CAP
) -> tuple[RootedBall, CanonicalBall]:
    """Extract and encode the radius-r ball of v.

    Balls that would exceed cap vertices come back truncated with the
    distinguished oversize code.
    """
    ball, overflow = extract_ball(g, v, r, cap)
    if overflow:
        return ball, OVERSIZE_BALL
    return ball, canonical_code(ball)


BallDistribution = dict[CanonicalBall, float]


def empirical_ball_distribution(
    g: HalfEdgeGraph,
    r: int,
    sample_size: int | None = None,
    rng: np.random.Generator | None = None,
    cap: int = DEFAULT_BALL_CAP,
) -> BallDistribution:
    """Distribution of ball codes over roots of g.

    sample_size None sweeps every vertex; otherwise roots are drawn i.i.d.
    uniformly (rng required).
    """
    if sample_size is None:
        roots = range(g.n)
        total = g.n
    else:
        if rng is None:
            raise ValueError("sampling roots needs an rng")
        roots = rng.integers(0, g.n, size=sample_size).tolist()
        total = sample_size
    counts: dict[CanonicalBall, int] = {}
    for v in roots:
        _, code = canonical_ball(g, int(v), r, cap)
        counts[code] = counts.get(code, 0) + 1
    return {code: c / total for code, c in counts.items()}


@dataclass(frozen=True)
class RestrictedBallDistribution:
    """Ball-code masses split by membership in the largest cluster.

    Masses are per vertex of the whole graph, so giant sums to the giant
    fraction, non_giant to its complement, and key-by-key the two add up to
    the unrestricted distribution.
    """

    giant: BallDistribution
    non_giant: BallDistribution


def restricted_ball_distribution(
    g: HalfEdgeGraph,
    r: int,
    cs: ComponentSummary,
    cap: int = DEFAULT_BALL_CAP,
) -> RestrictedBallDistribution:
    giant_counts: dict[CanonicalBall, int] = {}
    other_counts: dict[CanonicalBall, int] = {}
    labels = cs.labels
    n = g.n
    for v in range(n):
        _, code = canonical_ball(g, v, r, cap)
        bucket = giant_counts if labels[v] == 0 else other_counts
        bucket[code] = bucket.get(code, 0) + 1
    return RestrictedBallDistribution(
        giant={code: c / n for code, c in giant_counts.items()},
        non_giant={code: c / n for code, c in other_counts.items()},
    )


class _DrawBuffer:
    """Buffered i.i.d. draws from a small integer pmf."""

    def __init__(self, support, probabilities, rng: np.random.Generator, chunk: int = 1 << 18):
        self._support = np.array(support, dtype=np.int64)
        self._probs = np.array(probabilities)
        self._rng = rng
        self._chunk = chunk
        self._buf: list[int] = []

    def take(self) -> int:
        if not self._buf:
            self._buf = self._rng.choice(
                self._support, size=self._chunk, p=self._probs
            ).tolist()
        return self._buf.pop()


def bp_ball_distribution(
    spec: OffspringSpec,
    r: int,
    samples: int,
    rng: np.random.Generator,
    cap: int = DEFAULT_BALL_CAP,
) -> BallDistribution:
    """Distribution of depth-r tree codes under the two-stage process.

    Nodes at depth r draw their child count but keep it as a stub mark, the
    exact analogue of a graph vertex on the ball's boundary. Codes are
    memoized on a sorted-subtree key, so the generic encoder runs once per
    distinct tree shape.
    """
    root_draws = _DrawBuffer(spec.root_pmf.support, spec.root_pmf.probabilities, rng)
    child_draws = _DrawBuffer(
        spec.shifted_pmf.support, spec.shifted_pmf.probabilities, rng
    )
    memo: dict = {}
    counts: dict[CanonicalBall, int] = {}
    for _ in range(samples):
        parent: list[int] = [-1]
        depth: list[int] = [0]
        stub: list[int] = [0]
        children: list[list[int]] = [[]]
        oversize = False
        queue = deque([0])
        while queue:
            u = queue.popleft()
            c = root_draws.take() if u == 0 else child_draws.take()
            if depth[u] == r:
                stub[u] = c
                continue
            for _ in range(c):
                if len(parent) == cap:
                    oversize = True
                    queue.clear()
                    break
                w = len(parent)
                parent.append(u)
                depth.append(depth[u] + 1)
                stub.append(0)
                children.append([])
                children[u].append(w)
                queue.append(w)
            if oversize:
                break
        if oversize:
            code = OVERSIZE_BALL
        else:
            keys: list = [None] * len(parent)
            for u in range(len(parent) - 1, -1, -1):
                if depth[u] == r:
                    keys[u] = ("L", stub[u])
                else:
                    keys[u] = ("I", tuple(sorted(keys[w] for w in children[u])))
            root_key = keys[0]
            code = memo.get(root_key)
            if code is None:
                ball = RootedBall(
                    num_vertices=len(parent),
                    edges=tuple(
                        sorted(
                            (min(parent[u], u), max(parent[u], u))
                            for u in range(1, len(parent))
                        )
                    ),
                    stubs=tuple(stub),
                    radius=r,
                    boundary_size=sum(1 for d in depth if d == r),
                )
                code = canonical_code(ball)
                memo[root_key] = code
        counts[code] = counts.get(code, 0) + 1
    return {code: c / samples for code, c in counts.items()}


def tv_distance(a: BallDistribution, b: BallDistribution) -> float:
    """Total variation distance between two code distributions."""
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def tree_string(ball: RootedBall) -> str:
    """Nested-parentheses rendering when the ball is a tree, else ''."""
    n = ball.num_vertices
    if len(ball.edges) != n - 1 or any(a == b for a, b in ball.edges):
        return ""
    try:
        nbr, _, dist = _ball_structure(ball)
    except ValueError:
        return ""
    children: list[list[int]] = [[] for _ in range(n)]
    for a, b in ball.edges:
        lo, hi = (a, b) if dist[a] < dist[b] else (b, a)
        children[lo].append(hi)

    def render(u: int) -> str:
        inner = ",".join(sorted(render(w) for w in children[u]))
        mark = f"+{ball.stubs[u]}" if ball.stubs[u] else ""
        return f"({inner}){mark}"

    return render(0)


def write_distribution_csv(dist: BallDistribution, balls: dict, path) -> None:
    """Dump a code distribution as CSV: code hash, tree string, mass.

    balls maps codes to a representative RootedBall where one is known;
    missing representatives leave the tree column empty.
    """
    import csv

    rows = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0].code))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["code_hash", "tree", "mass"])
        for code, mass in rows:
            rep = balls.get(code)
            writer.writerow(
                [code.hex_digest(), tree_string(rep) if rep else "", repr(mass)]
            )
