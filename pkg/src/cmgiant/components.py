"""Connected components and the pair statistics built on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_build import HalfEdgeGraph
from .traversal import boundary_counts


@dataclass
class ComponentSummary:
    """Component decomposition of a multigraph.

    Clusters are ranked by size, largest first; ties go to the cluster
    containing the smallest vertex id.

    Attributes:
        sizes: cluster sizes in rank order.
        per_cluster_degree_hist: degree -> vertex count, one dict per cluster.
        per_cluster_edges: edge count per cluster (self-loops count once).
        labels: vertex -> cluster rank.
    """

    sizes: np.ndarray
    per_cluster_degree_hist: list[dict[int, int]]
    per_cluster_edges: np.ndarray
    labels: np.ndarray

    @property
    def num_clusters(self) -> int:
        return int(self.sizes.size)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def component_decomposition(g: HalfEdgeGraph) -> ComponentSummary:
    """Union-find decomposition of g into connected components."""
    n = g.n
    uf = _UnionFind(n)
    mate = g.mate.tolist()
    owner = g.owner.tolist()
    for x in range(g.num_half_edges):
        y = mate[x]
        if x < y:
            uf.union(owner[x], owner[y])

    roots = [uf.find(v) for v in range(n)]
    # Cluster ids in order of first appearance = order of lowest member.
    root_to_id: dict[int, int] = {}
    min_vertex: list[int] = []
    counts: list[int] = []
    for v in range(n):
        r = roots[v]
        cid = root_to_id.get(r)
        if cid is None:
            cid = len(root_to_id)
            root_to_id[r] = cid
            min_vertex.append(v)
            counts.append(0)
        counts[cid] += 1

    order = sorted(range(len(counts)), key=lambda c: (-counts[c], min_vertex[c]))
    rank_of = [0] * len(counts)
    for rank, cid in enumerate(order):
        rank_of[cid] = rank

    labels = np.empty(n, dtype=np.int64)
    degree_hists: list[dict[int, int]] = [dict() for _ in counts]
    edges = np.zeros(len(counts), dtype=np.int64)
    degrees = g.degrees().tolist()
    for v in range(n):
        rank = rank_of[root_to_id[roots[v]]]
        labels[v] = rank
        d = degrees[v]
        hist = degree_hists[rank]
        hist[d] = hist.get(d, 0) + 1
        edges[rank] += d
    edges //= 2  # every edge contributes both half-edges inside its cluster

    sizes = np.array(sorted(counts, reverse=True), dtype=np.int64)
    return ComponentSummary(
        sizes=sizes,
        per_cluster_degree_hist=degree_hists,
        per_cluster_edges=edges,
        labels=labels,
    )


@dataclass(frozen=True)
class GiantStatistics:
    gmax_frac: float
    second_frac: float
    vk_frac: dict[int, float]
    edge_frac: float


def giant_statistics(cs: ComponentSummary, n: int) -> GiantStatistics:
    """Normalized statistics of the largest cluster."""
    gmax_frac = float(cs.sizes[0] / n)
    second_frac = float(cs.sizes[1] / n) if cs.num_clusters > 1 else 0.0
    vk = {k: c / n for k, c in sorted(cs.per_cluster_degree_hist[0].items())}
    edge_frac = float(cs.per_cluster_edges[0] / n)
    return GiantStatistics(gmax_frac, second_frac, vk, edge_frac)


@dataclass(frozen=True)
class SumSquaresRatio:
    all_clusters: float
    large_only: float


def sum_squares_ratio(cs: ComponentSummary, k: int, n: int) -> SumSquaresRatio:
    """sum_i |C_(i)|^2 / n^2, over all clusters and over clusters of size >= k."""
    sizes = cs.sizes
    total = int(np.sum(sizes * sizes))
    large = int(np.sum(sizes[sizes >= k] ** 2))
    nsq = n * n
    return SumSquaresRatio(all_clusters=total / nsq, large_only=large / nsq)


def disconnected_pair_fraction(cs: ComponentSummary, k: int, n: int) -> float:
    """Fraction of ordered vertex pairs in distinct clusters of size >= k.

    Computed from cluster sizes alone: with S the total mass of clusters of
    size at least k and Q their sum of squares, the ordered-pair count is
    S^2 - Q.
    """
    sizes = cs.sizes[cs.sizes >= k]
    s = int(sizes.sum())
    q = int(np.sum(sizes * sizes))
    return (s * s - q) / (n * n)


def boundary_pair_fraction(g: HalfEdgeGraph, r: int) -> float:
    """Fraction of ordered pairs in distinct clusters, both with |∂B_r| >= r.

    Substitutes a local quantity (a fat distance-r boundary) for raw cluster
    size; the same cross-cluster pair count formula applies to the per-cluster
    counts of vertices passing the boundary test.
    """
    cs = component_decomposition(g)
    bc = boundary_counts(g, r)
    passing = bc >= r
    counts = np.bincount(cs.labels[passing], minlength=cs.num_clusters).astype(np.int64)
    s = int(counts.sum())
    q = int(np.sum(counts * counts))
    n = g.n
    return (s * s - q) / (n * n)
