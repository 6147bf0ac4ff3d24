"""Half-edge pairing construction of random multigraphs with given degrees.

Vertices own consecutive half-edge labels: vertex v owns labels
offsets[v] .. offsets[v+1]-1. A multigraph is a perfect matching on the
labels, stored as an involution `mate` with no fixed point. Self-loops pair
two labels of the same vertex and count 2 toward its incident half-edges
but form a single edge; parallel edges are kept.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .degree_model import DegreeSequence


class HalfEdgeGraph:
    """Multigraph on [n] stored as a fixed-point-free involution on labels.

    Attributes:
        offsets: int64 array of length n+1; vertex v owns half-edge labels
            offsets[v] .. offsets[v+1]-1.
        mate: int64 array of length offsets[-1]; mate[x] is the label paired
            with x. An involution: mate[mate[x]] == x and mate[x] != x.
        owner: int64 array mapping each half-edge label to its vertex.
    """

    def __init__(self, offsets: np.ndarray, mate: np.ndarray) -> None:
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.mate = np.asarray(mate, dtype=np.int64)
        degrees = np.diff(self.offsets)
        self.owner = np.repeat(np.arange(self.n, dtype=np.int64), degrees)
        self._adjacency: tuple[list[int], list[int]] | None = None

    @classmethod
    def from_degrees(cls, seq: DegreeSequence, mate: np.ndarray) -> "HalfEdgeGraph":
        offsets = np.zeros(seq.n + 1, dtype=np.int64)
        np.cumsum(seq.degrees, out=offsets[1:])
        return cls(offsets, mate)

    @property
    def n(self) -> int:
        return int(self.offsets.size - 1)

    @property
    def num_half_edges(self) -> int:
        return int(self.offsets[-1])

    @property
    def num_edges(self) -> int:
        return self.num_half_edges // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def half_edges(self, v: int) -> range:
        return range(int(self.offsets[v]), int(self.offsets[v + 1]))

    def neighbors(self, v: int) -> np.ndarray:
        """Neighbor multiset of v (self-loops appear twice)."""
        return self.owner[self.mate[self.offsets[v]:self.offsets[v + 1]]]

    def validate(self) -> None:
        """Check the matching is a fixed-point-free involution on the labels."""
        ell = self.num_half_edges
        if ell % 2 != 0:
            raise ValueError("odd number of half-edges cannot be matched")
        if self.mate.shape != (ell,):
            raise ValueError("mate array length does not match the label count")
        if ell and (self.mate.min() < 0 or self.mate.max() >= ell):
            raise ValueError("mate contains labels out of range")
        if not np.array_equal(self.mate[self.mate], np.arange(ell)):
            raise ValueError("mate is not an involution")
        if np.any(self.mate == np.arange(ell)):
            raise ValueError("mate has a fixed point (a half-edge paired with itself)")

    def adjacency(self) -> tuple[list[int], list[int]]:
        """Flat adjacency as plain Python lists (offsets, neighbor-per-half-edge).

        Cached; the neighbor list mirrors half-edge order, so neighbors of v
        live at positions offsets[v] .. offsets[v+1]-1. Pure-Python lists keep
        the breadth-first loops in this library fast.
        """
        if self._adjacency is None:
            nbr = self.owner[self.mate]
            self._adjacency = (self.offsets.tolist(), nbr.tolist())
        return self._adjacency

    def edge_iter(self):
        """Yield each edge once as an ordered pair (u, v) with u <= v."""
        for x in range(self.num_half_edges):
            y = int(self.mate[x])
            if x < y:
                u = int(self.owner[x])
                v = int(self.owner[y])
                yield (u, v) if u <= v else (v, u)

    def save_edge_list(self, path: str | Path) -> None:
        """Write the edge list as "u v" per line, self-loops as "v v"."""
        with open(path, "w") as fh:
            for u, v in self.edge_iter():
                fh.write(f"{u} {v}\n")


@dataclass(frozen=True)
class ExplosionMap:
    """Bookkeeping tying a degree sequence to its truncated-and-exploded twin.

    Degrees above the cutoff b keep only their b lowest-labeled half-edges;
    each displaced half-edge becomes a brand-new degree-1 vertex that keeps
    the original label. `half_edge_relabeling[x]` is the label of original
    half-edge x in the canonical labeling of the exploded sequence, and
    `origin[j]` is the original vertex that exploded vertex original_n + j
    came from.
    """

    original_degrees: DegreeSequence
    truncated_degrees: DegreeSequence
    cutoff: int
    origin: np.ndarray
    half_edge_relabeling: np.ndarray

    @property
    def original_n(self) -> int:
        return self.original_degrees.n

    @property
    def exploded_n(self) -> int:
        return self.truncated_degrees.n

    def validate(self) -> None:
        relab = self.half_edge_relabeling
        ell = self.original_degrees.total_degree
        if sorted(relab.tolist()) != list(range(ell)):
            raise ValueError("half-edge relabeling is not a bijection on labels")
        if self.truncated_degrees.total_degree != ell:
            raise ValueError("explosion changed the total degree")
        n = self.original_n
        if np.any(self.truncated_degrees.degrees[:n] !=
                  np.minimum(self.original_degrees.degrees, self.cutoff)):
            raise ValueError("kept vertices must have degree min(d, b)")
        if self.exploded_n > n and np.any(self.truncated_degrees.degrees[n:] != 1):
            raise ValueError("exploded vertices must have degree 1")


def pair_half_edges(seq: DegreeSequence, rng: np.random.Generator) -> HalfEdgeGraph:
    """Draw a uniform perfect matching on the half-edges of seq.

    Sequential pairing: repeatedly take the lowest unpaired label and match
    it with a partner drawn uniformly from the remaining unpaired labels.
    Exchangeability of the pairing order makes the matching uniform. Runs in
    O(total degree).
    """
    ell = seq.total_degree
    mate = np.full(ell, -1, dtype=np.int64)
    pool = list(range(ell))
    pos = list(range(ell))

    def remove(label: int) -> None:
        i = pos[label]
        last = pool[-1]
        pool[i] = last
        pos[last] = i
        pool.pop()
        pos[label] = -1

    # One uniform draw per pair, batched up front; pair t draws from a pool
    # of ell - 2t - 1 candidates after the lowest label is set aside.
    uniforms = rng.random(ell // 2)
    mate_list = mate.tolist()
    t = 0
    for x in range(ell):
        if mate_list[x] >= 0:
            continue
        remove(x)
        j = int(uniforms[t] * len(pool))
        t += 1
        y = pool[j]
        remove(y)
        mate_list[x] = y
        mate_list[y] = x
    graph = HalfEdgeGraph.from_degrees(seq, np.array(mate_list, dtype=np.int64))
    graph.validate()
    return graph


def truncate_explode(seq: DegreeSequence, b: int) -> ExplosionMap:
    """Truncate degrees at b, exploding displaced half-edges into new vertices.

    Vertex v keeps its min(d_v, b) lowest labels; every displaced half-edge
    becomes a new degree-1 vertex appended after the originals, scanning
    vertices in order and their displaced labels in increasing order. Total
    degree is preserved exactly.

    Args:
        b: degree cutoff, at least 1.
    """
    if b < 1:
        raise ValueError("cutoff must be at least 1")
    degrees = seq.degrees
    n = seq.n
    kept = np.minimum(degrees, b)
    displaced = degrees - kept
    n_plus = int(displaced.sum())
    new_degrees = np.concatenate([kept, np.ones(n_plus, dtype=np.int64)])
    truncated = DegreeSequence(new_degrees)

    new_offsets = np.zeros(truncated.n + 1, dtype=np.int64)
    np.cumsum(new_degrees, out=new_offsets[1:])
    old_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degrees, out=old_offsets[1:])

    relab = np.empty(seq.total_degree, dtype=np.int64)
    origin = np.empty(n_plus, dtype=np.int64)
    j = 0
    for v in range(n):
        base_old = int(old_offsets[v])
        base_new = int(new_offsets[v])
        d = int(degrees[v])
        k = int(kept[v])
        for t in range(k):
            relab[base_old + t] = base_new + t
        for t in range(k, d):
            relab[base_old + t] = int(new_offsets[n + j])
            origin[j] = v
            j += 1
    emap = ExplosionMap(
        original_degrees=seq,
        truncated_degrees=truncated,
        cutoff=b,
        origin=origin,
        half_edge_relabeling=relab,
    )
    emap.validate()
    return emap


def apply_shared_matching(
    emap: ExplosionMap, mate: np.ndarray
) -> tuple[HalfEdgeGraph, HalfEdgeGraph]:
    """Interpret one matching on the shared labels in both degree models.

    The same involution drives the original graph directly and the exploded
    graph through the label bijection, which is what makes connectivity in
    the exploded graph imply connectivity among the original vertices.
    """
    g = HalfEdgeGraph.from_degrees(emap.original_degrees, mate)
    relab = emap.half_edge_relabeling
    mate_prime = np.empty_like(mate)
    mate_prime[relab] = relab[mate]
    g_prime = HalfEdgeGraph.from_degrees(emap.truncated_degrees, mate_prime)
    g.validate()
    g_prime.validate()
    return g, g_prime


def coupled_pairing(
    emap: ExplosionMap, rng: np.random.Generator
) -> tuple[HalfEdgeGraph, HalfEdgeGraph]:
    """Draw one uniform matching and build both coupled graphs from it."""
    base = pair_half_edges(emap.original_degrees, rng)
    return apply_shared_matching(emap, base.mate)


def disjoint_union(g1: HalfEdgeGraph, g2: HalfEdgeGraph) -> HalfEdgeGraph:
    """Place two multigraphs side by side with no edges between them."""
    shift_v = g1.num_half_edges
    offsets = np.concatenate([g1.offsets, g2.offsets[1:] + g1.offsets[-1]])
    mate = np.concatenate([g1.mate, g2.mate + shift_v])
    return HalfEdgeGraph(offsets, mate)
