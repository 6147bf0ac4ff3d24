"""Pairwise graph distances and their logarithmic scaling.

Distances between uniformly chosen vertex pairs concentrate around
log n / log nu when the mean forward branching factor nu exceeds one, and
the chance that a pair is connected at all approaches the square of the
giant fraction. Both effects are summarized here from a plain sample of
bidirectional searches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_build import HalfEdgeGraph
from .traversal import pair_distance


@dataclass(frozen=True)
class DistanceSample:
    """Distances of sampled vertex pairs; unreachable pairs counted apart."""

    pairs_attempted: int
    finite_distances: tuple[int, ...]
    infinite_count: int

    @property
    def finite_fraction(self) -> float:
        return len(self.finite_distances) / self.pairs_attempted

    def mean_finite(self) -> float:
        if not self.finite_distances:
            raise ValueError("no finite distances in the sample")
        return sum(self.finite_distances) / len(self.finite_distances)

    def median_finite(self) -> float:
        if not self.finite_distances:
            raise ValueError("no finite distances in the sample")
        return float(np.median(self.finite_distances))


def sample_distances(
    g: HalfEdgeGraph, pairs: int, rng: np.random.Generator
) -> DistanceSample:
    """Distances between `pairs` independent uniform vertex pairs.

    The two endpoints are drawn independently, so a pair may land on one
    vertex twice; that contributes a distance of 0, an O(1/n) effect kept
    for fidelity to uniform-pair sampling.
    """
    if pairs < 1:
        raise ValueError("pairs must be positive")
    finite: list[int] = []
    infinite = 0
    a = rng.integers(0, g.n, size=pairs)
    b = rng.integers(0, g.n, size=pairs)
    for u, v in zip(a.tolist(), b.tolist()):
        d = pair_distance(g, u, v)
        if d is None:
            infinite += 1
        else:
            finite.append(d)
    return DistanceSample(
        pairs_attempted=pairs,
        finite_distances=tuple(finite),
        infinite_count=infinite,
    )


@dataclass(frozen=True)
class DistanceScalingReport:
    """Sampled distance statistics against the log n / log nu reference."""

    reference: float
    mean_finite: float
    median_finite: float
    mean_ratio: float
    median_ratio: float
    finite_fraction: float


def scaling_report(
    sample: DistanceSample, n: int, nu: float
) -> DistanceScalingReport:
    """Compare a distance sample against the logarithmic growth reference.

    Meaningful only in the supercritical regime, so nu must exceed one and
    n must be at least 3 for the reference log n / log nu to be positive.
    """
    if nu <= 1.0:
        raise ValueError("scaling reference needs nu > 1")
    if n < 3:
        raise ValueError("scaling reference needs n >= 3")
    reference = math.log(n) / math.log(nu)
    mean = sample.mean_finite()
    median = sample.median_finite()
    return DistanceScalingReport(
        reference=reference,
        mean_finite=mean,
        median_finite=median,
        mean_ratio=mean / reference,
        median_ratio=median / reference,
        finite_fraction=sample.finite_fraction,
    )
