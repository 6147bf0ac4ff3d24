"""Degree sequences and the distributions they converge to.

A degree sequence assigns every vertex a degree of at least one; the total
degree must be even so that half-edges can be paired into a multigraph.
Finite-support probability mass functions describe the limiting degree
distribution used by the branching-process side of the library.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

PMF_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on nonnegative integers with finite support.

    Attributes:
        support: strictly increasing nonnegative integers.
        probabilities: nonnegative reals, same length as support, summing
            to 1 within PMF_SUM_TOL.
    """

    support: tuple[int, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        support = tuple(int(k) for k in self.support)
        probabilities = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probabilities", probabilities)
        if len(support) == 0:
            raise ValueError("pmf needs at least one support point")
        if len(support) != len(probabilities):
            raise ValueError("support and probabilities differ in length")
        if any(k < 0 for k in support):
            raise ValueError("support values must be nonnegative integers")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError("support must be strictly increasing")
        if any(p < 0 for p in probabilities):
            raise ValueError("probabilities must be nonnegative")
        total = sum(probabilities)
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_dict(cls, masses: Mapping[int, float]) -> "Pmf":
        items = sorted(masses.items())
        return cls(tuple(k for k, _ in items), tuple(p for _, p in items))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support, self.probabilities))

    def mass(self, k: int) -> float:
        """Probability assigned to the integer k (0.0 off support)."""
        return self.as_dict().get(k, 0.0)

    def mean(self) -> float:
        return float(sum(k * p for k, p in zip(self.support, self.probabilities)))

    def second_moment(self) -> float:
        return float(sum(k * k * p for k, p in zip(self.support, self.probabilities)))

    def variance(self) -> float:
        m = self.mean()
        return self.second_moment() - m * m

    def cdf(self, x: float) -> float:
        """P(X <= x)."""
        return float(sum(p for k, p in zip(self.support, self.probabilities) if k <= x))

    def min_value(self) -> int:
        return self.support[0]

    def max_value(self) -> int:
        return self.support[-1]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(np.array(self.support), size=n, p=np.array(self.probabilities))

    def save_csv(self, path: str | Path) -> None:
        """Write the pmf as a two-column CSV (k, p_k)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "p_k"])
            for k, p in zip(self.support, self.probabilities):
                writer.writerow([k, repr(p)])

    @classmethod
    def load_csv(cls, path: str | Path) -> "Pmf":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows and rows[0] and rows[0][0] == "k":
            rows = rows[1:]
        return cls(
            tuple(int(row[0]) for row in rows),
            tuple(float(row[1]) for row in rows),
        )


@dataclass(frozen=True)
class DegreeSequence:
    """Per-vertex degrees of a multigraph on n vertices.

    Every degree is a positive integer and the total degree is even, so the
    half-edges can always be paired off.
    """

    degrees: np.ndarray

    def __post_init__(self) -> None:
        degrees = np.asarray(self.degrees, dtype=np.int64)
        if degrees.ndim != 1 or degrees.size == 0:
            raise ValueError("degrees must be a nonempty 1-d sequence")
        if degrees.min() < 1:
            raise ValueError("every vertex needs degree at least 1")
        if int(degrees.sum()) % 2 != 0:
            raise ValueError("total degree must be even")
        object.__setattr__(self, "degrees", degrees)

    @property
    def n(self) -> int:
        return int(self.degrees.size)

    @property
    def total_degree(self) -> int:
        return int(self.degrees.sum())

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def save(self, path: str | Path) -> None:
        """Write newline-delimited degrees."""
        Path(path).write_text("".join(f"{d}\n" for d in self.degrees.tolist()))

    @classmethod
    def load(cls, path: str | Path) -> "DegreeSequence":
        values = [int(line) for line in Path(path).read_text().split()]
        return cls(np.array(values, dtype=np.int64))


@dataclass(frozen=True)
class RegularityReport:
    """How close an empirical degree sequence sits to its limit law."""

    sup_cdf_distance: float
    mean_gap: float
    second_moment_gap: Optional[float]
    d_max: int


def sample_iid_degrees(dist: Pmf, n: int, rng: np.random.Generator) -> DegreeSequence:
    """Draw n i.i.d. degrees from dist, fixing parity if the total is odd.

    The parity fix increments the last vertex's degree by 1, so at most one
    entry differs from a plain i.i.d. draw and only by one.

    Args:
        dist: limiting degree distribution; must put no mass at 0.
        n: number of vertices, at least 1.
        rng: numpy Generator.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    if dist.min_value() < 1 or dist.mass(0) > 0:
        raise ValueError("degree distribution must not put mass at 0")
    draws = dist.sample(n, rng).astype(np.int64)
    if int(draws.sum()) % 2 != 0:
        draws[-1] += 1
    return DegreeSequence(draws)


def empirical_distribution(seq: DegreeSequence) -> Pmf:
    """Empirical pmf of the degrees (counts divided by n)."""
    values, counts = np.unique(seq.degrees, return_counts=True)
    n = seq.n
    return Pmf(tuple(int(v) for v in values), tuple(c / n for c in counts.tolist()))


def regularity_report(seq: DegreeSequence, limit: Pmf) -> RegularityReport:
    """Distances between the empirical degree law of seq and a limit pmf.

    Returns the sup distance between the two CDFs, the absolute gaps of the
    first two moments, and the maximum degree. The second-moment gap is None
    when the limit's second moment diverges; finite-support pmfs always have
    one, so the field is populated for every Pmf this module can build.
    """
    emp = empirical_distribution(seq)
    points = sorted(set(emp.support) | set(limit.support))
    sup = max(abs(emp.cdf(x) - limit.cdf(x)) for x in points)
    mean_gap = abs(emp.mean() - limit.mean())
    second_gap: Optional[float] = abs(emp.second_moment() - limit.second_moment())
    return RegularityReport(
        sup_cdf_distance=float(sup),
        mean_gap=float(mean_gap),
        second_moment_gap=second_gap,
        d_max=seq.max_degree,
    )
