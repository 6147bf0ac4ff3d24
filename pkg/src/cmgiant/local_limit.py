"""The limiting branching process of a random multigraph with given degrees.

The local picture around a uniform vertex is a two-stage branching process:
the root's child count follows the degree law itself, while every later
individual draws children from the size-biased-and-shifted law. All the
giant-component limits in this library are functionals of that process.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .degree_model import Pmf

XI_TOL = 1e-12
XI_MAX_ITER = 10**6


class DegenerateDegreeTwoError(ValueError):
    """The all-degree-2 law is excluded: its graphs are unions of cycles and
    the largest-component fraction does not concentrate."""


@dataclass(frozen=True)
class OffspringSpec:
    """Root and forward offspring laws with their derived constants.

    Attributes:
        root_pmf: child law of the root (the degree law).
        shifted_pmf: child law of everyone else; puts (k+1) p_{k+1} / E[D]
            on k.
        nu: mean of shifted_pmf, the growth rate per generation.
        sigma2: variance of shifted_pmf.
        xi: extinction probability of the forward process, the smallest
            fixed point of its generating function in [0, 1].
        zeta: survival probability seen from the root.
    """

    root_pmf: Pmf
    shifted_pmf: Pmf
    nu: float
    sigma2: float
    xi: float
    zeta: float

    def to_json(self) -> str:
        payload = {
            "root_pmf": self.root_pmf.as_dict(),
            "shifted_pmf": self.shifted_pmf.as_dict(),
            "nu": self.nu,
            "sigma2": self.sigma2,
            "xi": self.xi,
            "zeta": self.zeta,
        }
        return json.dumps(payload, sort_keys=True)


def _generating_function(pmf: Pmf, x: float) -> float:
    return float(sum(p * x**k for k, p in zip(pmf.support, pmf.probabilities)))


def build_offspring_spec(root: Pmf) -> OffspringSpec:
    """Derive the forward offspring law and its fixed-point constants.

    The extinction probability is found by monotone fixed-point iteration of
    the shifted law's generating function starting from 0, stopping when
    successive iterates differ by less than 1e-12 (or after 1e6 rounds near
    criticality, where the residual is still far below any tolerance used
    downstream).

    Raises:
        ValueError: if the root law puts mass at 0.
        DegenerateDegreeTwoError: for the all-degree-2 root law.
    """
    if root.min_value() < 1 or root.mass(0) > 0:
        raise ValueError("root law must be supported on {1, 2, ...}")
    if root.support == (2,) or root.mass(2) == 1.0:
        raise DegenerateDegreeTwoError(
            "all-degree-2 law rejected: components are cycles and the "
            "largest-component fraction has no deterministic limit"
        )
    mean_degree = root.mean()
    shifted = Pmf(
        tuple(k - 1 for k in root.support),
        tuple(k * p / mean_degree for k, p in zip(root.support, root.probabilities)),
    )
    nu = shifted.mean()
    sigma2 = shifted.variance()

    x = 0.0
    for _ in range(XI_MAX_ITER):
        x_next = _generating_function(shifted, x)
        if abs(x_next - x) < XI_TOL:
            x = x_next
            break
        x = x_next
    xi = float(x)
    zeta = float(
        sum(p * (1.0 - xi**k) for k, p in zip(root.support, root.probabilities))
    )
    return OffspringSpec(
        root_pmf=root,
        shifted_pmf=shifted,
        nu=float(nu),
        sigma2=float(sigma2),
        xi=xi,
        zeta=zeta,
    )


@dataclass(frozen=True)
class GiantLimits:
    """Limits of the giant-component observables, per vertex of the graph."""

    zeta: float
    vk_limit: dict[int, float]
    edge_limit: float


def theoretical_giant(spec: OffspringSpec) -> GiantLimits:
    """Limiting giant fractions: vertices, vertices by degree, and edges."""
    xi = spec.xi
    root = spec.root_pmf
    vk = {k: p * (1.0 - xi**k) for k, p in zip(root.support, root.probabilities)}
    edge_limit = 0.5 * root.mean() * (1.0 - xi * xi)
    return GiantLimits(zeta=spec.zeta, vk_limit=vk, edge_limit=float(edge_limit))


EXACT_PROGENY_MAX_K = 30


def _truncated_poly_power_sum(pmf: Pmf, h: np.ndarray, size: int) -> np.ndarray:
    """Coefficients of sum_k p_k H(s)^k, truncated to polynomials of `size`."""
    out = np.zeros(size)
    power = np.zeros(size)
    power[0] = 1.0
    next_k = 0
    for k, p in zip(pmf.support, pmf.probabilities):
        while next_k < k:
            power = np.convolve(power, h)[:size]
            next_k += 1
        out += p * power
    return out


def zeta_geq_k(
    spec: OffspringSpec,
    k: int,
    mode: str = "exact",
    rng: np.random.Generator | None = None,
    samples: int = 10**5,
) -> float:
    """P(total progeny >= k) for the two-stage branching process.

    exact mode builds the progeny distribution below k by iterating the
    truncated polynomial equation H <- s * G(H); a forward tree with t < k
    members has height below k, so k rounds make the low coefficients exact.
    monte_carlo simulates generation totals with early stopping.

    Args:
        k: threshold, at least 1; exact mode requires k <= 30.
        mode: "exact" or "monte_carlo".
        rng: required for monte_carlo.
    """
    if k < 1:
        raise ValueError("threshold must be at least 1")
    if mode == "exact":
        if k > EXACT_PROGENY_MAX_K:
            raise ValueError(f"exact mode supports k <= {EXACT_PROGENY_MAX_K}")
        if k == 1:
            return 1.0
        size = k  # coefficients for totals 0 .. k-1
        h = np.zeros(size)
        for _ in range(k):
            g_of_h = _truncated_poly_power_sum(spec.shifted_pmf, h, size)
            h = np.concatenate([[0.0], g_of_h[: size - 1]])  # multiply by s
        root_poly = _truncated_poly_power_sum(spec.root_pmf, h, size)
        total = np.concatenate([[0.0], root_poly[: size - 1]])
        return float(1.0 - total.sum())
    if mode == "monte_carlo":
        if rng is None:
            raise ValueError("monte_carlo mode needs an rng")
        root_support = np.array(spec.root_pmf.support, dtype=np.int64)
        root_probs = np.array(spec.root_pmf.probabilities)
        child_support = np.array(spec.shifted_pmf.support, dtype=np.int64)
        child_probs = np.array(spec.shifted_pmf.probabilities)
        hits = 0
        roots = rng.choice(root_support, size=samples, p=root_probs)
        for i in range(samples):
            total = 1
            gen = int(roots[i])
            while gen > 0 and total < k:
                total += gen
                if total >= k:
                    break
                counts = rng.multinomial(gen, child_probs)
                gen = int(child_support @ counts)
            hits += total >= k
        return hits / samples
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class BranchingRun:
    """Generation sizes of one simulated tree.

    generation_sizes[0] is the root generation (always 1); the list stops
    early when the population cap is hit, with `truncated` set.
    """

    generation_sizes: tuple[int, ...]
    total: int
    truncated: bool


def simulate_unimodular_bp(
    spec: OffspringSpec,
    max_generation: int,
    cap: int,
    rng: np.random.Generator,
) -> BranchingRun:
    """Simulate generation sizes of the two-stage process.

    Only generation totals are tracked; the sum of children over a
    generation of size m is drawn in one multinomial step, which matches the
    per-individual law exactly.
    """
    sizes = [1]
    total = 1
    gen = int(rng.choice(np.array(spec.root_pmf.support), p=np.array(spec.root_pmf.probabilities)))
    child_support = np.array(spec.shifted_pmf.support, dtype=np.int64)
    child_probs = np.array(spec.shifted_pmf.probabilities)
    truncated = False
    for _ in range(max_generation):
        sizes.append(gen)
        total += gen
        if total >= cap:
            truncated = True
            break
        if gen == 0:
            gen = 0
        else:
            counts = rng.multinomial(gen, child_probs)
            gen = int(child_support @ counts)
    return BranchingRun(tuple(sizes), total, truncated)


def simulate_offspring_generations(
    spec: OffspringSpec,
    b0: int,
    generations: int,
    rng: np.random.Generator,
    cap: int | None = None,
) -> BranchingRun:
    """Generation sizes of the forward process started from b0 individuals.

    Every individual, including the starting generation's successors, draws
    children from the shifted law. Used to study how a large generation
    evolves once the process is already well established.
    """
    if b0 < 1:
        raise ValueError("need a positive starting generation")
    sizes = [b0]
    total = b0
    gen = b0
    child_support = np.array(spec.shifted_pmf.support, dtype=np.int64)
    child_probs = np.array(spec.shifted_pmf.probabilities)
    truncated = False
    for _ in range(generations):
        if gen == 0:
            sizes.append(0)
            continue
        counts = rng.multinomial(gen, child_probs)
        gen = int(child_support @ counts)
        sizes.append(gen)
        total += gen
        if cap is not None and total >= cap:
            truncated = True
            break
    return BranchingRun(tuple(sizes), total, truncated)


@dataclass(frozen=True)
class CondLimitEstimate:
    """Monte Carlo frequencies of the two mismatch events between cluster
    size and boundary growth."""

    big_cluster_small_boundary: float
    small_cluster_big_boundary: float
    samples: int


def estimate_cond_limit(
    spec: OffspringSpec,
    k: int,
    r: int,
    r_k: int,
    samples: int,
    rng: np.random.Generator,
) -> CondLimitEstimate:
    """Estimate P(progeny >= k, generation r < r_k) and its mirror image.

    A tree that is still alive after generation r keeps at least one member
    per generation, so running at most k extra generations decides whether
    total progeny reaches k; no cap beyond that is needed.
    """
    root_support = np.array(spec.root_pmf.support, dtype=np.int64)
    root_probs = np.array(spec.root_pmf.probabilities)
    child_support = np.array(spec.shifted_pmf.support, dtype=np.int64)
    child_probs = np.array(spec.shifted_pmf.probabilities)
    big_small = 0
    small_big = 0
    roots = rng.choice(root_support, size=samples, p=root_probs)
    for i in range(samples):
        gen = int(roots[i])
        total = 1
        boundary_r = 1 if r == 0 else None
        generation = 1
        while True:
            if generation == r:
                boundary_r = gen
            if gen == 0:
                break
            if boundary_r is not None and total >= k:
                break
            total += gen
            counts = rng.multinomial(gen, child_probs)
            gen = int(child_support @ counts)
            generation += 1
        big = total >= k
        fat = boundary_r is not None and boundary_r >= r_k
        if big and not fat:
            big_small += 1
        if not big and fat:
            small_big += 1
    return CondLimitEstimate(
        big_cluster_small_boundary=big_small / samples,
        small_cluster_big_boundary=small_big / samples,
        samples=samples,
    )


@dataclass(frozen=True)
class Envelope:
    """Deterministic sandwich around the forward process started at b0.

    over/under obey
        over[k+1]  = nu * over[k] + over[k]**alpha
        under[k+1] = nu * under[k] - over[k]**alpha
    so the correction term is always driven by the upper sequence.
    """

    under: tuple[float, ...]
    over: tuple[float, ...]
    alpha: float
    b0: float
    nu: float

    def growth_constant(self) -> float:
        """Truncated product A with over[K] <= A * b0 * nu**K.

        A multiplies (1 + b0**(alpha-1) * nu**((alpha-1) k)) over the K
        steps of the recursion; each factor dominates the relative growth
        the correction term can add at its step.
        """
        steps = len(self.over) - 1
        a = 1.0
        for k in range(steps):
            a *= 1.0 + self.b0 ** (self.alpha - 1.0) * self.nu ** ((self.alpha - 1.0) * k)
        return a


def envelope_recursion(b0: float, nu: float, alpha: float, K: int) -> Envelope:
    """Run the sandwich recursion for K steps from under = over = b0.

    Args:
        b0: starting generation size, at least 1.
        nu: growth rate, strictly above 1.
        alpha: correction exponent in (1/2, 1).
        K: number of steps, at least 0.
    """
    if nu <= 1:
        raise ValueError("the sandwich needs a supercritical growth rate")
    if not (0.5 < alpha < 1.0):
        raise ValueError("alpha must lie strictly between 1/2 and 1")
    if b0 < 1:
        raise ValueError("starting size must be at least 1")
    if K < 0:
        raise ValueError("step count must be nonnegative")
    over = [float(b0)]
    under = [float(b0)]
    for _ in range(K):
        bump = over[-1] ** alpha
        over.append(nu * over[-1] + bump)
        under.append(nu * under[-1] - bump)
    return Envelope(
        under=tuple(under), over=tuple(over), alpha=alpha, b0=float(b0), nu=float(nu)
    )
