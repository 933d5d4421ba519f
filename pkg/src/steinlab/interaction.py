"""Interaction graphs: which coordinate pairs a statistic couples.

A graphical rule assigns to every coordinate configuration x a graph on the
index set.  The contract that makes such a rule useful for normal
approximation has three clauses:

* symmetry -- relabeling coordinates relabels the graph the same way;
* noninteraction -- if {i, j} is an edge in none of G(x), G(x^i), G(x^j),
  G(x^(ij)), then perturbing coordinate i does not change the effect of
  perturbing coordinate j: f(x) - f(x^i) - f(x^j) + f(x^(ij)) = 0;
* extension -- the rule is induced by (or contained in) the same rule applied
  to configurations with four more coordinates.

Under that contract, a fourth-moment bound on 1 + degree in the extended
graph and an eighth-moment bound on the largest coordinate increment yield a
distance-to-Gaussian bound up to one universal constant.  This module checks
the contract clauses on randomized configurations, estimates the degree and
increment moments, checks the exchangeable degree identity

    P(all of {i, i_1}, ..., {i, i_k} are edges) = E[(d_i)_k] / (n-1)_k

(falling factorials), and assembles the graphical-rule bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .coefficient import BoundReport
from .errors import DegenerateStatisticError
from .resample import CoordinateModel, coordinate_deltas


@dataclass(frozen=True)
class IndexGraph:
    """An undirected graph on coordinate indices 0..n-1 (no self loops)."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self loop at {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) outside [0, {self.n})")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            d[i] += 1
            d[j] += 1
        return d

    def induced(self, positions: Sequence[int]) -> "IndexGraph":
        """Subgraph on ``positions``, relabeled by position in the list."""
        relabel = {int(p): t for t, p in enumerate(positions)}
        if len(relabel) != len(positions):
            raise ValueError("positions must be distinct")
        kept = {
            (relabel[i], relabel[j])
            for i, j in self.edges
            if i in relabel and j in relabel
        }
        return IndexGraph(len(positions), frozenset(kept))


@dataclass(frozen=True)
class GraphicalRule:
    """A named map from coordinate configurations to index graphs."""

    name: str
    build: Callable[[np.ndarray], IndexGraph]


def permuted_matches(rule: GraphicalRule, x: np.ndarray, perm: np.ndarray) -> bool:
    """Does relabeling coordinates by ``perm`` relabel the graph accordingly?

    With y[k] = x[perm[k]], every edge {i, j} of G(y) must map to an edge
    {perm[i], perm[j]} of G(x) and conversely.
    """
    gx = rule.build(x).edges
    gy = rule.build(np.asarray(x)[perm])
    mapped = frozenset(
        (min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in gy.edges
    )
    return mapped == gx


@dataclass(frozen=True)
class SymmetryReport:
    trials: int
    violations: int
    counterexample: tuple | None


def check_symmetry(
    rule: GraphicalRule,
    sampler: Callable[[np.random.Generator], np.ndarray],
    trials: int,
    rng: np.random.Generator,
) -> SymmetryReport:
    """Randomized check of relabeling symmetry; keeps the first failure."""
    violations = 0
    witness = None
    for _ in range(trials):
        x = np.asarray(sampler(rng))
        perm = rng.permutation(x.shape[0])
        if not permuted_matches(rule, x, perm):
            violations += 1
            if witness is None:
                witness = (x.copy(), perm.copy())
    return SymmetryReport(trials, violations, witness)


def check_noninteraction(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    x_prime: np.ndarray,
    i: int,
    j: int,
) -> float:
    """Four-point difference f(x) - f(x^i) - f(x^j) + f(x^(ij)).

    Zero exactly when perturbing coordinates i and j has additive effect.
    """
    if i == j:
        raise ValueError("need two distinct coordinates")
    xi = np.asarray(x).copy()
    xj = np.asarray(x).copy()
    xij = np.asarray(x).copy()
    xi[i] = x_prime[i]
    xj[j] = x_prime[j]
    xij[i] = x_prime[i]
    xij[j] = x_prime[j]
    return float(f(x)) - float(f(xi)) - float(f(xj)) + float(f(xij))


@dataclass(frozen=True)
class InteractionCheckReport:
    """Randomized audit that missing edges imply additive perturbations.

    ``tested`` counts the draws where {i, j} was absent from all four graphs
    (only those carry an assertion); ``violations`` counts nonzero residuals
    among them.
    """

    trials: int
    tested: int
    violations: int
    max_residual: float
    counterexample: tuple | None


def check_interaction_rule(
    f: Callable[[np.ndarray], float],
    rule: GraphicalRule,
    sampler: Callable[[np.random.Generator], np.ndarray],
    trials: int,
    rng: np.random.Generator,
    tol: float = 1e-9,
) -> InteractionCheckReport:
    """Draw (x, x', i, j) at random and assert the noninteraction clause
    whenever the edge {i, j} is absent from G(x), G(x^i), G(x^j), G(x^(ij))."""
    tested = 0
    violations = 0
    max_res = 0.0
    witness = None
    for _ in range(trials):
        x = np.asarray(sampler(rng))
        xp = np.asarray(sampler(rng))
        n = x.shape[0]
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        xi = x.copy()
        xj = x.copy()
        xij = x.copy()
        xi[i] = xp[i]
        xj[j] = xp[j]
        xij[i] = xp[i]
        xij[j] = xp[j]
        if any(rule.build(v).has_edge(i, j) for v in (x, xi, xj, xij)):
            continue
        tested += 1
        res = abs(float(f(x)) - float(f(xi)) - float(f(xj)) + float(f(xij)))
        max_res = max(max_res, res)
        if res > tol:
            violations += 1
            if witness is None:
                witness = (x.copy(), xp.copy(), i, j, res)
    return InteractionCheckReport(trials, tested, violations, max_res, witness)


@dataclass(frozen=True)
class ExtensionReport:
    trials: int
    violations: int
    mode: str
    counterexample: tuple | None


def check_extension(
    base_rule: GraphicalRule,
    ext_rule: GraphicalRule,
    sampler_ext: Callable[[np.random.Generator], np.ndarray],
    base_n: int,
    trials: int,
    rng: np.random.Generator,
    mode: str = "exact",
) -> ExtensionReport:
    """Embed random base-size subvectors into extended configurations and
    compare the base graph with the induced subgraph of the extended one.

    "exact" requires equality; "containment" only requires every base edge to
    survive in the induced subgraph (the right notion when adding coordinates
    can create but never destroy edges).
    """
    if mode not in ("exact", "containment"):
        raise ValueError(f"unknown mode {mode!r}")
    violations = 0
    witness = None
    for _ in range(trials):
        y = np.asarray(sampler_ext(rng))
        m = y.shape[0]
        if m <= base_n:
            raise ValueError("extension sampler must produce longer configurations")
        positions = np.sort(rng.choice(m, size=base_n, replace=False))
        x = y[positions]
        base_edges = base_rule.build(x).edges
        induced = ext_rule.build(y).induced(positions).edges
        ok = base_edges == induced if mode == "exact" else base_edges <= induced
        if not ok:
            violations += 1
            if witness is None:
                witness = (y.copy(), positions.copy())
    return ExtensionReport(trials, violations, mode, witness)


@dataclass(frozen=True)
class DegreeStats:
    """Moment inputs of the graphical-rule bound.

    ``mean_degree4`` estimates E[(1 + degree of a fixed vertex in the
    extended graph)^4]; ``mean_change8`` estimates E[max_j |f(X) - f(X^j)|^8].
    """

    mean_degree4: float
    mean_change8: float
    reps: int
    se_degree4: float = 0.0
    se_change8: float = 0.0

    def __post_init__(self) -> None:
        if self.mean_degree4 < 1.0:
            raise ValueError("E[(1 + degree)^4] is at least 1")
        if self.mean_change8 < 0.0:
            raise ValueError("an eighth moment is nonnegative")


def degree_and_change_stats(
    model: CoordinateModel,
    ext_rule: GraphicalRule,
    reps: int,
    rng: np.random.Generator,
) -> DegreeStats:
    """Estimate the degree and increment moments for the graphical bound.

    Each rep draws an extended configuration (4 extra coordinates) for the
    degree of vertex 0, and an independent coordinate pair for the largest
    absolute increment of the statistic.
    """
    d4 = np.empty(reps)
    m8 = np.empty(reps)
    for r in range(reps):
        ext = np.asarray(model.draw_coords(rng, model.n + 4))
        d4[r] = (1.0 + ext_rule.build(ext).degree(0)) ** 4
        pair = model.sample_pair(rng)
        m8[r] = float(np.max(np.abs(coordinate_deltas(model, pair)))) ** 8
    return DegreeStats(
        mean_degree4=float(d4.mean()),
        mean_change8=float(m8.mean()),
        reps=reps,
        se_degree4=float(d4.std(ddof=1) / np.sqrt(reps)),
        se_change8=float(m8.std(ddof=1) / np.sqrt(reps)),
    )


def _falling(x: float, k: int) -> float:
    out = 1.0
    for t in range(k):
        out *= x - t
    return out


@dataclass(frozen=True)
class IdentityReport:
    mean_lhs: float
    mean_rhs: float
    z_score: float
    reps: int


def degree_identity_check(
    rule: GraphicalRule,
    sampler: Callable[[np.random.Generator], np.ndarray],
    i: int,
    others: Iterable[int],
    reps: int,
    rng: np.random.Generator,
) -> IdentityReport:
    """Check the exchangeable degree identity for a symmetric rule.

    Pairs, per draw, the indicator that all edges {i, i_l} are present with
    the falling-factorial ratio (d_i)_k / (n-1)_k, and z-scores the mean of
    the paired difference (zero in law for symmetric rules).
    """
    others = [int(o) for o in others]
    k = len(others)
    if k < 1 or i in others or len(set(others)) != k:
        raise ValueError("need distinct indices different from i")
    diffs = np.empty(reps)
    lhs = np.empty(reps)
    rhs = np.empty(reps)
    for r in range(reps):
        x = np.asarray(sampler(rng))
        n = x.shape[0]
        g = rule.build(x)
        lhs[r] = float(all(g.has_edge(i, o) for o in others))
        rhs[r] = _falling(g.degree(i), k) / _falling(n - 1, k)
        diffs[r] = lhs[r] - rhs[r]
    se = float(diffs.std(ddof=1) / np.sqrt(reps))
    z = float(diffs.mean() / se) if se > 0 else 0.0
    return IdentityReport(float(lhs.mean()), float(rhs.mean()), z, reps)


def interaction_bound(
    sigma2: float,
    mean_change8: float,
    mean_degree4: float,
    third_moment_sum: float,
    n: int,
    constant_c: float = 1.0,
) -> BoundReport:
    """Distance bound for a statistic obeying a symmetric graphical rule:

    C * sqrt(n) * (E M^8)^(1/4) * (E delta^4)^(1/4) / sigma^2
      + sum_j E|Delta_j f|^3 / (2 sigma^3),

    valid up to the universal constant C, reported as given (default 1) with
    ``modulo_c`` set.
    """
    if sigma2 <= 0:
        raise DegenerateStatisticError(f"sigma2 must be positive, got {sigma2}")
    if mean_degree4 < 1 or mean_change8 < 0 or third_moment_sum < 0 or n < 1:
        raise ValueError("invalid moment inputs")
    variance_term = (
        constant_c
        * np.sqrt(n)
        * mean_change8**0.25
        * mean_degree4**0.25
        / sigma2
    )
    third_term = third_moment_sum / (2.0 * sigma2**1.5)
    return BoundReport(
        variance_term=float(variance_term),
        third_moment_term=float(third_term),
        total=float(variance_term + third_term),
        sigma2=sigma2,
        variance_level="given_x",
        modulo_c=True,
        constant_c=constant_c,
    )
