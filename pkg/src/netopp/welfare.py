"""Price of anarchy, optimal welfare, Gini inequality, and homophily checks.

Worst-case equilibrium welfare is bracketed through near-regular equilibria:
the bracketing theorems leave slack parameters delta in [0, 1], so bounds are
evaluated on a small delta-grid (corners plus interior points) rather than
assuming monotonicity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .closed_form import (
    has_local_tree_neighborhood,
    social_welfare,
    truncated_surplus_mass,
)
from .core import (
    INFORMED,
    UNINFORMED,
    ExogenousDistribution,
    ModelParams,
    ParameterError,
    Network,
    validate_model,
    validate_params,
)
from .equilibrium import (
    GAIN_TOL,
    check_equilibrium,
    informed_largest_regular_degree,
    largest_regular_degree,
    regular_equilibrium_degrees,
)

_DELTA_GRID = np.linspace(0.0, 1.0, 5)


@dataclass(frozen=True)
class PoABounds:
    lower: float
    upper: float
    d_used: int
    regime: str  # frictionless | costly | informed-frictionless | informed-costly | trivial

    def __post_init__(self):
        if not (1.0 - 1e-9 <= self.lower <= self.upper + 1e-12):
            raise ParameterError(f"inconsistent bounds: lower={self.lower}, upper={self.upper}")


@dataclass(frozen=True)
class GiniResult:
    value: float
    lam: float
    u_max: float
    u_min: float
    d_min: int
    d_max: int


@dataclass(frozen=True)
class OptimalWelfare:
    per_capita: float
    odd_n_correction: float
    structure: str  # matching | empty


@dataclass(frozen=True)
class HomophilyReport:
    violators: tuple
    bound: float
    within_bound: bool


def regular_welfare(params: ModelParams, d: int) -> float:
    """Per-capita expected utility in a d-regular network (1 - q for d = 0)."""
    if d == 0:
        return 1.0 - params.q
    q, p, gamma = params.q, params.p, params.gamma
    return 1.0 - q * (1.0 - p / d) ** d - gamma * d


def informed_regular_welfare(params: ModelParams, d: int) -> float:
    """Per-capita informed-model utility in a d-regular girth >= 5 network."""
    if d == 0:
        return 1.0 - params.q
    q, p, gamma = params.q, params.p, params.gamma
    h = (p / q) * (1.0 - (1.0 - q) ** d) / d
    return 1.0 - q * (1.0 - h) ** d - gamma * d


def poa_frictionless(q: float, p: float) -> float:
    """Asymptotic price of anarchy without connection costs:
    (1 - q(1-p)) / (1 - q e^{-p})."""
    validate_params(q, p, 0.0)
    return (1.0 - q * (1.0 - p)) / (1.0 - q * math.exp(-p))


def poa_costly(q: float, p: float, gamma: float) -> PoABounds:
    """Price-of-anarchy bracket with connection costs 0 < gamma <= q*p.

    Optimal welfare is the matching value 1 - q(1-p) - gamma; worst-case
    equilibrium welfare is bracketed around the largest stable regular degree
    d via 1 - q(1 - p/(d+a+b))^(d+a) - gamma(d+a) over a, b in [0, 1].
    gamma > q*p puts both sides at the empty network (no price of anarchy).
    """
    validate_params(q, p, gamma)
    if gamma > q * p + GAIN_TOL:
        return PoABounds(1.0, 1.0, 0, "trivial")
    if gamma <= 0:
        v = poa_frictionless(q, p)
        return PoABounds(v, v, 0, "frictionless")
    params = ModelParams(q, p, gamma)
    d = largest_regular_degree(params)
    numer = 1.0 - q * (1.0 - p) - gamma
    ratios = []
    for a in _DELTA_GRID:
        for b in _DELTA_GRID:
            denom = 1.0 - q * (1.0 - p / (d + a + b)) ** (d + a) - gamma * (d + a)
            if denom > 0:
                ratios.append(numer / denom)
            else:
                ratios.append(math.inf)
    return PoABounds(min(ratios), max(ratios), d, "costly")


def optimal_welfare(q: float, p: float, gamma: float, n: int) -> OptimalWelfare:
    """Socially optimal per-capita welfare under uninformed transfer.

    A maximal matching is optimal while gamma <= q*p (empty network above);
    for odd n the one unmatched individual costs (gamma - q*p)/n, reported as
    `odd_n_correction` on top of the asymptotic per-capita value.
    """
    validate_params(q, p, gamma)
    if gamma > q * p + GAIN_TOL:
        return OptimalWelfare(1.0 - q, 0.0, "empty")
    per_capita = 1.0 - q * (1.0 - p) - gamma
    corr = (gamma - q * p) / n if (n % 2 == 1 and n > 0) else 0.0
    return OptimalWelfare(per_capita, corr, "matching")


def optimal_degree_informed(q: float, p: float, gamma: float, n: int) -> tuple[int, float]:
    """Degree d* maximizing informed-model regular welfare over 0 <= d <= n.

    Ties break toward the smaller degree.
    """
    validate_params(q, p, gamma)
    params = ModelParams(q, p, gamma)
    best_d, best_v = 0, 1.0 - q
    for d in range(1, n + 1):
        v = informed_regular_welfare(params, d)
        if v > best_v + GAIN_TOL:
            best_d, best_v = d, v
    return best_d, best_v


def poa_informed(q: float, p: float, gamma: float, n: int) -> PoABounds:
    """Price of anarchy under informed transfer.

    Frictionless: exact asymptotic ratio (optimum over regular degrees against
    the complete-network limit 1 - q e^{-p/q}).  Costly: delta-grid bracket
    around the largest stable regular degree, as in `poa_costly`.
    """
    validate_params(q, p, gamma)
    if gamma > q * p + GAIN_TOL:
        return PoABounds(1.0, 1.0, 0, "trivial")
    params = ModelParams(q, p, gamma)
    d_star, numer = optimal_degree_informed(q, p, gamma, n)
    if gamma <= 0:
        denom = 1.0 - q * math.exp(-p / q)
        v = numer / denom
        return PoABounds(v, v, d_star, "informed-frictionless")
    d = informed_largest_regular_degree(params)
    ratios = []
    for a in _DELTA_GRID:
        for b in _DELTA_GRID:
            k = d + a + b
            h = (p / q) * (1.0 - (1.0 - q) ** k) / k
            denom = 1.0 - q * (1.0 - h) ** (d + a) - gamma * (d + a)
            ratios.append(numer / denom if denom > 0 else math.inf)
    return PoABounds(min(ratios), max(ratios), d, "informed-costly")


def gini(utilities) -> float:
    """Canonical Gini coefficient: sum_{i,j} |u_i - u_j| / (2 n sum_i u_i)."""
    u = np.sort(np.asarray(utilities, dtype=float))
    n = u.size
    total = float(u.sum())
    if total <= 0:
        raise ParameterError(f"Gini requires positive total utility; got {total}")
    weights = 2.0 * np.arange(n) - (n - 1)
    return float(weights @ u) / (n * total)


def two_block_gini(lam: float, u_max: float, u_min: float) -> float:
    """Gini of a population with fraction lam at u_max and the rest at u_min."""
    denom = lam * u_max + (1.0 - lam) * u_min
    return lam * (1.0 - lam) * (u_max - u_min) / denom


def worst_case_gini(q: float, p: float, gamma: float) -> GiniResult:
    """Worst-case equilibrium Gini coefficient.

    Uses the extreme stable regular degrees d_min, d_max: mixing a
    d_min-regular component (utility u_max) with a d_max-regular component
    (utility u_min) in proportion lam = (sqrt(u_max u_min) - u_min) /
    (u_max - u_min) maximizes two-block inequality.
    """
    validate_params(q, p, gamma)
    if gamma <= 0:
        raise ParameterError("worst-case Gini requires gamma > 0")
    params = ModelParams(q, p, gamma)
    degrees = regular_equilibrium_degrees(params)
    d_min, d_max = degrees[0], degrees[-1]
    u_max = regular_welfare(params, d_min)
    u_min = regular_welfare(params, d_max)
    if d_min == d_max or abs(u_max - u_min) <= GAIN_TOL:
        return GiniResult(0.0, 0.0, u_max, u_min, d_min, d_max)
    lam = (math.sqrt(u_max * u_min) - u_min) / (u_max - u_min)
    return GiniResult(two_block_gini(lam, u_max, u_min), lam, u_max, u_min, d_min, d_max)


def degree_range_witness(k: int, max_refinements: int = 3) -> tuple[float, float, float, tuple]:
    """Parameters (p, q=1-p, gamma=q(1-p)/2) whose stable regular degrees span
    a range of at least k, found by scanning p toward 1 on a refining grid."""
    if k < 0:
        raise ParameterError(f"k must be nonnegative; got {k}")
    step = 1e-2
    for _ in range(max_refinements):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # the scan crosses into p > q on purpose
            for p in np.arange(1.0 / 3.0, 1.0, step):
                p = float(p)
                q = 1.0 - p
                if not (0.0 < q < 1.0):
                    continue
                gamma = q * (1.0 - p) / 2.0
                if gamma <= 0:
                    continue
                degrees = regular_equilibrium_degrees(ModelParams(q, p, gamma))
                nonzero = [d for d in degrees if d >= 1]
                if 1 in nonzero and max(nonzero) - min(nonzero) >= k:
                    return p, q, gamma, tuple(nonzero)
        step /= 10.0
    raise ParameterError(f"no degree-range witness found for k={k} at grid resolution {step * 10}")


def homophily_report(net: Network, params: ModelParams, k: int = 1, model: str = UNINFORMED) -> HomophilyReport:
    """Individuals violating k-degree homophily (informed model: also 3-/4-cycle
    incidence), with the count bound that holds at any verified equilibrium."""
    validate_model(model)
    deg = net.degrees
    violators = []
    for i in range(net.n):
        bad = any(abs(int(deg[i]) - int(deg[j])) > k for j in net.neighbors(i))
        if model == INFORMED and not bad:
            bad = not has_local_tree_neighborhood(net, i)
        if bad:
            violators.append(i)
    if params.gamma > 0:
        if model == UNINFORMED:
            r = params.q * params.p / params.gamma
            bound = r * r * (1.0 + r)
        else:
            r = params.p / params.gamma
            bound = r * r * (1.0 + r**3)
    else:
        bound = math.inf
    return HomophilyReport(tuple(violators), bound, len(violators) <= bound)


def status_homophily_report(
    net: Network, dists: ExogenousDistribution, gamma: float, epsilon: float
) -> HomophilyReport:
    """Individuals with a neighbour whose per-contact transfer mass is too far
    below their own, on an epsilon-grid.

    A pair (i, j) is aligned when floor(mu_i(d_i+1)/eps)*eps/(d_i+1) <=
    mu_j(d_j)/d_j and symmetrically; at equilibrium the number of misaligned
    individuals is at most gamma^-3 (1 + gamma^-1) / eps.
    """
    if gamma <= 0 or epsilon <= 0:
        raise ParameterError("status homophily requires gamma > 0 and epsilon > 0")
    n = net.n
    deg = net.degrees
    mu_now = np.zeros(n)
    mu_next = np.zeros(n)
    for i in range(n):
        if deg[i] >= 1:
            mu_now[i] = truncated_surplus_mass(dists.row(i), int(deg[i]))
        mu_next[i] = truncated_surplus_mass(dists.row(i), int(deg[i]) + 1)

    def aligned(i: int, j: int) -> bool:
        lhs = math.floor(mu_next[i] / epsilon + GAIN_TOL) * epsilon / (deg[i] + 1)
        return lhs <= mu_now[j] / deg[j] + GAIN_TOL

    violators = []
    for i in range(n):
        for j in net.neighbors(i):
            if not (aligned(i, j) and aligned(j, i)):
                violators.append(i)
                break
    bound = (1.0 + 1.0 / gamma) / (gamma**3 * epsilon)
    return HomophilyReport(tuple(violators), bound, len(violators) <= bound)


def all_graphs(n: int):
    """Every simple graph on n labelled individuals (2^C(n,2) of them)."""
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield Network(n, [pairs[b] for b in range(len(pairs)) if mask >> b & 1])


def brute_force_equilibria(n: int, params: ModelParams, model: str = UNINFORMED) -> list[Network]:
    """All stable edge sets on n <= 6 individuals by exhaustive enumeration."""
    if n > 6:
        raise ParameterError(f"exhaustive enumeration supports n <= 6; got n={n}")
    return [g for g in all_graphs(n) if check_equilibrium(g, params, model).is_equilibrium]


def brute_force_optimal(n: int, params: ModelParams, model: str = UNINFORMED) -> tuple[float, list[Network]]:
    """Welfare-maximizing edge sets on n <= 6 individuals (oracle for the
    closed-form optimal structures)."""
    if n > 6:
        raise ParameterError(f"exhaustive enumeration supports n <= 6; got n={n}")
    best = -math.inf
    argmax: list[Network] = []
    for g in all_graphs(n):
        w = social_welfare(g, params, model)
        if w > best + GAIN_TOL:
            best, argmax = w, [g]
        elif w > best - GAIN_TOL:
            argmax.append(g)
    return best, argmax


__all__ = [
    "PoABounds",
    "GiniResult",
    "OptimalWelfare",
    "HomophilyReport",
    "regular_welfare",
    "informed_regular_welfare",
    "poa_frictionless",
    "poa_costly",
    "optimal_welfare",
    "optimal_degree_informed",
    "poa_informed",
    "gini",
    "two_block_gini",
    "worst_case_gini",
    "degree_range_witness",
    "homophily_report",
    "status_homophily_report",
    "all_graphs",
    "brute_force_equilibria",
    "brute_force_optimal",
]
