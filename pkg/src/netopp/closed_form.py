"""Closed-form expected utilities for the opportunity-transfer games.

Under the uninformed transfer model each surplus holder forwards to a
uniformly random neighbour, so the per-neighbour no-transfer events are
independent and expected utility has an exact product form.  The informed
model (forwarding only to neighbours whose own draw was zero) admits a
product form only when an individual's neighbours share no short cycles;
`informed_utility_local_tree` checks that precondition explicitly.
"""

from __future__ import annotations

import numpy as np

from .core import (
    INFORMED,
    UNINFORMED,
    EnumerationCapError,
    ExogenousDistribution,
    GraphError,
    ModelParams,
    Network,
    validate_model,
)


def expected_utility(net: Network, params: ModelParams, i: int) -> float:
    """Exact expected utility of individual i under uninformed transfer.

    1 - q * prod_{j in N_i} (1 - p/d_j) - gamma * d_i, with the empty product
    equal to 1 for isolated individuals.
    """
    q, p, gamma = params.q, params.p, params.gamma
    prod = 1.0
    for j in net.neighbors(i):
        prod *= 1.0 - p / net.degree(j)
    return 1.0 - q * prod - gamma * net.degree(i)


def expected_utilities(net: Network, params: ModelParams) -> np.ndarray:
    """Vector of `expected_utility` over all individuals."""
    q, p, gamma = params.q, params.p, params.gamma
    deg = net.degrees
    factor = np.ones(net.n)
    nz = deg > 0
    factor[nz] = 1.0 - p / deg[nz]
    out = np.empty(net.n)
    for i in range(net.n):
        nbrs = net.neighbors(i)
        prod = float(np.prod(factor[list(nbrs)])) if nbrs else 1.0
        out[i] = 1.0 - q * prod - gamma * deg[i]
    return out


def truncated_surplus_mass(pmf_row, d: int) -> float:
    """Expected surplus mass an individual with this pmf spreads over d contacts.

    E[min(X, d+1)] - 1 + p_0.  Dividing by d gives the probability that a
    specific contact receives a transfer from them.  Undefined for d = 0.
    """
    if d < 1:
        raise GraphError(f"surplus mass requires degree >= 1; got d={d}")
    row = np.asarray(pmf_row, dtype=float)
    counts = np.minimum(np.arange(row.size), d + 1)
    return float(counts @ row) - 1.0 + float(row[0])


def heterogeneous_utility(net: Network, dists: ExogenousDistribution, gamma: float, i: int) -> float:
    """Expected utility of i when individuals carry heterogeneous pmfs.

    1 - p_{i0} * prod_{j in N_i} (1 - mu_j(d_j)/d_j) - gamma * d_i, where
    mu_j is `truncated_surplus_mass`.  Reduces exactly to `expected_utility`
    when every row is the base three-point pmf.
    """
    if dists.n != net.n:
        raise GraphError(f"distribution rows ({dists.n}) do not match individuals ({net.n})")
    prod = 1.0
    for j in net.neighbors(i):
        dj = net.degree(j)
        prod *= 1.0 - truncated_surplus_mass(dists.row(j), dj) / dj
    return 1.0 - float(dists.row(i)[0]) * prod - gamma * net.degree(i)


def informed_no_transfer_prob(d_j: int, params: ModelParams) -> float:
    """P(a specific degree-d_j neighbour does not transfer to a needy individual).

    Conditioned on the receiver having drawn zero, the neighbour competes the
    receiver against Binomial(d_j - 1, q) other needy contacts, giving
    1 - (p/q) * (1 - (1-q)^d_j) / d_j.
    """
    if d_j < 1:
        raise GraphError(f"transfer probability requires degree >= 1; got d_j={d_j}")
    q, p = params.q, params.p
    return 1.0 - (p / q) * (1.0 - (1.0 - q) ** d_j) / d_j


def has_local_tree_neighborhood(net: Network, i: int) -> bool:
    """True iff no two neighbours of i are adjacent or share a contact other than i.

    Equivalently, i is incident to no 3- or 4-cycle; under this condition the
    informed no-transfer events across i's neighbours are independent.
    """
    nbrs = net.neighbors(i)
    seen: set[int] = set()
    for j in nbrs:
        for ell in net.neighbors(j):
            if ell == i:
                continue
            if ell in nbrs:
                return False  # 3-cycle through i
            if ell in seen:
                return False  # 4-cycle through i
            seen.add(ell)
    return True


def informed_utility_local_tree(net: Network, params: ModelParams, i: int) -> float:
    """Exact informed-model utility of i on a locally 3-/4-cycle-free neighbourhood.

    Raises GraphError when the independence precondition fails; use
    `transfer_sim.exact_informed_utility` there instead.
    """
    if not has_local_tree_neighborhood(net, i):
        raise GraphError(
            f"individual {i} is incident to a 3- or 4-cycle; the product form is invalid "
            "(use transfer_sim.exact_informed_utility)"
        )
    prod = 1.0
    for j in net.neighbors(i):
        prod *= informed_no_transfer_prob(net.degree(j), params)
    return 1.0 - params.q * prod - params.gamma * net.degree(i)


def utility(net: Network, params_or_dists, i: int, model: str = UNINFORMED, gamma: float | None = None) -> float:
    """Expected utility of i under the requested model.

    Accepts either ModelParams (base three-point pmf) or an
    ExogenousDistribution with an explicit gamma.  For the informed model the
    local product form is used where valid, otherwise exact enumeration.
    """
    validate_model(model)
    if isinstance(params_or_dists, ExogenousDistribution):
        if model == INFORMED:
            raise GraphError(
                "exact informed utilities are only defined for the base three-point "
                "distribution; use Monte Carlo estimation for heterogeneous pmfs"
            )
        if gamma is None:
            raise GraphError("gamma is required with an explicit distribution")
        return heterogeneous_utility(net, params_or_dists, gamma, i)
    params = params_or_dists
    if model == UNINFORMED:
        return expected_utility(net, params, i)
    if has_local_tree_neighborhood(net, i):
        return informed_utility_local_tree(net, params, i)
    from .transfer_sim import exact_informed_utility

    return exact_informed_utility(net, params, i)


def social_welfare(net: Network, params_or_dists, model: str = UNINFORMED, gamma: float | None = None) -> float:
    """Sum of expected utilities over all individuals.

    Propagates EnumerationCapError if some informed-model neighbourhood is too
    large for exact evaluation.
    """
    total = 0.0
    for i in range(net.n):
        total += utility(net, params_or_dists, i, model=model, gamma=gamma)
    return total


__all__ = [
    "expected_utility",
    "expected_utilities",
    "truncated_surplus_mass",
    "heterogeneous_utility",
    "informed_no_transfer_prob",
    "has_local_tree_neighborhood",
    "informed_utility_local_tree",
    "utility",
    "social_welfare",
    "EnumerationCapError",
]
