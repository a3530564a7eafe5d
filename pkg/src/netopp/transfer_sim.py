"""Seeded Monte Carlo simulation of opportunity transfer, plus exact informed-model
utilities by neighbourhood enumeration.

These are the independent oracles against which the closed forms are checked.
Randomness comes from numpy's Philox generator, a counter-based 64-bit RNG:
rounds are processed in fixed-width blocks of ``ROUND_BLOCK`` rounds, block b
drawing from the substream Philox(key=seed, counter=b << 128).  Within a block
every matrix is drawn with one row per round, so the randomness consumed by a
given round is a pure function of (seed, round index) and results cannot
depend on how rounds or individuals are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .core import (
    INFORMED,
    EnumerationCapError,
    ExogenousDistribution,
    GraphError,
    ModelParams,
    Network,
    base_distribution,
    validate_model,
)

ROUND_BLOCK = 4096
# Largest closed 2-ball (individual + neighbours + their neighbours) that
# exact informed enumeration will accept.
BALL_CAP = 16
_CHUNK = 1 << 17


@dataclass(frozen=True)
class SimResult:
    """Per-individual Monte Carlo estimates of expected utility."""

    mean_utility: np.ndarray
    std_error: np.ndarray
    rounds: int
    seed: int
    welfare_mean: float
    welfare_std_error: float


def _block_rng(seed: int, block: int) -> Generator:
    return Generator(Philox(key=np.uint64(seed), counter=block << 128))


def _as_distribution(net: Network, params_or_dists) -> tuple[ExogenousDistribution, float]:
    if isinstance(params_or_dists, ExogenousDistribution):
        if params_or_dists.n != net.n:
            raise GraphError(
                f"distribution rows ({params_or_dists.n}) do not match individuals ({net.n})"
            )
        return params_or_dists, 0.0
    params = params_or_dists
    return base_distribution(params, net.n), params.gamma


def _cdf(dists: ExogenousDistribution) -> np.ndarray:
    cdf = np.cumsum(dists.pmf, axis=1)
    cdf[:, -1] = 1.0  # guard against summation shortfall pushing draws off-support
    return cdf


def _simulate_rows(net: Network, cdf: np.ndarray, model: str, rng: Generator, rounds: int):
    """Exogenous draws and received-transfer counts for independent rounds.

    Draw layout per block: first a (rounds, n) uniform matrix for the exogenous
    draws, then a (rounds, n, Dmax) key tensor.  A surplus holder's recipients
    are the eligible neighbours holding its smallest keys, which is a uniform
    random choice of the required number of distinct recipients.
    """
    n = net.n
    deg = net.degrees
    dmax = int(deg.max()) if n else 0

    u_x = rng.random((rounds, n))
    keys = rng.random((rounds, n, dmax)) if dmax > 0 else None

    x = np.empty((rounds, n), dtype=np.int64)
    for i in range(n):
        x[:, i] = np.searchsorted(cdf[i], u_x[:, i], side="right")

    received = np.zeros((rounds, n), dtype=np.int64)
    for i in range(n):
        d = int(deg[i])
        if d == 0:
            continue
        surplus = x[:, i] - 1
        active = np.nonzero(surplus > 0)[0]
        if active.size == 0:
            continue
        nbrs = np.array(net.neighbors(i), dtype=np.int64)
        k = keys[active, i, :d].copy()
        if model == INFORMED:
            eligible = x[np.ix_(active, nbrs)] == 0
            k[~eligible] = np.inf
            capacity = eligible.sum(axis=1)
        else:
            capacity = np.full(active.size, d, dtype=np.int64)
        take = np.minimum(surplus[active], capacity)
        sendable = take > 0
        if not np.any(sendable):
            continue
        active = active[sendable]
        k = k[sendable]
        take = take[sendable]
        if int(take.max()) == 1:
            chosen_nbr = nbrs[np.argmin(k, axis=1)]
            np.add.at(received, (active, chosen_nbr), 1)
        else:
            order = np.argsort(k, axis=1, kind="stable")
            rank = np.empty_like(order)
            rows = np.arange(k.shape[0])[:, None]
            rank[rows, order] = np.arange(d)[None, :]
            sel_row, sel_col = np.nonzero(rank < take[:, None])
            np.add.at(received, (active[sel_row], nbrs[sel_col]), 1)

    return x, received


def _utilities(net: Network, x: np.ndarray, received: np.ndarray, gamma: float) -> np.ndarray:
    return np.minimum(1, x + received).astype(float) - gamma * net.degrees[None, :]


def sample_round_detail(net: Network, params_or_dists, model: str, rng: Generator):
    """One realized round; returns (exogenous counts, received counts, utilities)."""
    validate_model(model)
    dists, gamma = _as_distribution(net, params_or_dists)
    x, received = _simulate_rows(net, _cdf(dists), model, rng, 1)
    return x[0], received[0], _utilities(net, x, received, gamma)[0]


def sample_round(net: Network, params_or_dists, model: str, rng: Generator) -> np.ndarray:
    """One realized round of exogenous draws and transfers; returns the utility vector."""
    return sample_round_detail(net, params_or_dists, model, rng)[2]


def estimate_utilities(net: Network, params_or_dists, model: str, rounds: int, seed: int) -> SimResult:
    """Empirical mean and standard error of utility over independent rounds.

    Deterministic: identical (net, params, model, rounds, seed) yields
    bit-identical results regardless of block scheduling.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1; got {rounds}")
    validate_model(model)
    dists, gamma = _as_distribution(net, params_or_dists)
    cdf = _cdf(dists)

    n = net.n
    sums = np.zeros(n)
    sumsq = np.zeros(n)
    wsum = 0.0
    wsumsq = 0.0
    done = 0
    block = 0
    while done < rounds:
        m = min(ROUND_BLOCK, rounds - done)
        x, received = _simulate_rows(net, cdf, model, _block_rng(seed, block), m)
        y = _utilities(net, x, received, gamma)
        sums += y.sum(axis=0)
        sumsq += (y * y).sum(axis=0)
        w = y.sum(axis=1)
        wsum += float(w.sum())
        wsumsq += float((w * w).sum())
        done += m
        block += 1

    mean = sums / rounds
    if rounds > 1:
        var = np.maximum(sumsq - rounds * mean * mean, 0.0) / (rounds - 1)
        se = np.sqrt(var / rounds)
        wmean = wsum / rounds
        wvar = max(wsumsq - rounds * wmean * wmean, 0.0) / (rounds - 1)
        wse = float(np.sqrt(wvar / rounds))
    else:
        se = np.zeros(n)
        wse = 0.0
    return SimResult(
        mean_utility=mean,
        std_error=se,
        rounds=rounds,
        seed=seed,
        welfare_mean=wsum / rounds,
        welfare_std_error=wse,
    )


def _two_ball(net: Network, i: int) -> tuple[list[int], list[int]]:
    """Neighbours of i and the distance-2 individuals around i."""
    nbrs = list(net.neighbors(i))
    second = sorted(
        {ell for j in nbrs for ell in net.neighbors(j)} - {i} - set(nbrs)
    )
    return nbrs, second


def informed_no_receive_prob_exact(net: Network, params: ModelParams, i: int, ball_cap: int = BALL_CAP) -> float:
    """P(no neighbour transfers to i | i drew zero), handling transfer correlations exactly.

    Enumerates the joint exogenous state of i's closed 2-ball: each neighbour
    takes a count in {0, 1, 2}; each distance-2 individual only matters
    through whether its count is zero.  For a neighbour j with a surplus the
    chance it misses i is 1 - 1/needy_j, where needy_j counts j's zero-count
    contacts including i.
    """
    nbrs, second = _two_ball(net, i)
    d = len(nbrs)
    if d == 0:
        return 1.0
    ball = 1 + d + len(second)
    if ball > ball_cap:
        raise EnumerationCapError(
            f"closed 2-ball around {i} has {ball} individuals (cap {ball_cap}); "
            "use Monte Carlo estimation instead"
        )
    q, p = params.q, params.p
    cols = nbrs + second
    col_of = {v: c for c, v in enumerate(cols)}
    radix = np.array([3] * d + [2] * len(second), dtype=np.int64)
    col_probs = [np.array([q, 1.0 - p - q, p])] * d + [np.array([q, 1.0 - q])] * len(second)
    # column c of neighbours-of-j, excluding i itself (i is always needy here)
    others = [np.array([col_of[ell] for ell in net.neighbors(j) if ell != i], dtype=np.int64) for j in nbrs]

    strides = np.ones(len(cols), dtype=np.int64)
    for c in range(len(cols) - 2, -1, -1):
        strides[c] = strides[c + 1] * radix[c + 1]
    total = int(strides[0] * radix[0])

    acc = 0.0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        digits = (idx[:, None] // strides[None, :]) % radix[None, :]
        weight = np.ones(idx.size)
        for c in range(len(cols)):
            weight *= col_probs[c][digits[:, c]]
        needy = digits == 0
        factor = np.ones(idx.size)
        for jc in range(d):
            has_surplus = digits[:, jc] == 2
            if not has_surplus.any():
                continue
            cnt = 1 + (needy[:, others[jc]].sum(axis=1) if others[jc].size else 0)
            factor *= np.where(has_surplus, 1.0 - 1.0 / cnt, 1.0)
        acc += float(weight @ factor)
    return acc


def exact_informed_utility(net: Network, params: ModelParams, i: int, ball_cap: int = BALL_CAP) -> float:
    """Exact informed-model expected utility of i via 2-ball enumeration."""
    prob = informed_no_receive_prob_exact(net, params, i, ball_cap=ball_cap)
    return 1.0 - params.q * prob - params.gamma * net.degree(i)


def exact_informed_utilities(net: Network, params: ModelParams, ball_cap: int = BALL_CAP) -> np.ndarray:
    return np.array([exact_informed_utility(net, params, i, ball_cap=ball_cap) for i in range(net.n)])


__all__ = [
    "SimResult",
    "ROUND_BLOCK",
    "BALL_CAP",
    "sample_round",
    "sample_round_detail",
    "estimate_utilities",
    "informed_no_receive_prob_exact",
    "exact_informed_utility",
    "exact_informed_utilities",
]
