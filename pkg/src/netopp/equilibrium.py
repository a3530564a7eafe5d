"""Equilibrium verification and discovery.

A network is a defection-free pairwise equilibrium when no endpoint of any
edge gains by unilaterally severing it, and no unconnected pair can connect
(each optionally dropping some of their own edges) with both strictly
gaining.  Gains are compared against an absolute tolerance so that boundary
parameter choices (where a move is exactly break-even) count as stable;
indifference never blocks.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .core import (
    UNINFORMED,
    GraphError,
    InvariantError,
    ModelParams,
    Network,
    ParameterError,
    validate_model,
)
from .construct import circulant_regular
from .transfer_sim import BALL_CAP, exact_informed_utility

GAIN_TOL = 1e-12


@dataclass(frozen=True)
class Deviation:
    """A profitable move: either severing an existing edge or a pair forming
    a new one while each endpoint drops some of its own edges."""

    kind: str  # "sever" | "pair-add"
    i: int
    j: int
    drop_i: tuple = ()
    drop_j: tuple = ()
    gain_i: float = 0.0
    gain_j: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "i": self.i,
            "j": self.j,
            "drop_i": list(self.drop_i),
            "drop_j": list(self.drop_j),
            "gain_i": self.gain_i,
            "gain_j": self.gain_j,
        }


@dataclass(frozen=True)
class EquilibriumReport:
    is_equilibrium: bool
    witness: Deviation | None
    checked_moves: int

    def to_json_dict(self) -> dict:
        return {
            "is_equilibrium": self.is_equilibrium,
            "witness": self.witness.to_json_dict() if self.witness else None,
            "checked_moves": self.checked_moves,
        }


# --------------------------------------------------------------------------
# gain evaluation
# --------------------------------------------------------------------------


class _UninformedEval:
    """Cached factors for fast closed-form gain evaluation on one graph."""

    def __init__(self, net: Network, params: ModelParams):
        self.net = net
        self.params = params
        deg = net.degrees
        factor = np.ones(net.n)
        nz = deg > 0
        factor[nz] = 1.0 - params.p / deg[nz]
        self.factor = factor
        self.prod = np.array(
            [float(np.prod(factor[list(net.neighbors(i))])) if net.degree(i) else 1.0 for i in range(net.n)]
        )

    def sever_gain(self, i: int, j: int) -> tuple[float, float]:
        q, p, gamma = self.params.q, self.params.p, self.params.gamma
        net = self.net
        gi = gamma - (q * p / net.degree(j)) * self.prod[i] / self.factor[j]
        gj = gamma - (q * p / net.degree(i)) * self.prod[j] / self.factor[i]
        return gi, gj

    def best_add_gain(self, i: int, j: int) -> tuple[float, tuple]:
        """Max gain for endpoint i from connecting to j while dropping the best
        own-edge subset; the optimum drop set of size m is always the m
        neighbours of largest degree, so only prefixes need scanning."""
        q, p, gamma = self.params.q, self.params.p, self.params.gamma
        net = self.net
        c = 1.0 - p / (net.degree(j) + 1)
        nbrs = sorted(net.neighbors(i), key=lambda ell: (-net.degree(ell), ell))
        total = self.prod[i]
        best_gain = q * total * (1.0 - c) - gamma  # m = 0
        best_m = 0
        dropped = 1.0
        for m, ell in enumerate(nbrs, start=1):
            dropped *= self.factor[ell]
            gain = q * total * (1.0 - c / dropped) - gamma * (1 - m)
            if gain > best_gain:
                best_gain, best_m = gain, m
        return best_gain, tuple(nbrs[:best_m])


class _InformedEval:
    """Exact informed-model gain evaluation via neighbourhood enumeration.

    Deterministic by construction; Monte Carlo is never consulted.  Restricted
    to graphs whose 2-balls fit the enumeration cap.
    """

    def __init__(self, net: Network, params: ModelParams, ball_cap: int = BALL_CAP):
        self.net = net
        self.params = params
        self.ball_cap = ball_cap
        self._base_cache: dict[int, float] = {}

    def _u(self, net: Network, i: int) -> float:
        return exact_informed_utility(net, self.params, i, ball_cap=self.ball_cap)

    def _u_base(self, i: int) -> float:
        if i not in self._base_cache:
            self._base_cache[i] = self._u(self.net, i)
        return self._base_cache[i]

    def sever_gain(self, i: int, j: int) -> tuple[float, float]:
        after = self.net.without_edge(i, j)
        gi = self._u(after, i) - self._u_base(i)
        gj = self._u(after, j) - self._u_base(j)
        return gi, gj

    def best_add_gain(self, i: int, j: int) -> tuple[float, tuple]:
        base = self._u_base(i)
        nbrs = self.net.neighbors(i)
        best_gain = -math.inf
        best_drop: tuple = ()
        for mask in range(1 << len(nbrs)):
            drop = tuple(nbrs[b] for b in range(len(nbrs)) if mask >> b & 1)
            mod = self.net.with_changes(add=[(i, j)], remove=[(i, ell) for ell in drop])
            gain = self._u(mod, i) - base
            if gain > best_gain:
                best_gain, best_drop = gain, drop
        return best_gain, best_drop


def _evaluator(net: Network, params: ModelParams, model: str, ball_cap: int = BALL_CAP):
    validate_model(model)
    if model == UNINFORMED:
        return _UninformedEval(net, params)
    return _InformedEval(net, params, ball_cap=ball_cap)


def sever_gain(net: Network, params: ModelParams, edge, model: str = UNINFORMED) -> tuple[float, float]:
    """Utility change for each endpoint from unilaterally severing `edge`.

    At equilibrium both gains must be <= 0.
    """
    i, j = edge
    if not net.has_edge(i, j):
        raise GraphError(f"edge ({i}, {j}) not present")
    return _evaluator(net, params, model).sever_gain(i, j)


def pair_add_gain(net: Network, params: ModelParams, i: int, j: int, drop_i=(), model: str = UNINFORMED) -> float:
    """Gain to endpoint i from adding (i, j) while dropping `drop_i` of its own
    edges.  Direct utility difference; used as the exhaustive oracle against
    the greedy prefix search."""
    if net.has_edge(i, j):
        raise GraphError(f"edge ({i}, {j}) already present")
    mod = net.with_changes(add=[(i, j)], remove=[(i, ell) for ell in drop_i])
    if model == UNINFORMED:
        from .closed_form import expected_utility

        return expected_utility(mod, params, i) - expected_utility(net, params, i)
    return exact_informed_utility(mod, params, i) - exact_informed_utility(net, params, i)


def best_pair_add(net: Network, params: ModelParams, i: int, j: int, model: str = UNINFORMED) -> Deviation | None:
    """The blocking pair-add deviation for (i, j), or None.

    Each endpoint maximizes its own gain over drop subsets of its own edges;
    the move blocks equilibrium only when both maximized gains are strictly
    positive.
    """
    if net.has_edge(i, j):
        raise GraphError(f"edge ({i}, {j}) already present")
    ev = _evaluator(net, params, model)
    gi, drop_i = ev.best_add_gain(i, j)
    if gi <= GAIN_TOL:
        return None
    gj, drop_j = ev.best_add_gain(j, i)
    if gj <= GAIN_TOL:
        return None
    return Deviation("pair-add", i, j, drop_i, drop_j, gi, gj)


def check_equilibrium(net: Network, params: ModelParams, model: str = UNINFORMED, ball_cap: int = BALL_CAP) -> EquilibriumReport:
    """Full defection-free pairwise equilibrium check.

    Moves are scanned in canonical order (edges first, then non-edges); the
    first violation is returned as the witness.
    """
    ev = _evaluator(net, params, model, ball_cap=ball_cap)
    checked = 0
    for i, j in net.edges:
        checked += 1
        gi, gj = ev.sever_gain(i, j)
        if gi > GAIN_TOL or gj > GAIN_TOL:
            return EquilibriumReport(False, Deviation("sever", i, j, gain_i=gi, gain_j=gj), checked)
    for i, j in net.non_edges():
        checked += 1
        gi, drop_i = ev.best_add_gain(i, j)
        if gi <= GAIN_TOL:
            continue
        gj, drop_j = ev.best_add_gain(j, i)
        if gj <= GAIN_TOL:
            continue
        return EquilibriumReport(False, Deviation("pair-add", i, j, drop_i, drop_j, gi, gj), checked)
    return EquilibriumReport(True, None, checked)


def multi_sever_gain(net: Network, params: ModelParams, i: int, drop, model: str = UNINFORMED) -> float:
    """Gain to i from severing a whole set of its edges at once."""
    mod = net.with_changes(remove=[(i, ell) for ell in drop])
    if model == UNINFORMED:
        from .closed_form import expected_utility

        return expected_utility(mod, params, i) - expected_utility(net, params, i)
    return exact_informed_utility(mod, params, i) - exact_informed_utility(net, params, i)


def multi_sever_equivalence_check(net: Network, params: ModelParams, i: int, model: str = UNINFORMED) -> bool:
    """Confirm that a profitable multi-edge severance exists iff a profitable
    single-edge severance does (property test, not part of the checker)."""
    nbrs = net.neighbors(i)
    single = any(sever_gain(net, params, (i, j), model=model)[0] > GAIN_TOL for j in nbrs)
    multi = False
    for mask in range(1, 1 << len(nbrs)):
        drop = [nbrs[b] for b in range(len(nbrs)) if mask >> b & 1]
        if multi_sever_gain(net, params, i, drop, model=model) > GAIN_TOL:
            multi = True
            break
    return multi == single


# --------------------------------------------------------------------------
# regular equilibria
# --------------------------------------------------------------------------


def regular_interval(params: ModelParams, d: int) -> tuple[float, float]:
    """Interval of gamma/(q*p) values for which the d-regular graph is stable
    (uninformed model), d >= 1."""
    if d < 1:
        raise ParameterError(f"regular interval defined for d >= 1; got {d}")
    p = params.p
    lo = (1.0 / (d + 1)) * (1.0 - p / d) ** d
    hi = (1.0 / d) * (1.0 - p / d) ** (d - 1)
    return lo, hi


def informed_regular_interval(params: ModelParams, d: int) -> tuple[float, float]:
    """Interval of gamma/p values for which the d-regular (girth >= 5) graph is
    stable under informed transfer, d >= 1."""
    if d < 1:
        raise ParameterError(f"regular interval defined for d >= 1; got {d}")
    q, p = params.q, params.p
    g_d = (1.0 - (1.0 - q) ** d) / d
    base = 1.0 - (p / q) * g_d
    lo = ((1.0 - (1.0 - q) ** (d + 1)) / (d + 1)) * base**d
    hi = g_d * base ** (d - 1)
    return lo, hi


def _degree_set(x: float, interval) -> list[int]:
    """All d >= 1 whose interval contains x; intervals satisfy hi(d) <= 1/d so
    the scan terminates at d ~ 1/x."""
    out = []
    d = 1
    while d <= 1.0 / max(x - GAIN_TOL, 1e-15) + 1:
        lo, hi = interval(d)
        if lo - GAIN_TOL <= x <= hi + GAIN_TOL:
            out.append(d)
        d += 1
    return out


def regular_equilibrium_degrees(params: ModelParams) -> tuple[int, ...]:
    """All degrees d (0 included) for which a d-regular network is stable.

    Nonempty for every gamma > 0: the intervals for d >= 1 cover (0, 1] in
    gamma/(q*p), and d = 0 (the empty graph) is stable iff gamma >= q*p.
    """
    if params.gamma <= 0:
        raise ParameterError("regular equilibrium degrees require gamma > 0")
    x = params.gamma / (params.q * params.p)
    out = [0] if params.gamma >= params.q * params.p - GAIN_TOL else []
    if x <= 1.0 + GAIN_TOL:
        out.extend(_degree_set(x, lambda d: regular_interval(params, d)))
    return tuple(sorted(out))


def informed_regular_equilibrium_degrees(params: ModelParams) -> tuple[int, ...]:
    """Informed-model analogue of `regular_equilibrium_degrees` (d-regular
    graphs of girth >= 5)."""
    if params.gamma <= 0:
        raise ParameterError("regular equilibrium degrees require gamma > 0")
    x = params.gamma / params.p
    out = [0] if params.gamma >= params.q * params.p - GAIN_TOL else []
    if x <= 1.0 + GAIN_TOL:
        out.extend(_degree_set(x, lambda d: informed_regular_interval(params, d)))
    return tuple(sorted(out))


def largest_regular_degree(params: ModelParams) -> int:
    """Largest d with gamma/(q*p) <= (1/d)(1 - p/d)^(d-1): the degree of the
    worst-case regular equilibrium.  Requires 0 < gamma <= q*p."""
    x = params.gamma / (params.q * params.p)
    if params.gamma <= 0 or x > 1.0 + GAIN_TOL:
        raise ParameterError(f"largest regular degree defined for 0 < gamma <= q*p; got gamma={params.gamma}")
    best = 1
    d = 1
    while d <= 1.0 / max(x - GAIN_TOL, 1e-15) + 1:
        if x <= regular_interval(params, d)[1] + GAIN_TOL:
            best = d
        d += 1
    return best


def informed_largest_regular_degree(params: ModelParams) -> int:
    """Largest d satisfying the informed-model sever-side condition."""
    x = params.gamma / params.p
    if params.gamma <= 0 or params.gamma > params.q * params.p + GAIN_TOL:
        raise ParameterError(f"informed largest regular degree defined for 0 < gamma <= q*p; got gamma={params.gamma}")
    best = 1
    d = 1
    while d <= 1.0 / max(x - GAIN_TOL, 1e-15) + 1:
        if x <= informed_regular_interval(params, d)[1] + GAIN_TOL:
            best = d
        d += 1
    return best


def near_regular_equilibrium(n: int, d: int, params: ModelParams) -> Network:
    """A stable network on n individuals where all (or all but one) have degree d.

    When n*d is even this is a plain circulant.  When both are odd, a
    d-regular graph cannot exist: build one on n-1 individuals, then detach
    floor(d/2) or ceil(d/2) disjoint edges and wire both endpoints of each to
    the remaining individual; one of the two variants is always stable.
    """
    if n <= d + 1:
        raise GraphError(f"need n > d + 1; got n={n}, d={d}")
    if (n * d) % 2 == 0:
        net = circulant_regular(n, d)
        report = check_equilibrium(net, params)
        if not report.is_equilibrium:
            raise InvariantError(f"circulant {d}-regular graph unexpectedly unstable: {report.witness}")
        return net
    last = n - 1
    base = circulant_regular(n - 1, d)
    for m in (d // 2, d // 2 + 1):
        used: set[int] = set()
        chosen = []
        for a, b in base.edges:
            if a in used or b in used:
                continue
            chosen.append((a, b))
            used.update((a, b))
            if len(chosen) == m:
                break
        if len(chosen) < m:
            continue
        edges = [e for e in base.edges if e not in set(chosen)]
        for a, b in chosen:
            edges.extend([(a, last), (b, last)])
        net = Network(n, edges)
        if check_equilibrium(net, params).is_equilibrium:
            return net
    raise InvariantError(f"neither rewiring variant is stable for n={n}, d={d}")


# --------------------------------------------------------------------------
# dynamics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicsResult:
    network: Network
    trace: tuple
    converged: bool
    moves: int


def profitable_moves(net: Network, params: ModelParams, model: str = UNINFORMED) -> list[Deviation]:
    """All currently profitable moves in canonical order."""
    ev = _evaluator(net, params, model)
    moves = []
    for i, j in net.edges:
        gi, gj = ev.sever_gain(i, j)
        if gi > GAIN_TOL or gj > GAIN_TOL:
            moves.append(Deviation("sever", i, j, gain_i=gi, gain_j=gj))
    for i, j in net.non_edges():
        gi, drop_i = ev.best_add_gain(i, j)
        if gi <= GAIN_TOL:
            continue
        gj, drop_j = ev.best_add_gain(j, i)
        if gj <= GAIN_TOL:
            continue
        moves.append(Deviation("pair-add", i, j, drop_i, drop_j, gi, gj))
    return moves


def best_response_dynamics(
    n: int,
    params: ModelParams,
    seed: int = 0,
    max_moves: int | None = None,
    model: str = UNINFORMED,
) -> DynamicsResult:
    """Random better-response dynamics from the empty network.

    Repeatedly applies a uniformly random profitable deviation until none
    exists (the result is then checker-verified) or `max_moves` is reached,
    in which case non-convergence is reported rather than raised.
    """
    if max_moves is None:
        max_moves = 10 * n * n
    if max_moves < 1:
        raise ParameterError(f"max_moves must be >= 1; got {max_moves}")
    rng = random.Random(seed)
    net = Network(n)
    trace = []
    for _ in range(max_moves):
        moves = profitable_moves(net, params, model)
        if not moves:
            report = check_equilibrium(net, params, model)
            if not report.is_equilibrium:
                raise InvariantError(f"dynamics stopped at a non-equilibrium: {report.witness}")
            return DynamicsResult(net, tuple(trace), True, len(trace))
        mv = rng.choice(moves)
        if mv.kind == "sever":
            net = net.without_edge(mv.i, mv.j)
        else:
            net = net.with_changes(
                add=[(mv.i, mv.j)],
                remove=[(mv.i, ell) for ell in mv.drop_i] + [(mv.j, ell) for ell in mv.drop_j],
            )
        trace.append(mv)
    return DynamicsResult(net, tuple(trace), False, len(trace))


__all__ = [
    "GAIN_TOL",
    "Deviation",
    "EquilibriumReport",
    "DynamicsResult",
    "sever_gain",
    "pair_add_gain",
    "best_pair_add",
    "check_equilibrium",
    "multi_sever_gain",
    "multi_sever_equivalence_check",
    "regular_interval",
    "informed_regular_interval",
    "regular_equilibrium_degrees",
    "informed_regular_equilibrium_degrees",
    "largest_regular_degree",
    "informed_largest_regular_degree",
    "near_regular_equilibrium",
    "profitable_moves",
    "best_response_dynamics",
]
