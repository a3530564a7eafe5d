"""Platform-lever analyses: connection-friction sweeps and the value of
broadcasting who needs an opportunity.

Friction is non-monotone at equilibrium: within a maximal interval of gamma
where the set of stable regular degrees is constant, welfare strictly
improves as gamma falls, but crossing a boundary where a denser regular
equilibrium becomes stable drops worst-case welfare discontinuously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .closed_form import expected_utility
from .core import InvariantError, ModelParams, ParameterError, Network, validate_params
from .equilibrium import (
    GAIN_TOL,
    informed_largest_regular_degree,
    informed_regular_equilibrium_degrees,
    largest_regular_degree,
    regular_equilibrium_degrees,
)
from .transfer_sim import BALL_CAP, exact_informed_utility
from .welfare import informed_regular_welfare, regular_welfare


@dataclass(frozen=True)
class FrictionCurve:
    """Worst-case regular-equilibrium utility as a function of gamma.

    Within each transition-free segment utility is strictly decreasing in
    gamma; each transition is a gamma where the largest stable regular degree
    changes, located by bisection.
    """

    gammas: np.ndarray
    degrees: np.ndarray
    worst_regular_utility: np.ndarray
    transitions: tuple


@dataclass(frozen=True)
class FrictionWitness:
    gamma: float
    eps_bar: float
    d: int
    holds: bool


@dataclass(frozen=True)
class InfoCompareRow:
    node: int
    u_uninformed: float
    u_informed: float
    strict: bool


def worst_case_degree(q: float, p: float, gamma: float) -> int:
    """Degree of the worst (lowest-welfare) stable regular network."""
    if gamma > q * p + GAIN_TOL:
        return 0
    return largest_regular_degree(ModelParams(q, p, gamma))


def worst_regular_welfare(q: float, p: float, gamma: float) -> float:
    params = ModelParams(q, p, gamma)
    return regular_welfare(params, worst_case_degree(q, p, gamma))


def friction_sweep(q: float, p: float, gamma_range: tuple[float, float], step: float) -> FrictionCurve:
    """Worst-case regular-equilibrium utility over a gamma grid.

    Transition points (where the worst-case degree changes) are refined by
    bisection to 1e-9; they coincide with the stability-interval endpoints
    gamma = (q p / d)(1 - p/d)^(d-1).
    """
    if step <= 0:
        raise ParameterError(f"step must be positive; got {step}")
    lo, hi = gamma_range
    grid = [g for g in np.arange(lo, hi + step / 2, step) if g > 0]
    gammas = np.array(grid, dtype=float)
    degrees = np.array([worst_case_degree(q, p, g) for g in gammas], dtype=np.int64)
    utils = np.array([regular_welfare(ModelParams(q, p, g), int(d)) for g, d in zip(gammas, degrees)])

    transitions = []
    for idx in range(len(gammas) - 1):
        if degrees[idx] == degrees[idx + 1]:
            continue
        a, b = float(gammas[idx]), float(gammas[idx + 1])
        d_left = int(degrees[idx])
        while b - a > 1e-9:
            mid = 0.5 * (a + b)
            if worst_case_degree(q, p, mid) == d_left:
                a = mid
            else:
                b = mid
        transitions.append(0.5 * (a + b))
    return FrictionCurve(gammas, degrees, utils, tuple(transitions))


def friction_nonmonotonicity_witness(q: float, p: float, d: int = 2) -> FrictionWitness:
    """Boundary gamma for degree d with a slack budget eps_bar = gamma/(2d+1).

    At gamma just below the boundary the d-regular network is the worst stable
    regular equilibrium; just above it the worst degree is smaller.  `holds`
    records the numeric corner check that welfare below stays strictly under
    welfare above for all perturbations up to eps_bar.  (At d = 1 the two
    sides meet continuously at value 1 - q, so the strict comparison fails
    there; the discontinuity exists only for d >= 2.)
    """
    validate_params(q, p, 0.0)
    if d < 1:
        raise ParameterError(f"boundary degree must be >= 1; got {d}")
    gamma = (q * p / d) * (1.0 - p / d) ** (d - 1)
    eps_bar = gamma / (2 * d + 1) * (1.0 - 1e-6)
    eps_off = 1e-9 * gamma  # step strictly past the boundary on the high side
    holds = True
    for eps in (0.0, eps_bar):
        for eps_prime in (eps_off, eps_bar):
            below = worst_regular_welfare(q, p, gamma - eps)
            above = worst_regular_welfare(q, p, gamma + eps_prime)
            if not below < above:
                holds = False
    return FrictionWitness(gamma, eps_bar, d, holds)


def information_fixed_compare(net: Network, params: ModelParams, ball_cap: int = BALL_CAP) -> list[InfoCompareRow]:
    """Per-individual utility under both transfer models on a fixed network.

    Verifies informed >= uninformed for every individual, strictly exactly
    when some neighbour has degree >= 2 (a degree-1 neighbour behaves
    identically in both models).
    """
    rows = []
    for i in range(net.n):
        u0 = expected_utility(net, params, i)
        u1 = exact_informed_utility(net, params, i, ball_cap=ball_cap)
        strict_expected = any(net.degree(j) >= 2 for j in net.neighbors(i))
        if u1 < u0 - GAIN_TOL:
            raise InvariantError(f"informed utility below uninformed at node {i}: {u1} < {u0}")
        strict = u1 > u0 + GAIN_TOL
        if strict != strict_expected:
            raise InvariantError(
                f"strictness mismatch at node {i}: informed-uninformed gap {u1 - u0}, "
                f"expected strict={strict_expected}"
            )
        rows.append(InfoCompareRow(i, u0, u1, strict))
    return rows


@dataclass(frozen=True)
class InfoEquilibriumReport:
    p: float
    frictionless_uninformed: float
    frictionless_informed: float
    item1_holds: bool
    item2_gamma: float
    item2_uninformed: float
    item2_informed: float
    item2_holds: bool
    item3_gamma: float
    item3_uninformed: float
    item3_informed: float
    item3_holds: bool

    def to_json_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def information_equilibrium_compare(p: float) -> InfoEquilibriumReport:
    """Equilibrium welfare comparisons between transfer models at q = 1 - p.

    Three regimes: frictionless (informed always wins); a shared 2-regular
    equilibrium (informed wins); and a cost level where the informed game
    admits a denser (2-regular) equilibrium than the uninformed one
    (1-regular) and the extra connection costs flip the comparison.
    Requires 0 < p < 1/2.
    """
    if not (0.0 < p < 0.5):
        raise ParameterError(f"comparison defined for 0 < p < 1/2; got p={p}")
    q = 1.0 - p

    w0_unf = 1.0 - q * math.exp(-p)
    w0_inf = 1.0 - q * math.exp(-p / q)
    item1 = w0_inf > w0_unf

    gamma2 = q * p * (1.0 - p / 2.0) / 2.0
    params2 = ModelParams(q, p, gamma2)
    if largest_regular_degree(params2) != 2 or informed_largest_regular_degree(params2) != 2:
        raise InvariantError(f"expected shared largest regular degree 2 at p={p}")
    if 2 not in regular_equilibrium_degrees(params2) or 2 not in informed_regular_equilibrium_degrees(params2):
        raise InvariantError(f"expected a shared 2-regular equilibrium at p={p}")
    w2_unf = regular_welfare(params2, 2)
    w2_inf = informed_regular_welfare(params2, 2)
    item2 = w2_inf > w2_unf

    gamma3 = p * (2.0 + p) * (1.0 - p) ** 2 * (1.0 + p) / 4.0
    params3 = ModelParams(q, p, gamma3)
    if informed_largest_regular_degree(params3) != 2 or largest_regular_degree(params3) != 1:
        raise InvariantError(f"expected informed/uninformed largest regular degrees 2/1 at p={p}")
    w3_unf = regular_welfare(params3, 1)
    w3_inf = informed_regular_welfare(params3, 2)
    item3 = w3_unf > w3_inf

    return InfoEquilibriumReport(
        p,
        w0_unf,
        w0_inf,
        item1,
        gamma2,
        w2_unf,
        w2_inf,
        item2,
        gamma3,
        w3_unf,
        w3_inf,
        item3,
    )


__all__ = [
    "FrictionCurve",
    "FrictionWitness",
    "InfoCompareRow",
    "InfoEquilibriumReport",
    "worst_case_degree",
    "worst_regular_welfare",
    "friction_sweep",
    "friction_nonmonotonicity_witness",
    "information_fixed_compare",
    "information_equilibrium_compare",
]
