import math
import warnings

import numpy as np
import pytest

from conftest import make_random_graph
from netopp import (
    ModelParams,
    Network,
    ParameterError,
    base_distribution,
    brute_force_equilibria,
    brute_force_optimal,
    degree_range_witness,
    expected_utilities,
    gini,
    homophily_report,
    optimal_degree_informed,
    optimal_welfare,
    poa_costly,
    poa_frictionless,
    poa_informed,
    status_homophily_report,
    worst_case_gini,
)
from netopp.construct import (
    circulant_regular,
    complete_graph,
    star_graph,
    two_component_regular,
)
from netopp.core import ExogenousDistribution
from netopp.welfare import regular_welfare, two_block_gini


def q_half(gamma=0.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ModelParams(0.5, 0.5, gamma)


def test_poa_frictionless_vanishes_as_q_to_zero():
    assert poa_frictionless(1e-6, 0.3) == pytest.approx(1.0, abs=1e-5)


def test_poa_frictionless_midpoint_value():
    assert poa_frictionless(0.5, 0.5) == pytest.approx(1.07645, abs=1e-4)


def test_poa_frictionless_argmax_near_055():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grid = np.arange(0.005, 0.995, 0.005)
        values = [poa_frictionless(1 - p, p) for p in grid]
    best = grid[int(np.argmax(values))]
    assert abs(best - 0.55) <= 0.02


def test_poa_costly_trivial_regime():
    b = poa_costly(0.5, 0.3, 0.2)
    assert (b.lower, b.upper, b.regime) == (1.0, 1.0, "trivial")


def test_poa_costly_worked_example():
    b = poa_costly(0.5, 0.5, 0.07)
    assert b.d_used == 2
    assert b.lower == pytest.approx(0.68 / 0.57875)
    assert b.upper >= b.lower >= 1.0


def test_poa_costly_small_gamma_corner_approaches_two():
    b = poa_costly(0.99, 0.01, 1e-4)
    assert b.lower >= 1.9


def test_poa_costly_lower_bound_at_least_one(rng):
    for _ in range(200):
        p = rng.uniform(0.02, 0.95)
        q = 1 - p
        gamma = rng.uniform(1e-5, 0.3)
        b = poa_costly(q, p, gamma)
        assert b.lower >= 1.0 - 1e-12


def test_optimal_welfare_regimes():
    res = optimal_welfare(0.5, 0.3, 0.0, 100)
    assert (res.per_capita, res.structure) == (pytest.approx(0.65), "matching")
    res = optimal_welfare(0.5, 0.3, 0.2, 100)
    assert (res.per_capita, res.structure) == (pytest.approx(0.5), "empty")
    # at gamma = qp the matching and the empty network tie at 1 - q
    res = optimal_welfare(0.5, 0.3, 0.15, 100)
    assert res.per_capita == pytest.approx(0.5)


def test_optimal_welfare_odd_n_correction():
    res = optimal_welfare(0.5, 0.3, 0.0, 7)
    assert res.odd_n_correction == pytest.approx(-0.15 / 7)
    exact = (6 * 0.65 + 0.5) / 7
    assert res.per_capita + res.odd_n_correction == pytest.approx(exact)


def test_brute_force_optimum_is_matching():
    best, graphs = brute_force_optimal(4, ModelParams(0.5, 0.3))
    assert best == pytest.approx(4 * 0.65)
    assert all(sorted(g.degrees.tolist()) == [1, 1, 1, 1] for g in graphs)


def test_optimal_degree_informed_denser_than_matching():
    d_star, value = optimal_degree_informed(0.5, 0.3, 0.0, 200)
    assert d_star > 1
    assert value > 1 - 0.5 * 0.7  # beats the matching


def test_optimal_degree_informed_zero_when_costs_dominate():
    d_star, value = optimal_degree_informed(0.5, 0.3, 0.2, 50)
    assert d_star == 0 and value == pytest.approx(0.5)


def test_optimal_degree_informed_all_needy_limit():
    # as q -> 1 the informed objective collapses to the uninformed per-degree
    # welfare, whose regular optimum is the matching
    from netopp.welfare import informed_regular_welfare

    params = ModelParams(0.999, 0.001, 0.0)
    for d in range(1, 6):
        uninformed_form = 1 - params.q * (1 - params.p / d) ** d
        assert informed_regular_welfare(params, d) == pytest.approx(uninformed_form, abs=2e-6)
    limit_values = [1 - (1 - 0.001 / d) ** d for d in range(1, 6)]
    assert max(range(5), key=lambda k: limit_values[k]) == 0


def test_poa_informed_frictionless():
    b = poa_informed(0.5, 0.3, 0.0, 200)
    denom = 1 - 0.5 * math.exp(-0.6)
    _, numer = optimal_degree_informed(0.5, 0.3, 0.0, 200)
    assert b.lower == b.upper == pytest.approx(numer / denom)
    assert b.regime == "informed-frictionless"


def test_poa_informed_trivial_and_costly():
    assert poa_informed(0.5, 0.3, 0.2, 50).regime == "trivial"
    b = poa_informed(0.5, 0.3, 0.02, 100)
    assert b.regime == "informed-costly"
    assert 1.0 <= b.lower <= b.upper


def test_informed_denominator_shrinks_faster_in_q():
    # informed equilibrium welfare approaches 1 much faster as q -> 0
    ratios = [math.exp(-0.3 / q) / math.exp(-0.3) for q in (0.2, 0.1, 0.05)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.01


def test_gini_basic_values():
    assert gini([1.0, 1.0, 1.0]) == 0.0
    assert gini([0.0, 1.0]) == pytest.approx(0.5)


def test_gini_scale_invariance(rng):
    for _ in range(20):
        u = [rng.uniform(0.1, 1.0) for _ in range(rng.randrange(2, 40))]
        c = rng.uniform(0.5, 10)
        assert gini([c * x for x in u]) == pytest.approx(gini(u), abs=1e-12)


def test_gini_requires_positive_total():
    with pytest.raises(ParameterError, match="positive total"):
        gini([0.0, 0.0])


def test_gini_two_block_formula_agreement():
    lam, u_hi, u_lo = 0.449, 0.0015, 0.001
    n = 1000
    k = int(lam * n)
    values = [u_hi] * k + [u_lo] * (n - k)
    assert gini(values) == pytest.approx(two_block_gini(k / n, u_hi, u_lo), abs=1e-3)


def test_worst_case_gini_singleton_degrees():
    r = worst_case_gini(0.5, 0.3, 0.2)  # only the empty network is stable
    assert r.value == 0.0 and r.lam == 0.0
    assert r.d_min == r.d_max == 0


def test_worst_case_gini_headline_value():
    p = 1e-3
    q = 1 - p
    gamma = p * (1 - p) * (1 - p / 2) / 2
    r = worst_case_gini(q, p, gamma)
    assert (r.d_min, r.d_max) == (1, 2)
    assert abs(r.value - (5 - 2 * math.sqrt(6))) < 1e-2
    assert abs(r.lam - (math.sqrt(6) - 2)) < 1e-2


def test_worst_case_gini_lambda_is_stationary():
    p = 1e-3
    q = 1 - p
    gamma = p * (1 - p) * (1 - p / 2) / 2
    r = worst_case_gini(q, p, gamma)
    scan = np.linspace(1e-4, 1 - 1e-4, 1000)
    values = [two_block_gini(l, r.u_max, r.u_min) for l in scan]
    assert r.value >= max(values) - 1e-8


def test_two_component_network_reproduces_formula():
    p = 1e-3
    q = 1 - p
    gamma = p * (1 - p) * (1 - p / 2) / 2
    r = worst_case_gini(q, p, gamma)
    net = two_component_regular(1000, 1, 2, r.lam)
    u = expected_utilities(net, ModelParams(q, p, gamma))
    assert abs(gini(u) - r.value) < 2 / 1000


def test_degree_range_witness_small():
    p, q, gamma, degrees = degree_range_witness(1)
    assert 1 in degrees and max(degrees) >= 2
    assert gamma == pytest.approx(q * (1 - p) / 2)


def test_degree_range_witness_k5():
    p, q, gamma, degrees = degree_range_witness(5)
    assert 1 in degrees and max(degrees) - min(degrees) >= 5
    assert p > 0.8  # the proof pushes p toward 1


def test_degree_range_witness_trivial():
    _, _, _, degrees = degree_range_witness(0)
    assert degrees


def test_homophily_regular_graph_clean():
    params = q_half(0.07)
    report = homophily_report(circulant_regular(12, 3), params, 1)
    assert report.violators == ()
    assert report.within_bound


def test_homophily_star_flags_leaves():
    report = homophily_report(star_graph(6), ModelParams(0.5, 0.3, 0.01), 1)
    assert set(range(1, 6)) <= set(report.violators)


def test_homophily_informed_flags_short_cycles():
    params = ModelParams(0.5, 0.3, 0.04)
    report = homophily_report(complete_graph(4), params, 1, model="informed")
    assert set(report.violators) == {0, 1, 2, 3}


def test_status_homophily_homogeneous_population_clean():
    params = q_half(0.07)
    net = circulant_regular(10, 2)
    dists = base_distribution(params, 10)
    report = status_homophily_report(net, dists, params.gamma, 1e-3)
    assert report.violators == ()


def test_status_homophily_matches_degree_homophily_for_base_pmf(rng):
    params = ModelParams(0.5, 0.3, 0.05)
    for _ in range(20):
        net = make_random_graph(rng.randrange(4, 10), 5, rng)
        dists = base_distribution(params, net.n)
        status = status_homophily_report(net, dists, params.gamma, 1e-6)
        degree = homophily_report(net, params, 1)
        assert set(status.violators) == set(degree.violators)


def test_status_homophily_two_class_population():
    # high-surplus class (0, 1) matched against low-surplus class (2, 3):
    # cross-class edges are asymmetric, within-class edges are fine
    net = Network(4, [(0, 2), (1, 3)])
    pmf = np.array(
        [
            [0.2, 0.2, 0.6],
            [0.2, 0.2, 0.6],
            [0.2, 0.79, 0.01],
            [0.2, 0.79, 0.01],
        ]
    )
    dists = ExogenousDistribution(pmf)
    report = status_homophily_report(net, dists, 0.05, 1e-6)
    assert set(report.violators) == {0, 1, 2, 3}
    within = Network(4, [(0, 1), (2, 3)])
    report = status_homophily_report(within, dists, 0.05, 1e-6)
    assert report.violators == ()


def test_brute_force_equilibria_frictionless_unique_complete():
    for n in (4, 5):
        eqs = brute_force_equilibria(n, ModelParams(0.5, 0.3))
        assert eqs == [complete_graph(n)]


def test_brute_force_equilibria_high_cost_unique_empty():
    eqs = brute_force_equilibria(4, ModelParams(0.5, 0.3, 0.2))
    assert eqs == [Network(4)]


def test_brute_force_equilibria_respects_degree_bound():
    params = q_half(0.07)
    eqs = brute_force_equilibria(5, params)
    bound = params.q * params.p / params.gamma
    for g in eqs:
        assert max(g.degrees.tolist()) <= bound


def test_brute_force_size_guard():
    with pytest.raises(ParameterError, match="n <= 6"):
        brute_force_equilibria(7, ModelParams(0.5, 0.3))


def test_regular_welfare_decreasing_in_degree():
    params = q_half(0.01)
    values = [regular_welfare(params, d) for d in range(1, 12)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_two_component_welfare_bracketed_by_optimum_and_worst_equilibrium():
    p = 1e-3
    q = 1 - p
    gamma = p * (1 - p) * (1 - p / 2) / 2
    r = worst_case_gini(q, p, gamma)
    net = two_component_regular(1000, 1, 2, r.lam)
    per_capita = float(expected_utilities(net, ModelParams(q, p, gamma)).mean())
    optimum = optimal_welfare(q, p, gamma, 1000).per_capita
    worst = regular_welfare(ModelParams(q, p, gamma), r.d_max)
    assert worst - 1e-12 <= per_capita <= optimum + 1e-12


def test_informed_equilibria_satisfy_informed_degree_bound():
    params = ModelParams(0.5, 0.3, 0.06)
    eqs = brute_force_equilibria(4, params, model="informed")
    assert eqs
    bound = params.p / params.gamma
    for g in eqs:
        assert max(g.degrees.tolist(), default=0) <= bound
