import numpy as np
import pytest
from numpy.random import Generator, Philox

from conftest import make_random_graph
from netopp import (
    INFORMED,
    UNINFORMED,
    EnumerationCapError,
    ExogenousDistribution,
    ModelParams,
    Network,
    estimate_utilities,
    exact_informed_utility,
    expected_utility,
    informed_utility_local_tree,
    sample_round,
)
from netopp.construct import (
    complete_graph,
    cycle_graph,
    matching_graph,
    path_graph,
    petersen_graph,
    random_regular,
)
from netopp.transfer_sim import sample_round_detail


def _rng(key=0):
    return Generator(Philox(key=key))


def test_no_surplus_means_no_transfers():
    # pmf forces X = 1 everywhere: everyone keeps their own opportunity
    net = complete_graph(4)
    dists = ExogenousDistribution(np.tile([0.0, 1.0, 0.0], (4, 1)))
    y = sample_round(net, dists, UNINFORMED, _rng(1))
    assert np.array_equal(y, np.ones(4))


def test_forced_transfer_to_unique_neighbor():
    net = matching_graph(2)
    dists = ExogenousDistribution(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]))
    x, received, y = sample_round_detail(net, dists, UNINFORMED, _rng(2))
    assert x.tolist() == [2, 0]
    assert received.tolist() == [0, 1]
    assert y.tolist() == [1.0, 1.0]


def test_informed_targets_the_needy_neighbor():
    # a-b-c path: b holds a surplus, a already has one, c has none
    net = path_graph(3)
    dists = ExogenousDistribution(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float))
    for key in range(10):
        y = sample_round(net, dists, INFORMED, _rng(key))
        assert y.tolist() == [1.0, 1.0, 1.0]


def test_uninformed_can_waste_on_satisfied_neighbor():
    net = path_graph(3)
    dists = ExogenousDistribution(np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float))
    outcomes = {tuple(sample_round(net, dists, UNINFORMED, _rng(key))) for key in range(64)}
    assert (1.0, 1.0, 1.0) in outcomes  # transfer reached c
    assert (1.0, 1.0, 0.0) in outcomes  # transfer wasted on a


def test_conservation_consumed_at_most_drawn(rng):
    for trial in range(30):
        net = make_random_graph(rng.randrange(2, 15), 6, rng)
        params = ModelParams(0.4, 0.35, 0.0)
        model = INFORMED if trial % 2 else UNINFORMED
        x, received, y = sample_round_detail(net, params, model, _rng(trial))
        drawn = int(x.sum())
        consumed = int(np.minimum(1, x + received).sum())
        assert consumed <= drawn
        assert int(received.sum()) <= int(np.maximum(x - 1, 0).sum())


def test_estimate_is_deterministic():
    net = complete_graph(5)
    params = ModelParams(0.5, 0.3, 0.01)
    a = estimate_utilities(net, params, UNINFORMED, 5000, seed=99)
    b = estimate_utilities(net, params, UNINFORMED, 5000, seed=99)
    assert np.array_equal(a.mean_utility, b.mean_utility)
    assert np.array_equal(a.std_error, b.std_error)
    c = estimate_utilities(net, params, UNINFORMED, 5000, seed=100)
    assert not np.array_equal(a.mean_utility, c.mean_utility)


def test_estimate_rejects_bad_rounds():
    with pytest.raises(ValueError, match="rounds"):
        estimate_utilities(Network(2), ModelParams(0.5, 0.3), UNINFORMED, 0, seed=1)


def test_empty_graph_mean_matches_one_minus_q():
    res = estimate_utilities(Network(6), ModelParams(0.5, 0.3), UNINFORMED, 40000, seed=5)
    assert np.all(np.abs(res.mean_utility - 0.5) <= 4 * res.std_error)


def test_uninformed_mc_matches_closed_form():
    net = complete_graph(3)
    params = ModelParams(0.5, 0.3, 0.0)
    res = estimate_utilities(net, params, UNINFORMED, 100_000, seed=42)
    target = expected_utility(net, params, 0)
    assert np.all(np.abs(res.mean_utility - target) <= 4 * res.std_error)


def test_informed_mc_matches_local_tree_form_on_cycle():
    net = cycle_graph(5)
    params = ModelParams(0.5, 0.3, 0.0)
    res = estimate_utilities(net, params, INFORMED, 100_000, seed=7)
    target = informed_utility_local_tree(net, params, 0)
    assert np.all(np.abs(res.mean_utility - target) <= 4 * res.std_error)


def test_exact_informed_pair_and_triangle():
    params = ModelParams(0.5, 0.3, 0.02)
    pair = matching_graph(2)
    assert exact_informed_utility(pair, params, 0) == pytest.approx(1 - 0.5 * 0.7 - 0.02)
    tri = complete_graph(3)
    got = exact_informed_utility(tri, ModelParams(0.5, 0.3), 0)
    assert got == pytest.approx(0.68)  # 9-state enumeration by hand
    assert got > expected_utility(tri, ModelParams(0.5, 0.3), 0)


def test_exact_informed_agrees_with_local_tree_form_on_girth5(rng):
    params = ModelParams(0.5, 0.3, 0.0)
    graphs = [petersen_graph()] + [cycle_graph(n) for n in range(5, 13)]
    for net in graphs:
        for i in range(net.n):
            assert exact_informed_utility(net, params, i) == pytest.approx(
                informed_utility_local_tree(net, params, i), abs=1e-12
            )


def test_exact_informed_ball_cap():
    net = random_regular(40, 5, _rng(3))
    with pytest.raises(EnumerationCapError, match="Monte Carlo"):
        exact_informed_utility(net, ModelParams(0.5, 0.3), 0, ball_cap=16)


def test_welfare_std_error_accounts_for_dependence():
    net = complete_graph(4)
    res = estimate_utilities(net, ModelParams(0.5, 0.3), UNINFORMED, 20000, seed=11)
    assert res.welfare_mean == pytest.approx(float(res.mean_utility.sum()), abs=1e-12)
    assert res.welfare_std_error > 0


def test_sim_result_bounds(rng):
    params = ModelParams(0.5, 0.3, 0.03)
    for _ in range(5):
        net = make_random_graph(rng.randrange(2, 10), 5, rng)
        res = estimate_utilities(net, params, UNINFORMED, 2000, seed=17)
        assert np.all(res.std_error >= 0)
        lower = -params.gamma * net.degrees
        assert np.all(res.mean_utility >= lower - 1e-12)
        assert np.all(res.mean_utility <= 1.0 + 1e-12)
