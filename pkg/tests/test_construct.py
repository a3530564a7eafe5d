import math

import pytest
from numpy.random import Generator, Philox

from netopp import GraphError, Network
from netopp.construct import (
    ConstructionSpec,
    build,
    circulant_regular,
    complete_graph,
    cycle_graph,
    disjoint_union,
    girth,
    girth5_regular,
    matching_graph,
    path_graph,
    petersen_graph,
    random_regular,
    star_graph,
    two_component_regular,
)


def test_matching_even_and_odd():
    net = matching_graph(6)
    assert net.num_edges == 3 and set(net.degrees.tolist()) == {1}
    net = matching_graph(7)
    assert sorted(net.degrees.tolist()) == [0] + [1] * 6


def test_basic_shapes():
    assert complete_graph(5).num_edges == 10
    assert path_graph(4).num_edges == 3
    assert cycle_graph(5).num_edges == 5
    star = star_graph(6)
    assert star.degree(0) == 5 and all(star.degree(i) == 1 for i in range(1, 6))


def test_girth_values():
    assert girth(Network(5, [(0, 1), (1, 2), (2, 3)])) == math.inf
    assert girth(complete_graph(3)) == 3
    assert girth(cycle_graph(7)) == 7
    assert girth(petersen_graph()) == 5
    assert girth(Network(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 2)])) == 3


def test_circulant_regular_degrees():
    for n, d in ((8, 3), (9, 2), (24, 5), (10, 0)):
        net = circulant_regular(n, d)
        assert set(net.degrees.tolist()) == {d} if n else True
    with pytest.raises(GraphError, match="even"):
        circulant_regular(7, 3)
    with pytest.raises(GraphError, match="0 <= d < n"):
        circulant_regular(4, 4)


def test_random_regular_is_regular():
    rng = Generator(Philox(key=11))
    net = random_regular(20, 3, rng)
    assert set(net.degrees.tolist()) == {3}


def test_girth5_low_degrees():
    assert girth5_regular(8, 1).num_edges == 4
    net = girth5_regular(9, 2)
    assert girth(net) >= 5
    net = girth5_regular(20, 3)
    assert girth(net) == 5 and set(net.degrees.tolist()) == {3}


def test_girth5_feasibility_errors():
    with pytest.raises(GraphError, match="even n"):
        girth5_regular(7, 1)
    with pytest.raises(GraphError, match="n >= 5"):
        girth5_regular(4, 2)
    with pytest.raises(GraphError, match="multiple of 10"):
        girth5_regular(15, 3)


def test_girth5_degree_four_switch_search():
    net = girth5_regular(40, 4, seed=7)
    assert set(net.degrees.tolist()) == {4}
    assert girth(net) >= 5


def test_two_component_split_sizes():
    lam = math.sqrt(6) - 2
    net = two_component_regular(1000, 1, 2, lam)
    degs = net.degrees.tolist()
    assert degs.count(1) == 448  # largest feasible even size <= floor(lam * 1000) = 449
    assert degs.count(2) == 552
    assert girth(net) == 552 or girth(net) == math.inf or girth(net) >= 3


def test_two_component_infeasible():
    with pytest.raises(GraphError, match="lam"):
        two_component_regular(10, 1, 2, 1.5)


def test_disjoint_union_offsets():
    net = disjoint_union([complete_graph(3), path_graph(3)])
    assert net.n == 6
    assert net.has_edge(0, 1) and net.has_edge(3, 4) and not net.has_edge(2, 3)


def test_build_dispatch_and_audit():
    net = build(ConstructionSpec("girth5_regular", 10, d=3))
    assert net == petersen_graph()
    net = build(ConstructionSpec("two_component", 20, d1=1, d2=2, lam=0.5))
    assert sorted(set(net.degrees.tolist())) == [1, 2]
    with pytest.raises(GraphError, match="unknown construction kind"):
        ConstructionSpec("hypercube", 8)
    with pytest.raises(GraphError, match="needs d"):
        build(ConstructionSpec("regular", 8))
