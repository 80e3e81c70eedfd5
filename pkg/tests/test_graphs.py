import random

import pytest

from toprec.graphs import (DiagramGraph, GraphError, GraphWeigher, add_leg_map_check,
                           enumerate_graphs, remove_last_leaf, rule_violations, swap_children, weight_sum)
from toprec.recursion import CorrelatorTable


@pytest.mark.parametrize("k,g,n", [(0, 2, 5), (2, 0, 2), (3, 0, 12), (0, 1, None), (1, 1, None)])
def test_counts(k, g, n):
    graphs = enumerate_graphs(k, g)
    if n is not None:
        assert len(graphs) == n
    assert len({G.encoding() for G in graphs}) == len(graphs)


def test_genus_one_single_loop():
    G, = enumerate_graphs(0, 1)
    assert G.n_vertices == 1 and len(G.edges) == 1
    assert "line v0.L -- v0.R" in G.to_text()


@pytest.mark.parametrize("k,g", [(0, 2), (1, 1), (2, 1), (3, 0), (1, 2)])
def test_enumerated_graphs_obey_rules(k, g):
    for G in enumerate_graphs(k, g):
        assert rule_violations(G) == []
        assert G.n_vertices == 2 * g + k - 1
        assert G.n_vertices + len(G.edges) == 3 * g + 2 * k - 1


def test_rule_checker_flags_broken_graphs():
    G = enumerate_graphs(1, 1)[0]
    broken = DiagramGraph(G.k, G.g, G.parent, G.side, G.edges[:-1])
    assert rule_violations(broken)
    extra_vertex = DiagramGraph(G.k, G.g, G.parent + (0,), G.side + (1,), G.edges)
    assert 1 in rule_violations(extra_vertex)


def test_unstable_enumeration_rejected():
    with pytest.raises(GraphError):
        enumerate_graphs(1, 0)


@pytest.mark.parametrize("k,g", [(0, 1), (0, 2), (1, 1), (2, 0)])
def test_add_leg_multiplicity(k, g):
    rep = add_leg_map_check(k, g)
    assert rep.ok, rep


def test_remove_last_leaf_lands_in_smaller_set():
    small = {G.encoding() for G in enumerate_graphs(1, 1)}
    for G in enumerate_graphs(2, 1):
        H, _ = remove_last_leaf(G)
        assert H.encoding() in small


@pytest.mark.parametrize("k,g", [(2, 0), (3, 0), (0, 1), (1, 1), (0, 2)])
def test_weight_sum_matches_recursion(pure_gravity, pg_table, k, g):
    assert (weight_sum(pure_gravity, k, g) - pg_table.W(k + 1, g)).is_zero()


def test_weight_sum_on_two_branch_points(swapped_gravity):
    table = CorrelatorTable(swapped_gravity)
    for k, g in [(2, 0), (0, 1), (1, 1)]:
        assert (weight_sum(swapped_gravity, k, g) - table.W(k + 1, g)).is_zero()


def test_child_swap_keeps_weight(pure_gravity):
    rng = random.Random(3)
    weigher = GraphWeigher(pure_gravity)
    pool = enumerate_graphs(1, 2) + enumerate_graphs(3, 1)
    for G in rng.sample(pool, 12):
        i = rng.randrange(G.n_vertices)
        assert (weigher.weight(swap_children(G, i)) - weigher.weight(G)).is_zero()
