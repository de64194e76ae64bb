import logging

import numpy as np
import pytest

from netmp.engine import FixedPointConfig
from netmp.generators import generate_triangle_expander, generate_triangle_mesh
from netmp.graph import Graph
from netmp.loopy import (
    EdgeConfiguration,
    LoopyStructure,
    build_message_neighborhood,
    build_neighborhood,
    loopy_percolation,
    primitive_cycles,
    reachability,
    sweep_loopy_percolation,
)
from netmp.percolation import solve_percolation

from conftest import make_cycle, make_k4, make_petersen, make_triangle, random_tree

TIGHT = FixedPointConfig(tol=1e-13)


def test_triangle_has_one_primitive_cycle():
    cycles = primitive_cycles(make_triangle(), 0, 3)
    assert cycles == [(0, 1, 2)]


def test_square_needs_r4():
    c4 = make_cycle(4)
    assert primitive_cycles(c4, 0, 3) == []
    assert primitive_cycles(c4, 0, 4) == [(0, 1, 2, 3)]


def test_covered_four_cycle_is_not_primitive():
    # two triangles sharing node 0: the length-4 cycle over their union
    # reuses only edges already on shorter cycles
    g = Graph(5, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)])
    cycles = primitive_cycles(g, 0, 4)
    assert sorted(len(c) for c in cycles) == [3, 3]
    # a detour between the wings through a new node adds a length-4 cycle
    # with fresh edges, which is primitive
    g2 = Graph(6, [(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4), (1, 5), (3, 5)])
    cycles2 = primitive_cycles(g2, 0, 4)
    assert sorted(len(c) for c in cycles2) == [3, 3, 4]


def test_k4_four_cycles_covered_by_triangles():
    cycles = primitive_cycles(make_k4(), 0, 4)
    assert sorted(len(c) for c in cycles) == [3, 3, 3]


def test_r_below_two_rejected():
    with pytest.raises(ValueError):
        primitive_cycles(make_triangle(), 0, 1)


def test_tree_neighborhood_is_star():
    g = random_tree(10, np.random.default_rng(2))
    nb = build_neighborhood(g, 0, 5)
    assert set(nb.nodes) == set(int(x) for x in g.neighbors_of(0))
    assert len(nb.edges) == g.degree()[0]


def test_triangle_neighborhood():
    nb = build_neighborhood(make_triangle(), 0, 3)
    assert nb.nodes == (1, 2)
    assert nb.edges == ((0, 1), (0, 2), (1, 2))
    assert nb.n_edges == 3


def test_r2_reduces_to_one_hop():
    g = make_petersen()
    for i in (0, 5):
        nb = build_neighborhood(g, i, 2)
        assert set(nb.nodes) == set(int(x) for x in g.neighbors_of(i))
        assert len(nb.edges) == 3


def test_neighborhood_contains_distant_cycle_nodes():
    c4 = make_cycle(4)
    nb = build_neighborhood(c4, 0, 4)
    assert 2 in nb.nodes  # not adjacent to 0, reached along the primitive cycle


def test_message_neighborhood_meets_receiver_only_at_sender():
    g = make_petersen()
    nbs = {i: build_neighborhood(g, i, 4) for i in range(10)}
    for i in range(10):
        for j in nbs[i].nodes:
            mn = build_message_neighborhood(nbs[i], nbs[j])
            banned = set(nbs[i].nodes) | {i}
            assert not (set(mn.nodes) & banned)
            assert mn.trimmed == 0  # girth 5, no overlap at r = 4


def test_overlap_trimming_is_counted(caplog):
    g = generate_triangle_mesh(30, 3)
    with caplog.at_level(logging.WARNING, logger="netmp.loopy"):
        st = LoopyStructure(g, 3, mode="exact")
    assert st.trimmed > 0
    assert any("trimmed" in rec.message for rec in caplog.records)


def test_reachability_examples():
    nb = build_neighborhood(make_triangle(), 0, 3)
    k = nb.n_edges
    assert reachability(nb, EdgeConfiguration((1 << k) - 1, k)).tolist() == [1, 1]
    assert reachability(nb, EdgeConfiguration(0, k)).tolist() == [0, 0]
    only_far = 1 << nb.edges.index((1, 2))
    assert reachability(nb, EdgeConfiguration(only_far, k)).tolist() == [0, 0]


def test_reachability_matches_sigma_counts():
    # dual route: the enumeration kernel and the direct reachability op
    from netmp import kernels

    rng = np.random.default_rng(4)
    g = generate_triangle_mesh(25, 7)
    nb = build_neighborhood(g, 5, 4)
    k = nb.n_edges
    local = {n: t + 1 for t, n in enumerate(nb.nodes)}
    local[5] = 0
    eu = np.array([local[u] for u, v in nb.edges], dtype=np.int64)
    ev = np.array([local[v] for u, v in nb.edges], dtype=np.int64)
    masks, counts = kernels.sigma_counts(eu, ev, len(nb.nodes))
    assert counts.sum() == 2 ** k
    for _ in range(25):
        mask = int(rng.integers(0, 1 << k))
        sigma = reachability(nb, EdgeConfiguration(mask, k))
        sig_mask = int((sigma << np.arange(len(nb.nodes))).sum())
        assert sig_mask in masks


def test_sigma_monotone_in_occupied_edges():
    g = generate_triangle_mesh(25, 7)
    nb = build_neighborhood(g, 3, 4)
    rng = np.random.default_rng(0)
    k = nb.n_edges
    for _ in range(20):
        mask = int(rng.integers(0, 1 << k))
        extra = int(rng.integers(0, k))
        bigger = mask | (1 << extra)
        a = reachability(nb, EdgeConfiguration(mask, k))
        b = reachability(nb, EdgeConfiguration(bigger, k))
        assert (b >= a).all()


def test_edge_configuration_popcount():
    cfg = EdgeConfiguration(0b1011, 5)
    assert cfg.occupied_count == 3
    with pytest.raises(ValueError):
        EdgeConfiguration(32, 5)


@pytest.mark.parametrize("r", [2, 4])
def test_girth_five_graph_reduces_to_standard(r):
    g = make_petersen()
    std = solve_percolation(g, 0.7, TIGHT)
    lo = loopy_percolation(g, 0.7, r, TIGHT)
    assert np.abs(lo.node_probabilities - std.node_probabilities).max() < 1e-10
    assert abs(lo.giant_cluster_fraction - std.giant_cluster_fraction) < 1e-10


def test_p_zero_all_nodes_outside():
    lo = loopy_percolation(make_triangle(), 0.0, 3)
    assert (lo.node_probabilities == 1.0).all()
    assert lo.giant_cluster_fraction == 0.0


def test_p_out_of_range():
    with pytest.raises(ValueError):
        loopy_percolation(make_triangle(), 1.3, 3)


def test_exact_cap_suggests_monte_carlo():
    g = generate_triangle_expander(40, 1)
    # grow an oversized neighborhood by raising r on a dense-ish graph
    dense = Graph(10, [(a, b) for a in range(10) for b in range(a + 1, 10)])
    with pytest.raises(ValueError, match="monte-carlo"):
        LoopyStructure(dense, 4, mode="exact")


def test_monte_carlo_matches_exact_within_error():
    g = generate_triangle_expander(20, 3)
    cfg = FixedPointConfig(tol=1e-12, seed=8)
    exact = loopy_percolation(g, 0.75, 4, cfg, mode="exact")
    mc = loopy_percolation(g, 0.75, 4, cfg, mode="monte-carlo", samples=400)
    # a few hundred samples per neighborhood pins S to a couple of percent
    assert abs(mc.giant_cluster_fraction - exact.giant_cluster_fraction) < 0.03


def test_monte_carlo_deterministic_given_seed():
    g = generate_triangle_expander(12, 2)
    cfg = FixedPointConfig(seed=5)
    a = loopy_percolation(g, 0.7, 3, cfg, mode="monte-carlo", samples=10)
    b = loopy_percolation(g, 0.7, 3, cfg, mode="monte-carlo", samples=10)
    assert (a.node_probabilities == b.node_probabilities).all()


def test_default_sample_count_is_ten():
    g = generate_triangle_expander(12, 2)
    st = LoopyStructure(g, 3, mode="monte-carlo", seed=0)
    assert st.samples == 10
    assert all(u.uniforms.shape[0] == 10 for u in st.msg_units if u.k)


def test_loopy_sweep_monotone_on_expander():
    g = generate_triangle_expander(30, 1)
    sw = sweep_loopy_percolation(g, np.array([0.0, 0.7, 0.8, 0.9]), 4, TIGHT)
    assert sw.values[0] == 0.0
    assert (np.diff(sw.values) >= -1e-9).all()
    assert sw.values[-1] > 0.9


def test_values_stay_probabilities():
    g = generate_triangle_mesh(40, 5)
    lo = loopy_percolation(g, 0.85, 3, FixedPointConfig(tol=1e-11), mode="monte-carlo",
                           samples=50)
    assert lo.node_probabilities.min() >= 0.0
    assert lo.node_probabilities.max() <= 1.0
    assert 0.0 <= lo.giant_cluster_fraction <= 1.0
