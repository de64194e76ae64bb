import numpy as np
import pytest

from netmp.graph import Graph, components
from netmp.oracles import (
    brute_percolation_enumerate,
    brute_percolation_table,
    dense_spectrum,
    ising_enumerate,
    percolation_sim,
    sbm_posterior_enumerate,
    tree_percolation_dp,
)

from conftest import make_k4, make_path, make_triangle, random_tree


def test_sim_p_zero():
    stats = percolation_sim(make_k4(), 0.0, 50, 1)
    assert stats.mean_s == 0.0
    assert (stats.frequencies == 0).all()


def test_sim_p_one_matches_components():
    g = Graph(7, [(0, 1), (1, 2), (3, 4)])
    stats = percolation_sim(g, 1.0, 20, 2)
    comp = components(g)
    expected = (comp.labels == comp.largest).astype(float)
    assert np.array_equal(stats.frequencies, expected)


def test_sim_determinism_and_stderr():
    g = make_k4()
    a = percolation_sim(g, 0.5, 300, 9)
    b = percolation_sim(g, 0.5, 300, 9)
    assert np.array_equal(a.frequencies, b.frequencies)
    assert a.mean_s == b.mean_s
    assert a.stderr > 0


def test_sim_validation():
    with pytest.raises(ValueError):
        percolation_sim(Graph(0, []), 0.5, 10, 0)
    with pytest.raises(ValueError):
        percolation_sim(make_k4(), 0.5, 0, 0)


def test_tree_dp_single_edge_and_star():
    single = Graph(2, [(0, 1)])
    assert np.array_equal(tree_percolation_dp(single, 0.6), np.ones(2))
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    assert np.array_equal(tree_percolation_dp(star, 0.3), np.ones(4))


def test_tree_dp_rejects_cycles():
    with pytest.raises(ValueError):
        tree_percolation_dp(make_triangle(), 0.5)


def test_tree_dp_handles_forests():
    g = Graph(5, [(0, 1), (2, 3)])
    assert np.array_equal(tree_percolation_dp(g, 0.4), np.ones(5))


def test_ising_enumerate_closed_forms():
    single = Graph(2, [(0, 1)])
    log_z, marg = ising_enumerate(single, 1.0)
    assert np.exp(log_z) == pytest.approx(4 * np.cosh(1.0), rel=1e-12)
    assert np.abs(marg - 0.5).max() < 1e-12

    log_z0, marg0 = ising_enumerate(make_k4(), 0.0)
    assert np.exp(log_z0) == pytest.approx(16.0, rel=1e-12)

    log_zt, _ = ising_enumerate(make_triangle(), 1.0)
    assert np.exp(log_zt) == pytest.approx(2 * np.e ** 3 + 6 / np.e, rel=1e-12)


def test_ising_enumerate_cap():
    with pytest.raises(ValueError):
        ising_enumerate(Graph(21, []), 1.0)


def test_dense_spectrum_small_graphs():
    assert dense_spectrum(Graph(2, [(0, 1)])).tolist() == pytest.approx([-1.0, 1.0])
    assert dense_spectrum(make_triangle()).tolist() == pytest.approx([-1.0, -1.0, 2.0])
    star = Graph(4, [(0, 1), (0, 2), (0, 3)])
    expected = [-np.sqrt(3), 0.0, 0.0, np.sqrt(3)]
    assert dense_spectrum(star).tolist() == pytest.approx(expected, abs=1e-10)


def test_dense_spectrum_trace_identities():
    rng = np.random.default_rng(1)
    from netmp.generators import generate_er

    for seed in range(3):
        g = generate_er(40, 0.12, seed)
        lam = dense_spectrum(g)
        assert abs(lam.sum()) < 1e-8
        assert np.sum(lam ** 2) == pytest.approx(2 * g.m, abs=1e-8)


def test_dense_spectrum_cap():
    with pytest.raises(ValueError):
        dense_spectrum(Graph(2001, []))


def test_sbm_enumerate_constant_omega_gives_priors():
    g = make_path(5)
    priors = np.array([0.6, 0.4])
    marg = sbm_posterior_enumerate(g, priors, np.full((2, 2), 0.3))
    assert np.abs(marg - priors).max() < 1e-12


def test_sbm_enumerate_single_edge_symmetric():
    g = Graph(2, [(0, 1)])
    marg = sbm_posterior_enumerate(
        g, np.array([0.5, 0.5]), np.array([[0.9, 0.1], [0.1, 0.9]])
    )
    assert np.abs(marg - 0.5).max() < 1e-12


def test_sbm_enumerate_cap():
    with pytest.raises(ValueError):
        sbm_posterior_enumerate(Graph(21, []), np.array([0.5, 0.5]), np.full((2, 2), 0.1))


def test_brute_percolation_extremes():
    g = Graph(5, [(0, 1), (1, 2), (3, 4)])
    freq1, s1 = brute_percolation_enumerate(g, 1.0)
    comp = components(g)
    assert np.array_equal(freq1, (comp.labels == comp.largest).astype(float))
    freq0, s0 = brute_percolation_enumerate(g, 0.0)
    assert s0 == 0.0 and (freq0 == 0).all()


def test_brute_percolation_triangle_regression():
    # 8-term sum done by hand: configurations with k occupied edges give
    # largest-cluster membership 0, 2, 3, 3 for k = 0..3 (ties at k=1 go to
    # the cluster with the smallest node)
    freq, s = brute_percolation_enumerate(make_triangle(), 0.5)
    assert s == pytest.approx((3 * 2 + 3 * 3 + 1 * 3) / 8 / 3)
    assert freq.sum() == pytest.approx(s * 3)


def test_brute_percolation_matches_simulation():
    g = make_k4()
    table = brute_percolation_table(g)
    freq, s = brute_percolation_enumerate(g, 0.45, table=table)
    sim = percolation_sim(g, 0.45, 20000, 3)
    assert abs(s - sim.mean_s) < 4 * sim.stderr
    assert np.abs(freq - sim.frequencies).max() < 0.02


def test_brute_percolation_cap():
    from netmp.generators import generate_er

    g = generate_er(30, 0.2, 1)
    assert g.m > 20
    with pytest.raises(ValueError):
        brute_percolation_table(g)


def test_mp_matches_simulation_on_regular_graph():
    from netmp.generators import generate_regular
    from netmp.percolation import solve_percolation

    g = generate_regular(1000, 3, 12)
    res = solve_percolation(g, 0.7)
    sim = percolation_sim(g, 0.7, 2000, 7)
    assert abs(res.giant_cluster_fraction - sim.mean_s) < 3 * sim.stderr + 0.005
