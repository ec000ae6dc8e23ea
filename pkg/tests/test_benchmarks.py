from itertools import combinations, product

import numpy as np
import pytest

from blockfw.benchmarks import (Graph, bqo_brute, bqo_relax_sdp, gen_bqo, gen_erdos_renyi, gen_pencil_sdp,
                                lovasz_theta_sdp, stable_set_brute, success_rate_experiment, success_rates)
from blockfw.errors import TooLarge
from blockfw.ipm import solve_sdp
from blockfw.iterative import RunConfig, run_outer
from blockfw.model import Status
from blockfw.partition import make_uniform, trivial


def theta(g):
    rep = solve_sdp(lovasz_theta_sdp(g))
    assert rep.status == Status.OPTIMAL
    return -rep.primal_value


def naive_alpha(g):
    adj = g.adjacency()
    for k in range(g.n_nodes, 0, -1):
        for S in combinations(range(g.n_nodes), k):
            if not adj[np.ix_(S, S)].any():
                return k
    return 0


def test_pencil_generator():
    prob = gen_pencil_sdp(10, 42)
    assert (prob.n, prob.m) == (10, 2)
    assert np.array_equal(prob.C, np.eye(10)) and np.array_equal(prob.b, [1.0, 1.0])
    assert np.array_equal(prob.A[0], prob.A[0].T)
    again = gen_pencil_sdp(10, 42)
    assert again.same_data(prob)
    assert not gen_pencil_sdp(10, 43).same_data(prob)
    # y = 0 leaves Z = I, so the dual is feasible and p* >= 0
    assert solve_sdp(prob).primal_value >= 0
    with pytest.raises(ValueError):
        gen_pencil_sdp(1, 0)


def test_erdos_renyi():
    assert gen_erdos_renyi(8, 0.0, 1).edges == frozenset()
    assert gen_erdos_renyi(8, 1.0, 1) == Graph.complete(8)
    g = gen_erdos_renyi(30, 0.2, 7)
    # Binomial(435, 0.2): mean 87, sd 8.3
    assert 40 <= len(g.edges) <= 140
    assert gen_erdos_renyi(30, 0.2, 7) == g
    with pytest.raises(ValueError):
        gen_erdos_renyi(5, 1.5, 0)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(3, frozenset({(1, 1)}))
    with pytest.raises(ValueError):
        Graph(3, frozenset({(0, 3)}))
    assert Graph(3, frozenset({(2, 0)})).edges == frozenset({(0, 2)})


def test_theta_values():
    assert theta(Graph.complete(4)) == pytest.approx(1.0, abs=1e-6)
    assert theta(Graph.empty(6)) == pytest.approx(6.0, abs=1e-6)
    assert theta(Graph.cycle(5)) == pytest.approx(np.sqrt(5), abs=1e-6)
    prob = lovasz_theta_sdp(Graph.cycle(5))
    assert prob.meta["sense_flipped"] and prob.m == 6


def test_theta_feasible_points():
    # X = I/4 for K4 and J/6 for the empty graph attain the stated values
    p = lovasz_theta_sdp(Graph.complete(4))
    X = np.eye(4) / 4
    assert np.allclose(np.einsum("kij,ij->k", p.A, X), p.b)
    assert -np.vdot(p.C, X) == pytest.approx(1.0)
    p = lovasz_theta_sdp(Graph.empty(6))
    X = np.ones((6, 6)) / 6
    assert np.allclose(np.einsum("kij,ij->k", p.A, X), p.b)
    assert -np.vdot(p.C, X) == pytest.approx(6.0)


def test_stable_set():
    assert stable_set_brute(Graph.complete(4)) == 1
    assert stable_set_brute(Graph.empty(6)) == 6
    assert stable_set_brute(Graph.cycle(5)) == 2
    for seed in range(6):
        g = gen_erdos_renyi(11, 0.35, seed)
        assert stable_set_brute(g) == naive_alpha(g)
    with pytest.raises(TooLarge):
        stable_set_brute(Graph.empty(31))


def test_theta_sandwich():
    for seed in range(5):
        g = gen_erdos_renyi(12, 0.3, 100 + seed)
        assert stable_set_brute(g) <= theta(g) + 1e-6


def test_bqo_examples():
    assert bqo_brute(np.eye(3)) == 3.0
    assert solve_sdp(bqo_relax_sdp(np.eye(3))).primal_value == pytest.approx(3.0, abs=1e-7)
    Q = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert bqo_brute(Q) == -2.0
    rep = solve_sdp(bqo_relax_sdp(Q))
    assert rep.primal_value == pytest.approx(-2.0, abs=1e-7)
    assert np.allclose(rep.X, [[1, -1], [-1, 1]], atol=1e-4)
    with pytest.raises(TooLarge):
        bqo_brute(np.eye(21))


def test_bqo_brute_matches_naive():
    for seed in range(3):
        Q = gen_bqo(9, seed)
        naive = min(np.array(x) @ Q @ np.array(x) for x in product([-1.0, 1.0], repeat=9))
        assert bqo_brute(Q, chunk=7) == pytest.approx(naive, abs=1e-12)


def test_bqo_relaxation_is_lower_bound():
    Q = gen_bqo(12, 3)
    assert np.array_equal(gen_bqo(12, 3), Q)
    assert solve_sdp(bqo_relax_sdp(Q)).primal_value <= bqo_brute(Q) + 1e-7


def test_success_rates_helper():
    traces = [[-2.0, -1.0], None, [-1.5]]
    rates = success_rates(traces, [1.0, 1.0, 1.0], 0.99, checkpoints=(1, 2, 3))
    assert rates == {1: 0.0, 2: 1 / 3, 3: 1 / 3}
    assert success_rates(traces, [1.0] * 3, 0.0, checkpoints=(1,)) == {1: 2 / 3}


def test_threshold_zero_is_full_success():
    graphs = [gen_erdos_renyi(8, 0.4, s) for s in range(3)]
    rates = success_rate_experiment(graphs, RunConfig(trivial(8), max_iter=1), threshold=0.0, checkpoints=(1,))
    assert rates[1] == 1.0


def test_complete_graph_succeeds_immediately():
    g = Graph.complete(6)
    for part in (trivial(6), make_uniform(6, 2)):
        rates = success_rate_experiment([g], RunConfig(part, max_iter=1), checkpoints=(1,))
        assert rates[1] == 1.0
        assert -run_outer(lovasz_theta_sdp(g), RunConfig(part, max_iter=1)).bound == pytest.approx(1.0, abs=1e-6)
