import networkx as nx
import numpy as np
import pytest

from annealbench.problems.hybrid import HybridMessage, SolverFailure, hybrid_path_delay


def diamond():
    g = nx.Graph([(0, 1), (1, 3), (0, 2), (2, 3)])
    nx.set_node_attributes(g, {0: 2, 3: 2}, "capacity")
    return g


def lattice():
    # 0 1 2
    # 3 4 5
    return nx.Graph([(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)])


class TestHybrid:
    def test_no_delays_exits_immediately(self):
        g = nx.path_graph(4)
        res = hybrid_path_delay(g, [HybridMessage(0, 1, 1), HybridMessage(2, 3, 1)])
        assert res.iterations == 0
        assert res.paths == [(0, 1), (2, 3)]
        assert res.cost == 0

    def test_equal_length_reroute_removes_delay(self):
        msgs = [HybridMessage(0, 3, 1), HybridMessage(0, 3, 1)]
        res = hybrid_path_delay(diamond(), msgs)
        assert res.initial_cost == 1
        assert res.cost == 0
        assert {res.paths[0], res.paths[1]} == {(0, 1, 3), (0, 2, 3)}

    def test_longer_alternative_rolls_back(self):
        msgs = [HybridMessage(0, 2, 1), HybridMessage(1, 2, 5, scheduled=1)]
        res = hybrid_path_delay(lattice(), msgs)
        assert res.initial_cost == 1
        assert res.cost == 1
        assert res.paths == [(0, 1, 2), (1, 2)]
        assert res.delays == [1, 0]

    def test_never_worse_than_start(self, rng):
        for trial in range(8):
            g = nx.grid_2d_graph(2, 3)
            g = nx.convert_node_labels_to_integers(g)
            msgs = []
            for _ in range(3):
                a, b = rng.choice(6, size=2, replace=False)
                msgs.append(HybridMessage(int(a), int(b), int(rng.integers(1, 4)),
                                          int(rng.integers(0, 2))))
            res = hybrid_path_delay(g, msgs)
            assert res.cost <= res.initial_cost
            assert all(d >= 0 for d in res.delays)

    def test_bad_solver_detected(self):
        msgs = [HybridMessage(0, 3, 1), HybridMessage(0, 3, 1)]
        with pytest.raises(SolverFailure):
            hybrid_path_delay(diamond(), msgs, qubo_solver=lambda pi: np.zeros(pi.n_vars, dtype=np.int8))
