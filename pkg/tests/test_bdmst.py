import itertools

import networkx as nx
import numpy as np
import pytest

from annealbench.exact import ground_states
from annealbench.problems.bdmst import (BdMstInstance, ancilla_penalty, bdmst_oracle,
                                        build_bdmst_qubo, decode_bdmst, encode_bdmst,
                                        level_preprocess, quadratized_value, random_bdmst_instance,
                                        spanning_trees, variable_count_bound, with_oracle)
from annealbench.validation import ContractError

TRIANGLE = BdMstInstance(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)], max_degree=2)


def k5(delta=3, root=None):
    return BdMstInstance(5, [(u, v, 1 + (u + v) % 4) for u, v in itertools.combinations(range(5), 2)],
                         max_degree=delta, root=root)


class TestLevels:
    def test_root_level_one(self):
        assert level_preprocess(TRIANGLE)[TRIANGLE.root_vertex] == 1

    def test_path_graph(self):
        inst = BdMstInstance(3, [(0, 1, 1), (1, 2, 1)], max_degree=2, root=0)
        assert level_preprocess(inst)[2] == 3

    def test_complete_graph(self):
        lv = level_preprocess(k5(root=0))
        assert [lv[v] for v in range(1, 5)] == [2, 2, 2, 2]


class TestQuadratization:
    def test_examples(self):
        assert quadratized_value(1, 1, 1, 1) == 0
        assert ancilla_penalty(1, 1, 0) == 1
        assert ancilla_penalty(0, 0, 1) == 3

    def test_min_over_ancilla_matches_cubic(self):
        for x, y, w in itertools.product((0, 1), repeat=3):
            assert min(quadratized_value(x, y, w, a) for a in (0, 1)) == x * y * (1 - w)

    def test_closed_form_bound(self):
        inst = k5(root=0)
        pi = build_bdmst_qubo(inst, preprocess=False)
        assert pi.n_vars == variable_count_bound(5, 10, 4, 3)


class TestBuild:
    def test_triangle_ground_state(self):
        pi = build_bdmst_qubo(TRIANGLE)
        assert pi.n_vars <= 25
        e0, states = ground_states(pi.qubo)
        assert e0 == 3.0
        for s in states:
            out = decode_bdmst(s, pi)
            assert out["feasible"]
            assert out["edges"] == [[0, 1], [1, 2]]

    def test_encoded_optimum(self):
        pi = build_bdmst_qubo(TRIANGLE)
        x = encode_bdmst(pi, [(0, 1), (1, 2)])
        assert pi.is_feasible(x)
        assert pi.objective_value(x) == 3.0

    def test_all_zeros_violations(self):
        pi = build_bdmst_qubo(TRIANGLE)
        rep = decode_bdmst([0] * pi.n_vars, pi)
        assert not rep["feasible"]
        non_root = {v for v in range(3) if v != pi.metadata["root"]}
        assert {k["key"][1] for k in rep["violations"]["pen1"]} == non_root
        assert {k["key"][1] for k in rep["violations"]["pen2"]} == non_root

    def test_two_parents(self):
        inst = BdMstInstance(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)], max_degree=2, root=0)
        pi = build_bdmst_qubo(inst)
        x = np.array(encode_bdmst(pi, [(0, 1), (0, 2)]))
        x[pi.registry.index(("x", 1, 2))] = 1
        pen1 = pi.violation_report(x)["violations"]["pen1"]
        assert pen1 == [{"key": ["node", 2], "energy": 1.0}]

    def test_star_infeasible(self):
        star = BdMstInstance(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)], max_degree=2)
        assert bdmst_oracle(star) is None

    def test_tree_input(self, rng):
        t = nx.random_labeled_tree(6, seed=3)
        edges = [(u, v, int(rng.integers(1, 9))) for u, v in t.edges]
        inst = BdMstInstance(6, edges, max_degree=max(d for _, d in t.degree))
        assert bdmst_oracle(inst) == sum(w for *_, w in edges)

    def test_oracle_agrees_with_enumeration(self, rng):
        for _ in range(15):
            inst = random_bdmst_instance(rng, 5, max_degree=2)
            trees = spanning_trees(inst)
            expect = trees[0][0] if trees else None
            assert bdmst_oracle(inst) == expect

    def test_encoded_oracle_optimum_zero_penalty(self, rng):
        for _ in range(10):
            inst = random_bdmst_instance(rng, 5, max_degree=3)
            pi = with_oracle(build_bdmst_qubo(inst))
            weight, edges = spanning_trees(inst)[0]
            x = encode_bdmst(pi, edges)
            assert all(e == 0 for e in pi.penalty_energies(x).values())
            assert pi.objective_value(x) == pi.optimum == weight

    def test_preprocessing_keeps_feasible_trees(self, rng):
        for _ in range(10):
            inst = random_bdmst_instance(rng, 5, edge_prob=0.5, max_degree=3)
            pi = build_bdmst_qubo(inst, preprocess=True)
            for _, edges in spanning_trees(inst):
                assert pi.is_feasible(encode_bdmst(pi, edges))

    def test_bad_inputs(self):
        with pytest.raises(ContractError):
            BdMstInstance(3, [(0, 1, 1)], max_degree=2)
        with pytest.raises(ContractError):
            BdMstInstance(2, [(0, 1, 0)], max_degree=2)
