import warnings

import networkx as nx
import numpy as np
import pytest

from annealbench.topology import (HardwareGraph, build_hardware, chimera_coordinates, chimera_graph,
                                  chimera_index, chimera_to_pegasus, pegasus_coordinates,
                                  pegasus_graph, pegasus_index)
from annealbench.validation import ContractError


class TestChimera:
    def test_single_cell(self):
        g = chimera_graph(1)
        assert g.n_qubits == 8
        assert nx.is_isomorphic(g.graph, nx.complete_bipartite_graph(4, 4))

    @pytest.mark.parametrize("m", [1, 2, 4, 16])
    def test_bipartite(self, m):
        assert nx.is_bipartite(chimera_graph(m).graph)

    def test_coordinates_round_trip(self):
        for q in range(8 * 9):
            assert chimera_index(3, *chimera_coordinates(3, q)) == q


class TestPegasus:
    @pytest.mark.parametrize("m", [2, 3, 6])
    def test_size_and_triangle(self, m):
        g = pegasus_graph(m)
        assert g.n_qubits == 24 * m * (m - 1)
        assert sum(nx.triangles(g.graph).values()) > 0

    @pytest.mark.parametrize("m,expected", [(2, 13), (3, 14), (4, 15), (6, 15)])
    def test_max_degree(self, m, expected):
        # boundary effects cap the degree below 15 on the two smallest sizes
        assert max(pegasus_graph(m).degrees().values()) == expected

    def test_coordinates_round_trip(self):
        for q in range(24 * 4 * 3):
            assert pegasus_index(4, *pegasus_coordinates(4, q)) == q

    @pytest.mark.parametrize("m", [3, 5])
    def test_contains_chimera(self, m):
        c = chimera_graph(m - 1)
        p = pegasus_graph(m).graph
        mapped = [chimera_to_pegasus(m, q) for q in c.qubits]
        assert len(set(mapped)) == len(mapped)
        for a, b in c.couplers:
            assert p.has_edge(chimera_to_pegasus(m, a), chimera_to_pegasus(m, b))

    def test_matches_reference_implementation(self):
        dnx = pytest.importorskip("dwave_networkx")
        warnings.simplefilter("ignore", DeprecationWarning)
        for m in (2, 3, 4):
            ref = dnx.pegasus_graph(m, fabric_only=False)
            ours = pegasus_graph(m)
            assert {tuple(sorted(e)) for e in ref.edges} == set(ours.couplers)


class TestHardwareGraph:
    def test_dead_qubits(self):
        g = chimera_graph(2).without([0, 5])
        assert g.n_qubits == 30
        assert g.dead == {0, 5}
        assert all(0 not in c and 5 not in c for c in g.couplers)

    def test_random_dead_seeded(self):
        a = chimera_graph(2).with_random_dead(3, seed=1)
        b = chimera_graph(2).with_random_dead(3, seed=1)
        assert a.dead == b.dead and len(a.dead) == 3

    def test_dict_round_trip(self):
        g = pegasus_graph(3).without([1, 2])
        back = HardwareGraph.from_dict(g.to_dict())
        assert back.couplers == g.couplers and back.dead == g.dead
        compact = HardwareGraph.from_dict({"family": "pegasus", "m": 3, "dead": [1, 2]})
        assert compact.couplers == g.couplers

    def test_bad_coupler(self):
        with pytest.raises(ContractError):
            HardwareGraph("x", 0, (0, 1), ((0, 2),))
        with pytest.raises(ContractError):
            build_hardware("zephyr", 2)

    def test_degree_histogram(self):
        hist = chimera_graph(1).degree_histogram()
        assert hist == {4: 8}
