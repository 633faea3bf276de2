import numpy as np
import pytest

from annealbench.ising import IsingModel, qubo_to_ising
from annealbench.problems import GcInstance, build_gc_qubo
from annealbench.schedule import AnnealFunctions, build_schedule, synthetic_dw2k
from annealbench.solvers import (SampleSet, SimulatedAnnealingSampler, SVMCSampler, brute_force,
                                 ice_perturb, rank_changes, simulated_anneal, svmc_anneal,
                                 svmc_profile)
from annealbench.validation import ContractError

from conftest import random_ising


def ring(n=8, J=-1.0):
    return IsingModel(n, {}, {(i, (i + 1) % n) if i + 1 < n else (0, n - 1): J for i in range(n)})


def assert_unbiased(samples):
    n = samples.shape[0]
    means = samples.mean(axis=0)
    assert np.all(np.abs(means) < 3 / np.sqrt(n)), means


class TestBruteForce:
    def test_ferromagnet(self):
        gs = brute_force(IsingModel(2, {}, {(0, 1): -1.0}))
        assert gs.energy == -1.0
        assert {tuple(s) for s in gs.states} == {(1, 1), (-1, -1)}

    def test_gc_triangle(self):
        m = qubo_to_ising(build_gc_qubo(GcInstance(3, [(0, 1), (1, 2), (0, 2)], 3)).qubo)
        gs = brute_force(m)
        assert len(gs.states) == 6
        assert gs.energy == pytest.approx(0.0)

    def test_refuses_large(self):
        with pytest.raises(ContractError):
            brute_force(IsingModel(26))

    def test_matches_enumeration(self, rng):
        from annealbench.ising import enumerate_assignments
        for _ in range(5):
            m = random_ising(rng, 10)
            E = m.energies(enumerate_assignments(10))
            assert brute_force(m).energy == pytest.approx(E.min())


class TestSimulatedAnnealing:
    def test_zero_hamiltonian_unbiased(self):
        out = simulated_anneal(IsingModel(5), sweeps=20, num_reads=10_000, seed=0)
        assert_unbiased(out.samples)

    def test_single_field(self):
        out = simulated_anneal(IsingModel(1, {0: 1.0}), sweeps=200, beta_range=(0.1, 10.0),
                               num_reads=2000, seed=1)
        assert (out.samples[:, 0] == -1).mean() > 0.99

    def test_seeded(self, rng):
        m = random_ising(rng, 8)
        a = simulated_anneal(m, 100, num_reads=50, seed=9)
        b = simulated_anneal(m, 100, num_reads=50, seed=9)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_energies_recomputed(self, rng):
        m = random_ising(rng, 8)
        assert simulated_anneal(m, 50, num_reads=20, seed=2).check(m)

    def test_ring(self):
        out = simulated_anneal(ring(), 1000, num_reads=200, seed=4)
        assert (out.energies == -8).mean() > 0.95

    def test_estimator(self):
        s = SimulatedAnnealingSampler(sweeps=50, anneal_time=2.0, pause_location=0.4, pause_duration=0.5)
        assert s.t_tot() == 2.5
        assert s.set_params(pause_location=None).t_tot() == 2.0


class TestSVMC:
    def test_driver_only_unbiased(self):
        s = np.linspace(0, 1, 11)
        f = AnnealFunctions(tuple(s), tuple(1 - s), tuple(np.zeros(11)), 12.1, "driver")
        out = svmc_anneal(IsingModel(4, {0: 1.0}, {(1, 2): -1.0}), build_schedule(1.0), f,
                          num_reads=4000, seed=0, sweeps_per_us=100)
        assert_unbiased(out.samples)

    def test_single_field(self):
        out = svmc_anneal(IsingModel(1, {0: 1.0}), build_schedule(1.0), synthetic_dw2k(),
                          num_reads=2000, seed=3)
        assert (out.samples[:, 0] == -1).mean() > 0.9

    def test_pause_adds_sweeps(self):
        f = synthetic_dw2k()
        base = svmc_profile(build_schedule(1.0), f, 1000)[0]
        paused = svmc_profile(build_schedule(1.0, (0.4, 0.2)), f, 1000)[0]
        assert len(paused) - len(base) == 200
        assert np.sum(np.isclose(paused, 0.4)) >= 200

    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_small_ferromagnets(self, n):
        m = IsingModel(2, {}, {(0, 1): -1.0}) if n == 2 else ring(n)
        out = svmc_anneal(m, build_schedule(5.0), synthetic_dw2k(), num_reads=300,
                          temperature_mK=1.0, seed=n)
        assert np.isclose(out.energies, brute_force(m).energy).mean() > 0.95
        assert out.check(m)

    def test_seeded(self):
        a = SVMCSampler(seed=5).sample(ring(4), 30)
        b = SVMCSampler(seed=5).sample(ring(4), 30)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_estimator_schedule(self):
        s = SVMCSampler(anneal_time=1.0, pause_location=0.4, pause_duration=0.2)
        assert s.t_tot() == pytest.approx(1.2)
        assert s.get_params()["pause_location"] == 0.4


class TestSampleSet:
    def test_round_trip(self, rng):
        m = random_ising(rng, 4)
        out = simulated_anneal(m, 20, num_reads=40, seed=1)
        back = SampleSet.from_dict(out.to_dict())
        assert back.aggregate() == out.aggregate()
        assert out.lowest()[1] == out.energies.min()

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            SampleSet(np.ones((2, 2)), np.zeros(3))


class TestIce:
    def test_zero_noise(self, rng):
        m = random_ising(rng, 5)
        p = ice_perturb(m, 0.0, 0.0, seed=0)
        assert dict(p.h) == dict(m.h) and dict(p.J) == dict(m.J)

    def test_mean_zero(self):
        n = 100_000
        m = IsingModel(n, {i: 0.0 for i in range(n)})
        sigma = 0.05
        d = np.fromiter(ice_perturb(m, sigma, 0.0, seed=1).h.values(), float)
        assert abs(d.mean()) < 3 * sigma / np.sqrt(n)

    def test_close_coefficients_swap(self):
        m = IsingModel(2, {0: 0.50, 1: 0.51})
        swaps = sum(rank_changes(m, ice_perturb(m, 0.05, 0.0, seed=k)) for k in range(200))
        assert swaps > 0
        assert rank_changes(m, m) == 0

    def test_negative_sigma(self):
        with pytest.raises(ContractError):
            ice_perturb(IsingModel(1), -1.0, 0.0)
