import json
import math

import networkx as nx
import numpy as np
import pytest

from annealbench import bench
from annealbench.bench import (PlantedSampler, SweepConfig, bootstrap_median, emit_report,
                               gauge_seed, results_csv, run_point, sweep, time_to_solution)
from annealbench.embedding import Embedding, embed_problem
from annealbench.exact import ground_states
from annealbench.problems import GcInstance, build_gc_qubo
from annealbench.problems.io import attach_oracle, save_problem
from annealbench.solvers import SampleSet
from annealbench.topology import custom_graph
from annealbench.validation import ContractError


def edge_problem(name="edge"):
    return attach_oracle(build_gc_qubo(GcInstance(2, [(0, 1)], 2, name=name)))


def doubled(pi):
    # every logical variable on two qubits of a complete hardware graph
    hw = custom_graph(nx.complete_graph(2 * pi.n_vars))
    return Embedding({v: (2 * v, 2 * v + 1) for v in range(pi.n_vars)}), hw


class GroundSampler:
    def t_tot(self):
        return 1.0

    def sample(self, model, num_reads, seed=None):
        _, gs = ground_states(model)
        X = np.repeat(gs[:1], num_reads, axis=0)
        return SampleSet(X, model.energies(X))


class BreakingSampler(GroundSampler):
    def sample(self, model, num_reads, seed=None):
        out = super().sample(model, num_reads, seed)
        X = out.samples.copy()
        X[:, 0] = -X[:, 0]
        return SampleSet(X, model.energies(X))


class TestTimeToSolution:
    def test_examples(self):
        assert time_to_solution(0.99, 1.0) == pytest.approx(1.0)
        assert time_to_solution(0.0, 1.0) == math.inf
        assert time_to_solution(1.0, 1.2) == 1.2

    def test_direct_evaluation(self):
        assert time_to_solution(0.5, 1.2) == pytest.approx(1.2 * math.log(0.01) / math.log(0.5))

    def test_monotone_and_floor(self):
        ps = np.linspace(0.001, 1, 400)
        ts = [time_to_solution(p, 0.7) for p in ps]
        assert all(a >= b for a, b in zip(ts, ts[1:]))
        assert min(ts) >= 0.7

    def test_bad_probability(self):
        with pytest.raises(ContractError):
            time_to_solution(1.5, 1.0)


class TestBootstrap:
    def test_constant(self):
        b = bootstrap_median([3.0] * 7, resamples=500, seed=0)
        assert (b.median, b.lo, b.hi) == (3.0, 3.0, 3.0)

    def test_defaults(self):
        b = bootstrap_median([1.0, 2.0], seed=0)
        assert b.resamples == 10**5 and b.percentiles == (35.0, 65.0)

    def test_deterministic_and_ordered(self, rng):
        v = rng.exponential(size=15)
        a = bootstrap_median(v, 2000, seed=4)
        b = bootstrap_median(v, 2000, seed=4)
        assert a == b
        assert v.min() <= a.lo <= a.median <= a.hi <= v.max()

    def test_infinite_values(self):
        b = bootstrap_median([1.0, math.inf, math.inf], 1000, seed=0)
        assert b.median == math.inf and b.hi == math.inf

    def test_empty(self):
        with pytest.raises(ContractError):
            bootstrap_median([])


class TestRunPoint:
    def test_denominator(self):
        pi = edge_problem()
        emb, hw = doubled(pi)
        ep = embed_problem(pi, emb, 3.0, hw)
        res = run_point(pi, ep, GroundSampler(), gauges=100, reads=500, seed=0)
        assert res.total == 50_000

    def test_always_optimal(self):
        pi = edge_problem()
        emb, hw = doubled(pi)
        res = run_point(pi, embed_problem(pi, emb, 3.0, hw), GroundSampler(), 4, 10, seed=1)
        assert res.p_success == 1.0 and res.broken_fraction == 0.0
        assert res.T_S == 1.0

    def test_always_broken(self):
        pi = edge_problem()
        emb, hw = doubled(pi)
        res = run_point(pi, embed_problem(pi, emb, 3.0, hw), BreakingSampler(), 4, 10, seed=1)
        assert res.p_success == 0.0 and res.broken_fraction == 1.0
        assert res.T_S == math.inf

    def test_requires_optimum(self):
        pi = build_gc_qubo(GcInstance(2, [(0, 1)], 2))
        emb, hw = doubled(pi)
        with pytest.raises(ContractError):
            run_point(pi, embed_problem(pi, emb, 1.0, hw), GroundSampler(), 1, 1)

    def test_penalised_reads_never_credited(self):
        pi = edge_problem()
        bad = np.zeros((1, pi.n_vars), dtype=np.int8)  # objective matches, one-hot violated
        assert pi.objective_value(bad[0]) == pi.optimum
        assert not pi.success_mask(bad)[0]


def small_config(**kw):
    base = dict(instances=["unused"], solver="planted", chain_strength=[0.5, 0.8, 1.1],
                pause_location=[0.3, 0.4, 0.5], pause_duration=[0.2], gauges=3, reads=100,
                resamples=500, hardware={"family": "chimera", "m": 2}, embedding_tries=2)
    base.update(kw)
    return SweepConfig(**base)


class TestSweep:
    def test_config_validation(self):
        with pytest.raises(ContractError):
            small_config(chain_strength=[])
        with pytest.raises(ContractError):
            small_config(gauges=0)

    def test_recommended(self):
        cfg = SweepConfig.recommended(["a"])
        assert cfg.anneal_time == [1.0] and cfg.pause_duration == [0.2]
        assert min(cfg.pause_location) == 0.3 and max(cfg.pause_location) == 0.5

    def test_config_file(self, tmp_path):
        cfg = small_config()
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg.to_dict()))
        back = SweepConfig.load(p)
        assert back.chain_strength == cfg.chain_strength
        assert bench.run_directory(tmp_path, cfg).name == cfg.config_hash()

    def test_single_point_matches_run_point(self):
        pi = edge_problem()
        cfg = small_config(chain_strength=[0.8], pause_location=[0.4])
        res = sweep(cfg, [pi])
        assert len(res.rows) == 1
        hw = bench.build_hardware("chimera", 2)
        inst_id = res.rows[0]["instance_id"]
        emb = bench.find_embedding(pi, hw, 2, gauge_seed(0, inst_id))
        point = cfg.points()[0]
        direct = run_point(pi, embed_problem(pi, emb, 0.8, hw),
                           bench.configure(PlantedSampler(), point), 3, 100,
                           gauge_seed(0, inst_id, bench._stable_id(point)))
        assert res.rows[0]["p_success"] == direct.p_success

    def test_order_invariant(self):
        a, b = edge_problem("a"), attach_oracle(build_gc_qubo(GcInstance(3, [(0, 1), (1, 2)], 2, name="b")))
        cfg = small_config(chain_strength=[0.8], pause_location=[0.3, 0.4])
        assert results_csv(sweep(cfg, [a, b])) == results_csv(sweep(cfg, [b, a]))

    def test_failures_recorded(self, tmp_path):
        bad = tmp_path / "missing.json"
        res = sweep(small_config(chain_strength=[0.8], pause_location=[0.4]), [edge_problem(), str(bad)])
        assert len(res.errors) == 1 and res.errors[0]["stage"] == "prepare"
        assert len(res.rows) == 1

    def test_all_failed(self, tmp_path):
        with pytest.raises(ContractError):
            sweep(small_config(), [str(tmp_path / "nope.json")])

    def test_ties_prefer_lower_chain_strength(self):
        flat = PlantedSampler(width_chain=1e9, width_pause=1e9, p_max=1.0)
        res = sweep(small_config(pause_location=[0.4]), [edge_problem()], sampler=flat)
        assert res.best["chain_strength"] == 0.5

    def test_workers_env(self, monkeypatch):
        monkeypatch.setenv(bench.WORKERS_ENV, "3")
        assert bench.workers_from_env() == 3
        monkeypatch.setenv(bench.WORKERS_ENV, "x")
        with pytest.raises(ContractError):
            bench.workers_from_env()


class TestReport:
    def test_files_and_shape(self, tmp_path):
        res = sweep(small_config(pause_location=[0.4]), [edge_problem()])
        files = emit_report(res, tmp_path / "run")
        names = sorted(p.name for p in files)
        assert names == ["plot_chain_strength.csv", "results.csv", "summary.json"]
        plot = (tmp_path / "run" / "plot_chain_strength.csv").read_text().splitlines()
        assert plot[0] == "chain_strength,median,lo,hi"
        assert len(plot) == 1 + 3
        summary = json.loads((tmp_path / "run" / "summary.json").read_text())
        assert summary["config_hash"] == res.config_hash and summary["seed"] == 0

    def test_empty_writes_nothing(self, tmp_path):
        out = tmp_path / "run"
        with pytest.raises(ContractError):
            emit_report(None, out)
        assert not out.exists()

    def test_loads_instance_files(self, tmp_path):
        path = save_problem(edge_problem(), tmp_path / "p.json")
        res = sweep(small_config(instances=[str(path)], chain_strength=[0.8], pause_location=[0.4]))
        assert res.rows[0]["instance"] == "edge"
