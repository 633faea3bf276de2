import json

import pytest

from annealbench.cli import build_parser, main


def test_subcommands_present():
    parser = build_parser()
    for cmd in ("generate", "embed", "solve", "sweep", "report"):
        assert parser.parse_args([cmd, "x"] if cmd != "generate" else [cmd, "gc"]).command == cmd


def test_end_to_end(tmp_path, capsys):
    inst = tmp_path / "inst"
    assert main(["generate", "gc", "--nodes", "2", "--degree", "1", "--colors", "2",
                 "--count", "2", "--out", str(inst)]) == 0
    qubo = inst / "gc_000.qubo.json"
    assert json.loads(qubo.read_text())["optimum"] == 0.0
    emb = tmp_path / "emb.json"
    assert main(["embed", str(qubo), "--hardware", "chimera:2", "--tries", "2",
                 "--out", str(emb)]) == 0
    capsys.readouterr()
    assert main(["solve", str(qubo), "--embedding", str(emb), "--hardware", "chimera:2",
                 "--solver", "sa", "--solver-params", '{"sweeps": 50}', "--gauges", "2",
                 "--reads", "10", "--chain-strength", "2"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["total"] == 20 and 0 <= res["p_success"] <= 1

    cfg = {"instances": ["inst/gc_000.qubo.json", "inst/gc_001.qubo.json"], "solver": "sa",
           "solver_params": {"sweeps": 50}, "chain_strength": [1.0, 2.0], "gauges": 2, "reads": 10,
           "resamples": 200, "hardware": {"family": "chimera", "m": 2}, "embedding_tries": 2}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    runs = tmp_path / "runs"
    assert main(["sweep", str(cfg_path), "--out", str(runs)]) == 0
    (run_dir,) = runs.iterdir()
    first = (run_dir / "results.csv").read_bytes()
    assert main(["sweep", str(cfg_path), "--out", str(runs)]) == 0
    assert (run_dir / "results.csv").read_bytes() == first
    capsys.readouterr()
    assert main(["report", str(run_dir)]) == 0
    assert "best point" in capsys.readouterr().out


def test_contract_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "p.json"
    bad.write_text(json.dumps({"class": "gc", "n_nodes": 2, "edges": [[0, 1]], "colors": 2}))
    assert main(["embed", str(bad), "--hardware", "pegasus"]) == 2
    assert "error" in capsys.readouterr().err
