"""Command-line entry point: ``annealbench {generate,embed,solve,sweep,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .embedding import Embedding, diagnostics, embed_problem, find_embedding
from .problems.bdmst import random_bdmst_instance
from .problems.gc import random_regular_gc
from .problems.info import random_info_instance
from .problems.io import attach_oracle, build_problem, instance_to_dict, load_problem, save_problem
from .topology import build_hardware
from .validation import ContractError

log = logging.getLogger("annealbench")


def _hardware(spec: str, dead: str | None = None):
    family, _, m = spec.partition(":")
    if not m:
        raise ContractError("hardware must look like 'pegasus:6' or 'chimera:4'")
    dead_qubits = [int(q) for q in dead.split(",")] if dead else ()
    return build_hardware(family, int(m), dead_qubits)


def _optional_float(text: str):
    return None if text.lower() == "none" else float(text)


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        name = f"{args.problem_class}_{i:03d}"
        if args.problem_class == "bdmst":
            inst = random_bdmst_instance(rng, args.nodes or 5, max_degree=args.max_degree, name=name)
        elif args.problem_class == "gc":
            inst = random_regular_gc(rng, args.nodes or 12, args.degree, args.colors, name=name)
        else:
            inst = random_info_instance(rng, args.nodes or 3, args.messages, args.max_hops, name=name)
        (out / f"{name}.instance.json").write_text(json.dumps(instance_to_dict(inst), indent=1,
                                                              sort_keys=True))
        pi = build_problem(inst)
        if not args.no_oracle:
            pi = attach_oracle(pi)
        save_problem(pi, out / f"{name}.qubo.json")
        print(f"{name}: {pi.n_vars} variables, optimum {pi.optimum}")
    return 0


def cmd_embed(args) -> int:
    pi = load_problem(args.problem)
    hw = _hardware(args.hardware, args.dead)
    emb = find_embedding(pi, hw, args.tries, args.seed)
    emb.save(args.out)
    ep = embed_problem(pi, emb, args.chain_strength, hw)
    print(json.dumps(diagnostics(ep).to_dict(), indent=1))
    return 0


def cmd_solve(args) -> int:
    pi = load_problem(args.problem)
    if pi.optimum is None:
        pi = attach_oracle(pi)
    hw = _hardware(args.hardware, args.dead)
    emb = Embedding.load(args.embedding) if args.embedding else find_embedding(pi, hw, args.tries, args.seed)
    ep = embed_problem(pi, emb, args.chain_strength, hw)
    sampler = bench.make_sampler(args.solver, json.loads(args.solver_params))
    sampler = bench.configure(sampler, {"anneal_time": args.anneal_time,
                                        "pause_location": args.pause_location,
                                        "pause_duration": args.pause_duration,
                                        "chain_strength": args.chain_strength})
    res = bench.run_point(pi, ep, sampler, args.gauges, args.reads, args.seed, args.policy)
    print(json.dumps(bench._json_safe(res.to_dict()), indent=1))
    return 0


def cmd_sweep(args) -> int:
    cfg = bench.SweepConfig.load(args.config)
    run_dir = bench.run_directory(args.out, cfg)
    result = bench.sweep(cfg, workers=args.workers)
    for p in bench.emit_report(result, run_dir):
        print(p)
    for err in result.errors:
        log.warning("instance %s failed at %s: %s", err["instance"], err["stage"], err["error"])
    return 0


def cmd_report(args) -> int:
    run = Path(args.run)
    summary = json.loads((run / "summary.json").read_text())
    best = summary["best"]
    print(f"config {summary['config_hash']} seed {summary['seed']}")
    print("best point: " + ", ".join(f"{a}={best[a]}" for a in bench.AXES))
    print(f"median T_S {best['median_T_S']} band [{best['lo']}, {best['hi']}]")
    for row in summary["summary"]:
        print("  " + " ".join(f"{a}={row[a]}" for a in bench.AXES) + f"  T_S={row['median_T_S']}")
    if summary["errors"]:
        print(f"{len(summary['errors'])} recorded failures")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="annealbench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write random instances and their QUBOs")
    g.add_argument("problem_class", choices=["bdmst", "gc", "info"])
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="instances")
    g.add_argument("--nodes", type=int, default=None)
    g.add_argument("--max-degree", type=int, default=3, help="bdmst degree bound")
    g.add_argument("--degree", type=int, default=4, help="gc regular degree")
    g.add_argument("--colors", type=int, default=5, help="gc colours")
    g.add_argument("--messages", type=int, default=2, help="info messages")
    g.add_argument("--max-hops", type=int, default=1, help="info path length")
    g.add_argument("--no-oracle", action="store_true", help="skip the exact optimum")
    g.set_defaults(func=cmd_generate)

    def hardware_args(p):
        p.add_argument("--hardware", default="pegasus:6", help="family:m")
        p.add_argument("--dead", default=None, help="comma-separated dead qubits")
        p.add_argument("--tries", type=int, default=10)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--chain-strength", type=float, default=1.0)

    e = sub.add_parser("embed", help="minor-embed a problem")
    e.add_argument("problem")
    e.add_argument("--out", default="embedding.json")
    hardware_args(e)
    e.set_defaults(func=cmd_embed)

    s = sub.add_parser("solve", help="run one grid point")
    s.add_argument("problem")
    s.add_argument("--embedding", default=None)
    hardware_args(s)
    s.add_argument("--solver", choices=sorted(bench.SOLVERS), default="svmc")
    s.add_argument("--solver-params", default="{}", help="JSON object")
    s.add_argument("--anneal-time", type=float, default=1.0)
    s.add_argument("--pause-location", type=_optional_float, default=None)
    s.add_argument("--pause-duration", type=float, default=0.0)
    s.add_argument("--gauges", type=int, default=bench.DEFAULT_GAUGES)
    s.add_argument("--reads", type=int, default=bench.DEFAULT_READS)
    s.add_argument("--policy", choices=["discard", "majority_vote"], default="discard")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", help="run a JSON sweep config")
    w.add_argument("config")
    w.add_argument("--out", default="runs", help="parent of the per-config run directory")
    w.add_argument("--workers", type=int, default=None,
                   help=f"process count (default: ${bench.WORKERS_ENV} or 1)")
    w.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="print a run directory's summary")
    r.add_argument("run")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
