"""Annealer benchmarking workbench.

QUBO/Ising models, three problem builders with exact oracles, Chimera and
Pegasus hardware graphs, minor embedding, classical annealing proxies driven by
pause schedules, and a gauge-averaged time-to-solution harness.
"""

from .bench import (PlantedSampler, RunResult, SweepConfig, bootstrap_median, emit_report,
                    run_point, sweep, time_to_solution)
from .embedding import (Embedding, EmbeddedProblem, MinorEmbedder, diagnostics, embed_problem,
                        find_embedding, unembed, verify_embedding)
from .ising import IsingModel, QuboModel, apply_gauge, energy, ising_to_qubo, qubo_to_ising
from .schedule import AnnealFunctions, Schedule, build_schedule, classify_regimes, scales
from .solvers import (SampleSet, SimulatedAnnealingSampler, SVMCSampler, brute_force, ice_perturb,
                      simulated_anneal, svmc_anneal)
from .topology import HardwareGraph, chimera_graph, pegasus_graph
from .validation import ContractError, PrecisionWarning

__version__ = "0.1.0"

__all__ = [
    "PlantedSampler", "RunResult", "SweepConfig", "bootstrap_median", "emit_report", "run_point",
    "sweep", "time_to_solution",
    "Embedding", "EmbeddedProblem", "MinorEmbedder", "diagnostics", "embed_problem",
    "find_embedding", "unembed", "verify_embedding",
    "IsingModel", "QuboModel", "apply_gauge", "energy", "ising_to_qubo", "qubo_to_ising",
    "AnnealFunctions", "Schedule", "build_schedule", "classify_regimes", "scales",
    "SampleSet", "SimulatedAnnealingSampler", "SVMCSampler", "brute_force", "ice_perturb",
    "simulated_anneal", "svmc_anneal",
    "HardwareGraph", "chimera_graph", "pegasus_graph",
    "ContractError", "PrecisionWarning",
]
