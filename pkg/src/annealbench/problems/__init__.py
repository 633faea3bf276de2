"""Problem builders, decoders and exact oracles."""

from .base import ProblemInstance, QuboBuilder, VariableRegistry
from .bdmst import (BdMstInstance, bdmst_oracle, build_bdmst_qubo, decode_bdmst, encode_bdmst,
                    level_preprocess, quadratize_terms, quadratized_value, variable_count_bound)
from .gc import GcInstance, build_gc_qubo, decode_gc, encode_gc, gc_oracle
from .hybrid import HybridMessage, HybridResult, SolverFailure, hybrid_path_delay, oracle_solver
from .info import InfoInstance, Message, build_info_qubo, decode_info, encode_info, info_oracle
from .io import (attach_oracle, build_problem, instance_from_dict, instance_to_dict, load_problem,
                 save_problem)

__all__ = [
    "ProblemInstance", "QuboBuilder", "VariableRegistry",
    "BdMstInstance", "bdmst_oracle", "build_bdmst_qubo", "decode_bdmst", "encode_bdmst",
    "level_preprocess", "quadratize_terms", "quadratized_value", "variable_count_bound",
    "GcInstance", "build_gc_qubo", "decode_gc", "encode_gc", "gc_oracle",
    "HybridMessage", "HybridResult", "SolverFailure", "hybrid_path_delay", "oracle_solver",
    "InfoInstance", "Message", "build_info_qubo", "decode_info", "encode_info", "info_oracle",
    "attach_oracle", "build_problem", "instance_from_dict", "instance_to_dict", "load_problem",
    "save_problem",
]
