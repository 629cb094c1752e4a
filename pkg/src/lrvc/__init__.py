"""Distributed local-ratio vertex cover: simulator, protocol and checkers."""

__version__ = "0.1.0"

from ._rational import Q, as_fraction, fmt
from .bounds import (
    feasible_k_Delta,
    feasible_k_n,
    iteration_cap,
    kmw_delta_from_Delta,
    kmw_delta_from_n,
    round_bound,
)
from .engine import Engine, RunReport, Schedule, Trace, message_stats, run_simulation
from .graph import GeneratorSpec, WeightedGraph, emit_graph, generate, parse_graph
from .oracle import (
    brute_force_mwvc,
    check_cover,
    check_g_valid,
    compute_s_delta,
    extract_delta,
    sequential_local_ratio,
    verify_run,
)
from .protocol import ProtocolParams, Status, Variant, kv_parameter

__all__ = [
    "Q", "as_fraction", "fmt",
    "feasible_k_Delta", "feasible_k_n", "iteration_cap", "kmw_delta_from_Delta",
    "kmw_delta_from_n", "round_bound",
    "Engine", "RunReport", "Schedule", "Trace", "message_stats", "run_simulation",
    "GeneratorSpec", "WeightedGraph", "emit_graph", "generate", "parse_graph",
    "brute_force_mwvc", "check_cover", "check_g_valid", "compute_s_delta", "extract_delta",
    "sequential_local_ratio", "verify_run",
    "ProtocolParams", "Status", "Variant", "kv_parameter",
]
