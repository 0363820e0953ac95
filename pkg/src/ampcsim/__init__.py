"""Simulator for adaptive massively parallel graph algorithms.

Rounds, shuffles and key-value lookups are booked on a ``Runtime``; the
algorithms return exact answers together with the cost they incurred.
"""
from .baselines import (PhaseLog, mpc_cycle_cc, mpc_mis_rootset, mpc_mm_rootset,
                        mpc_msf_boruvka)
from .errors import (AmpcError, ComponentTooLarge, ConfigError, CycleDetected,
                     DifferentComponents, InputMismatch, InvalidSize, IterationBudgetExceeded,
                     NotACycleGraph, NotAForest, NotAncestor, OutOfRange, ParseError,
                     QuotaExceeded, StoreFrozen)
from .graph import (ContractionMap, Graph, contract_graph, cycle_union, degree_weights,
                    generate_grid, generate_matching, generate_path, generate_random,
                    generate_star, generate_tree, generate_two_cycles, load_edge_list,
                    random_weights, save_edge_list, ternarize)
from .kernels import BACKEND
from .matching import (MatchingResult, MisResult, ampc_mis, ampc_mm_constant, ampc_mm_loglog)
from .msf import (MsfResult, connectivity, dense_msf, find_light_edges, kkt_msf, msf,
                  msf_empirical, truncated_prim)
from .runtime import RunMetrics, Runtime, RuntimeConfig
from .twocycle import ampc_two_cycle

__version__ = "0.1.0"

__all__ = [
    "AmpcError", "BACKEND", "ComponentTooLarge", "ConfigError", "ContractionMap",
    "CycleDetected", "DifferentComponents", "Graph", "InputMismatch", "InvalidSize",
    "IterationBudgetExceeded", "MatchingResult", "MisResult", "MsfResult", "NotACycleGraph",
    "NotAForest", "NotAncestor", "OutOfRange", "ParseError", "PhaseLog", "QuotaExceeded",
    "RunMetrics", "Runtime", "RuntimeConfig", "StoreFrozen", "ampc_mis", "ampc_mm_constant",
    "ampc_mm_loglog", "ampc_two_cycle", "connectivity", "contract_graph", "cycle_union",
    "degree_weights", "dense_msf", "find_light_edges", "generate_grid", "generate_matching", "generate_path", "generate_random",
    "generate_star", "generate_tree", "generate_two_cycles", "kkt_msf", "load_edge_list",
    "mpc_cycle_cc", "mpc_mis_rootset", "mpc_mm_rootset", "mpc_msf_boruvka", "msf",
    "msf_empirical", "random_weights", "save_edge_list", "ternarize", "truncated_prim",
]
