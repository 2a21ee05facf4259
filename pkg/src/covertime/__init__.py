"""Cover and hitting analysis of finite Markov chains.

Exact and Monte Carlo cover probabilities, martingale certificates along
walks, and partition constructions with a verifier.
"""
__version__ = "0.1.0"

from .chain import (Graph, MarkovChain, StartRule, WalkTrace, check_path_reversibility,
                    is_irreducible, is_reversible, require_reversible, rw_from_graph,
                    stationary)
from .errors import (BudgetError, ChainValidationError, CovertimeError,
                     InternalVerificationError, ParseError, PreconditionError, UsageError)
from .exact import (avoid_probability, ball_sets, cover_probability, enumerate_cover,
                    first_visit_probabilities, hit_before_return, hitting_stats,
                    induced_chain, induced_matrix, return_time_cdf, spectral_gap)
from .io import dumps, parse_chain, parse_graph, read_chain, read_graph
from .kernels import BACKEND
from .mc import Estimate, estimate_cover, estimate_visit_stats, simulate_walk, wilson

__all__ = [
    "__version__", "BACKEND",
    "Graph", "MarkovChain", "StartRule", "WalkTrace", "check_path_reversibility",
    "is_irreducible", "is_reversible", "require_reversible", "rw_from_graph", "stationary",
    "BudgetError", "ChainValidationError", "CovertimeError", "InternalVerificationError",
    "ParseError", "PreconditionError", "UsageError",
    "avoid_probability", "ball_sets", "cover_probability", "enumerate_cover",
    "first_visit_probabilities", "hit_before_return", "hitting_stats", "induced_chain",
    "induced_matrix", "return_time_cdf", "spectral_gap",
    "dumps", "parse_chain", "parse_graph", "read_chain", "read_graph",
    "Estimate", "estimate_cover", "estimate_visit_stats", "simulate_walk", "wilson",
]
