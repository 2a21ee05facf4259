"""Partition constructions and the partition-condition verifier."""
from .base import (CorPReport, Partition, good_by_observation, good_vertices, is_good,
                   max_offdiag, u_set, verify_corp)
from .expander import expander_horizon, expander_partition, random_blocks
from .generic import GenericResult, ScaleChoice, choose_scale, generic_partition, min_N
from .recurrent import conflict_graph, greedy_coloring, recurrent_partition
from .tree import corp_from_tree, far_bound, tree_safe_partition

__all__ = ["CorPReport", "Partition", "good_by_observation", "good_vertices", "is_good",
           "max_offdiag", "u_set", "verify_corp", "corp_from_tree", "far_bound",
           "tree_safe_partition", "expander_horizon", "expander_partition", "random_blocks",
           "GenericResult", "ScaleChoice", "choose_scale", "generic_partition", "min_N",
           "conflict_graph", "greedy_coloring", "recurrent_partition"]
