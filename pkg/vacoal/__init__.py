"""
VaCoAl engine: hyperdimensional associative memory with Galois-field LFSR
diffusion, block majority voting, collision rescue and frontier-bounded
genealogy search.

The package is framework free; the ``genealogy`` Django app wires it into
management commands.
"""

from .blockmem import BlockMemory, LabelTable, VoteResult, expected_collision_rate, majority_vote
from .galois import BlockDiffuser, DiffuserBank, FeedbackPolynomial, avalanche_stats, diffuse, sample_polynomial
from .graph import AdjacencyIndex, EdgeList, PredicateTable, PurificationReport, ingest_edges, ingest_predicates, purify_dag
from .hypervector import Hypervector, TokenCodebook, bind, bundle, generate_token, hamming, similarity, unbind, unbind_role
from .rescue import RescueBuffer, RescueRate, RescueTable, finalize, vote_with_rescue
from .search import PathRecord, SearchConfig, SearchMode, PruneOrder, compare_traces, learn_graph, oracle_trace, trace

__version__ = "1.0.0"

__all__ = [
    "AdjacencyIndex",
    "BlockDiffuser",
    "BlockMemory",
    "DiffuserBank",
    "EdgeList",
    "FeedbackPolynomial",
    "Hypervector",
    "LabelTable",
    "PathRecord",
    "PredicateTable",
    "PruneOrder",
    "PurificationReport",
    "RescueBuffer",
    "RescueRate",
    "RescueTable",
    "SearchConfig",
    "SearchMode",
    "TokenCodebook",
    "VoteResult",
    "avalanche_stats",
    "bind",
    "bundle",
    "compare_traces",
    "diffuse",
    "expected_collision_rate",
    "finalize",
    "generate_token",
    "hamming",
    "ingest_edges",
    "ingest_predicates",
    "learn_graph",
    "majority_vote",
    "oracle_trace",
    "purify_dag",
    "sample_polynomial",
    "similarity",
    "trace",
    "unbind",
    "unbind_role",
    "vote_with_rescue",
]
