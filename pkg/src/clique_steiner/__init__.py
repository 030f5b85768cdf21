"""Round-synchronous clique-network simulator with two distributed
terminal-spanning tree solvers and exact sequential oracles."""

from .engine import Engine, EngineError, RoundMetrics, route_balanced
from .graph import (
    GraphError,
    WeightedGraph,
    generate_graph,
    graph_metrics,
    parse_stp,
    serialize_stp,
    shortest_path_diameter,
)
from .minplus import distributed_apsp, iterated_squaring, minplus_product
from .mst import collect_n_lightest, lotker_mst, merge_with_safety_rule
from .oracles import (
    ExactSteinerResult,
    brute_force_spf,
    dreyfus_wagner,
    floyd_warshall,
    kmb_sequential,
    kruskal,
)
from .pipeline import (
    SteinerTree,
    classify_and_reweight,
    extract_straight_paths,
    prune,
    stccm_a,
    stccm_b,
)
from .spf import ShortestPathForest, spf_b_run, spf_from_apsp, validate_spf

__all__ = [
    "Engine",
    "EngineError",
    "ExactSteinerResult",
    "GraphError",
    "RoundMetrics",
    "ShortestPathForest",
    "SteinerTree",
    "WeightedGraph",
    "brute_force_spf",
    "classify_and_reweight",
    "collect_n_lightest",
    "distributed_apsp",
    "dreyfus_wagner",
    "extract_straight_paths",
    "floyd_warshall",
    "generate_graph",
    "graph_metrics",
    "iterated_squaring",
    "kmb_sequential",
    "kruskal",
    "lotker_mst",
    "merge_with_safety_rule",
    "minplus_product",
    "parse_stp",
    "prune",
    "route_balanced",
    "serialize_stp",
    "shortest_path_diameter",
    "spf_b_run",
    "spf_from_apsp",
    "stccm_a",
    "stccm_b",
    "validate_spf",
]
