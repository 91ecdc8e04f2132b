"""Metric-constrained relaxations of graph clustering objectives,
solved by cyclic projections with sparse dual storage."""

from .certify import Certificate, build_certificate, perturbed_dual_bound, sc_lower_bound
from .graphs import (
    Graph,
    GraphFormatError,
    SignedGraph,
    graph_from_edges,
    jaccard_signed_graph,
    load_graph,
    preprocess,
)
from .problems import (
    Layout,
    Problem,
    build_cluster_deletion,
    build_correlation_clustering,
    build_max_cut,
    build_metric_nearness,
    build_modularity,
    build_sparsest_cut,
    pair_index,
    total_constraints,
)
from .report import SolveReport, load_report, write_report, write_solution
from .solver import SolverConfig, SolverState, full_pass, init_state, solve

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "Graph",
    "GraphFormatError",
    "Layout",
    "Problem",
    "SignedGraph",
    "SolveReport",
    "SolverConfig",
    "SolverState",
    "build_certificate",
    "build_cluster_deletion",
    "build_correlation_clustering",
    "build_max_cut",
    "build_metric_nearness",
    "build_modularity",
    "build_sparsest_cut",
    "full_pass",
    "graph_from_edges",
    "init_state",
    "jaccard_signed_graph",
    "load_graph",
    "load_report",
    "pair_index",
    "perturbed_dual_bound",
    "preprocess",
    "sc_lower_bound",
    "solve",
    "total_constraints",
    "write_report",
    "write_solution",
    "__version__",
]
