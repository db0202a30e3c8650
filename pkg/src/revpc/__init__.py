"""Reverse-order pruning for PC-style causal structure learning."""

from .citest import CiDecision, GaussianSource, OracleSource, TestCounter, ci_test, ci_threshold
from .discovery import (
    AlgoConfig,
    SepsetTable,
    SkeletonResult,
    discover,
    orient_cpdag,
    pc_skeleton,
    reverse_skeleton,
    reverse_skeleton_parallel,
    run_skeleton,
)
from .graph import Dag, MixedGraph, cpdag_of, d_separated
from .linalg import DataMatrix, correlation_matrix, partial_correlation
from .metrics import GraphMetrics, compare_graphs, shd
from .simgen import SimConfig, WeightedDag, simulate

__all__ = [
    "AlgoConfig", "CiDecision", "Dag", "DataMatrix", "GaussianSource", "GraphMetrics",
    "MixedGraph", "OracleSource", "SepsetTable", "SimConfig", "SkeletonResult", "TestCounter",
    "WeightedDag", "ci_test", "ci_threshold", "compare_graphs", "correlation_matrix",
    "cpdag_of", "d_separated", "discover", "orient_cpdag", "partial_correlation",
    "pc_skeleton", "reverse_skeleton", "reverse_skeleton_parallel", "run_skeleton",
    "shd", "simulate",
]
__version__ = "0.1.0"
