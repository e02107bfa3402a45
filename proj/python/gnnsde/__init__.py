"""GNN-based single-source shortest distance estimation."""

from ._core import (
    Error,
    Graph,
    LandmarkIndex,
    ModelParams,
    ParseError,
    RoutingError,
    UnreachableError,
    ValidationError,
    apply_scenario,
    bellman_ford,
    bfs_hops,
    delay_ratios,
    dijkstra,
    generate,
    generate_preset,
    landmark_count_rule,
    metrics,
    path_weight,
    predict_sssd,
    route,
    train,
)

__all__ = [
    "Error",
    "Graph",
    "LandmarkIndex",
    "ModelParams",
    "ParseError",
    "RoutingError",
    "UnreachableError",
    "ValidationError",
    "apply_scenario",
    "bellman_ford",
    "bfs_hops",
    "delay_ratios",
    "dijkstra",
    "generate",
    "generate_preset",
    "landmark_count_rule",
    "metrics",
    "path_weight",
    "predict_sssd",
    "route",
    "train",
]
