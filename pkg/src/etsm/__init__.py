"""Unsupervised hierarchies from iterative averaging of similarity matrices."""

__version__ = "0.1.0"

from .core import (HOMOGENEOUS, EtsmConfig, EtsmOutcome, Partition, Trace, contrast,
                   extract_partition, iterate, transform_step)
from .dataset import (Dataset, MetricKind, ParameterSpec, ScatterGroup, benchmark_groups,
                      gen_random, gen_scatter, load_csv, load_param_config, write_csv)
from .errors import (ConfigurationError, DichotomyViolationError, DomainError, EtsmError,
                     ParseError, UnsupportedMetricError, ValidationError)
from .hierarchy import (HierarchyNode, build_hierarchy, cophenetic_depth, node_geometry,
                        tree_from_json, tree_to_json)
from .render import RenderOptions, emit_curves, export_tree, render_svg
from .similarity import (DISSIMILARITY, SIMILARITY, MatrixKind, SimilarityMatrix,
                         dataset_matrix, euclidean_dissimilarity, hybrid_matrix, hybridize,
                         load_matrix, monomer_matrix, pairwise_metric)

__all__ = [
    "HOMOGENEOUS", "EtsmConfig", "EtsmOutcome", "Partition", "Trace", "contrast",
    "extract_partition", "iterate", "transform_step",
    "Dataset", "MetricKind", "ParameterSpec", "ScatterGroup", "benchmark_groups",
    "gen_random", "gen_scatter", "load_csv", "load_param_config", "write_csv",
    "ConfigurationError", "DichotomyViolationError", "DomainError", "EtsmError",
    "ParseError", "UnsupportedMetricError", "ValidationError",
    "HierarchyNode", "build_hierarchy", "cophenetic_depth", "node_geometry",
    "tree_from_json", "tree_to_json",
    "RenderOptions", "emit_curves", "export_tree", "render_svg",
    "DISSIMILARITY", "SIMILARITY", "MatrixKind", "SimilarityMatrix", "dataset_matrix",
    "euclidean_dissimilarity", "hybrid_matrix", "hybridize", "load_matrix",
    "monomer_matrix", "pairwise_metric",
]
