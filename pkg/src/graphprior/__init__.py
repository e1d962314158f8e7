"""Synthetic attributed-graph dataset generator.

Samples dataset-level hyperparameters from a configurable prior, builds a
two-level degree-corrected stochastic block model graph with preferential
attachment augmentation, attaches features and targets from a graph-aware
structural causal model, and serializes everything (plus pretraining
episodes) into a seekable binary container.
"""

from .container import (
    DatasetContainer,
    make_container,
    read_container,
    read_dataset,
    write_container,
    write_dataset,
)
from .episode import Episode, build_episode, sample_mgm, split_context_query
from .errors import (
    ArcOverflowError,
    AttributeGenerationError,
    BadMagicError,
    ConfigError,
    ContainerError,
    ConvergenceError,
    CorruptSectionError,
    DegenerateTargetError,
    GenerationError,
    GraphPriorError,
    InsufficientNeuronsError,
    InvariantViolationError,
    NumericOverflowError,
    SaturationError,
    SizeMismatchError,
    UnsupportedVersionError,
)
from .generate import (
    build_episodes,
    generate_container,
    generate_dataset,
    generate_graph,
)
from .graphs import (
    GraphStructure,
    LevelMapping,
    empty_graph,
    from_csr_arrays,
    from_edge_arrays,
    from_edge_set,
)
from .prior_config import (
    PriorConfig,
    PriorSample,
    Task,
    load_config,
    sample_prior,
)
from .rng import derive_seed, stream
from .scm import (
    AttributedGraphDataset,
    ScmNetwork,
    ScmParams,
    derive_task,
    designate_attributes,
    generate_attributes,
    gnn_aggregate,
    propagate,
    sample_scm,
)
from .spectral import (
    LapPeMatrix,
    laplacian_pe,
    normalized_laplacian,
    smallest_eigenpairs,
)
from .stats import (
    GraphStatsReport,
    clustering_coefficient,
    compute_report,
    degree_assortativity,
    degree_histogram,
)
from .structure import (
    BaParams,
    DcsbmParams,
    augment_preferential,
    combine_levels,
    generate_structure,
    sample_dcsbm,
    sample_pair_counts,
)
from .version import VERSION

__version__ = VERSION

__all__ = [
    "ArcOverflowError",
    "AttributeGenerationError",
    "AttributedGraphDataset",
    "BadMagicError",
    "BaParams",
    "ConfigError",
    "ContainerError",
    "ConvergenceError",
    "CorruptSectionError",
    "DatasetContainer",
    "DcsbmParams",
    "DegenerateTargetError",
    "Episode",
    "GenerationError",
    "GraphPriorError",
    "GraphStatsReport",
    "GraphStructure",
    "InsufficientNeuronsError",
    "InvariantViolationError",
    "LapPeMatrix",
    "LevelMapping",
    "NumericOverflowError",
    "PriorConfig",
    "PriorSample",
    "SaturationError",
    "ScmNetwork",
    "ScmParams",
    "SizeMismatchError",
    "Task",
    "UnsupportedVersionError",
    "VERSION",
    "augment_preferential",
    "build_episode",
    "build_episodes",
    "clustering_coefficient",
    "combine_levels",
    "compute_report",
    "degree_assortativity",
    "degree_histogram",
    "derive_seed",
    "derive_task",
    "designate_attributes",
    "empty_graph",
    "from_csr_arrays",
    "from_edge_arrays",
    "from_edge_set",
    "generate_attributes",
    "generate_container",
    "generate_dataset",
    "generate_graph",
    "generate_structure",
    "gnn_aggregate",
    "laplacian_pe",
    "load_config",
    "make_container",
    "normalized_laplacian",
    "propagate",
    "read_container",
    "read_dataset",
    "sample_dcsbm",
    "sample_mgm",
    "sample_pair_counts",
    "sample_prior",
    "sample_scm",
    "smallest_eigenpairs",
    "split_context_query",
    "stream",
    "write_container",
    "write_dataset",
]
