"""Entropy-driven feed-forward clustering.

A small network whose hidden layers act as detectors (complement-entropy
minimized per sample) and whose output layer carries a cluster
distribution (complement-entropy maximized); inference picks the
minimum-output neuron. Includes purity evaluation, a k-means baseline,
and reproducible experiment plumbing.
"""

from .clustering import ClusterResult, assign, assign_batch
from .data import Dataset, DatasetDescriptor, UCI_DATASETS, load_csv, load_uci, make_blobs, normalize_minmax
from .errors import ConfigError, DataError, EntclustError, InputError, TrainingError
from .evaluation import (
    ContingencyTable,
    kmeans_baseline,
    purity,
    purity_of,
    sweep_hidden_nodes,
    tabulate,
)
from .network import (
    ForwardTrace,
    Network,
    NetworkConfig,
    forward,
    init_network,
    load_network,
    save_network,
)
from .objective import (
    ComplementDistribution,
    ObjectiveBreakdown,
    batch_objective,
    complement_distribution,
    entropy,
    objective,
)
from .training import (
    TrainConfig,
    TrainReport,
    analytic_gradient,
    batch_gradient,
    finite_difference_gradient,
    train,
)

__all__ = [
    "ClusterResult",
    "ComplementDistribution",
    "ConfigError",
    "ContingencyTable",
    "DataError",
    "Dataset",
    "DatasetDescriptor",
    "EntclustError",
    "ForwardTrace",
    "InputError",
    "Network",
    "NetworkConfig",
    "ObjectiveBreakdown",
    "TrainConfig",
    "TrainReport",
    "TrainingError",
    "UCI_DATASETS",
    "analytic_gradient",
    "assign",
    "assign_batch",
    "batch_gradient",
    "batch_objective",
    "complement_distribution",
    "entropy",
    "finite_difference_gradient",
    "forward",
    "init_network",
    "kmeans_baseline",
    "load_csv",
    "load_network",
    "load_uci",
    "make_blobs",
    "normalize_minmax",
    "objective",
    "purity",
    "purity_of",
    "save_network",
    "sweep_hidden_nodes",
    "tabulate",
    "train",
]
