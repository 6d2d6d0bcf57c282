"""Alpha-beta log-det divergences on SPD matrices.

Learns the divergence parameters jointly with a dictionary and classifier
(:class:`IDDLClassifier`) or with a clustering (:class:`ABKMeans`).
"""

from .clustering import (
    ABKMeans,
    KarcherKMeans,
    LogEuclideanKMeans,
    Partition,
    ab_kmeans,
    f1_score,
    karcher_kmeans,
    karcher_mean,
    le_kmeans,
)
from .data import LabeledSpdDataset, WishartSpec, cov_descriptor, normalize_dataset, wishart_synth
from .divergence import (
    AbldParams,
    abld,
    abld_grad_alpha,
    abld_grad_beta,
    abld_grad_y,
    airm_sq,
    burg,
    jbld,
    jeffreys,
    log_euclidean_sq,
)
from .exceptions import (
    DegenerateLogArgument,
    DomainError,
    LineSearchWarning,
    NonConvergence,
    NotPositiveDefinite,
    SingularSystem,
)
from .iddl import Dictionary, IDDLClassifier, train_iddl

__version__ = "0.1.0"

__all__ = [
    "ABKMeans",
    "AbldParams",
    "DegenerateLogArgument",
    "Dictionary",
    "DomainError",
    "IDDLClassifier",
    "KarcherKMeans",
    "LabeledSpdDataset",
    "LineSearchWarning",
    "LogEuclideanKMeans",
    "NonConvergence",
    "NotPositiveDefinite",
    "Partition",
    "SingularSystem",
    "WishartSpec",
    "ab_kmeans",
    "abld",
    "abld_grad_alpha",
    "abld_grad_beta",
    "abld_grad_y",
    "airm_sq",
    "burg",
    "cov_descriptor",
    "f1_score",
    "jbld",
    "jeffreys",
    "karcher_kmeans",
    "karcher_mean",
    "le_kmeans",
    "log_euclidean_sq",
    "normalize_dataset",
    "train_iddl",
    "wishart_synth",
]
