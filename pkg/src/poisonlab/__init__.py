"""Availability-poisoning toolkit for linear classifiers.

Crafts poison points by climbing a target-class kernel density estimate
over a low-dimensional prototype parameterization, next to label-flip and
implicit-gradient bilevel baselines, linear trainers, and a CLI harness
for accuracy-degradation, timing, ablation and landscape experiments.
"""

from .attack import (
    AttackConfig,
    PoisonBatch,
    PrototypeSet,
    generate_poison_batch,
    run_beta_poisoning,
)
from .baselines import (
    BilevelConfig,
    GridOracleSpec,
    bilevel_attack_implicit,
    bilevel_grid_oracle,
    bilevel_poison_batch,
    label_flip_attack,
)
from .data import (
    Dataset,
    DataFormatError,
    SplitSpec,
    filter_and_split,
    load_cifar10_binary,
    load_mnist_idx,
    make_gaussian_2d,
)
from .kde import KdeEstimate, compute_bandwidth, fit, likelihood, likelihood_grad
from .models import LinearModel, TrainReport, accuracy, predict, train, train_multiclass_ovr

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "BilevelConfig",
    "DataFormatError",
    "Dataset",
    "GridOracleSpec",
    "KdeEstimate",
    "LinearModel",
    "PoisonBatch",
    "PrototypeSet",
    "SplitSpec",
    "TrainReport",
    "accuracy",
    "bilevel_attack_implicit",
    "bilevel_grid_oracle",
    "bilevel_poison_batch",
    "compute_bandwidth",
    "filter_and_split",
    "fit",
    "generate_poison_batch",
    "label_flip_attack",
    "likelihood",
    "likelihood_grad",
    "load_cifar10_binary",
    "load_mnist_idx",
    "make_gaussian_2d",
    "predict",
    "run_beta_poisoning",
    "train",
    "train_multiclass_ovr",
    "__version__",
]
