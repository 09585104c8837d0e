"""Named dataset presets resolving to (train, validation, test) splits.

Image presets read raw files from the directory given by the
``POISON_DATA_DIR`` environment variable (or an explicit ``data_dir``);
the synthetic 2-D Gaussian preset needs no files.
"""

from __future__ import annotations

import os
from pathlib import Path

from ..data import (
    Dataset,
    SplitSpec,
    filter_and_split,
    load_cifar10_binary,
    load_mnist_idx,
    make_gaussian_2d,
)

DATA_DIR_ENV = "POISON_DATA_DIR"

MNIST_IMAGES_FILE = "train-images-idx3-ubyte"
MNIST_LABELS_FILE = "train-labels-idx1-ubyte"
CIFAR_BATCH_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))

# CIFAR-10 class indices in the standard binary batches
CIFAR_FROG, CIFAR_HORSE, CIFAR_SHIP = 6, 7, 8

GAUSS2D_MEAN_A = (-1.0, -1.0)
GAUSS2D_MEAN_B = (1.0, 1.0)
GAUSS2D_SIGMA = 0.6

# preset name -> (kind, classes, (n_train, n_val, n_test))
PRESETS = {
    "mnist-4v0": ("mnist", (4, 0), (400, 1000, 1000)),
    "mnist-9v8": ("mnist", (9, 8), (400, 1000, 1000)),
    "cifar-frogship": ("cifar", (CIFAR_FROG, CIFAR_SHIP), (300, 500, 1000)),
    "cifar-horseship": ("cifar", (CIFAR_HORSE, CIFAR_SHIP), (300, 500, 1000)),
    "mnist-triplet-375": ("mnist", (3, 7, 5), (400, 1000, 1000)),
    "mnist-triplet-940": ("mnist", (9, 4, 0), (400, 1000, 1000)),
    "gauss2d": ("gauss2d", (0, 1), (60, 200, 200)),
}


class DataError(RuntimeError):
    """Raised when a preset's data files are missing or unreadable."""


def data_dir(explicit=None) -> Path:
    root = explicit if explicit is not None else os.environ.get(DATA_DIR_ENV)
    if root is None:
        raise DataError(
            f"no data directory: set {DATA_DIR_ENV} or pass --data-dir"
        )
    return Path(root)


def missing_files(root: Path) -> list:
    """Relative paths of expected raw files absent under ``root``."""
    expected = [Path("mnist") / MNIST_IMAGES_FILE, Path("mnist") / MNIST_LABELS_FILE]
    expected += [Path("cifar-10-batches-bin") / name for name in CIFAR_BATCH_FILES]
    return [str(rel) for rel in expected if not (root / rel).is_file()]


def _load_mnist_source(root: Path) -> Dataset:
    images = root / "mnist" / MNIST_IMAGES_FILE
    labels = root / "mnist" / MNIST_LABELS_FILE
    for path in (images, labels):
        if not path.is_file():
            raise DataError(f"missing data file: {path}")
    return load_mnist_idx(images, labels)


def _load_cifar_source(root: Path) -> Dataset:
    paths = [root / "cifar-10-batches-bin" / name for name in CIFAR_BATCH_FILES]
    for path in paths:
        if not path.is_file():
            raise DataError(f"missing data file: {path}")
    return load_cifar10_binary(paths)


def load_preset(name: str, seed: int, explicit_data_dir=None):
    """Resolve a preset into (train, validation, test) datasets.

    ``seed`` drives both the synthetic draw and the split sampling, so a
    (name, seed) pair fully determines the returned datasets.
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    kind, classes, (n_train, n_val, n_test) = PRESETS[name]

    if kind == "gauss2d":
        half = n_train // 2
        train = make_gaussian_2d(half, GAUSS2D_MEAN_A, GAUSS2D_MEAN_B, GAUSS2D_SIGMA, seed)
        val = make_gaussian_2d(n_val // 2, GAUSS2D_MEAN_A, GAUSS2D_MEAN_B,
                               GAUSS2D_SIGMA, seed + 1)
        test = make_gaussian_2d(n_test // 2, GAUSS2D_MEAN_A, GAUSS2D_MEAN_B,
                                GAUSS2D_SIGMA, seed + 2)
        return train, val, test

    root = data_dir(explicit_data_dir)
    source = _load_mnist_source(root) if kind == "mnist" else _load_cifar_source(root)
    spec = SplitSpec(n_train, n_val, n_test, classes, seed)
    return filter_and_split(source, spec)
