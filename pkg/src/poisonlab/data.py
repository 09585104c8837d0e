"""Dataset container, file loaders, synthetic generators and split logic.

All features are float64 and normalized into the per-feature box
``[lower_bound, upper_bound]``. Image loaders fix the box to [0, 1]^d;
the synthetic generator derives it from the sample range padded by 3 sigma.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MNIST_IMAGES_MAGIC = 0x00000803
MNIST_LABELS_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073  # 1 label byte + 32*32*3 pixel bytes


class DataFormatError(ValueError):
    """Raised when an input file violates its binary format contract."""


@dataclass(frozen=True)
class Dataset:
    """Labeled feature matrix with per-feature box bounds.

    ``features`` is (n, d), ``labels`` is (n,) with small non-negative
    integer classes, ``lower_bound``/``upper_bound`` are (d,) box limits.
    ``class_map`` records original -> internal label remapping when the
    dataset was produced by :func:`filter_and_split` (identity otherwise).
    """

    features: np.ndarray
    labels: np.ndarray
    lower_bound: np.ndarray
    upper_bound: np.ndarray
    class_map: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(
            self, "lower_bound", np.asarray(self.lower_bound, dtype=np.float64)
        )
        object.__setattr__(
            self, "upper_bound", np.asarray(self.upper_bound, dtype=np.float64)
        )
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("features must be a non-empty 2-D matrix")
        if y.shape != (X.shape[0],):
            raise ValueError("labels length must equal the number of rows")
        if self.lower_bound.shape != (X.shape[1],) or self.upper_bound.shape != (
            X.shape[1],
        ):
            raise ValueError("bounds must be d-vectors")
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")
        if (X < self.lower_bound - 1e-12).any() or (X > self.upper_bound + 1e-12).any():
            raise ValueError("features must lie inside [lower_bound, upper_bound]")
        X.setflags(write=False)
        y.setflags(write=False)
        self.lower_bound.setflags(write=False)
        self.upper_bound.setflags(write=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    def signed_labels(self) -> np.ndarray:
        """{-1, +1} view for binary tasks: class 1 maps to +1, class 0 to -1."""
        cls = self.classes
        if cls.size != 2:
            raise ValueError("signed labels are only defined for binary datasets")
        return np.where(self.labels == cls.max(), 1.0, -1.0)

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(
            self.features[idx],
            self.labels[idx],
            self.lower_bound,
            self.upper_bound,
            dict(self.class_map),
        )

    def class_bank(self, label: int) -> np.ndarray:
        """Feature rows of every sample carrying ``label``."""
        return self.features[self.labels == label]

    def to_csv(self, path) -> None:
        """Export as ``label,f0,...,f{d-1}`` with a header row."""
        header = "label," + ",".join(f"f{i}" for i in range(self.d))
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for lab, row in zip(self.labels, self.features):
                fh.write(str(int(lab)) + "," + ",".join(f"{v:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class SplitSpec:
    """Sizes, classes and seed for a train/validation/test split."""

    n_train: int
    n_val: int
    n_test: int
    classes: tuple
    seed: int

    def __post_init__(self):
        if min(self.n_train, self.n_val, self.n_test) <= 0:
            raise ValueError("split counts must be positive")
        cls = tuple(self.classes)
        if len(cls) == 0 or len(set(cls)) != len(cls):
            raise ValueError("classes must be non-empty and distinct")
        object.__setattr__(self, "classes", cls)


def _read_idx_header(payload: bytes, path, expected_magic: int, n_dims: int):
    head = 4 + 4 * n_dims
    if len(payload) < head:
        raise DataFormatError(f"{path}: truncated IDX header")
    magic = struct.unpack(">i", payload[:4])[0]
    if magic != expected_magic:
        raise DataFormatError(
            f"{path}: wrong magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    dims = struct.unpack(f">{n_dims}i", payload[4:head])
    return dims, payload[head:]


def load_mnist_idx(images_path, labels_path) -> Dataset:
    """Load an MNIST-style IDX image/label file pair.

    Pixels are divided by 255 so features lie in [0, 1]; the box bounds
    are the constants [0, 1]^784.
    """
    with open(images_path, "rb") as fh:
        img_payload = fh.read()
    with open(labels_path, "rb") as fh:
        lab_payload = fh.read()

    (n_img, rows, cols), pixels = _read_idx_header(
        img_payload, images_path, MNIST_IMAGES_MAGIC, 3
    )
    (n_lab,), labels = _read_idx_header(lab_payload, labels_path, MNIST_LABELS_MAGIC, 1)
    if n_img != n_lab:
        raise DataFormatError(
            f"image count {n_img} does not match label count {n_lab}"
        )
    d = rows * cols
    if len(pixels) != n_img * d:
        raise DataFormatError(f"{images_path}: truncated pixel payload")
    if len(labels) != n_lab:
        raise DataFormatError(f"{labels_path}: truncated label payload")

    X = np.frombuffer(pixels, dtype=np.uint8).reshape(n_img, d).astype(np.float64)
    X /= 255.0
    y = np.frombuffer(labels, dtype=np.uint8).astype(np.int64)
    return Dataset(X, y, np.zeros(d), np.ones(d))


def load_cifar10_binary(batch_paths) -> Dataset:
    """Load CIFAR-10 binary batches ([1 label byte][3072 pixel bytes] records)."""
    feats = []
    labs = []
    d = CIFAR_RECORD_BYTES - 1
    for path in batch_paths:
        with open(path, "rb") as fh:
            payload = fh.read()
        if len(payload) == 0 or len(payload) % CIFAR_RECORD_BYTES != 0:
            raise DataFormatError(f"{path}: truncated record (length {len(payload)})")
        records = np.frombuffer(payload, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
        batch_labels = records[:, 0]
        if (batch_labels > 9).any():
            raise DataFormatError(f"{path}: label byte > 9")
        labs.append(batch_labels.astype(np.int64))
        feats.append(records[:, 1:].astype(np.float64) / 255.0)
    X = np.concatenate(feats)
    y = np.concatenate(labs)
    return Dataset(X, y, np.zeros(d), np.ones(d))


def make_gaussian_2d(n_per_class, mean_a, mean_b, sigma, seed) -> Dataset:
    """Two isotropic 2-D Gaussian classes (labels 0 and 1).

    Box bounds are the empirical per-dimension min/max padded by 3 sigma.
    """
    if n_per_class <= 0:
        raise ValueError("n_per_class must be positive")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    a = rng.normal(loc=mean_a, scale=sigma, size=(n_per_class, 2))
    b = rng.normal(loc=mean_b, scale=sigma, size=(n_per_class, 2))
    X = np.concatenate([a, b])
    y = np.concatenate(
        [np.zeros(n_per_class, dtype=np.int64), np.ones(n_per_class, dtype=np.int64)]
    )
    lb = X.min(axis=0) - 3.0 * sigma
    ub = X.max(axis=0) + 3.0 * sigma
    return Dataset(X, y, lb, ub)


def filter_and_split(source: Dataset, spec: SplitSpec):
    """Filter to the requested classes and draw disjoint train/val/test sets.

    Sampling is uniform without replacement over the union of the requested
    classes, reproducible from the seed. Labels are remapped to 0..C-1 in
    ``spec.classes`` order; the mapping is recorded on each returned dataset.
    """
    mask = np.isin(source.labels, spec.classes)
    pool = np.flatnonzero(mask)
    total = spec.n_train + spec.n_val + spec.n_test
    if pool.size < total:
        raise ValueError(
            f"insufficient samples: need {total}, found {pool.size} "
            f"for classes {spec.classes}"
        )
    rng = np.random.default_rng(spec.seed)
    chosen = pool[rng.permutation(pool.size)[:total]]
    class_map = {int(c): i for i, c in enumerate(spec.classes)}
    remap = np.vectorize(class_map.__getitem__)

    def build(idx):
        return Dataset(
            source.features[idx],
            remap(source.labels[idx]),
            source.lower_bound,
            source.upper_bound,
            class_map,
        )

    train = build(chosen[: spec.n_train])
    val = build(chosen[spec.n_train : spec.n_train + spec.n_val])
    test = build(chosen[spec.n_train + spec.n_val :])
    return train, val, test
