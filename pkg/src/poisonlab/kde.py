"""Gaussian kernel density estimate over a target-class sample bank.

The kernel is exp(-||x_q - x||^2 / h) with the bandwidth h used as a plain
divisor of the squared distance. h defaults to the mean Euclidean distance
over all unordered distinct pairs of bank rows; a squared-distance variant
is available as an opt-in sensitivity check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import backends
from .data import Dataset

log = logging.getLogger(__name__)

# Above this many pairs the bandwidth is estimated on a seeded subsample.
MAX_EXACT_PAIRS = 2_000_000
SUBSAMPLE_ROWS = 2000


@dataclass(frozen=True)
class KdeEstimate:
    """Sample bank plus bandwidth for one target class."""

    bank: np.ndarray
    bandwidth: float
    target_class: int

    def __post_init__(self):
        object.__setattr__(self, "bank", np.ascontiguousarray(self.bank, dtype=np.float64))
        if self.bank.ndim != 2 or self.bank.shape[0] < 2:
            raise ValueError("bank must be a matrix with at least two rows")
        if not np.isfinite(self.bank).all():
            raise ValueError("bank rows must be finite")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")

    @property
    def d(self) -> int:
        return self.bank.shape[1]


def compute_bandwidth(bank: np.ndarray, squared: bool = False) -> float:
    """Mean pairwise (optionally squared) Euclidean distance of the bank rows.

    Self-pairs are excluded. Banks with more than MAX_EXACT_PAIRS pairs are
    subsampled to SUBSAMPLE_ROWS rows with a fixed seed; this is logged.
    """
    bank = np.asarray(bank, dtype=np.float64)
    if bank.ndim != 2 or bank.shape[0] < 2:
        raise ValueError("bandwidth needs at least two bank rows")
    if not np.isfinite(bank).all():
        raise ValueError("bank rows must be finite")
    n = bank.shape[0]
    if n * (n - 1) // 2 > MAX_EXACT_PAIRS:
        rng = np.random.default_rng(0)
        keep = rng.choice(n, size=SUBSAMPLE_ROWS, replace=False)
        keep.sort()
        bank = bank[keep]
        log.warning(
            "bandwidth subsampled: %d rows reduced to %d for pairwise distances",
            n, SUBSAMPLE_ROWS,
        )
    if squared:
        h = backends.mean_pairwise_squared_distance(bank)
    else:
        h = backends.mean_pairwise_distance(bank)
    if h <= 0.0:
        raise ValueError("degenerate bandwidth: all bank rows are identical")
    return float(h)


def fit(d_val: Dataset, target_class: int, squared_bandwidth: bool = False) -> KdeEstimate:
    """Build the estimate from the validation samples of ``target_class``."""
    bank = d_val.class_bank(target_class)
    if bank.shape[0] < 2:
        raise ValueError(f"class {target_class} has fewer than two validation samples")
    return KdeEstimate(bank, compute_bandwidth(bank, squared=squared_bandwidth), target_class)


def _check_query(est: KdeEstimate, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (est.d,):
        raise ValueError(f"query must be a {est.d}-vector, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("query must be finite")
    return x


def likelihood(est: KdeEstimate, x) -> float:
    """(1/N) sum_i exp(-||x - x_i||^2 / h), in (0, 1]."""
    return backends.kde_likelihood(est.bank, est.bandwidth, _check_query(est, x))


def likelihood_grad(est: KdeEstimate, x) -> np.ndarray:
    """Gradient of :func:`likelihood` with respect to the query point."""
    _, grad = backends.kde_likelihood_grad(est.bank, est.bandwidth, _check_query(est, x))
    return grad


def likelihood_and_grad(est: KdeEstimate, x):
    return backends.kde_likelihood_grad(est.bank, est.bandwidth, _check_query(est, x))
