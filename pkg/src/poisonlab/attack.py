"""Availability poisoning by KDE-likelihood ascent over prototype coefficients.

A poison point is parameterized as x_p = sum_i beta_i * s_i over k randomly
drawn target-class prototypes, so only the k coefficients are optimized.
The ascent maximizes the target-class KDE likelihood at clip(x_p) under the
feature box constraint; coordinates whose unclipped value lies strictly
outside the box contribute zero gradient.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import backends, kde
from .data import Dataset

DEFAULT_ALPHA = 0.01
DEFAULT_STOP_THRESHOLD = 1e-05
DEFAULT_MAX_ITERS = 5000


def default_prototype_count(d: int) -> int:
    """15 prototypes for up to 1000 features, 30 beyond that."""
    return 15 if d <= 1000 else 30


@dataclass(frozen=True)
class AttackConfig:
    k: int | None = None  # None: resolved from the feature count
    alpha: float = DEFAULT_ALPHA
    stop_threshold: float = DEFAULT_STOP_THRESHOLD
    max_iters: int = DEFAULT_MAX_ITERS
    lower_bound: np.ndarray | None = None  # None: taken from the dataset
    upper_bound: np.ndarray | None = None
    seed: int = 0
    squared_bandwidth: bool = False

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.stop_threshold <= 0:
            raise ValueError("stop_threshold must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.lower_bound is not None and self.upper_bound is not None:
            lb = np.asarray(self.lower_bound, dtype=np.float64)
            ub = np.asarray(self.upper_bound, dtype=np.float64)
            if (lb > ub).any():
                raise ValueError("lower_bound must not exceed upper_bound")
            object.__setattr__(self, "lower_bound", lb)
            object.__setattr__(self, "upper_bound", ub)

    def resolve(self, dataset: Dataset) -> "AttackConfig":
        """Fill in dataset-dependent defaults (k and the box bounds)."""
        k = self.k if self.k is not None else default_prototype_count(dataset.d)
        lb = self.lower_bound if self.lower_bound is not None else dataset.lower_bound
        ub = self.upper_bound if self.upper_bound is not None else dataset.upper_bound
        return replace(self, k=k, lower_bound=lb, upper_bound=ub)


@dataclass(frozen=True)
class PrototypeSet:
    prototypes: np.ndarray  # (k, d)
    source_indices: np.ndarray  # positions in the source validation set


@dataclass(frozen=True)
class PointTelemetry:
    iterations: int
    final_likelihood: float
    initial_likelihood: float
    bandwidth: float
    hit_iter_cap: bool
    wall_time: float
    prototype_indices: np.ndarray


@dataclass(frozen=True)
class PoisonBatch:
    """Crafted poison points with assigned labels and per-point telemetry."""

    points: np.ndarray  # (m, d)
    labels: np.ndarray  # assigned poison labels y_p
    target_classes: np.ndarray  # the class y_t whose density each point climbed
    telemetry: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=np.float64)))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "target_classes", np.asarray(self.target_classes, dtype=np.int64))

    @property
    def m(self) -> int:
        return self.labels.shape[0]

    def to_csv(self, path) -> None:
        """``y_t,y_p,iters,final_p,f0..f{d-1}`` rows, one per poison point."""
        d = self.points.shape[1]
        header = "y_t,y_p,iters,final_p," + ",".join(f"f{i}" for i in range(d))
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for i in range(self.m):
                iters = self.telemetry[i].iterations if self.telemetry else 0
                final_p = self.telemetry[i].final_likelihood if self.telemetry else float("nan")
                row = ",".join(f"{v:.17g}" for v in self.points[i])
                fh.write(f"{self.target_classes[i]},{self.labels[i]},{iters},{final_p:.17g},{row}\n")


def psi(beta: np.ndarray, prototypes: np.ndarray) -> np.ndarray:
    """Linear combination sum_i beta_i * prototype_i."""
    beta = np.asarray(beta, dtype=np.float64)
    prototypes = np.atleast_2d(np.asarray(prototypes, dtype=np.float64))
    if beta.shape[0] != prototypes.shape[0]:
        raise ValueError(
            f"beta length {beta.shape[0]} does not match prototype count {prototypes.shape[0]}"
        )
    return beta @ prototypes


def clip(x: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Elementwise min(max(x, lb), ub)."""
    return np.minimum(np.maximum(x, lb), ub)


def sample_prototypes(d_val: Dataset, y_t: int, k: int, rng: np.random.Generator) -> PrototypeSet:
    """Draw k distinct samples of class y_t from the validation set."""
    candidates = np.flatnonzero(d_val.labels == y_t)
    if candidates.size < k:
        raise ValueError(
            f"class {y_t} has {candidates.size} validation samples, need {k} prototypes"
        )
    chosen = rng.choice(candidates, size=k, replace=False)
    return PrototypeSet(d_val.features[chosen], chosen)


def run_beta_poisoning(d_val: Dataset, y_t: int, cfg: AttackConfig):
    """Craft one poison point by likelihood ascent (returns point, telemetry).

    Draws a fresh prototype set, initializes beta i.i.d. uniform on [0, 1],
    and iterates clip/evaluate/update until two consecutive likelihoods
    differ by at most the stop threshold or the iteration cap is reached.
    """
    cfg = cfg.resolve(d_val)
    n_class = int((d_val.labels == y_t).sum())
    if n_class < max(cfg.k, 2):
        raise ValueError(
            f"class {y_t} has {n_class} validation samples, need at least {max(cfg.k, 2)}"
        )
    start = time.perf_counter()
    est = kde.fit(d_val, y_t, squared_bandwidth=cfg.squared_bandwidth)
    rng = np.random.default_rng(cfg.seed)
    protos = sample_prototypes(d_val, y_t, cfg.k, rng)
    beta0 = rng.uniform(0.0, 1.0, size=cfg.k)

    beta, iterations, final_p, initial_p, hit_cap = backends.beta_ascent(
        protos.prototypes, est.bank, est.bandwidth,
        cfg.lower_bound, cfg.upper_bound,
        beta0, cfg.alpha, cfg.stop_threshold, cfg.max_iters,
    )
    point = clip(psi(beta, protos.prototypes), cfg.lower_bound, cfg.upper_bound)
    telemetry = PointTelemetry(
        iterations=iterations,
        final_likelihood=final_p,
        initial_likelihood=initial_p,
        bandwidth=est.bandwidth,
        hit_iter_cap=hit_cap,
        wall_time=time.perf_counter() - start,
        prototype_indices=protos.source_indices,
    )
    return point, telemetry


def _draw_labels(classes: np.ndarray, rng: np.random.Generator, label_policy):
    if label_policy == "random":
        y_t = int(rng.choice(classes))
        others = classes[classes != y_t]
        y_p = int(others[0]) if others.size == 1 else int(rng.choice(others))
        return y_t, y_p
    try:
        y_t, y_p = label_policy
    except (TypeError, ValueError):
        raise ValueError(f"label_policy must be 'random' or a (y_t, y_p) pair, got {label_policy!r}")
    if y_t == y_p:
        raise ValueError("poison label must differ from the target class")
    return int(y_t), int(y_p)


def generate_poison_batch(d_val: Dataset, m: int, cfg: AttackConfig,
                          label_policy="random") -> PoisonBatch:
    """Craft m poison points independently, reproducibly from cfg.seed.

    Per point: draw y_t uniformly over the available classes and y_p
    uniformly over the remaining ones (the opposite class when binary),
    then run the likelihood ascent with a derived per-point seed.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    cfg = cfg.resolve(d_val)
    classes = d_val.classes
    counts = {int(c): int((d_val.labels == c).sum()) for c in classes}
    short = [c for c, n in counts.items() if n < cfg.k]
    if short:
        raise ValueError(f"classes {short} have fewer than k={cfg.k} validation samples")

    master = np.random.default_rng(cfg.seed)
    point_seeds = master.integers(0, 2**63 - 1, size=m)
    points = np.empty((m, d_val.d))
    y_ps = np.empty(m, dtype=np.int64)
    y_ts = np.empty(m, dtype=np.int64)
    telemetry = []
    for i in range(m):
        y_t, y_p = _draw_labels(classes, master, label_policy)
        point, tele = run_beta_poisoning(d_val, y_t, replace(cfg, seed=int(point_seeds[i])))
        points[i] = point
        y_ts[i] = y_t
        y_ps[i] = y_p
        telemetry.append(tele)
    return PoisonBatch(points, y_ps, y_ts, tuple(telemetry))
