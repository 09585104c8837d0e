"""Experiment runners: poisoning curves, timing, ablation, loss landscapes.

Every runner is a pure function of its spec (plus wall-clock timing
fields, which can be suppressed for byte-identical reproducibility
checks). Results are returned as records and optionally written to CSV.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__, kde
from ..attack import AttackConfig, PoisonBatch, generate_poison_batch
from ..baselines import (
    BilevelConfig,
    GridOracleSpec,
    bilevel_grid_oracle,
    bilevel_poison_batch,
    label_flip_attack,
)
from ..data import Dataset
from ..models import accuracy, train, train_multiclass_ovr
from .presets import (
    GAUSS2D_MEAN_A,
    GAUSS2D_MEAN_B,
    GAUSS2D_SIGMA,
    load_preset,
)
from .spec import ExperimentSpec, SpecError

ABLATION_FRACTION = 0.15


@dataclass(frozen=True)
class RunRecord:
    """One (fraction, repetition) cell of an experiment sweep."""

    reg_c: float
    fraction: float
    count: int
    repetition: int
    accuracy: float
    attack_seconds: float
    train_seconds: float
    bandwidth: float
    seed: int
    version: str = __version__


def _rep_seeds(master_seed: int, repetitions: int) -> np.ndarray:
    return np.random.default_rng(master_seed).integers(0, 2**31 - 1, size=repetitions)


def _poisoned_dataset(d_tr: Dataset, batch: PoisonBatch) -> Dataset:
    """Append the poison rows; the box grows to cover them if needed."""
    lb = np.minimum(d_tr.lower_bound, batch.points.min(axis=0))
    ub = np.maximum(d_tr.upper_bound, batch.points.max(axis=0))
    return Dataset(
        np.vstack([d_tr.features, batch.points]),
        np.concatenate([d_tr.labels, batch.labels]),
        lb, ub, dict(d_tr.class_map),
    )


def _craft_batch(spec: ExperimentSpec, d_tr: Dataset, d_val: Dataset,
                 m: int, reg_c: float, rep_seed: int) -> PoisonBatch:
    if spec.attack == "beta":
        cfg = AttackConfig(seed=rep_seed, lower_bound=d_tr.lower_bound,
                           upper_bound=d_tr.upper_bound, **spec.attack_config)
        return generate_poison_batch(d_val, m, cfg)
    if spec.attack == "labelflip":
        return label_flip_attack(d_val, m, rep_seed)
    cfg = BilevelConfig(step_size=spec.attack_config.get("step_size", 10.0),
                        max_outer_iters=spec.attack_config.get("max_outer_iters", 100),
                        retrain_tol=spec.attack_config.get("retrain_tol", 1e-8),
                        lower_bound=d_tr.lower_bound, upper_bound=d_tr.upper_bound,
                        seed=rep_seed)
    return bilevel_poison_batch(d_tr, d_val, m, cfg, spec.loss_kind, reg_c)


def _fit(dataset: Dataset, loss_kind: str, reg_c: float):
    if dataset.classes.size > 2:
        return train_multiclass_ovr(dataset, loss_kind, reg_c), None
    return train(dataset, loss_kind, reg_c)


def _batch_bandwidth(batch: PoisonBatch) -> float:
    for tele in batch.telemetry:
        h = getattr(tele, "bandwidth", None)
        if h is not None:
            return float(h)
    return float("nan")


def run_poisoning_curve(spec: ExperimentSpec, out_dir=None, data_dir=None,
                        record_timing: bool = True) -> dict:
    """Accuracy-vs-poison-fraction sweep; returns {reg_c: [RunRecord, ...]}.

    For each repetition the data is re-split with a derived seed, m =
    round(fraction * n_train) poison points are crafted from the validation
    set, the model is retrained on the union, and test accuracy recorded.
    With ``record_timing=False`` the wall-time fields are written as zero so
    repeated runs produce byte-identical CSVs.
    """
    seeds = _rep_seeds(spec.seed, spec.repetitions)
    results = {}
    for reg_c in spec.reg_c:
        records = []
        for rep in range(spec.repetitions):
            rep_seed = int(seeds[rep])
            d_tr, d_val, d_test = load_preset(spec.preset, rep_seed, data_dir)
            for fraction in spec.fractions:
                m = int(round(fraction * d_tr.n))
                if m == 0:
                    batch = None
                    attack_dt = 0.0
                    bandwidth = float("nan")
                    poisoned = d_tr
                else:
                    t0 = time.perf_counter()
                    batch = _craft_batch(spec, d_tr, d_val, m, reg_c, rep_seed)
                    attack_dt = time.perf_counter() - t0
                    bandwidth = _batch_bandwidth(batch)
                    poisoned = _poisoned_dataset(d_tr, batch)
                t0 = time.perf_counter()
                model, _ = _fit(poisoned, spec.loss_kind, reg_c)
                train_dt = time.perf_counter() - t0
                acc = accuracy(model, d_test)
                records.append(RunRecord(
                    reg_c=reg_c, fraction=fraction, count=m, repetition=rep,
                    accuracy=acc,
                    attack_seconds=attack_dt if record_timing else 0.0,
                    train_seconds=train_dt if record_timing else 0.0,
                    bandwidth=bandwidth, seed=rep_seed,
                ))
        results[reg_c] = records
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_curve_csv(records, out / f"curve_c{reg_c:g}.csv")
            write_summary_csv(records, out / f"summary_c{reg_c:g}.csv")
    return results


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_curve_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write("fraction,repetition,accuracy,attack_seconds,train_seconds,h\n")
        for r in records:
            fh.write(f"{r.fraction:g},{r.repetition},{_fmt(r.accuracy)},"
                     f"{r.attack_seconds:.6f},{r.train_seconds:.6f},{_fmt(r.bandwidth)}\n")


def write_summary_csv(records, path) -> None:
    fractions = sorted({r.fraction for r in records})
    with open(path, "w") as fh:
        fh.write("fraction,acc_mean,acc_std,time_mean,time_std\n")
        for f in fractions:
            accs = np.array([r.accuracy for r in records if r.fraction == f])
            times = np.array([r.attack_seconds for r in records if r.fraction == f])
            fh.write(f"{f:g},{_fmt(accs.mean())},{_fmt(accs.std())},"
                     f"{times.mean():.6f},{times.std():.6f}\n")


def run_timing_comparison(spec_a: ExperimentSpec, spec_b: ExperimentSpec,
                          out_dir=None, data_dir=None) -> list:
    """Attack-generation wall time for two specs sharing a poison budget.

    Only the batch-crafting call is timed; splitting, training and
    evaluation are excluded. Returns a list of per-repetition row dicts.
    """
    if spec_a.preset != spec_b.preset or spec_a.model != spec_b.model:
        raise SpecError("timing specs must share the dataset preset and model")
    if spec_a.fractions != spec_b.fractions or spec_a.repetitions != spec_b.repetitions:
        raise SpecError("timing specs have mismatched budgets")
    fraction = spec_a.fractions[-1]
    rows = []
    for spec in (spec_a, spec_b):
        seeds = _rep_seeds(spec.seed, spec.repetitions)
        reg_c = spec.reg_c[0]
        for rep in range(spec.repetitions):
            rep_seed = int(seeds[rep])
            d_tr, d_val, _ = load_preset(spec.preset, rep_seed, data_dir)
            m = int(round(fraction * d_tr.n))
            if m == 0:
                raise SpecError("timing requires a positive poison budget")
            t0 = time.perf_counter()
            _craft_batch(spec, d_tr, d_val, m, reg_c, rep_seed)
            rows.append({"attack": spec.attack, "repetition": rep, "count": m,
                         "seconds": time.perf_counter() - t0})
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "timing.csv", "w") as fh:
            fh.write("attack,repetition,count,seconds\n")
            for row in rows:
                fh.write(f"{row['attack']},{row['repetition']},{row['count']},"
                         f"{row['seconds']:.6f}\n")
    return rows


def run_ablation_prototypes(spec: ExperimentSpec, k_values, out_dir=None,
                            data_dir=None, record_timing: bool = True) -> list:
    """Sweep the prototype count k at a fixed ~15% poison budget.

    Reports accuracy on the attacker's surrogate (validation) set per k.
    Only meaningful for the prototype attack.
    """
    k_values = list(k_values)
    if not k_values or any(k < 1 for k in k_values):
        raise SpecError("k values must be a non-empty list of positive counts")
    if spec.attack != "beta":
        raise SpecError("the prototype ablation only applies to attack 'beta'")
    seeds = _rep_seeds(spec.seed, spec.repetitions)
    reg_c = spec.reg_c[0]
    records = []
    for k in k_values:
        for rep in range(spec.repetitions):
            rep_seed = int(seeds[rep])
            d_tr, d_val, _ = load_preset(spec.preset, rep_seed, data_dir)
            m = int(round(ABLATION_FRACTION * d_tr.n))
            cfg_kwargs = dict(spec.attack_config)
            cfg_kwargs["k"] = int(k)
            cfg = AttackConfig(seed=rep_seed, lower_bound=d_tr.lower_bound,
                               upper_bound=d_tr.upper_bound, **cfg_kwargs)
            t0 = time.perf_counter()
            batch = generate_poison_batch(d_val, m, cfg)
            attack_dt = time.perf_counter() - t0
            model, _ = _fit(_poisoned_dataset(d_tr, batch), spec.loss_kind, reg_c)
            records.append({
                "k": int(k), "repetition": rep, "count": m,
                "accuracy": accuracy(model, d_val),
                "attack_seconds": attack_dt if record_timing else 0.0,
                "h": _batch_bandwidth(batch),
                "degenerate_k1": k == 1,
            })
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "ablation.csv", "w") as fh:
            fh.write("k,repetition,count,accuracy,attack_seconds,h\n")
            for r in records:
                fh.write(f"{r['k']},{r['repetition']},{r['count']},"
                         f"{_fmt(r['accuracy'])},{r['attack_seconds']:.6f},{_fmt(r['h'])}\n")
        with open(out / "ablation_summary.csv", "w") as fh:
            fh.write("k,acc_mean,acc_std\n")
            for k in sorted({r["k"] for r in records}):
                accs = np.array([r["accuracy"] for r in records if r["k"] == k])
                fh.write(f"{k},{_fmt(accs.mean())},{_fmt(accs.std())}\n")
    return records


def run_landscape(resolution: int, seed: int = 0, out_dir=None,
                  n_per_class: int = 30, sigma: float = GAUSS2D_SIGMA,
                  reg_c: float = 1.0, y_p: int = 0) -> dict:
    """Two loss surfaces over the same 2-D grid plus the clean boundary.

    Surface one retrains the classifier for every grid cell used as a
    poison point (exhaustive bilevel objective); surface two evaluates the
    target-class KDE likelihood. Both are resolution x resolution.
    """
    from ..data import make_gaussian_2d

    d_tr = make_gaussian_2d(n_per_class, GAUSS2D_MEAN_A, GAUSS2D_MEAN_B, sigma, seed)
    d_val = make_gaussian_2d(100, GAUSS2D_MEAN_A, GAUSS2D_MEAN_B, sigma, seed + 1)
    grid = GridOracleSpec(resolution, d_tr.lower_bound, d_tr.upper_bound)
    xs, ys = grid.axes()

    oracle = bilevel_grid_oracle(d_tr, d_val, y_p, grid, "logistic", reg_c)
    target = int(d_tr.classes[d_tr.classes != y_p][0])
    est = kde.fit(d_val, target)
    kde_surface = np.empty_like(oracle)
    for i, gx in enumerate(xs):
        for j, gy in enumerate(ys):
            kde_surface[i, j] = kde.likelihood(est, np.array([gx, gy]))

    clean_model, _ = train(d_tr, "logistic", reg_c)
    result = {
        "axis0": xs, "axis1": ys,
        "bilevel_surface": oracle, "kde_surface": kde_surface,
        "target_class": target, "poison_label": y_p,
        "clean_weights": clean_model.weights[0], "clean_bias": float(clean_model.bias[0]),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, surface in (("landscape_bilevel.csv", oracle),
                              ("landscape_kde.csv", kde_surface)):
            with open(out / name, "w") as fh:
                fh.write("x0,x1,loss\n")
                for i, gx in enumerate(xs):
                    for j, gy in enumerate(ys):
                        fh.write(f"{_fmt(gx)},{_fmt(gy)},{_fmt(surface[i, j])}\n")
        with open(out / "landscape_model.json", "w") as fh:
            json.dump({"weights": result["clean_weights"].tolist(),
                       "bias": result["clean_bias"],
                       "target_class": target, "poison_label": y_p}, fh)
    return result
