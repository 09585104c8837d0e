"""Command-line experiment runner.

Exit codes: 0 success, 2 malformed experiment spec, 3 missing or
unreadable data files.
"""

from __future__ import annotations

import sys

import click

from .experiments import (
    run_ablation_prototypes,
    run_landscape,
    run_poisoning_curve,
    run_timing_comparison,
)
from .presets import DataError, data_dir, missing_files
from .spec import SpecError, load_spec

EXIT_SPEC_ERROR = 2
EXIT_DATA_ERROR = 3


def _handle(exc: Exception):
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, SpecError):
        sys.exit(EXIT_SPEC_ERROR)
    if isinstance(exc, (DataError, FileNotFoundError)):
        sys.exit(EXIT_DATA_ERROR)
    raise exc


def _parse_k(text: str):
    """Accept '2..30' ranges or comma lists like '2,5,10,15,30'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


@click.group()
def main():
    """Poisoning experiment harness for linear classifiers."""


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path())
@click.option("--out", "out_dir", default="results", show_default=True)
@click.option("--data-dir", default=None, help="Dataset root (default: POISON_DATA_DIR).")
@click.option("--no-timing", is_flag=True,
              help="Zero the wall-time columns for byte-identical reruns.")
def run(spec_path, out_dir, data_dir, no_timing):
    """Run an accuracy-vs-poison-fraction sweep from a JSON spec."""
    try:
        spec = load_spec(spec_path)
        results = run_poisoning_curve(spec, out_dir=out_dir, data_dir=data_dir,
                                      record_timing=not no_timing)
    except Exception as exc:
        _handle(exc)
        return
    for reg_c, records in results.items():
        for fraction in spec.fractions:
            accs = [r.accuracy for r in records if r.fraction == fraction]
            mean = sum(accs) / len(accs)
            click.echo(f"C={reg_c:g} fraction={fraction:g} mean_accuracy={mean:.4f}")
    click.echo(f"wrote CSVs to {out_dir}")


@main.command()
@click.option("--spec-a", required=True, type=click.Path())
@click.option("--spec-b", required=True, type=click.Path())
@click.option("--out", "out_dir", default="results", show_default=True)
@click.option("--data-dir", default=None)
def timing(spec_a, spec_b, out_dir, data_dir):
    """Compare attack-generation wall time between two specs."""
    try:
        rows = run_timing_comparison(load_spec(spec_a), load_spec(spec_b),
                                     out_dir=out_dir, data_dir=data_dir)
    except Exception as exc:
        _handle(exc)
        return
    for attack in dict.fromkeys(row["attack"] for row in rows):
        secs = [row["seconds"] for row in rows if row["attack"] == attack]
        mean = sum(secs) / len(secs)
        std = (sum((s - mean) ** 2 for s in secs) / len(secs)) ** 0.5
        click.echo(f"{attack}: {mean:.3f} +/- {std:.3f} s per batch")
    click.echo(f"wrote CSVs to {out_dir}")


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path())
@click.option("--k", "k_text", required=True,
              help="Prototype counts: '2..30' or '2,5,10,15,30'.")
@click.option("--out", "out_dir", default="results", show_default=True)
@click.option("--data-dir", default=None)
def ablate(spec_path, k_text, out_dir, data_dir):
    """Sweep the prototype count k at a fixed ~15% poison budget."""
    try:
        k_values = _parse_k(k_text)
        records = run_ablation_prototypes(load_spec(spec_path), k_values,
                                          out_dir=out_dir, data_dir=data_dir)
    except ValueError as exc:
        _handle(SpecError(f"bad --k value: {exc}"))
        return
    except Exception as exc:
        _handle(exc)
        return
    for k in sorted({r["k"] for r in records}):
        accs = [r["accuracy"] for r in records if r["k"] == k]
        click.echo(f"k={k} mean_surrogate_accuracy={sum(accs) / len(accs):.4f}")
    click.echo(f"wrote CSVs to {out_dir}")


@main.command()
@click.option("--resolution", default=100, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", default="results", show_default=True)
def landscape(resolution, seed, out_dir):
    """Emit bilevel-oracle and KDE loss surfaces on the 2-D Gaussian toy set."""
    try:
        result = run_landscape(resolution, seed=seed, out_dir=out_dir)
    except Exception as exc:
        _handle(exc)
        return
    click.echo(f"surfaces: {resolution}x{resolution}, "
               f"target_class={result['target_class']}, "
               f"poison_label={result['poison_label']}")
    click.echo(f"wrote CSVs to {out_dir}")


@main.group()
def datasets():
    """Dataset utilities."""


@datasets.command("fetch-check")
@click.option("--dir", "dir_path", default=None, help="Dataset root to verify.")
def fetch_check(dir_path):
    """Verify the raw MNIST/CIFAR files are present under the data root."""
    try:
        root = data_dir(dir_path)
    except DataError as exc:
        _handle(exc)
        return
    missing = missing_files(root)
    if missing:
        for rel in missing:
            click.echo(f"missing: {root / rel}", err=True)
        sys.exit(EXIT_DATA_ERROR)
    click.echo(f"all expected data files present under {root}")


if __name__ == "__main__":
    main()
