"""Experiment harness: presets, spec documents, runners and the CLI."""

from .experiments import (
    RunRecord,
    run_ablation_prototypes,
    run_landscape,
    run_poisoning_curve,
    run_timing_comparison,
)
from .presets import PRESETS, DataError, load_preset
from .spec import ExperimentSpec, SpecError, load_spec, spec_from_dict

__all__ = [
    "DataError",
    "ExperimentSpec",
    "PRESETS",
    "RunRecord",
    "SpecError",
    "load_preset",
    "load_spec",
    "run_ablation_prototypes",
    "run_landscape",
    "run_poisoning_curve",
    "run_timing_comparison",
    "spec_from_dict",
]
