"""Experiment specification documents (JSON, strict field validation)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .presets import PRESETS

MODELS = {"svm": "hinge", "logreg": "logistic"}
ATTACKS = ("beta", "labelflip", "bilevel")

# keys accepted inside the attack_config object, per attack kind
_BETA_KEYS = {"k", "alpha", "stop_threshold", "max_iters", "squared_bandwidth"}
_BILEVEL_KEYS = {"step_size", "max_outer_iters", "retrain_tol"}
_SPEC_KEYS = {
    "preset", "model", "reg_c", "attack", "fractions",
    "repetitions", "attack_config", "seed",
}


class SpecError(ValueError):
    """Raised when an experiment spec document is malformed."""


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: dataset preset, model family, attack, sweep grid."""

    preset: str
    model: str
    reg_c: tuple
    attack: str
    fractions: tuple
    repetitions: int = 5
    attack_config: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise SpecError(f"unknown preset {self.preset!r}")
        if self.model not in MODELS:
            raise SpecError(f"model must be one of {sorted(MODELS)}, got {self.model!r}")
        if self.attack not in ATTACKS:
            raise SpecError(f"attack must be one of {ATTACKS}, got {self.attack!r}")
        reg_c = tuple(float(c) for c in self.reg_c)
        if not reg_c or any(c <= 0 for c in reg_c):
            raise SpecError("reg_c must be a non-empty list of positive values")
        object.__setattr__(self, "reg_c", reg_c)
        fractions = tuple(float(f) for f in self.fractions)
        if not fractions or any(f < 0 or f > 0.5 for f in fractions):
            raise SpecError("fractions must be a non-empty list within [0, 0.5]")
        object.__setattr__(self, "fractions", fractions)
        if self.repetitions < 1:
            raise SpecError("repetitions must be at least 1")
        allowed = _BETA_KEYS if self.attack == "beta" else (
            _BILEVEL_KEYS if self.attack == "bilevel" else set())
        extra = set(self.attack_config) - allowed
        if extra:
            raise SpecError(
                f"attack_config keys {sorted(extra)} are not valid for attack "
                f"{self.attack!r} (allowed: {sorted(allowed)})"
            )

    @property
    def loss_kind(self) -> str:
        return MODELS[self.model]


def spec_from_dict(doc: dict) -> ExperimentSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    missing = {"preset", "model", "reg_c", "attack", "fractions"} - set(doc)
    if missing:
        raise SpecError(f"missing spec keys: {sorted(missing)}")
    try:
        return ExperimentSpec(**doc)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(str(exc)) from exc


def load_spec(path) -> ExperimentSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file {path} is not valid JSON: {exc}") from exc
    return spec_from_dict(doc)
