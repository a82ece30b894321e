"""Run configuration: line-oriented ``key = value`` files with a closed schema.

Files contain one ``key = value`` assignment per line; ``#`` starts a
comment and blank lines are ignored.  Unknown keys are rejected, every value
is validated, and command-line flags override file values.  All randomness in
every command flows from the ``seed`` key.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .classifier import TrainConfig
from .corpus import DEFAULT_PERTURBATIONS, PerturbSpec, SynthConfig
from .errors import ConfigError, DomainError
from .lga import LgaConfig
from .lvp import LvpWeights

_DEFAULT_PERTURB_TEXT = ",".join(spec.label for spec in DEFAULT_PERTURBATIONS)


@dataclass(frozen=True)
class RunConfig:
    """Typed view of every configurable key."""

    seed: int = 0
    operator: str = "sobel"
    sigma: float = 1.0
    epsilon: float = 1e-6
    padding: str = "reflect"
    lvp_weights: str = "pow2"
    learning_rate: float = 0.0002
    batch_size: int = 32
    epochs: int = 40
    count: int = 200
    size: int = 64
    smooth_sigma: float = 1.5
    texture_mix: float = 0.5
    split_fraction: float = 0.8
    jpeg_quality: int = 75
    threshold: float = 0.5
    perturbations: str = _DEFAULT_PERTURB_TEXT
    corpus_dir: str = "corpus"
    features_dir: str = "features"
    out_dir: str = "runs"
    manifest: str = ""
    checkpoint: str = ""

    def manifest_path(self) -> str:
        return self.manifest or f"{self.corpus_dir}/manifest.csv"

    def checkpoint_path(self) -> str:
        return self.checkpoint or f"{self.out_dir}/model.ckpt"

    def lga_config(self) -> LgaConfig:
        return LgaConfig(
            operator=self.operator,
            sigma=self.sigma,
            epsilon=self.epsilon,
            padding=self.padding,
        )

    def lvp_weights_obj(self) -> LvpWeights:
        if self.lvp_weights == "pow2":
            return LvpWeights.default()
        return LvpWeights.random(self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
        )

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            count=self.count,
            size=self.size,
            seed=self.seed,
            smooth_sigma=self.smooth_sigma,
            texture_mix=self.texture_mix,
        )

    def perturb_specs(self) -> list[PerturbSpec]:
        specs = []
        for token in self.perturbations.split(","):
            token = token.strip()
            if token:
                specs.append(PerturbSpec.parse(token))
        return specs

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_INT_KEYS = {"seed", "batch_size", "epochs", "count", "size", "jpeg_quality"}
_FLOAT_KEYS = {
    "sigma",
    "epsilon",
    "learning_rate",
    "smooth_sigma",
    "texture_mix",
    "split_fraction",
    "threshold",
}
_STR_KEYS = {
    "operator",
    "padding",
    "lvp_weights",
    "perturbations",
    "corpus_dir",
    "features_dir",
    "out_dir",
    "manifest",
    "checkpoint",
}
SCHEMA_KEYS = tuple(sorted(_INT_KEYS | _FLOAT_KEYS | _STR_KEYS))

_CHOICES = {
    "operator": ("sobel", "roberts"),
    "padding": ("reflect", "zero", "replicate"),
    "lvp_weights": ("pow2", "random"),
}


def _convert(key: str, text: str):
    try:
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {text!r}") from exc


def parse_config_file(path) -> dict:
    """Read raw key/value strings from a config file, rejecting unknown keys."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in SCHEMA_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = value
    return values


def resolve_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, file values and overrides into a validated RunConfig."""
    merged: dict = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if key not in SCHEMA_KEYS:
                raise ConfigError(f"unknown key {key!r}")
            merged[key] = _convert(key, value) if isinstance(value, str) else value
    cfg = RunConfig(**merged)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    for key, choices in _CHOICES.items():
        if getattr(cfg, key) not in choices:
            raise ConfigError(f"key {key!r} must be one of {choices}, got {getattr(cfg, key)!r}")
    try:
        cfg.lga_config()
        cfg.train_config()
        cfg.synth_config()
        specs = cfg.perturb_specs()
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if not specs:
        raise ConfigError("perturbations must list at least one spec")
    if not 0 < cfg.split_fraction < 1:
        raise ConfigError(f"split_fraction must lie in (0, 1), got {cfg.split_fraction}")
    if not 1 <= cfg.jpeg_quality <= 100:
        raise ConfigError(f"jpeg_quality must lie in [1, 100], got {cfg.jpeg_quality}")
