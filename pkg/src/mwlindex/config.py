"""Pipeline configuration: JSON file plus command-line overrides, validated field by field."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .bandindex import INDEX_IDS
from .learn import Family, ModelSpec


class ConfigError(ValueError):
    """One or more configuration fields are invalid; ``errors`` lists them."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


@dataclass
class PreprocessConfig:
    highpass_order: int = 4
    cutoff_hz: float = 1.0
    ica_tol: float = 1e-4
    ica_max_iter: int = 200
    z_threshold: float = 3.0


@dataclass
class IndexConfig:
    window_s: float = 1.0
    indexes: list[str] = field(default_factory=lambda: list(INDEX_IDS))


@dataclass
class FeatureConfig:
    catalog: str | list[str] = "full"
    sampling_rate: float = 1.0


@dataclass
class SelectConfig:
    k_search: bool = True
    k: int | None = None
    search_learner: str = "L-R"
    search_iterations: int = 20
    correlation_threshold: float = 0.5


@dataclass
class MonteCarloConfig:
    iterations: int = 100
    train_fraction: float = 0.7
    datasets: list[str] = field(default_factory=lambda: ["original", "combined"])


@dataclass
class SynthConfig:
    enabled: bool = True
    n_subjects: int = 180


@dataclass
class DemoConfig:
    n_subjects: int = 48
    rating_mode: str = "mixed"
    theta_gain: float = 1.5
    n_samples: int = 19200


def _default_learners():
    return [ModelSpec(f).to_json() for f in Family]


@dataclass
class PipelineConfig:
    manifest: str | None = None
    out: str = "out"
    seed: int = 0
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    bandindex: IndexConfig = field(default_factory=IndexConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    select: SelectConfig = field(default_factory=SelectConfig)
    learners: list[dict] = field(default_factory=_default_learners)
    montecarlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    demo: DemoConfig = field(default_factory=DemoConfig)

    def to_json(self) -> dict:
        return asdict(self)

    def learner_specs(self) -> tuple[ModelSpec, ...]:
        return tuple(ModelSpec.from_json(d) for d in self.learners)

    def datasets(self) -> list[str]:
        ds = list(self.montecarlo.datasets)
        return ds if self.synth.enabled else [d for d in ds if d != "combined"]

    def validate(self) -> None:
        errs = []
        if not isinstance(self.seed, int) or self.seed < 0:
            errs.append(f"seed: must be a non-negative integer, got {self.seed!r}")
        p = self.preprocess
        if p.highpass_order < 1:
            errs.append("preprocess.highpass_order: must be >= 1")
        if p.cutoff_hz <= 0:
            errs.append("preprocess.cutoff_hz: must be > 0")
        if p.ica_tol <= 0:
            errs.append("preprocess.ica_tol: must be > 0")
        if p.ica_max_iter < 1:
            errs.append("preprocess.ica_max_iter: must be >= 1")
        if p.z_threshold <= 0:
            errs.append("preprocess.z_threshold: must be > 0")
        if self.bandindex.window_s <= 0:
            errs.append("bandindex.window_s: must be > 0")
        unknown = [i for i in self.bandindex.indexes if i not in INDEX_IDS]
        if unknown or not self.bandindex.indexes:
            errs.append(f"bandindex.indexes: unknown or empty {unknown}; choose from {list(INDEX_IDS)}")
        if not (self.features.catalog == "full" or isinstance(self.features.catalog, list)):
            errs.append("features.catalog: 'full' or a list of feature names")
        s = self.select
        if s.k is not None and s.k < 1:
            errs.append("select.k: must be >= 1 or null")
        if not s.k_search and s.k is None:
            errs.append("select.k: required when select.k_search is false")
        try:
            Family.parse(s.search_learner)
        except ValueError as e:
            errs.append(f"select.search_learner: {e}")
        if s.search_iterations < 1:
            errs.append("select.search_iterations: must be >= 1")
        if not 0 < s.correlation_threshold <= 1:
            errs.append("select.correlation_threshold: must lie in (0, 1]")
        if not self.learners:
            errs.append("learners: at least one learner is required")
        for i, d in enumerate(self.learners):
            try:
                ModelSpec.from_json(d)
            except (TypeError, ValueError) as e:
                errs.append(f"learners[{i}]: {e}")
        m = self.montecarlo
        if m.iterations < 1:
            errs.append("montecarlo.iterations: must be >= 1")
        if not 0 < m.train_fraction < 1:
            errs.append("montecarlo.train_fraction: must lie in (0, 1)")
        bad = [d for d in m.datasets if d not in ("original", "combined")]
        if bad or not m.datasets:
            errs.append(f"montecarlo.datasets: entries must be 'original' or 'combined', got {m.datasets}")
        if self.synth.n_subjects < 1:
            errs.append("synth.n_subjects: must be >= 1")
        if self.demo.n_subjects < 4:
            errs.append("demo.n_subjects: must be >= 4")
        if self.demo.rating_mode not in ("mixed", "subject"):
            errs.append("demo.rating_mode: 'mixed' or 'subject'")
        if errs:
            raise ConfigError(errs)


_SECTIONS = {f.name: f.type for f in fields(PipelineConfig)}
_SECTION_TYPES = {"preprocess": PreprocessConfig, "bandindex": IndexConfig, "features": FeatureConfig,
                  "select": SelectConfig, "montecarlo": MonteCarloConfig, "synth": SynthConfig,
                  "demo": DemoConfig}


def config_from_dict(d: dict) -> PipelineConfig:
    errs = []
    kwargs: dict[str, Any] = {}
    for key, value in d.items():
        if key not in _SECTIONS:
            errs.append(f"{key}: unknown field")
        elif key in _SECTION_TYPES:
            cls = _SECTION_TYPES[key]
            known = {f.name for f in fields(cls)}
            extra = set(value) - known if isinstance(value, dict) else None
            if extra is None:
                errs.append(f"{key}: must be an object")
            elif extra:
                errs.extend(f"{key}.{k}: unknown field" for k in sorted(extra))
            else:
                kwargs[key] = cls(**value)
        else:
            kwargs[key] = value
    if errs:
        raise ConfigError(errs)
    return PipelineConfig(**kwargs)


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        d = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError([f"config: file not found: {path}"]) from None
    except json.JSONDecodeError as e:
        raise ConfigError([f"config: not valid JSON ({e})"]) from None
    return config_from_dict(d)


def apply_override(cfg: PipelineConfig, assignment: str) -> PipelineConfig:
    """Apply ``section.field=value``; the value is parsed as JSON, falling back to a plain string."""
    if "=" not in assignment:
        raise ConfigError([f"override {assignment!r}: expected key=value"])
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    d = copy.deepcopy(cfg.to_json())
    parts = key.strip().split(".")
    node = d
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ConfigError([f"{key}: unknown field"])
        node = node[p]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigError([f"{key}: unknown field"])
    node[parts[-1]] = value
    return config_from_dict(d)


def save_config(cfg: PipelineConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_json(), indent=1, sort_keys=True) + "\n")
