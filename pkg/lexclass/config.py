"""Declarative run configuration.

A YAML file maps onto `PipelineConfig`; every key is optional and missing
keys take the defaults below. Command-line flags are applied on top with
`with_overrides`.
"""
import dataclasses
from dataclasses import dataclass, field
from os import path

import yaml

from lexclass.errors import ConfigError, FeatureError
from lexclass.features import importance_threshold
from lexclass.logger import logger
from lexclass.trees import Hyperparams
from lexclass.utils import BUNDLED_LEXICA

STRATEGIES = ("bts", "mts")
MODELS = ("dt", "etc", "eetc", "rf")
SCORINGS = (
    "exact_match",
    "accuracy",
    "precision",
    "recall",
    "micro_precision",
    "micro_recall",
    "micro_f",
    "macro_precision",
    "macro_recall",
    "macro_f",
    "hamming_loss",
)

# Selected configuration per (model, strategy).
DEFAULT_HYPERPARAMS = {
    ("etc", "bts"): dict(class_weight=None, criterion="gini", max_depth=100, min_samples_leaf=10, min_samples_split=50, splitter="best", n_estimators=1),
    ("etc", "mts"): dict(class_weight=None, criterion="gini", max_depth=None, min_samples_leaf=1, min_samples_split=100, splitter="best", n_estimators=1),
    ("eetc", "bts"): dict(class_weight="balanced", criterion="entropy", max_depth=500, min_samples_leaf=1, min_samples_split=50, splitter="random", n_estimators=100),
    ("eetc", "mts"): dict(class_weight=None, criterion="gini", max_depth=100, min_samples_leaf=1, min_samples_split=2, splitter="random", n_estimators=100),
    ("dt", "bts"): dict(class_weight=None, criterion="gini", max_depth=500, min_samples_leaf=1, min_samples_split=50, splitter="best", n_estimators=1),
    ("dt", "mts"): dict(class_weight=None, criterion="gini", max_depth=100, min_samples_leaf=1, min_samples_split=50, splitter="best", n_estimators=1),
    ("rf", "bts"): dict(class_weight="balanced", criterion="gini", max_depth=100, min_samples_leaf=1, min_samples_split=50, splitter="best", n_estimators=200),
    ("rf", "mts"): dict(class_weight=None, criterion="gini", max_depth=100, min_samples_leaf=10, min_samples_split=2, splitter="best", n_estimators=200),
}

# Hyperparameter search space; "splitter" only applies to single trees,
# "n_estimators" only to ensembles.
HYPERPARAM_GRID = {
    "hyperparams.class_weight": [None, "balanced"],
    "hyperparams.max_depth": [100, 500, None],
    "hyperparams.min_samples_split": [2, 50, 100],
    "hyperparams.min_samples_leaf": [1, 50, 100],
    "hyperparams.criterion": ["gini", "entropy"],
    "hyperparams.splitter": ["best", "random"],
    "hyperparams.n_estimators": [50, 100, 200],
}

# n-gram search space (27 combinations).
NGRAM_GRID = {
    "vectorizer.max_df": [0.9, 0.7, 0.5],
    "vectorizer.min_df": [0.1, 0.01, 0.001],
    "vectorizer.ngram_range": [(1, 1), (1, 2), (1, 3)],
}


@dataclass(frozen=True)
class PathsConfig:
    corpus: str = None
    lexica: str = None
    output: str = None
    model: str = None

    @property
    def lexica_dir(self):
        return self.lexica or BUNDLED_LEXICA


@dataclass(frozen=True)
class AnonymiserConfig:
    enabled: bool = True
    threshold: float = 0.90


@dataclass(frozen=True)
class VectorizerConfig:
    max_df: float = 0.5
    min_df: float = 0.01
    ngram_range: tuple = (1, 2)


@dataclass(frozen=True)
class SelectionConfig:
    correlation_enabled: bool = True
    correlation_threshold: float = 0.05
    importance_enabled: bool = True
    importance_estimators: int = 20
    importance_threshold: object = "mean"


@dataclass(frozen=True)
class ExplainConfig:
    n_samples: int = 500
    top_terms: int = 7
    kernel_scale: float = 0.75
    surrogate_alpha: float = 1.0
    zero_probability: float = 0.5
    graph_depth: int = 3


@dataclass(frozen=True)
class GridSearchConfig:
    grid: dict = field(default_factory=lambda: dict(NGRAM_GRID))
    scoring: str = "micro_f"
    sample_fraction: float = 0.2


@dataclass(frozen=True)
class SynthConfig:
    n_docs: int = 2000
    n_classes: int = 8
    noise: float = 0.2


@dataclass(frozen=True)
class ReportConfig:
    timings: bool = True


SECTIONS = {
    "paths": PathsConfig,
    "anonymiser": AnonymiserConfig,
    "vectorizer": VectorizerConfig,
    "selection": SelectionConfig,
    "explain": ExplainConfig,
    "gridsearch": GridSearchConfig,
    "synth": SynthConfig,
    "report": ReportConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    anonymiser: AnonymiserConfig = field(default_factory=AnonymiserConfig)
    vectorizer: VectorizerConfig = field(default_factory=VectorizerConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    explain: ExplainConfig = field(default_factory=ExplainConfig)
    gridsearch: GridSearchConfig = field(default_factory=GridSearchConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    report: ReportConfig = field(default_factory=ReportConfig)
    strategy: str = "mts"
    model: str = "rf"
    hyperparams: dict = field(default_factory=dict)
    folds: int = 10
    seed: int = 0
    n_jobs: int = 1
    bts_threshold: float = 0.5

    def __post_init__(self):
        validate(self)

    def resolved_hyperparams(self):
        """Default hyperparameters of (model, strategy), updated with `hyperparams` and the seed."""
        values = dict(DEFAULT_HYPERPARAMS[(self.model, self.strategy)])
        values.update(self.hyperparams)
        values["seed"] = self.seed
        try:
            return Hyperparams(**values)
        except TypeError as e:
            raise ConfigError(f"hyperparams: {e}")
        except ValueError as e:
            raise ConfigError(f"hyperparams.{e}")

    def with_overrides(self, overrides):
        """Copy with dotted-key overrides applied, e.g. {"vectorizer.max_df": 0.7}.

        None values are ignored, except under `hyperparams.` where None is a
        meaningful setting.
        """
        data = to_dict(self)
        for key, value in overrides.items():
            parts = key.split(".")
            if value is None and parts[0] != "hyperparams":
                continue
            target = data
            for part in parts[:-1]:
                if part not in target or not isinstance(target[part], dict):
                    raise ConfigError(f"{key}: unknown configuration field")
                target = target[part]
            if parts[0] != "hyperparams" and parts[-1] not in target:
                raise ConfigError(f"{key}: unknown configuration field")
            target[parts[-1]] = value
        return config_from_dict(data)

    def check_paths(self, *names):
        """Raise ConfigError unless each named `paths.<name>` is set and exists."""
        for name in names:
            value = getattr(self.paths, name)
            if not value:
                raise ConfigError(f"paths.{name}: required for this command")
            if not path.exists(value):
                raise ConfigError(f"paths.{name}: {value} does not exist")


def _fail(field_path, message):
    raise ConfigError(f"{field_path}: {message}")


def _number(field_path, value, lo=None, hi=None, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(field_path, f"expected a number, got {value!r}")
    if integer and not isinstance(value, int):
        _fail(field_path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        _fail(field_path, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        _fail(field_path, f"must be <= {hi}, got {value}")


def _choice(field_path, value, choices):
    if value not in choices:
        _fail(field_path, f"expected one of {', '.join(map(str, choices))}, got {value!r}")


def validate(config):
    """Field-level checks of a whole configuration."""
    _choice("strategy", config.strategy, STRATEGIES)
    _choice("model", config.model, MODELS)
    _number("folds", config.folds, lo=2, integer=True)
    _number("seed", config.seed, lo=0, integer=True)
    _number("n_jobs", config.n_jobs, integer=True)
    if config.n_jobs == 0:
        _fail("n_jobs", "must be a positive worker count or negative (all cores), got 0")
    _number("bts_threshold", config.bts_threshold, lo=0, hi=1)

    v = config.vectorizer
    _number("vectorizer.max_df", v.max_df, lo=0, hi=1)
    _number("vectorizer.min_df", v.min_df, lo=0, hi=1)
    if v.min_df >= v.max_df:
        _fail("vectorizer.min_df", "must be < max_df")
    if len(v.ngram_range) != 2 or not all(isinstance(n, int) for n in v.ngram_range):
        _fail("vectorizer.ngram_range", f"expected two integers, got {v.ngram_range!r}")
    if not 1 <= v.ngram_range[0] <= v.ngram_range[1]:
        _fail("vectorizer.ngram_range", f"need 1 <= lo <= hi, got {tuple(v.ngram_range)}")

    a = config.anonymiser
    _number("anonymiser.threshold", a.threshold, lo=0, hi=1)
    if a.threshold == 0:
        _fail("anonymiser.threshold", "must be > 0")

    s = config.selection
    _number("selection.correlation_threshold", s.correlation_threshold, lo=0)
    _number("selection.importance_estimators", s.importance_estimators, lo=1, integer=True)
    try:
        importance_threshold([1.0], s.importance_threshold)
    except FeatureError as e:
        _fail("selection.importance_threshold", str(e).split(": ", 1)[-1])

    e = config.explain
    _number("explain.n_samples", e.n_samples, lo=10, integer=True)
    _number("explain.top_terms", e.top_terms, lo=1, integer=True)
    _number("explain.kernel_scale", e.kernel_scale, lo=0)
    _number("explain.surrogate_alpha", e.surrogate_alpha, lo=0)
    _number("explain.zero_probability", e.zero_probability, lo=0, hi=1)
    _number("explain.graph_depth", e.graph_depth, lo=0, integer=True)

    g = config.gridsearch
    _choice("gridsearch.scoring", g.scoring, SCORINGS)
    _number("gridsearch.sample_fraction", g.sample_fraction, lo=0, hi=1)
    if g.sample_fraction == 0:
        _fail("gridsearch.sample_fraction", "must be > 0")
    if not isinstance(g.grid, dict) or not g.grid:
        _fail("gridsearch.grid", "expected a nonempty mapping of dotted keys to value lists")
    for key, values in g.grid.items():
        if not isinstance(values, (list, tuple)) or not values:
            _fail(f"gridsearch.grid.{key}", "expected a nonempty list of values")

    y = config.synth
    _number("synth.n_docs", y.n_docs, lo=1, integer=True)
    _number("synth.n_classes", y.n_classes, lo=1, integer=True)
    _number("synth.noise", y.noise, lo=0, hi=1)

    if not isinstance(config.hyperparams, dict):
        _fail("hyperparams", "expected a mapping")
    config.resolved_hyperparams()


def _coerce(section, key, value):
    if key == "ngram_range" and isinstance(value, list):
        return tuple(value)
    if section == "gridsearch" and key == "grid" and isinstance(value, dict):
        return {
            k: [tuple(x) if isinstance(x, list) else x for x in v] if isinstance(v, list) else v
            for k, v in value.items()
        }
    return value


def config_from_dict(data):
    """Build a PipelineConfig from nested plain data, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration: top level must be a mapping")
    top_fields = {f.name for f in dataclasses.fields(PipelineConfig)}
    kwargs = {}
    for key, value in data.items():
        if key not in top_fields:
            raise ConfigError(f"{key}: unknown configuration field")
        if key in SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a mapping")
            section_cls = SECTIONS[key]
            known = {f.name for f in dataclasses.fields(section_cls)}
            for sub in value:
                if sub not in known:
                    raise ConfigError(f"{key}.{sub}: unknown configuration field")
            kwargs[key] = section_cls(**{k: _coerce(key, k, v) for k, v in value.items()})
        elif key == "hyperparams":
            kwargs[key] = dict(value or {})
        else:
            kwargs[key] = value
    return PipelineConfig(**kwargs)


def to_dict(config):
    return dataclasses.asdict(config)


def load_config(file_path=None):
    """Read a YAML configuration file; None gives the defaults."""
    if file_path is None:
        return PipelineConfig()
    if not path.isfile(file_path):
        raise ConfigError(f"--config: file not found: {file_path}")
    with open(file_path, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{file_path}: invalid YAML ({e})")
    config = config_from_dict(data)
    logger.info(f"Loaded configuration from '{file_path}'")
    return config
