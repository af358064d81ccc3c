import pytest

from lexclass.config import (
    DEFAULT_HYPERPARAMS,
    PipelineConfig,
    config_from_dict,
    load_config,
    to_dict,
)
from lexclass.errors import ConfigError


def test__defaults():
    config = PipelineConfig()
    assert (config.strategy, config.model, config.folds, config.seed) == ("mts", "rf", 10, 0)
    assert config.vectorizer.ngram_range == (1, 2)
    assert config.explain.top_terms == 7
    hp = config.resolved_hyperparams()
    assert hp.n_estimators == 200 and hp.min_samples_leaf == 10


@pytest.mark.parametrize("key", sorted(DEFAULT_HYPERPARAMS))
def test__every_default_hyperparameter_set_is_valid(key):
    model, strategy = key
    config = PipelineConfig(model=model, strategy=strategy, seed=5)
    assert config.resolved_hyperparams().seed == 5


def test__load_yaml(tmp_path):
    file_path = tmp_path / "run.yaml"
    file_path.write_text(
        "strategy: bts\n"
        "model: eetc\n"
        "vectorizer:\n"
        "  ngram_range: [1, 3]\n"
        "  max_df: 0.7\n"
        "hyperparams:\n"
        "  n_estimators: 5\n"
        "  max_depth: null\n"
        "gridsearch:\n"
        "  grid:\n"
        "    vectorizer.ngram_range: [[1, 1], [1, 2]]\n",
        encoding="utf-8",
    )
    config = load_config(str(file_path))
    assert config.strategy == "bts"
    assert config.vectorizer.ngram_range == (1, 3)
    assert config.gridsearch.grid == {"vectorizer.ngram_range": [(1, 1), (1, 2)]}
    hp = config.resolved_hyperparams()
    assert hp.n_estimators == 5 and hp.max_depth is None and hp.criterion == "entropy"


def test__load_missing_and_invalid(tmp_path):
    with pytest.raises(ConfigError, match="file not found"):
        load_config(str(tmp_path / "nope.yaml"))
    broken = tmp_path / "broken.yaml"
    broken.write_text("strategy: [mts\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(str(broken))
    assert load_config(None) == PipelineConfig()


@pytest.mark.parametrize(
    "data, message",
    [
        ({"strategy": "ovr"}, "strategy: expected one of bts, mts"),
        ({"model": "svm"}, "model: expected one of"),
        ({"folds": 1}, "folds: must be >= 2"),
        ({"n_jobs": 0}, "n_jobs: must be a positive worker count"),
        ({"vectorizer": {"max_df": 0.01, "min_df": 0.1}}, "vectorizer.min_df: must be < max_df"),
        ({"vectorizer": {"ngram_range": [2, 1]}}, "vectorizer.ngram_range"),
        ({"vectorizer": {"stop_words": "spanish"}}, "vectorizer.stop_words: unknown configuration field"),
        ({"colour": True}, "colour: unknown configuration field"),
        ({"anonymiser": {"threshold": 0}}, "anonymiser.threshold: must be > 0"),
        ({"selection": {"importance_threshold": "max"}}, "selection.importance_threshold: unknown rule"),
        ({"explain": {"n_samples": 5}}, "explain.n_samples: must be >= 10"),
        ({"gridsearch": {"scoring": "auc"}}, "gridsearch.scoring"),
        ({"gridsearch": {"grid": {"vectorizer.max_df": []}}}, "gridsearch.grid.vectorizer.max_df"),
        ({"hyperparams": {"criterion": "log_loss"}}, "hyperparams.criterion"),
        ({"hyperparams": {"depth": 3}}, "hyperparams:"),
        ({"synth": {"noise": 1.5}}, "synth.noise: must be <= 1"),
        ([1, 2], "top level must be a mapping"),
    ],
)
def test__validation_names_the_field(data, message):
    with pytest.raises(ConfigError, match=message.replace(".", r"\.").replace("[", r"\[")):
        config_from_dict(data)


def test__with_overrides():
    config = PipelineConfig().with_overrides(
        {"model": "dt", "seed": None, "vectorizer.max_df": 0.7, "hyperparams.max_depth": None}
    )
    assert config.model == "dt"
    assert config.seed == 0
    assert config.vectorizer.max_df == 0.7
    assert config.hyperparams == {"max_depth": None}
    with pytest.raises(ConfigError, match="vectorizer.maxdf: unknown configuration field"):
        config.with_overrides({"vectorizer.maxdf": 0.1})


def test__to_dict_round_trip():
    config = config_from_dict({"strategy": "bts", "hyperparams": {"n_estimators": 3}})
    assert config_from_dict(to_dict(config)) == config


def test__check_paths(tmp_path):
    config = config_from_dict({"paths": {"corpus": str(tmp_path / "corpus.jsonl")}})
    with pytest.raises(ConfigError, match="does not exist"):
        config.check_paths("corpus")
    with pytest.raises(ConfigError, match="paths.model: required"):
        config.check_paths("model")
