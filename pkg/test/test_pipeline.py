import logging

import pytest

from lexclass import main
from lexclass.errors import ConfigError, CorpusError, ExplainError, FeatureError, ModelError
from lexclass.explain import Explanation
from lexclass.features import CATEGORICAL_PREFIX
from lexclass.pipeline import Pipeline, load_pipeline, prepare_documents, save_pipeline


@pytest.fixture(scope="module")
def fitted(prepared, small_config):
    pipeline, digest = main.train(small_config, prepared)
    assert digest is None
    return pipeline


def test__prepared_documents(prepared, synthetic_corpus):
    assert [d.id for d in prepared] == [d.id for d in synthetic_corpus]
    first = prepared[0]
    assert "@Judge" in first.text
    assert all("@" not in token for token in first.tokens)
    assert "judge" in first.tokens.tokens
    assert first.tokens.source_id == first.id
    assert first.label_set == synthetic_corpus[0].label_set


def test__prepare_without_anonymisation(synthetic_corpus, resources):
    prepared = prepare_documents(synthetic_corpus.subset(range(3)), resources, anonymise=False)
    assert [d.text for d in prepared] == [d.raw_text for d in synthetic_corpus.subset(range(3))]
    # Entities are read from the raw text either way.
    anonymised = prepare_documents(synthetic_corpus.subset(range(3)), resources)
    assert [d.entities for d in prepared] == [d.entities for d in anonymised]


def test__fitted_pipeline(fitted, prepared):
    assert fitted.fitted
    matrix = fitted.transform(prepared)
    assert list(matrix.columns) == fitted.model.columns
    assert matrix.shape == (len(prepared), len(fitted.model.columns))
    assert any(not c.startswith(CATEGORICAL_PREFIX) for c in fitted.model.columns)
    predictions = fitted.predict(prepared)
    assert len(predictions) == len(prepared)
    assert all(1 <= len(z) <= 3 for z in predictions)
    # The training documents are mostly recognised.
    hits = sum(z == d.label_set for z, d in zip(predictions, prepared))
    assert hits / len(prepared) >= 0.6


def test__fit_is_deterministic(fitted, prepared, small_config):
    again = Pipeline(small_config).fit(prepared)
    assert again.dumps() == fitted.dumps()


def test__save_and_load(fitted, prepared, tmp_path):
    file_path = str(tmp_path / "pipeline.json")
    digest = save_pipeline(fitted, file_path)
    assert digest.startswith("sha256:")
    restored = load_pipeline(file_path)
    assert restored.predict(prepared) == fitted.predict(prepared)
    assert save_pipeline(restored, str(tmp_path / "again.json")) == digest


def test__load_errors(tmp_path):
    with pytest.raises(ModelError, match="not found"):
        load_pipeline(str(tmp_path / "missing.json"))
    file_path = tmp_path / "model.json"
    file_path.write_text('{"format": "lexclass-model", "version": 1}', encoding="utf-8")
    with pytest.raises(ModelError, match="Not a pipeline artifact"):
        load_pipeline(str(file_path))


def test__unfitted_pipeline(prepared, small_config):
    pipeline = Pipeline(small_config)
    with pytest.raises(ModelError, match="not fitted"):
        pipeline.predict(prepared[:1])
    with pytest.raises(ModelError, match="without documents"):
        pipeline.fit([])


def test__single_class_skips_importance_selection(prepared, small_config, caplog):
    label_set = prepared[0].label_set
    same = [d for d in prepared if d.label_set == label_set]
    with caplog.at_level(logging.WARNING, logger="lexclass"):
        pipeline = Pipeline(small_config).fit(same)
    assert "Importance selection skipped" in caplog.text
    assert all(not c.startswith(CATEGORICAL_PREFIX) for c in pipeline.model.columns)
    assert pipeline.predict(prepared[:5]) == [label_set] * 5


def test__selection_can_be_disabled(prepared, small_config):
    config = small_config.with_overrides(
        {"selection.correlation_enabled": False, "selection.importance_enabled": False}
    )
    matrix, pipeline = main.featurize(config, prepared)
    assert len(matrix.indices("categorical")) == 7
    assert len(matrix.columns) == len(pipeline.vectorizer.vocabulary) + 7


def test__featurize_with_selection(prepared, small_config):
    matrix, pipeline = main.featurize(small_config, prepared)
    assert len(matrix.columns) < len(pipeline.vectorizer.vocabulary) + 7
    assert pipeline.importances is not None


def test__empty_vocabulary(prepared, small_config):
    # No n-gram can occur in at most 1 and at least 1.35 documents.
    config = small_config.with_overrides({"vectorizer.max_df": 0.01, "vectorizer.min_df": 0.009})
    with pytest.raises(FeatureError):
        main.featurize(config, prepared)


def test__train_writes_artifact(prepared, small_config, tmp_path):
    out = str(tmp_path / "model" / "pipeline.json")
    pipeline, digest = main.train(small_config, prepared, out=out)
    assert digest.startswith("sha256:")
    assert load_pipeline(out).dumps() == pipeline.dumps()


def test__explain_sample(fitted, small_config, synthetic_corpus, resources):
    text, explanation = main.explain_sample(small_config, "5", fitted, synthetic_corpus, resources)
    assert isinstance(explanation, Explanation)
    assert text.startswith("For sample 5 the features' values and model decision are:\n\n- Case type: ")
    assert f"This decision has a confidence of {explanation.confidence}\n" in text
    assert len(explanation.top_terms) <= 7
    assert len(explanation.paths) == len(fitted.model.trees)
    again, _ = main.explain_sample(small_config, 5, fitted, synthetic_corpus, resources)
    assert again == text


def test__explain_unknown_sample(fitted, small_config, synthetic_corpus, resources):
    with pytest.raises(CorpusError, match="No document"):
        main.explain_sample(small_config, "nope", fitted, synthetic_corpus, resources)


def test__export_tree(fitted, small_config):
    source = main.export_tree(small_config, 3, 2, fitted)
    assert source.startswith("// Decision tree\ndigraph tree {")
    with pytest.raises(ExplainError, match="out of range"):
        main.export_tree(small_config, len(fitted.model.trees), pipeline=fitted)
    with pytest.raises(ConfigError, match="--depth"):
        main.export_tree(small_config, 0, -1, fitted)


def test__missing_paths(small_config):
    with pytest.raises(ConfigError, match="paths.corpus: required"):
        main.prepare(small_config)
    with pytest.raises(ConfigError, match="paths.model: required"):
        main.export_tree(small_config)
