"""Preprocessing and the fitted featurise → select → classify chain."""
import json
from dataclasses import dataclass

import numpy as np

from lexclass.anonymiser import AnonymiserLexica, anonymize_corpus
from lexclass.config import PipelineConfig, config_from_dict, to_dict
from lexclass.ensemble import EnsembleModel, fit_ensemble
from lexclass.entities import EntityRecord, LegalLexica, extract_entities
from lexclass.errors import DocumentError, FeatureError, LexclassError, ModelError
from lexclass.features import (
    SpearmanEntry,
    SpearmanReport,
    VectorizerModel,
    build_matrix,
    encode_categoricals,
    fit_vectorizer,
    select_by_correlation,
    select_by_importance,
    transform,
)
from lexclass.logger import logger
from lexclass.strategies import mts_encode
from lexclass.text import TextProcessor, TokenStream
from lexclass.utils import atomic_write
from lexclass.utils.hash import fingerprint

PIPELINE_FORMAT = "lexclass-pipeline"
PIPELINE_VERSION = 1


@dataclass(frozen=True)
class Resources:
    legal: LegalLexica
    anonymiser: AnonymiserLexica
    text: TextProcessor


def load_resources(lexica_dir):
    """Load every lexicon from one directory."""
    return Resources(
        legal=LegalLexica.from_directory(lexica_dir),
        anonymiser=AnonymiserLexica.from_directory(lexica_dir),
        text=TextProcessor.from_directory(lexica_dir),
    )


@dataclass(frozen=True)
class PreparedDocument:
    """A judgement after entity detection, anonymisation and text processing."""

    id: str
    entities: EntityRecord
    text: str
    tokens: TokenStream
    label_set: frozenset


def prepare_documents(corpus, resources, anonymise=True, threshold=0.90):
    """Entities from the raw text, then anonymisation, then text processing.

    Raises:
        DocumentError: Naming the document whose processing failed.
    """
    records = []
    for doc in corpus:
        try:
            records.append(extract_entities(doc, resources.legal))
        except LexclassError as e:
            raise DocumentError(doc.id, e)

    if anonymise:
        corpus, _ = anonymize_corpus(corpus, resources.anonymiser, threshold)

    prepared = []
    for doc, record in zip(corpus, records):
        try:
            tokens = resources.text.process(doc.raw_text, doc.id)
        except LexclassError as e:
            raise DocumentError(doc.id, e)
        prepared.append(PreparedDocument(doc.id, record, doc.raw_text, tokens, doc.label_set))
    logger.info(f"Prepared {len(prepared)} documents")
    return prepared


def prepare_corpus(corpus, resources, config):
    return prepare_documents(
        corpus, resources, config.anonymiser.enabled, config.anonymiser.threshold
    )


class Pipeline:
    """Vectorizer, category tables, selected columns and the tree ensemble.

    Args:
        config (PipelineConfig): Vectorizer, selection, strategy, model and
            hyperparameter settings.
    """

    def __init__(self, config=None):
        self.config = config or PipelineConfig()
        self.vectorizer = None
        self.category_tables = None
        self.model = None
        self.spearman = None
        self.importances = None

    @property
    def fitted(self):
        return self.model is not None

    def _full_matrix(self, prepared):
        counts = transform(self.vectorizer, [d.tokens for d in prepared])
        codes, _ = encode_categoricals([d.entities for d in prepared], self.category_tables)
        return build_matrix(counts, self.vectorizer, codes, [d.id for d in prepared])

    def fit_features(self, prepared):
        """Fit the vectorizer, category tables and both selection stages.

        Returns:
            tuple: (FeatureMatrix, MtsCatalog) the selected training matrix and
                the combination catalog of 'prepared'.
        """
        if not prepared:
            raise ModelError("Cannot fit a pipeline without documents")
        cfg = self.config
        v = cfg.vectorizer
        self.vectorizer = fit_vectorizer([d.tokens for d in prepared], v.max_df, v.min_df, v.ngram_range)
        _, self.category_tables = encode_categoricals([d.entities for d in prepared])
        matrix = self._full_matrix(prepared)
        mts_catalog, alpha = mts_encode([d.label_set for d in prepared])

        s = cfg.selection
        self.spearman = SpearmanReport(s.correlation_threshold)
        if s.correlation_enabled:
            kept, self.spearman = select_by_correlation(matrix, alpha, s.correlation_threshold)
            matrix = matrix.select(kept)
        if s.importance_enabled:
            if mts_catalog.p < 2:
                logger.warning("Importance selection skipped: training documents hold a single class")
            else:
                kept, self.importances = select_by_importance(
                    matrix, alpha, s.importance_estimators, s.importance_threshold, cfg.seed, n_jobs=cfg.n_jobs
                )
                matrix = matrix.select(kept)
        if not matrix.columns:
            raise FeatureError("Feature selection removed every column")
        logger.info(f"Selected {len(matrix.columns)} feature columns")
        return matrix, mts_catalog

    def fit(self, prepared, class_catalog=None):
        """Fit every stage on the training documents only.

        Args:
            prepared (list[PreparedDocument]): Training documents.
            class_catalog (ClassCatalog, optional): Class space of a BTS model.
                Defaults to the classes of 'prepared'.
        """
        matrix, mts_catalog = self.fit_features(prepared)
        cfg = self.config
        self.model = fit_ensemble(
            matrix.X,
            [d.label_set for d in prepared],
            cfg.resolved_hyperparams(),
            variant=cfg.model,
            strategy=cfg.strategy,
            columns=matrix.columns,
            class_catalog=class_catalog,
            mts_catalog=mts_catalog,
            threshold=cfg.bts_threshold,
            n_jobs=cfg.n_jobs,
        )
        return self

    def transform(self, prepared):
        """FeatureMatrix restricted to the model's columns, in model order."""
        self._check_fitted()
        full = self._full_matrix(prepared)
        position = {name: j for j, name in enumerate(full.columns)}
        return full.select([position[c] for c in self.model.columns])

    def rows(self, prepared):
        """Dense model-ordered feature rows."""
        return self.transform(prepared).toarray()

    def predict_proba(self, prepared):
        return self.model.predict_proba(self.rows(prepared))

    def predict(self, prepared):
        return self.model.decide(self.predict_proba(prepared))

    def _check_fitted(self):
        if not self.fitted:
            raise ModelError("Pipeline is not fitted")

    def to_dict(self):
        self._check_fitted()
        return {
            "format": PIPELINE_FORMAT,
            "version": PIPELINE_VERSION,
            "config": to_dict(self.config),
            "vectorizer": self.vectorizer.to_dict(),
            "category_tables": self.category_tables,
            "spearman": dict(sorted(self.spearman.correlations.items())),
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != PIPELINE_FORMAT:
            raise ModelError("Not a pipeline artifact")
        if data.get("version") != PIPELINE_VERSION:
            raise ModelError(f"Unsupported pipeline version {data.get('version')!r}")
        pipeline = cls(config_from_dict(data["config"]))
        pipeline.vectorizer = VectorizerModel.from_dict(data["vectorizer"])
        pipeline.category_tables = data["category_tables"]
        threshold = pipeline.config.selection.correlation_threshold
        pipeline.spearman = SpearmanReport(
            threshold,
            {
                name: SpearmanEntry(r_s, np.zeros(0), np.zeros(0), abs(r_s) >= threshold)
                for name, r_s in data.get("spearman", {}).items()
            },
        )
        pipeline.model = EnsembleModel.from_dict(data["model"])
        return pipeline

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


def save_pipeline(pipeline, file_path):
    """Write the pipeline artifact atomically; returns its sha256 fingerprint."""
    text = pipeline.dumps()
    atomic_write(file_path, text)
    digest = fingerprint(text)
    logger.info(f"Saved pipeline to '{file_path}' ({digest})")
    return digest


def load_pipeline(file_path):
    try:
        with open(file_path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ModelError(f"Pipeline file not found: {file_path}")
    except json.JSONDecodeError as e:
        raise ModelError(f"{file_path}: not a valid pipeline artifact ({e.msg})")
    pipeline = Pipeline.from_dict(data)
    logger.info(f"Loaded {pipeline.model.variant.upper()}-{pipeline.model.strategy.upper()} pipeline from '{file_path}'")
    return pipeline


def label_array(prepared):
    """MTS integer target of prepared documents (for stratification)."""
    return mts_encode([d.label_set for d in prepared])[1]


def subset(prepared, indices):
    return [prepared[i] for i in indices]
