import json

import numpy as np
from joblib import Parallel, delayed
from scipy import sparse

from lexclass.errors import ModelError
from lexclass.logger import logger
from lexclass.strategies import (
    DEFAULT_THRESHOLD,
    ClassCatalog,
    MtsCatalog,
    bts_decode,
    bts_encode,
    build_class_catalog,
    build_mts_catalog,
    mts_decode,
    mts_encode,
)
from lexclass.trees import DecisionTree, Hyperparams, fit_tree
from lexclass.utils import atomic_write
from lexclass.utils.hash import fingerprint

STRATEGIES = ("bts", "mts")
MODEL_FORMAT = "lexclass-model"
MODEL_VERSION = 1

# What each variant does with "auto" settings, and what it always forces.
VARIANTS = {
    "rf": {"auto": {"max_features": "sqrt", "bootstrap": True}, "forced": {"splitter": "best"}},
    "eetc": {"auto": {"max_features": "sqrt", "bootstrap": False}, "forced": {"splitter": "random"}},
    "etc": {"auto": {"max_features": "sqrt", "bootstrap": False}, "forced": {"n_estimators": 1}},
    "dt": {"auto": {"max_features": None, "bootstrap": False}, "forced": {"n_estimators": 1}},
}


def resolve_hyperparams(variant, hyperparams):
    """Concrete hyperparameters for 'variant': fill "auto" settings, apply forced ones."""
    if variant not in VARIANTS:
        raise ModelError(f"Unknown model variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    rules = VARIANTS[variant]
    changes = dict(rules["forced"])
    if hyperparams.max_features == "auto":
        changes["max_features"] = rules["auto"]["max_features"]
    if hyperparams.bootstrap is None:
        changes["bootstrap"] = rules["auto"]["bootstrap"]
    return hyperparams.replace(**changes)


def _fit_one(X, y, n_classes, hyperparams, seed):
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, X.shape[0], X.shape[0]) if hyperparams.bootstrap else None
    return fit_tree(X, y, hyperparams.replace(seed=seed), n_classes, rng, indices)


def fit_forest(X, y, n_classes, hyperparams, seed_offset=0, n_jobs=1):
    """Fit `hyperparams.n_estimators` trees on integer targets; tree t gets seed `seed + offset + t`."""
    seeds = [hyperparams.seed + seed_offset + t for t in range(hyperparams.n_estimators)]
    return Parallel(n_jobs=n_jobs)(delayed(_fit_one)(X, y, n_classes, hyperparams, s) for s in seeds)


def forest_importances(trees):
    importances = np.mean([tree.feature_importances() for tree in trees], axis=0)
    total = importances.sum()
    return importances / total if total > 0 else importances


def _dense(X):
    if sparse.issparse(X):
        return X.toarray().astype(float)
    return np.asarray(X, dtype=float)


class EnsembleModel:
    """Fitted forests plus everything needed to decode their output.

    MTS models hold one forest over the combination classes; BTS models hold
    one binary forest per catalog class.
    """

    def __init__(self, variant, strategy, hyperparams, columns, class_catalog, mts_catalog, forests, threshold=DEFAULT_THRESHOLD):
        self.variant = variant
        self.strategy = strategy
        self.hyperparams = hyperparams
        self.columns = list(columns)
        self.class_catalog = class_catalog
        self.mts_catalog = mts_catalog
        self.forests = forests
        self.threshold = threshold

    @property
    def trees(self):
        return [tree for forest in self.forests for tree in forest]

    @property
    def n_outputs(self):
        return self.mts_catalog.p if self.strategy == "mts" else self.class_catalog.m

    def align(self, X, columns=None):
        """Dense rows in model column order.

        Args:
            X: Array or sparse matrix, or an object with `X` and `columns`
                (a FeatureMatrix).
            columns (list[str], optional): Column names of 'X'. When omitted
                and 'X' carries none, 'X' must already be in model order.
        """
        if hasattr(X, "columns") and hasattr(X, "X"):
            X, columns = X.X, X.columns
        X = _dense(X)
        if X.ndim == 1:
            X = X[None, :]
        if columns is None:
            if X.shape[1] != len(self.columns):
                raise ModelError(f"Model expects {len(self.columns)} columns, got {X.shape[1]}")
            return X
        position = {name: i for i, name in enumerate(columns)}
        missing = [c for c in self.columns if c not in position]
        if missing:
            raise ModelError(f"Missing feature column {missing[0]!r}")
        return X[:, [position[c] for c in self.columns]]

    def predict_proba(self, X, columns=None):
        """Mean over trees of the leaf class distributions.

        Returns:
            np.ndarray: n × p class probabilities (MTS, rows sum to 1) or
                n × m positive-class probabilities (BTS).
        """
        X = self.align(X, columns)
        if self.strategy == "mts":
            return np.mean([tree.predict_proba(X) for tree in self.forests[0]], axis=0)
        return np.column_stack(
            [np.mean([tree.predict_proba(X)[:, 1] for tree in forest], axis=0) for forest in self.forests]
        )

    def decide(self, proba):
        """Label sets from a probability matrix."""
        if self.strategy == "mts":
            # argmax returns the first maximum: lowest class index on ties.
            return [frozenset(mts_decode(j + 1, self.mts_catalog)) for j in np.argmax(proba, axis=1)]
        return [bts_decode(row, self.class_catalog, self.threshold) for row in proba]

    def predict(self, X, columns=None):
        return self.decide(self.predict_proba(X, columns))

    def feature_importances(self):
        """Per-column impurity-decrease importance, averaged over trees, summing to 1."""
        return forest_importances(self.trees)

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "variant": self.variant,
            "strategy": self.strategy,
            "hyperparams": self.hyperparams.to_dict(),
            "threshold": self.threshold,
            "columns": self.columns,
            "class_catalog": self.class_catalog.to_list(),
            "mts_catalog": self.mts_catalog.to_list(),
            "forests": [[tree.to_dict() for tree in forest] for forest in self.forests],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != MODEL_FORMAT:
            raise ModelError("Not a model artifact")
        if data.get("version") != MODEL_VERSION:
            raise ModelError(f"Unsupported model version {data.get('version')!r}")
        return cls(
            variant=data["variant"],
            strategy=data["strategy"],
            hyperparams=Hyperparams.from_dict(data["hyperparams"]),
            columns=data["columns"],
            class_catalog=ClassCatalog.from_list(data["class_catalog"]),
            mts_catalog=MtsCatalog.from_list(data["mts_catalog"]),
            forests=[[DecisionTree.from_dict(t) for t in forest] for forest in data["forests"]],
            threshold=data["threshold"],
        )

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


def fit_ensemble(X, label_sets, hyperparams, variant="rf", strategy="mts", columns=None,
                 class_catalog=None, mts_catalog=None, threshold=DEFAULT_THRESHOLD, n_jobs=1):
    """Fit a tree ensemble under one label strategy.

    - rf: bootstrap resamples, √(#features) candidates per split, exhaustive
      thresholds.
    - eetc: full sample, √(#features) candidates, random thresholds.
    - etc: one tree, √(#features) candidates.
    - dt: one tree, every feature.
    Tree t uses seed `hyperparams.seed + t`, counted across the per-class
    forests of a BTS model.

    Args:
        X: Documents × features (dense or scipy.sparse).
        label_sets (list[frozenset]): Annotated label set per document.
        hyperparams (Hyperparams): Growth parameters.
        variant (str, optional): rf, eetc, etc or dt. Defaults to "rf".
        strategy (str, optional): mts or bts. Defaults to "mts".
        columns (list[str], optional): Feature names. Defaults to f0, f1, ...
        class_catalog (ClassCatalog, optional), mts_catalog (MtsCatalog, optional):
            Catalogs to encode against, built from 'label_sets' when omitted.
        threshold (float, optional): BTS decision threshold. Defaults to 0.5.
        n_jobs (int, optional): joblib workers for tree fitting. Defaults to 1.

    Returns:
        EnsembleModel
    """
    if strategy not in STRATEGIES:
        raise ModelError(f"Unknown strategy {strategy!r}; expected bts or mts")
    X = _dense(X)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ModelError("Cannot fit a model on empty data")
    if len(label_sets) != X.shape[0]:
        raise ModelError(f"Got {X.shape[0]} rows but {len(label_sets)} label sets")
    columns = list(columns) if columns is not None else [f"f{i}" for i in range(X.shape[1])]
    if len(columns) != X.shape[1]:
        raise ModelError(f"Got {X.shape[1]} columns but {len(columns)} column names")

    hp = resolve_hyperparams(variant, hyperparams)
    class_catalog = class_catalog if class_catalog is not None else build_class_catalog(label_sets)
    mts_catalog = mts_catalog if mts_catalog is not None else build_mts_catalog(label_sets)
    n_est = hp.n_estimators

    if strategy == "mts":
        _, alpha = mts_encode(label_sets, mts_catalog)
        jobs = [(alpha - 1, mts_catalog.p, hp.seed + t) for t in range(n_est)]
    else:
        beta = bts_encode(label_sets, class_catalog)
        jobs = []
        for j in range(class_catalog.m):
            if not beta[:, j].any():
                logger.warning(f"Class {class_catalog[j].key!r} has no positive training document")
            y = beta[:, j].astype(np.int64)
            jobs.extend((y, 2, hp.seed + j * n_est + t) for t in range(n_est))

    trees = Parallel(n_jobs=n_jobs)(delayed(_fit_one)(X, y, k, hp, seed) for y, k, seed in jobs)
    forests = [trees[i : i + n_est] for i in range(0, len(trees), n_est)]
    logger.info(
        f"Fitted {variant.upper()}-{strategy.upper()}: {len(forests)} forest(s) of {n_est} tree(s), "
        f"{X.shape[0]} documents, {X.shape[1]} features"
    )
    return EnsembleModel(variant, strategy, hp, columns, class_catalog, mts_catalog, forests, threshold)


def save_model(model, file_path):
    """Write the model artifact atomically; returns its content fingerprint."""
    text = model.dumps()
    atomic_write(file_path, text)
    digest = fingerprint(text)
    logger.info(f"Saved model to '{file_path}' ({digest})")
    return digest


def load_model(file_path):
    try:
        with open(file_path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ModelError(f"Model file not found: {file_path}")
    except json.JSONDecodeError as e:
        raise ModelError(f"{file_path}: not a valid model artifact ({e.msg})")
    return EnsembleModel.from_dict(data)
