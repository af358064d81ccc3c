"""Document-feature matrix and two-stage feature selection.

Textual columns are n-gram counts, categorical columns are integer codes of
the seven judicial entities. Selection keeps categorical columns by Spearman
correlation with the MTS target, and textual columns by forest importance.
"""
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.stats import rankdata
from sklearn.feature_extraction.text import CountVectorizer

from lexclass.ensemble import fit_forest, forest_importances, resolve_hyperparams
from lexclass.entities import ENTITY_FIELDS, UNKNOWN
from lexclass.errors import FeatureError
from lexclass.logger import logger
from lexclass.trees import Hyperparams
from lexclass.utils import atomic_write

TEXTUAL = "textual"
CATEGORICAL = "categorical"
CATEGORICAL_PREFIX = "cat:"
UNKNOWN_CODE = 0
N_BINS = 10


# Vectorizer
# ---------------------------------------------------------------------------- #


def _as_documents(token_streams):
    return [" ".join(stream) for stream in token_streams]


def _count_vectorizer(ngram_range, **kwargs):
    return CountVectorizer(
        tokenizer=str.split,
        token_pattern=None,
        lowercase=False,
        ngram_range=tuple(ngram_range),
        dtype=np.float64,
        **kwargs,
    )


@dataclass(frozen=True)
class VectorizerModel:
    vocabulary: dict
    max_df: float
    min_df: float
    ngram_range: tuple

    @property
    def terms(self):
        """Vocabulary in column order."""
        return sorted(self.vocabulary, key=self.vocabulary.get)

    def to_dict(self):
        return {
            "terms": self.terms,
            "max_df": self.max_df,
            "min_df": self.min_df,
            "ngram_range": list(self.ngram_range),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            vocabulary={term: i for i, term in enumerate(data["terms"])},
            max_df=data["max_df"],
            min_df=data["min_df"],
            ngram_range=tuple(data["ngram_range"]),
        )


def fit_vectorizer(token_streams, max_df=0.5, min_df=0.01, ngram_range=(1, 2)):
    """Learn the n-gram vocabulary of a training corpus.

    N-grams whose document frequency (as a proportion of documents) is above
    'max_df' or below 'min_df' are dropped. Columns are ordered
    lexicographically.

    Raises:
        FeatureError: On invalid bounds or an empty resulting vocabulary.
    """
    lo, hi = ngram_range
    if not 0 <= min_df < max_df <= 1:
        raise FeatureError(f"vectorizer: need 0 <= min_df < max_df <= 1, got min_df={min_df}, max_df={max_df}")
    if not 1 <= lo <= hi:
        raise FeatureError(f"vectorizer: invalid ngram_range {tuple(ngram_range)}")
    vectorizer = _count_vectorizer(ngram_range, max_df=float(max_df), min_df=float(min_df))
    try:
        vectorizer.fit(_as_documents(token_streams))
    except ValueError as e:
        raise FeatureError(f"vectorizer: empty vocabulary ({e})")
    vocabulary = {term: int(i) for term, i in vectorizer.vocabulary_.items()}
    logger.info(f"Vocabulary: {len(vocabulary)} n-grams (range {lo}-{hi}, df in [{min_df}, {max_df}])")
    return VectorizerModel(vocabulary, float(max_df), float(min_df), (lo, hi))


def transform(vectorizer, token_streams):
    """Sparse n-gram counts (documents × vocabulary); unseen n-grams are ignored."""
    cv = _count_vectorizer(vectorizer.ngram_range, vocabulary=vectorizer.vocabulary)
    return cv.transform(_as_documents(token_streams)).tocsr()


# Categorical entities
# ---------------------------------------------------------------------------- #


def fit_category_tables(records):
    """Code tables per entity field: most frequent value gets 1, ties alphabetical.

    'unknown' is never coded; it maps to the reserved code 0.
    """
    tables = {}
    for name in ENTITY_FIELDS:
        counts = Counter(getattr(r, name) for r in records if getattr(r, name) != UNKNOWN)
        ordered = sorted(counts, key=lambda v: (-counts[v], v))
        tables[name] = {value: code for code, value in enumerate(ordered, start=1)}
    return tables


def encode_categoricals(records, tables=None):
    """One integer column per entity field.

    Returns:
        tuple: (np.ndarray, dict) documents × 7 codes and the category tables
            (fitted on 'records' unless given). Unseen values map to 0.
    """
    if tables is None:
        tables = fit_category_tables(records)
    codes = np.array(
        [[tables[name].get(getattr(r, name), UNKNOWN_CODE) for name in ENTITY_FIELDS] for r in records],
        dtype=np.float64,
    ).reshape(len(records), len(ENTITY_FIELDS))
    return codes, tables


def categorical_columns():
    return [CATEGORICAL_PREFIX + name for name in ENTITY_FIELDS]


# Feature matrix
# ---------------------------------------------------------------------------- #


@dataclass(frozen=True)
class FeatureMatrix:
    X: object
    columns: tuple
    kinds: tuple
    ids: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "X", sparse.csr_matrix(self.X, dtype=np.float64))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "ids", tuple(self.ids))
        if len(set(self.columns)) != len(self.columns):
            duplicated = [c for c, n in Counter(self.columns).items() if n > 1]
            raise FeatureError(f"Duplicate feature column {duplicated[0]!r}")
        if not (self.X.shape[1] == len(self.columns) == len(self.kinds)):
            raise FeatureError("Column names and kinds must match the matrix width")
        if self.ids and len(self.ids) != self.X.shape[0]:
            raise FeatureError("Document ids must match the matrix height")

    @property
    def shape(self):
        return self.X.shape

    def indices(self, kind):
        return [j for j, k in enumerate(self.kinds) if k == kind]

    def column(self, name):
        try:
            j = self.columns.index(name)
        except ValueError:
            raise FeatureError(f"No feature column {name!r}")
        return self.X[:, j].toarray().ravel()

    def select(self, indices):
        indices = list(indices)
        return FeatureMatrix(
            self.X[:, indices],
            [self.columns[j] for j in indices],
            [self.kinds[j] for j in indices],
            self.ids,
        )

    def rows(self, indices):
        indices = list(indices)
        ids = [self.ids[i] for i in indices] if self.ids else ()
        return FeatureMatrix(self.X[indices], self.columns, self.kinds, ids)

    def toarray(self):
        return self.X.toarray()


def build_matrix(counts, vectorizer, codes, ids=()):
    """Join n-gram counts and categorical codes into one FeatureMatrix."""
    terms = vectorizer.terms
    X = sparse.hstack([sparse.csr_matrix(counts), sparse.csr_matrix(codes)], format="csr")
    columns = terms + categorical_columns()
    kinds = [TEXTUAL] * len(terms) + [CATEGORICAL] * len(ENTITY_FIELDS)
    return FeatureMatrix(X, columns, kinds, ids)


def _format_value(value):
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def serialize_matrix(matrix):
    """Tab-separated text: a header of column names, a row of kinds, one row per document."""
    ids = matrix.ids or tuple(str(i) for i in range(matrix.shape[0]))
    lines = ["\t".join(("id",) + matrix.columns), "\t".join(("kind",) + matrix.kinds)]
    dense = matrix.toarray()
    for doc_id, row in zip(ids, dense):
        lines.append("\t".join([doc_id] + [_format_value(v) for v in row]))
    return "\n".join(lines) + "\n"


def export_matrix(matrix, file_path):
    atomic_write(file_path, serialize_matrix(matrix))
    logger.info(f"Wrote {matrix.shape[0]}x{matrix.shape[1]} feature matrix to '{file_path}'")
    return file_path


# Rank statistics
# ---------------------------------------------------------------------------- #


def discretize_ranks(values):
    """10-step scale in inverse order of magnitude.

    Values are ranked (average rank for ties), the rank range is cut into 10
    equal-width bins and bin numbers are reversed, so the largest values land
    in bin 1.

    Returns:
        tuple: (np.ndarray, bool) bin per value (1..10) and whether the column
            was constant (then every value is in bin 1).
    """
    values = np.asarray(values, dtype=float)
    ranks = rankdata(values, method="average")
    lo, hi = ranks.min(), ranks.max()
    if hi == lo:
        logger.warning("Constant column: every value placed in a single bin")
        return np.ones(len(values), dtype=np.int64), True
    width = (hi - lo) / N_BINS
    bins = np.minimum(np.floor((ranks - lo) / width).astype(np.int64) + 1, N_BINS)
    return N_BINS + 1 - bins, False


def spearman(x, y):
    """Spearman's rank correlation: covariance of the average ranks over their deviations.

    Raises:
        FeatureError: If the inputs differ in length, have fewer than 2 values
            or either one is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FeatureError(f"spearman: inputs must be two columns of equal length, got {x.shape} and {y.shape}")
    if len(x) < 2:
        raise FeatureError("spearman: need at least 2 values")
    dx = rankdata(x) - (len(x) + 1) / 2.0
    dy = rankdata(y) - (len(y) + 1) / 2.0
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise FeatureError("spearman: undefined for a constant input")
    return float(np.clip(np.dot(dx, dy) / np.sqrt(sxx * syy), -1.0, 1.0))


@dataclass(frozen=True)
class SpearmanEntry:
    r_s: float
    feature_ranks: np.ndarray
    target_ranks: np.ndarray
    kept: bool


@dataclass
class SpearmanReport:
    threshold: float
    entries: dict = field(default_factory=dict)
    constant: list = field(default_factory=list)

    @property
    def correlations(self):
        return {name: e.r_s for name, e in self.entries.items()}

    def format(self):
        """One line per feature, strongest correlation first."""
        ordered = sorted(self.entries.items(), key=lambda kv: (-abs(kv[1].r_s), kv[0]))
        lines = [f"{name}\t{e.r_s:.4f}\t{'kept' if e.kept else 'dropped'}" for name, e in ordered]
        lines += [f"{name}\tconstant\tdropped" for name in self.constant]
        return "\n".join(lines) + "\n"


def select_by_correlation(matrix, target, threshold=0.05, kind=CATEGORICAL):
    """Keep columns of 'kind' with |r_s(discretised column, target)| >= threshold.

    Columns of other kinds pass through. Constant columns are dropped.

    Args:
        matrix (FeatureMatrix): Training matrix.
        target (np.ndarray): MTS integer class per document.
        threshold (float, optional): Defaults to 0.05.
        kind (str, optional): Column kind to filter. Defaults to categorical.

    Returns:
        tuple: (list[int], SpearmanReport) kept column indices in matrix order
            and the per-column report.
    """
    report = SpearmanReport(threshold)
    target_ranks = rankdata(np.asarray(target, dtype=float))
    kept = []
    for j, (name, column_kind) in enumerate(zip(matrix.columns, matrix.kinds)):
        if column_kind != kind:
            kept.append(j)
            continue
        bins, constant = discretize_ranks(matrix.X[:, j].toarray().ravel())
        if constant or np.all(target_ranks == target_ranks[0]):
            report.constant.append(name)
            continue
        r_s = spearman(bins, target)
        keep = abs(r_s) >= threshold
        report.entries[name] = SpearmanEntry(r_s, rankdata(bins), target_ranks, keep)
        if keep:
            kept.append(j)
    n_kind = len(matrix.indices(kind))
    n_kept = sum(1 for j in kept if matrix.kinds[j] == kind)
    logger.info(f"Correlation selection: kept {n_kept} of {n_kind} {kind} features (|r_s| >= {threshold})")
    return kept, report


def importance_threshold(importances, rule="mean"):
    """Cut-off from a rule: "mean", "median", "<k>*mean" or a number."""
    if isinstance(rule, (int, float)) and not isinstance(rule, bool):
        return float(rule)
    rule = str(rule).strip()
    if rule == "mean":
        return float(np.mean(importances))
    if rule == "median":
        return float(np.median(importances))
    if rule.endswith("*mean"):
        try:
            return float(rule[: -len("*mean")]) * float(np.mean(importances))
        except ValueError:
            pass
    raise FeatureError(f"selection.importance_threshold: unknown rule {rule!r}")


def select_by_importance(matrix, labels, n_estimators=20, threshold_rule="mean", seed=0, kind=TEXTUAL, n_jobs=1):
    """Keep columns of 'kind' whose forest importance reaches the threshold.

    A random forest of 'n_estimators' trees is fitted on the 'kind' columns
    only; columns of other kinds pass through.

    Returns:
        tuple: (list[int], np.ndarray) kept column indices in matrix order
            and the importance of each 'kind' column.

    Raises:
        FeatureError: If the labels hold a single class.
    """
    labels = np.asarray(labels)
    classes, y = np.unique(labels, return_inverse=True)
    if len(classes) < 2:
        raise FeatureError("Importance selection needs at least two classes")
    columns = matrix.indices(kind)
    if not columns:
        return list(range(len(matrix.columns))), np.zeros(0)

    hp = resolve_hyperparams("rf", Hyperparams(n_estimators=n_estimators, seed=seed))
    X = matrix.X[:, columns].toarray()
    importances = forest_importances(fit_forest(X, y, len(classes), hp, n_jobs=n_jobs))
    cut = importance_threshold(importances, threshold_rule)
    keep = {columns[i] for i in np.flatnonzero(importances >= cut)}
    kept = [j for j in range(len(matrix.columns)) if matrix.kinds[j] != kind or j in keep]
    logger.info(f"Importance selection: kept {len(keep)} of {len(columns)} {kind} features (>= {cut:.6f})")
    return kept, importances
