"""Example-based multi-label metrics, cross-validation and grid search.

L is the list of annotated label sets, Z the list of predicted ones.
"""
import itertools
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from lexclass.errors import MetricError
from lexclass.logger import logger
from lexclass.pipeline import Pipeline, label_array, subset
from lexclass.strategies import build_class_catalog

METRICS = (
    "exact_match",
    "accuracy",
    "precision",
    "recall",
    "hamming_loss",
    "micro_precision",
    "micro_recall",
    "micro_f",
    "macro_precision",
    "macro_recall",
    "macro_f",
)

# Lower is better for these scores.
MINIMISED = ("hamming_loss",)


def _check(L, Z):
    if len(L) != len(Z):
        raise MetricError(f"Got {len(L)} annotated and {len(Z)} predicted label sets")
    if len(L) == 0:
        raise MetricError("Metrics need at least one document")
    return [frozenset(l) for l in L], [frozenset(z) for z in Z]


def exact_match(L, Z):
    L, Z = _check(L, Z)
    return sum(l == z for l, z in zip(L, Z)) / len(L)


def ml_accuracy(L, Z):
    L, Z = _check(L, Z)
    total = 0.0
    for i, (l, z) in enumerate(zip(L, Z)):
        union = l | z
        if not union:
            raise MetricError(f"Document {i}: both label sets are empty")
        total += len(l & z) / len(union)
    return total / len(L)


def ml_precision(L, Z):
    L, Z = _check(L, Z)
    total = 0.0
    for i, (l, z) in enumerate(zip(L, Z)):
        if not z:
            raise MetricError(f"Document {i}: empty predicted label set")
        total += len(l & z) / len(z)
    return total / len(L)


def ml_recall(L, Z):
    L, Z = _check(L, Z)
    total = 0.0
    for i, (l, z) in enumerate(zip(L, Z)):
        if not l:
            raise MetricError(f"Document {i}: empty annotated label set")
        total += len(l & z) / len(l)
    return total / len(L)


def _check_catalog(sets, catalog):
    for labels in sets:
        for label in labels:
            if label not in catalog:
                raise MetricError(f"Label {label.key!r} is not in the class catalog")


def hamming_loss(L, Z, catalog):
    """Symmetric difference of annotated and predicted sets over m·n."""
    L, Z = _check(L, Z)
    if len(catalog) == 0:
        raise MetricError("Hamming loss needs a nonempty class catalog")
    _check_catalog(L, catalog)
    _check_catalog(Z, catalog)
    return sum(len(l ^ z) for l, z in zip(L, Z)) / (len(catalog) * len(L))


def _ratio(num, den):
    return num / den if den > 0 else 0.0


def _f(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def micro_macro_prf(L, Z, catalog, skip_absent=True):
    """Micro and macro precision, recall and F-measure over the catalog classes.

    Micro sums true/false positives and false negatives over classes before
    dividing; macro averages per-class ratios (an undefined ratio counts as 0).
    With 'skip_absent', classes with no annotated document are left out of
    the macro average.

    Returns:
        dict: micro_precision, micro_recall, micro_f, macro_precision,
            macro_recall, macro_f.
    """
    L, Z = _check(L, Z)
    _check_catalog(L, catalog)
    _check_catalog(Z, catalog)
    index = {label: j for j, label in enumerate(catalog)}
    m = len(index)
    tp, fp, fn = np.zeros(m), np.zeros(m), np.zeros(m)
    for l, z in zip(L, Z):
        for label in l & z:
            tp[index[label]] += 1
        for label in z - l:
            fp[index[label]] += 1
        for label in l - z:
            fn[index[label]] += 1

    micro_p = _ratio(tp.sum(), tp.sum() + fp.sum())
    micro_r = _ratio(tp.sum(), tp.sum() + fn.sum())

    classes = [j for j in range(m) if not skip_absent or tp[j] + fn[j] > 0]
    p = [_ratio(tp[j], tp[j] + fp[j]) for j in classes]
    r = [_ratio(tp[j], tp[j] + fn[j]) for j in classes]
    f = [_f(pj, rj) for pj, rj in zip(p, r)]
    mean = (lambda values: float(np.mean(values))) if classes else (lambda values: 0.0)
    return {
        "micro_precision": micro_p,
        "micro_recall": micro_r,
        "micro_f": _f(micro_p, micro_r),
        "macro_precision": mean(p),
        "macro_recall": mean(r),
        "macro_f": mean(f),
    }


def score_all(L, Z, catalog, skip_absent=True):
    """Every metric of one prediction run."""
    scores = {
        "exact_match": exact_match(L, Z),
        "accuracy": ml_accuracy(L, Z),
        "precision": ml_precision(L, Z),
        "recall": ml_recall(L, Z),
        "hamming_loss": hamming_loss(L, Z, catalog),
    }
    scores.update(micro_macro_prf(L, Z, catalog, skip_absent))
    return scores


@dataclass
class MetricsReport:
    strategy: str = ""
    model: str = ""
    exact_match: float = 0.0
    accuracy: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    hamming_loss: float = 0.0
    micro_precision: float = 0.0
    micro_recall: float = 0.0
    micro_f: float = 0.0
    macro_precision: float = 0.0
    macro_recall: float = 0.0
    macro_f: float = 0.0
    train_seconds: float = 0.0
    folds: list = field(default_factory=list)

    @classmethod
    def from_folds(cls, folds, strategy="", model=""):
        """Means over folds; `train_seconds` is the total."""
        report = cls(strategy=strategy, model=model, folds=list(folds))
        for name in METRICS:
            setattr(report, name, float(np.mean([f[name] for f in folds])))
        report.train_seconds = float(sum(f.get("train_seconds", 0.0) for f in folds))
        return report

    def score(self, scoring):
        """Value to maximise for 'scoring' (minimised metrics are negated)."""
        if scoring not in METRICS:
            raise MetricError(f"Unknown scoring {scoring!r}")
        value = getattr(self, scoring)
        return -value if scoring in MINIMISED else value

    def to_dict(self):
        return asdict(self)


# Cross-validation
# ---------------------------------------------------------------------------- #


def assign_folds(targets, k, seed=0):
    """Fold number per document, stratified by class.

    Documents of each class (in class order) are shuffled with the seed and
    dealt round-robin with a counter running across classes, so every class
    is spread over the folds as far as its support allows and fold sizes
    differ by at most one.
    """
    targets = np.asarray(targets)
    n = len(targets)
    if k < 2:
        raise MetricError(f"folds: need at least 2, got {k}")
    if n < k:
        raise MetricError(f"folds: {k} folds need at least {k} documents, got {n}")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    counter = 0
    for cls in np.unique(targets):
        members = rng.permutation(np.flatnonzero(targets == cls))
        for i in members:
            folds[i] = counter % k
            counter += 1
    return folds


def cross_validate(prepared, config, k=None, seed=None, skip_absent=True):
    """k-fold cross-validation of the whole pipeline.

    Documents are preprocessed once by the caller; the vectorizer, the
    selection and the model are fitted per fold on the training split only.

    Args:
        prepared (list[PreparedDocument]): Preprocessed corpus.
        config (PipelineConfig): Pipeline settings.
        k (int, optional): Number of folds. Defaults to `config.folds`.
        seed (int, optional): Fold assignment seed. Defaults to `config.seed`.
        skip_absent (bool, optional): Macro averaging skips classes absent
            from a test fold. Defaults to True.

    Returns:
        MetricsReport: Per-fold scores and their means.
    """
    k = k or config.folds
    seed = config.seed if seed is None else seed
    catalog = build_class_catalog([d.label_set for d in prepared])
    folds = assign_folds(label_array(prepared), k, seed)

    results = []
    for fold in range(k):
        train_idx = np.flatnonzero(folds != fold)
        test_idx = np.flatnonzero(folds == fold)
        train, test = subset(prepared, train_idx), subset(prepared, test_idx)
        seen = {label for d in train for label in d.label_set}
        for label in sorted({label for d in test for label in d.label_set} - seen):
            logger.warning(f"Fold {fold + 1}/{k}: class {label.key!r} has no training document")

        start = time.perf_counter()
        pipeline = Pipeline(config).fit(train, class_catalog=catalog)
        train_seconds = time.perf_counter() - start

        Z = pipeline.predict(test)
        scores = score_all([d.label_set for d in test], Z, catalog, skip_absent)
        scores["train_seconds"] = train_seconds
        results.append(scores)
        logger.info(
            f"Fold {fold + 1}/{k}: exact match {scores['exact_match']:.4f}, "
            f"micro F {scores['micro_f']:.4f}, HL {scores['hamming_loss']:.4f}"
        )
    return MetricsReport.from_folds(results, config.strategy, config.model)


# Grid search
# ---------------------------------------------------------------------------- #


@dataclass
class GridSearchResult:
    best_params: dict
    best_score: float
    results: list

    def format(self):
        lines = []
        for params, score in self.results:
            marker = "*" if params == self.best_params else " "
            settings = ", ".join(f"{k}={v}" for k, v in params.items())
            lines.append(f"{marker} {score:.4f}\t{settings}")
        return "\n".join(lines) + "\n"


def grid_combinations(grid):
    """Cartesian product of a {dotted key: values} grid, in grid order."""
    keys = list(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[key] for key in keys))]


def sample_slice(prepared, fraction, seed=0):
    """Seeded subset of 'fraction' of the documents (original order kept)."""
    if fraction >= 1:
        return list(prepared)
    n = max(1, int(round(fraction * len(prepared))))
    chosen = np.sort(np.random.default_rng(seed).permutation(len(prepared))[:n])
    return subset(prepared, chosen)


def grid_search(prepared, config, grid=None, k=None, scoring=None, sample_fraction=None):
    """Exhaustive search over a parameter grid with cross-validation.

    Args:
        prepared (list[PreparedDocument]): Preprocessed corpus.
        config (PipelineConfig): Base settings; each combination overrides it.
        grid (dict, optional): {dotted key: values}. Defaults to
            `config.gridsearch.grid`.
        k (int, optional): Folds per combination. Defaults to `config.folds`.
        scoring (str, optional): Metric to maximise. Defaults to
            `config.gridsearch.scoring` (micro F-measure).
        sample_fraction (float, optional): Share of the corpus searched on.
            Defaults to `config.gridsearch.sample_fraction`.

    Returns:
        GridSearchResult: Best combination (first one on ties) and the score
            of every combination in grid order.
    """
    grid = config.gridsearch.grid if grid is None else grid
    scoring = scoring or config.gridsearch.scoring
    fraction = config.gridsearch.sample_fraction if sample_fraction is None else sample_fraction
    if not grid:
        raise MetricError("Grid search needs a nonempty grid")
    documents = sample_slice(prepared, fraction, config.seed)
    logger.info(f"Grid search on {len(documents)} documents, scoring {scoring}")

    results = []
    best_params, best_score = None, None
    for params in grid_combinations(grid):
        report = cross_validate(documents, config.with_overrides(params), k=k)
        score = report.score(scoring)
        results.append((params, getattr(report, scoring)))
        logger.info(f"{params}: {scoring} = {getattr(report, scoring):.4f}")
        if best_score is None or score > best_score:
            best_params, best_score = params, score
    best_value = -best_score if scoring in MINIMISED else best_score
    return GridSearchResult(best_params, best_value, results)


# Report
# ---------------------------------------------------------------------------- #

REPORT_COLUMNS = (
    ("Strategy", None),
    ("Model", None),
    ("Exact match", "exact_match"),
    ("Acc.", "accuracy"),
    ("P macro", "macro_precision"),
    ("P micro", "micro_precision"),
    ("R macro", "macro_recall"),
    ("R micro", "micro_recall"),
    ("F macro", "macro_f"),
    ("F micro", "micro_f"),
    ("HL", "hamming_loss"),
    ("Train (s)", "train_seconds"),
)


def format_report(reports, timings=True):
    """Tab-separated table, one row per (strategy, model), metrics in percent."""
    columns = [c for c in REPORT_COLUMNS if timings or c[1] != "train_seconds"]
    lines = ["\t".join(title for title, _ in columns)]
    for report in reports:
        cells = [report.strategy.upper(), report.model.upper()]
        for _, name in columns[2:]:
            value = getattr(report, name)
            cells.append(f"{value:.2f}" if name == "train_seconds" else f"{100 * value:.2f}")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
