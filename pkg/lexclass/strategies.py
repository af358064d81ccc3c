"""Binary (BTS) and multi-class (MTS) transformations of the multi-label target.

BTS turns the problem into one yes/no question per class λ_j of the catalog;
MTS turns every distinct label set into a class of its own.
"""
from dataclasses import dataclass

import numpy as np

from lexclass.corpus import MAX_LABELS, LabelAssignment
from lexclass.errors import StrategyError

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ClassCatalog:
    """Distinct label assignments sorted by their key."""

    classes: tuple

    def __post_init__(self):
        classes = tuple(sorted(set(self.classes)))
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "_index", {c: j for j, c in enumerate(classes)})

    @property
    def m(self):
        return len(self.classes)

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, j):
        return self.classes[j]

    def __contains__(self, label):
        return label in self._index

    def index(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise StrategyError(f"Label {label.key!r} is not in the class catalog")

    def to_list(self):
        return [c.to_dict() for c in self.classes]

    @classmethod
    def from_list(cls, data):
        return cls(tuple(LabelAssignment.from_dict(d) for d in data))


@dataclass(frozen=True)
class MtsCatalog:
    """Distinct canonical label sets, ordered by the keys of their members."""

    combos: tuple

    def __post_init__(self):
        combos = tuple(sorted(set(self.combos), key=lambda c: tuple(a.key for a in c)))
        object.__setattr__(self, "combos", combos)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(combos, start=1)})

    @property
    def p(self):
        return len(self.combos)

    def __len__(self):
        return len(self.combos)

    def __iter__(self):
        return iter(self.combos)

    def alpha(self, label_set):
        """Integer class (1-based) of 'label_set'."""
        combo = canonicalize(label_set)
        try:
            return self._index[combo]
        except KeyError:
            raise StrategyError(
                "Label set is not a known combination: " + " + ".join(a.key for a in combo)
            )

    def to_list(self):
        return [[a.to_dict() for a in combo] for combo in self.combos]

    @classmethod
    def from_list(cls, data):
        return cls(tuple(tuple(LabelAssignment.from_dict(d) for d in combo) for combo in data))


def build_class_catalog(label_sets):
    """Catalog C of every class used in 'label_sets' (a corpus or a list of sets)."""
    if hasattr(label_sets, "label_sets"):
        label_sets = label_sets.label_sets
    return ClassCatalog(tuple(label for labels in label_sets for label in labels))


# BTS
# ---------------------------------------------------------------------------- #


def bts_encode(label_sets, catalog):
    """Indicator matrix β with β[i, j] = 1 iff class j belongs to document i's set."""
    beta = np.zeros((len(label_sets), catalog.m), dtype=np.uint8)
    for i, labels in enumerate(label_sets):
        for label in labels:
            beta[i, catalog.index(label)] = 1
    return beta


def bts_decode(scores, catalog, threshold=DEFAULT_THRESHOLD, max_labels=MAX_LABELS):
    """Label set from a 0/1 row or a per-class positive-probability vector.

    Classes scoring strictly above 'threshold' are kept (a 0/1 row works with
    the default). An empty selection falls back to the best-scoring class;
    more than 'max_labels' keeps the best ones. Ties go to the lowest index.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (catalog.m,):
        raise StrategyError(f"Score vector has shape {scores.shape}, expected ({catalog.m},)")
    # Stable sort on negated scores: highest first, lowest index first on ties.
    order = np.argsort(-scores, kind="stable")
    chosen = [j for j in order if scores[j] > threshold]
    if not chosen:
        chosen = [order[0]]
    return frozenset(catalog[j] for j in chosen[:max_labels])


# MTS
# ---------------------------------------------------------------------------- #


def canonicalize(label_set):
    """Reordering function: the label set as a tuple sorted by key."""
    labels = tuple(sorted(set(label_set)))
    if not 1 <= len(labels) <= MAX_LABELS:
        raise StrategyError(f"Label set size out of [1,{MAX_LABELS}]: {len(labels)}")
    return labels


def build_mts_catalog(label_sets):
    return MtsCatalog(tuple(canonicalize(labels) for labels in label_sets))


def mts_encode(label_sets, catalog=None):
    """Integer target α (1..p) per document.

    Returns:
        tuple: (MtsCatalog, np.ndarray) the catalog (built from 'label_sets'
            unless one is given) and α.
    """
    if catalog is None:
        catalog = build_mts_catalog(label_sets)
    alpha = np.array([catalog.alpha(labels) for labels in label_sets], dtype=np.int64)
    return catalog, alpha


def mts_decode(alpha, catalog):
    alpha = int(alpha)
    if not 1 <= alpha <= catalog.p:
        raise StrategyError(f"MTS class {alpha} out of range [1,{catalog.p}]")
    return catalog.combos[alpha - 1]
