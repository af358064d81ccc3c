"""Single classification trees grown from scratch on numpy arrays.

A fitted tree is stored flat, one entry per node in the arrays `feature`,
`threshold`, `left`, `right`, `value`, `n_node_samples`, `impurity` and
`depth`. Node 0 is the root; leaves have `left == right == -1`. A sample goes
left when `x[feature] <= threshold`.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from lexclass.errors import ModelError

LEAF = -1
CRITERIA = ("gini", "entropy")
SPLITTERS = ("best", "random")
CLASS_WEIGHTS = (None, "balanced")

# Upper bound on floats materialised per block by the exhaustive splitter.
BLOCK_CELLS = 1 << 21


@dataclass(frozen=True)
class Hyperparams:
    class_weight: str = None
    max_depth: int = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    criterion: str = "gini"
    splitter: str = "best"
    n_estimators: int = 1
    seed: int = 0
    max_features: object = "auto"
    bootstrap: bool = None

    def __post_init__(self):
        if self.class_weight == "none":
            object.__setattr__(self, "class_weight", None)
        if self.class_weight not in CLASS_WEIGHTS:
            raise ModelError(f"class_weight: expected none or balanced, got {self.class_weight!r}")
        if self.max_depth is not None and (not _is_int(self.max_depth) or self.max_depth < 0):
            raise ModelError(f"max_depth: expected a non-negative integer or none, got {self.max_depth!r}")
        if not _is_int(self.min_samples_split) or self.min_samples_split < 2:
            raise ModelError(f"min_samples_split: must be >= 2, got {self.min_samples_split!r}")
        if not _is_int(self.min_samples_leaf) or self.min_samples_leaf < 1:
            raise ModelError(f"min_samples_leaf: must be >= 1, got {self.min_samples_leaf!r}")
        if self.criterion not in CRITERIA:
            raise ModelError(f"criterion: expected one of {CRITERIA}, got {self.criterion!r}")
        if self.splitter not in SPLITTERS:
            raise ModelError(f"splitter: expected one of {SPLITTERS}, got {self.splitter!r}")
        if not _is_int(self.n_estimators) or self.n_estimators < 1:
            raise ModelError(f"n_estimators: must be >= 1, got {self.n_estimators!r}")
        if not _is_int(self.seed):
            raise ModelError(f"seed: expected an integer, got {self.seed!r}")
        if self.bootstrap not in (None, True, False):
            raise ModelError(f"bootstrap: expected a boolean, got {self.bootstrap!r}")
        mf = self.max_features
        if not (mf is None or mf in ("auto", "sqrt", "log2") or (_is_int(mf) and mf >= 1)):
            raise ModelError(f"max_features: expected none, auto, sqrt, log2 or a positive integer, got {mf!r}")

    def replace(self, **changes):
        return Hyperparams(**{**asdict(self), **changes})

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _is_int(value):
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


@dataclass(frozen=True)
class TreeNode:
    """Read-only view of one node."""

    id: int
    kind: str
    feature: int
    threshold: float
    left: int
    right: int
    class_counts: tuple
    n_samples: int
    depth: int


# Impurity
# ---------------------------------------------------------------------------- #


def _totals(class_counts):
    counts = np.asarray(class_counts, dtype=float)
    if np.any(counts < 0):
        raise ModelError("Class counts must be non-negative")
    total = counts.sum(axis=-1)
    if np.any(total <= 0):
        raise ModelError("Impurity of an empty node is undefined")
    return counts, total


def gini(class_counts):
    """1 - Σ p_k². Works on one count vector or a stack of them (last axis)."""
    counts, total = _totals(class_counts)
    p = counts / total[..., None]
    return 1.0 - np.sum(p * p, axis=-1)


def entropy(class_counts):
    """-Σ p_k log2 p_k with 0·log 0 = 0."""
    counts, total = _totals(class_counts)
    p = counts / total[..., None]
    terms = np.zeros_like(p)
    nonzero = p > 0
    terms[nonzero] = p[nonzero] * np.log2(p[nonzero])
    return -np.sum(terms, axis=-1)


IMPURITY = {"gini": gini, "entropy": entropy}


def _child_cost(left, right, criterion):
    """Σ weight·impurity of two child count stacks; empty children cost +inf."""
    impurity = IMPURITY[criterion]
    wl = left.sum(axis=-1)
    wr = right.sum(axis=-1)
    ok = (wl > 0) & (wr > 0)
    cost = np.full(wl.shape, np.inf)
    if np.any(ok):
        cost[ok] = wl[ok] * impurity(left[ok]) + wr[ok] * impurity(right[ok])
    return cost


def class_weights(y, n_classes, mode):
    """Per-class weights: ones, or total / (m_present · count_k) for 'balanced'."""
    if mode is None:
        return np.ones(n_classes)
    counts = np.bincount(y, minlength=n_classes).astype(float)
    present = counts > 0
    weights = np.zeros(n_classes)
    weights[present] = len(y) / (present.sum() * counts[present])
    return weights


def n_candidate_features(max_features, n_features):
    if max_features in (None, "auto"):
        return n_features
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(math.log2(n_features))) if n_features > 1 else 1
    return min(int(max_features), n_features)


# Splitting
# ---------------------------------------------------------------------------- #


def candidate_features(Xn, n_wanted, rng):
    """Features to evaluate at a node, in ascending index order.

    Features are drawn in random order; constant ones are skipped until
    'n_wanted' non-constant features have been found.
    """
    varying = np.flatnonzero(Xn.min(axis=0) < Xn.max(axis=0))
    if varying.size == 0:
        return varying
    if n_wanted >= Xn.shape[1]:
        return varying
    permutation = rng.permutation(Xn.shape[1])
    is_varying = np.zeros(Xn.shape[1], dtype=bool)
    is_varying[varying] = True
    return np.sort(permutation[is_varying[permutation]][:n_wanted])


def _best_in_block(Xb, W, min_leaf, criterion):
    """Exhaustive midpoint search over the columns of one block."""
    n = Xb.shape[0]
    order = np.argsort(Xb, axis=0, kind="stable")
    xs = np.take_along_axis(Xb, order, axis=0)
    left = np.cumsum(W[order], axis=0)[:-1]
    right = W.sum(axis=0) - left
    position = np.arange(1, n)[:, None]
    valid = (xs[:-1] < xs[1:]) & (position >= min_leaf) & (n - position >= min_leaf)
    cost = np.where(valid, _child_cost(left, right, criterion), np.inf)
    best_pos = np.argmin(cost, axis=0)
    cols = np.arange(Xb.shape[1])
    best_cost = cost[best_pos, cols]
    lo = xs[best_pos, cols]
    hi = xs[np.minimum(best_pos + 1, n - 1), cols]
    threshold = (lo + hi) / 2.0
    # The midpoint of two adjacent floats can round up to the upper value.
    threshold = np.where(threshold >= hi, lo, threshold)
    return best_cost, threshold


def _random_in_block(Xb, W, min_leaf, criterion, rng):
    """One uniform threshold in [min, max) per column."""
    lo = Xb.min(axis=0)
    hi = Xb.max(axis=0)
    threshold = lo + rng.random(Xb.shape[1]) * (hi - lo)
    threshold = np.where(threshold >= hi, lo, threshold)
    goes_left = Xb <= threshold
    n_left = goes_left.sum(axis=0)
    left = goes_left.T.astype(float) @ W
    right = W.sum(axis=0) - left
    cost = _child_cost(left, right, criterion)
    feasible = (n_left >= min_leaf) & (Xb.shape[0] - n_left >= min_leaf)
    return np.where(feasible, cost, np.inf), threshold


def find_split(Xn, W, hyperparams, rng, features=None):
    """Best split of the node samples 'Xn' with weighted one-hot targets 'W'.

    Args:
        Xn (np.ndarray): Node samples × features.
        W (np.ndarray): Node samples × classes, one-hot rows scaled by weight.
        hyperparams (Hyperparams): Criterion, splitter, leaf size, max_features.
        rng (np.random.Generator): Feature sampling and random thresholds.
        features (np.ndarray, optional): Candidate columns; drawn with
            `candidate_features` when omitted.

    Returns:
        tuple|None: (feature, threshold, children_cost) of the split with the
            largest impurity decrease (lowest feature index, then lowest
            threshold on ties), or None if no split is feasible.
    """
    n = Xn.shape[0]
    min_leaf = hyperparams.min_samples_leaf
    if n < 2 * min_leaf:
        return None
    if features is None:
        features = candidate_features(
            Xn, n_candidate_features(hyperparams.max_features, Xn.shape[1]), rng
        )
    if len(features) == 0:
        return None

    best = None
    block = max(1, BLOCK_CELLS // max(1, n * W.shape[1]))
    for start in range(0, len(features), block):
        cols = features[start : start + block]
        Xb = Xn[:, cols]
        if hyperparams.splitter == "best":
            cost, threshold = _best_in_block(Xb, W, min_leaf, hyperparams.criterion)
        else:
            cost, threshold = _random_in_block(Xb, W, min_leaf, hyperparams.criterion, rng)
        j = int(np.argmin(cost))
        if np.isfinite(cost[j]) and (best is None or cost[j] < best[2]):
            best = (int(cols[j]), float(threshold[j]), float(cost[j]))
    return best


# Trees
# ---------------------------------------------------------------------------- #


class DecisionTree:
    """A fitted tree in flat-array form.

    `value[node]` holds the class-weighted sample sums of the node: raw class
    counts when `class_weight` is none, balanced weights otherwise.
    `n_node_samples` always counts the training rows.
    """

    def __init__(self, n_features, n_classes, feature, threshold, left, right, value, n_node_samples, impurity, depth):
        self.n_features = int(n_features)
        self.n_classes = int(n_classes)
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float).reshape(len(self.feature), self.n_classes)
        self.n_node_samples = np.asarray(n_node_samples, dtype=np.int64)
        self.impurity = np.asarray(impurity, dtype=float)
        self.depth = np.asarray(depth, dtype=np.int64)

    @property
    def node_count(self):
        return len(self.feature)

    @property
    def max_depth(self):
        return int(self.depth.max())

    def is_leaf(self, node_id):
        return self.left[node_id] == LEAF

    def node(self, node_id):
        leaf = self.is_leaf(node_id)
        return TreeNode(
            id=int(node_id),
            kind="leaf" if leaf else "split",
            feature=int(self.feature[node_id]),
            threshold=float(self.threshold[node_id]),
            left=int(self.left[node_id]),
            right=int(self.right[node_id]),
            class_counts=tuple(float(v) for v in self.value[node_id]),
            n_samples=int(self.n_node_samples[node_id]),
            depth=int(self.depth[node_id]),
        )

    def _check_input(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ModelError(f"Tree expects {self.n_features} features, got {X.shape[1]}")
        return X

    def apply(self, X):
        """Leaf id reached by every row of 'X'."""
        X = self._check_input(X)
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.left[nodes] != LEAF
        while np.any(active):
            r = rows[active]
            n = nodes[r]
            goes_left = X[r, self.feature[n]] <= self.threshold[n]
            nodes[r] = np.where(goes_left, self.left[n], self.right[n])
            active = self.left[nodes] != LEAF
        return nodes

    def decision_path(self, row):
        """Node ids from the root to the leaf reached by one row."""
        row = self._check_input(row)[0]
        path = [0]
        node = 0
        while self.left[node] != LEAF:
            node = self.left[node] if row[self.feature[node]] <= self.threshold[node] else self.right[node]
            path.append(int(node))
        return path

    def predict_proba(self, X):
        """Class distribution of the leaf reached by each row."""
        value = self.value[self.apply(X)]
        return value / value.sum(axis=1, keepdims=True)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def feature_importances(self):
        """Weighted impurity decrease per feature, normalised to sum to 1."""
        importances = np.zeros(self.n_features)
        weight = self.value.sum(axis=1)
        for node in np.flatnonzero(self.left != LEAF):
            l, r = self.left[node], self.right[node]
            decrease = (
                weight[node] * self.impurity[node]
                - weight[l] * self.impurity[l]
                - weight[r] * self.impurity[r]
            )
            importances[self.feature[node]] += decrease
        total = importances.sum()
        return importances / total if total > 0 else importances

    def to_dict(self):
        return {
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_node_samples": self.n_node_samples.tolist(),
            "impurity": self.impurity.tolist(),
            "depth": self.depth.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        tree = cls(**data)
        tree.validate()
        return tree

    def validate(self):
        """Check child links: every split node has two in-range children, no node is reached twice."""
        seen = set()
        stack = [0]
        while stack:
            node = stack.pop()
            if node in seen:
                raise ModelError(f"Malformed tree: node {node} reached twice")
            seen.add(node)
            l, r = self.left[node], self.right[node]
            if (l == LEAF) != (r == LEAF):
                raise ModelError(f"Malformed tree: node {node} has a single child")
            if l != LEAF:
                for child in (l, r):
                    if not 0 <= child < self.node_count:
                        raise ModelError(f"Malformed tree: node {node} points to missing node {child}")
                stack.extend((r, l))
        return self


def fit_tree(X, y, hyperparams, n_classes=None, rng=None, sample_indices=None):
    """Grow one tree depth-first.

    A node is split when it holds at least `min_samples_split` samples, is
    shallower than `max_depth` and is impure; otherwise it becomes a leaf.

    Args:
        X (np.ndarray): Samples × features.
        y (np.ndarray): Integer classes in [0, n_classes).
        hyperparams (Hyperparams): Growth constraints.
        n_classes (int, optional): Size of the class space. Defaults to max(y)+1.
        rng (np.random.Generator, optional): Defaults to one seeded with
            `hyperparams.seed`.
        sample_indices (np.ndarray, optional): Rows to train on, repetitions
            allowed (bootstrap). Defaults to every row.

    Returns:
        DecisionTree
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ModelError("Cannot fit a tree on empty data")
    if y.shape != (X.shape[0],):
        raise ModelError(f"Got {X.shape[0]} samples but {len(y)} labels")
    n_classes = int(n_classes if n_classes is not None else y.max() + 1)
    if y.min() < 0 or y.max() >= n_classes:
        raise ModelError(f"Labels must lie in [0, {n_classes})")
    rng = rng if rng is not None else np.random.default_rng(hyperparams.seed)
    if sample_indices is None:
        sample_indices = np.arange(X.shape[0])

    y_fit = y[sample_indices]
    weights = class_weights(y_fit, n_classes, hyperparams.class_weight)
    W_all = np.zeros((len(sample_indices), n_classes))
    W_all[np.arange(len(sample_indices)), y_fit] = weights[y_fit]
    X_fit = X[sample_indices]
    n_wanted = n_candidate_features(hyperparams.max_features, X.shape[1])

    impurity_fn = IMPURITY[hyperparams.criterion]
    nodes = {k: [] for k in ("feature", "threshold", "left", "right", "value", "n_node_samples", "impurity", "depth")}

    def add_node(rows, depth):
        value = W_all[rows].sum(axis=0)
        nodes["feature"].append(LEAF)
        nodes["threshold"].append(0.0)
        nodes["left"].append(LEAF)
        nodes["right"].append(LEAF)
        nodes["value"].append(value)
        nodes["n_node_samples"].append(len(rows))
        nodes["impurity"].append(float(impurity_fn(value)))
        nodes["depth"].append(depth)
        return len(nodes["feature"]) - 1

    stack = [(add_node(np.arange(len(sample_indices)), 0), np.arange(len(sample_indices)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if (
            len(rows) < hyperparams.min_samples_split
            or (hyperparams.max_depth is not None and depth >= hyperparams.max_depth)
            or nodes["impurity"][node] <= 0.0
        ):
            continue
        Xn = X_fit[rows]
        features = candidate_features(Xn, n_wanted, rng)
        split = find_split(Xn, W_all[rows], hyperparams, rng, features)
        if split is None:
            continue
        feature, threshold, _ = split
        goes_left = Xn[:, feature] <= threshold
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        nodes["feature"][node] = feature
        nodes["threshold"][node] = threshold
        left = add_node(left_rows, depth + 1)
        right = add_node(right_rows, depth + 1)
        nodes["left"][node] = left
        nodes["right"][node] = right
        stack.append((right, right_rows, depth + 1))
        stack.append((left, left_rows, depth + 1))

    return DecisionTree(
        n_features=X.shape[1],
        n_classes=n_classes,
        feature=nodes["feature"],
        threshold=nodes["threshold"],
        left=nodes["left"],
        right=nodes["right"],
        value=np.array(nodes["value"]),
        n_node_samples=nodes["n_node_samples"],
        impurity=nodes["impurity"],
        depth=nodes["depth"],
    )
