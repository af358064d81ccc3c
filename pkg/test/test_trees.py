import json

import numpy as np
import pytest

from lexclass.errors import ModelError
from lexclass.trees import (
    LEAF,
    DecisionTree,
    Hyperparams,
    candidate_features,
    class_weights,
    entropy,
    find_split,
    fit_tree,
    gini,
    n_candidate_features,
)
from utils import separable_dataset


@pytest.mark.parametrize(
    "counts, expected_gini, expected_entropy",
    [([4, 0], 0.0, 0.0), ([2, 2], 0.5, 1.0), ([2, 1, 1], 0.625, 1.5), ([1, 1, 1, 1], 0.75, 2.0)],
)
def test__impurity(counts, expected_gini, expected_entropy):
    assert gini(counts) == pytest.approx(expected_gini)
    assert entropy(counts) == pytest.approx(expected_entropy)


def test__impurity_of_empty_node():
    with pytest.raises(ModelError, match="empty node"):
        gini([0, 0])


def test__balanced_class_weights():
    y = np.array([0, 0, 0, 1])
    assert class_weights(y, 3, "balanced").tolist() == pytest.approx([4 / 6, 2.0, 0.0])
    assert class_weights(y, 3, None).tolist() == [1.0, 1.0, 1.0]


def test__balanced_leaf_values_hold_weighted_sums():
    X = np.arange(8, dtype=float).reshape(-1, 1)
    y = np.array([0, 0, 0, 0, 0, 0, 1, 1])
    plain = fit_tree(X, y, Hyperparams())
    balanced = fit_tree(X, y, Hyperparams(class_weight="balanced"))
    assert plain.value[0].tolist() == [6.0, 2.0]
    assert balanced.value[0].tolist() == pytest.approx([4.0, 4.0])
    assert balanced.n_node_samples[0] == 8


@pytest.mark.parametrize("max_features, expected", [(None, 9), ("auto", 9), ("sqrt", 3), ("log2", 3), (20, 9), (2, 2)])
def test__n_candidate_features(max_features, expected):
    assert n_candidate_features(max_features, 9) == expected


def test__candidate_features_skip_constant_columns():
    Xn = np.array([[1.0, 5.0, 0.0], [1.0, 6.0, 0.0]])
    rng = np.random.default_rng(0)
    assert candidate_features(Xn, 1, rng).tolist() == [1]
    assert candidate_features(Xn, 3, rng).tolist() == [1]


def test__find_split_midpoint():
    Xn = np.array([[1.0], [2.0], [4.0], [8.0]])
    W = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    feature, threshold, cost = find_split(Xn, W, Hyperparams(), np.random.default_rng(0))
    assert (feature, threshold, cost) == (0, 3.0, 0.0)


def test__find_split_respects_min_samples_leaf():
    Xn = np.array([[1.0], [2.0], [3.0], [4.0]])
    W = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]])
    _, threshold, _ = find_split(Xn, W, Hyperparams(), np.random.default_rng(0))
    assert threshold == 1.5
    _, threshold, _ = find_split(Xn, W, Hyperparams(min_samples_leaf=2), np.random.default_rng(0))
    assert threshold == 2.5


def test__random_split_threshold_within_range():
    Xn = np.array([[1.0], [2.0], [4.0], [8.0]])
    W = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    hp = Hyperparams(splitter="random")
    for seed in range(20):
        _, threshold, _ = find_split(Xn, W, hp, np.random.default_rng(seed))
        assert 1.0 <= threshold < 8.0


@pytest.mark.parametrize("criterion", ["gini", "entropy"])
@pytest.mark.parametrize("splitter", ["best", "random"])
def test__separable_data_fits_perfectly(criterion, splitter):
    X, y = separable_dataset()
    tree = fit_tree(X, y, Hyperparams(criterion=criterion, splitter=splitter))
    assert (tree.predict(X) == y).all()
    leaves = np.flatnonzero(tree.left == LEAF)
    assert all(tree.impurity[leaf] == 0.0 for leaf in leaves)


def test__best_splitter_uses_separating_feature():
    X, y = separable_dataset()
    tree = fit_tree(X, y, Hyperparams())
    assert tree.node_count == 5
    assert tree.feature[0] == 0
    assert tree.max_depth == 2
    assert tree.feature_importances()[0] == pytest.approx(1.0)


def test__max_depth_limits_growth():
    X, y = separable_dataset()
    stump = fit_tree(X, y, Hyperparams(max_depth=1))
    assert stump.node_count == 3 and stump.max_depth == 1
    root = fit_tree(X, y, Hyperparams(max_depth=0))
    assert root.node_count == 1
    assert root.predict_proba(X[:1]).tolist() == [[pytest.approx(1 / 3)] * 3]


def test__apply_matches_decision_path():
    X, y = separable_dataset(seed=4)
    tree = fit_tree(X, y, Hyperparams(splitter="random", max_features="sqrt"))
    leaves = tree.apply(X)
    for row, leaf in zip(X, leaves):
        path = tree.decision_path(row)
        assert path[0] == 0 and path[-1] == leaf
        for parent, child in zip(path, path[1:]):
            expected = tree.left[parent] if row[tree.feature[parent]] <= tree.threshold[parent] else tree.right[parent]
            assert child == expected


def test__fit_is_deterministic():
    X, y = separable_dataset()
    hp = Hyperparams(splitter="random", max_features="sqrt", seed=9)
    a, b = fit_tree(X, y, hp), fit_tree(X, y, hp)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test__from_dict_restores_predictions():
    X, y = separable_dataset()
    tree = fit_tree(X, y, Hyperparams(splitter="random"))
    restored = DecisionTree.from_dict(json.loads(json.dumps(tree.to_dict())))
    assert (restored.apply(X) == tree.apply(X)).all()


def malformed(left, right):
    n = len(left)
    return DecisionTree(2, 2, [0] * n, [0.0] * n, left, right, [[1.0, 1.0]] * n, [2] * n, [0.5] * n, [0] * n)


@pytest.mark.parametrize(
    "left, right, message",
    [
        ([1, LEAF], [LEAF, LEAF], "single child"),
        ([1, LEAF], [5, LEAF], "missing node"),
        ([1, 0, LEAF], [2, 2, LEAF], "reached twice"),
    ],
)
def test__validate_rejects_malformed_trees(left, right, message):
    with pytest.raises(ModelError, match=message):
        malformed(left, right).validate()


def test__fit_rejects_bad_input():
    with pytest.raises(ModelError, match="empty"):
        fit_tree(np.zeros((0, 2)), np.zeros(0), Hyperparams())
    with pytest.raises(ModelError, match="labels"):
        fit_tree(np.zeros((3, 2)), np.zeros(2), Hyperparams())
    with pytest.raises(ModelError, match="features"):
        fit_tree(np.eye(2), [0, 1], Hyperparams()).apply(np.zeros((1, 3)))


@pytest.mark.parametrize(
    "changes",
    [{"criterion": "log_loss"}, {"splitter": "worst"}, {"min_samples_split": 1}, {"max_depth": -1}, {"max_features": 0}],
)
def test__hyperparams_validation(changes):
    with pytest.raises(ModelError):
        Hyperparams(**changes)
