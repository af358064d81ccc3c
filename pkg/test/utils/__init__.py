import difflib

import numpy as np
from termcolor import colored

from lexclass.corpus import LabelAssignment


def diff_strings(a, b):
    """Print the character-level differences between two strings."""
    for i, s in enumerate(difflib.ndiff(a, b)):
        if s[0] == " ":
            continue
        elif s[0] == "-":
            print(colored(f"Char {i+1}: {s}", "red"))
        elif s[0] == "+":
            print(colored(f"Char {i+1}: {s}", "green"))


def assert_same_text(actual, expected):
    if actual != expected:
        diff_strings(expected, actual)
    assert actual == expected


def label(order="social", *categories):
    """LabelAssignment with filler categories when none are given."""
    categories = categories or (f"{order} a", f"{order} b", f"{order} c")
    return LabelAssignment(order, categories)


def label_pool(m):
    """'m' distinct label assignments."""
    orders = ("penal", "civil", "social", "administrative", "mercantile", "tributary", "civil/mercantile")
    return [
        LabelAssignment(orders[k % len(orders)], (f"cat {k}", f"sub {k}", f"topic {k}"))
        for k in range(m)
    ]


def indicator(sets, catalog):
    """n × m 0/1 matrix of label sets over a list of classes."""
    position = {c: j for j, c in enumerate(catalog)}
    matrix = np.zeros((len(sets), len(catalog)), dtype=int)
    for i, labels in enumerate(sets):
        for c in labels:
            matrix[i, position[c]] = 1
    return matrix


def brute_force_metrics(L, Z, catalog, skip_absent=True):
    """Every metric computed element by element from indicator matrices."""
    Y = indicator(L, catalog)
    P = indicator(Z, catalog)
    n, m = Y.shape
    scores = {
        "exact_match": sum(all(Y[i, j] == P[i, j] for j in range(m)) for i in range(n)) / n,
        "accuracy": sum(
            sum(Y[i, j] & P[i, j] for j in range(m)) / sum(Y[i, j] | P[i, j] for j in range(m))
            for i in range(n)
        ) / n,
        "precision": sum(sum(Y[i, j] & P[i, j] for j in range(m)) / sum(P[i]) for i in range(n)) / n,
        "recall": sum(sum(Y[i, j] & P[i, j] for j in range(m)) / sum(Y[i]) for i in range(n)) / n,
        "hamming_loss": sum(Y[i, j] != P[i, j] for i in range(n) for j in range(m)) / (n * m),
    }
    tp = [sum(Y[i, j] & P[i, j] for i in range(n)) for j in range(m)]
    fp = [sum((1 - Y[i, j]) & P[i, j] for i in range(n)) for j in range(m)]
    fn = [sum(Y[i, j] & (1 - P[i, j]) for i in range(n)) for j in range(m)]

    def ratio(a, b):
        return a / b if b else 0.0

    def f(p, r):
        return ratio(2 * p * r, p + r)

    p_micro = ratio(sum(tp), sum(tp) + sum(fp))
    r_micro = ratio(sum(tp), sum(tp) + sum(fn))
    used = [j for j in range(m) if not skip_absent or tp[j] + fn[j] > 0]
    p_cls = [ratio(tp[j], tp[j] + fp[j]) for j in used]
    r_cls = [ratio(tp[j], tp[j] + fn[j]) for j in used]
    scores.update(
        {
            "micro_precision": p_micro,
            "micro_recall": r_micro,
            "micro_f": f(p_micro, r_micro),
            "macro_precision": sum(p_cls) / len(used),
            "macro_recall": sum(r_cls) / len(used),
            "macro_f": sum(f(p, r) for p, r in zip(p_cls, r_cls)) / len(used),
        }
    )
    return scores


def average_ranks(values):
    """Ranks 1..n with ties sharing the mean of their positions."""
    ranks = [0.0] * len(values)
    for i, v in enumerate(values):
        smaller = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks[i] = smaller + (equal + 1) / 2
    return ranks


def spearman_oracle(x, y):
    """Rank covariance over the product of rank deviations."""
    rx, ry = average_ranks(list(x)), average_ranks(list(y))
    mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sx = sum((a - mx) ** 2 for a in rx) ** 0.5
    sy = sum((b - my) ** 2 for b in ry) ** 0.5
    return cov / (sx * sy)


def separable_dataset(n_per_class=30, seed=0):
    """Two features, three classes separated along the first feature."""
    rng = np.random.default_rng(seed)
    X, y = [], []
    for k in range(3):
        X.append(np.column_stack([rng.uniform(3 * k, 3 * k + 2, n_per_class), rng.normal(0, 1, n_per_class)]))
        y += [k] * n_per_class
    return np.vstack(X), np.array(y)
