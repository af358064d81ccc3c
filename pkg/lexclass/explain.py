"""Per-decision explanations.

An explanation of one document combines the decision paths of every tree,
the relevance of the document's n-grams measured by perturbing them and
fitting a local linear surrogate, and a natural-language rendering.
"""
import math
from collections import Counter
from dataclasses import dataclass, field

import graphviz
import numpy as np
from sklearn.linear_model import Ridge

from lexclass.entities import ENTITY_FIELDS
from lexclass.errors import ExplainError
from lexclass.features import CATEGORICAL_PREFIX
from lexclass.logger import logger
from lexclass.strategies import mts_decode
from lexclass.trees import LEAF

LESS = "less"
MORE = "more"
TOP_TERMS = 7

DECISION_TYPE_DISPLAY = {"substantive": "sustantivo", "procedural": "procesal"}
INSTANCE_TYPE_DISPLAY = {"first": "primera", "second": "segunda", "third": "tercera", "higher": "superior"}


def is_term(column):
    """True for n-gram columns, False for categorical entity columns."""
    return not column.startswith(CATEGORICAL_PREFIX)


@dataclass(frozen=True)
class PathStep:
    feature: str
    value: float
    direction: str
    threshold: float

    def __post_init__(self):
        expected = LESS if self.value <= self.threshold else MORE
        if self.direction != expected:
            raise ExplainError(
                f"Path step on {self.feature!r}: value {self.value} vs threshold "
                f"{self.threshold} is {expected!r}, not {self.direction!r}"
            )


# Decision paths
# ---------------------------------------------------------------------------- #


def extract_path(tree, row, columns=None):
    """Comparisons a tree applies to one row, root to leaf.

    A value at or below the threshold goes left ("less"), above it right
    ("more").

    Raises:
        ExplainError: On a cycle or a missing child.
    """
    row = np.asarray(row, dtype=float).ravel()
    steps = []
    node = 0
    visited = set()
    while True:
        if not 0 <= node < len(tree.left):
            raise ExplainError(f"Malformed tree: missing node {node}")
        if node in visited:
            raise ExplainError(f"Malformed tree: cycle through node {node}")
        visited.add(node)
        left, right = tree.left[node], tree.right[node]
        if left == LEAF and right == LEAF:
            return steps
        if left == LEAF or right == LEAF:
            raise ExplainError(f"Malformed tree: node {node} has a single child")
        feature = int(tree.feature[node])
        value = float(row[feature])
        threshold = float(tree.threshold[node])
        name = columns[feature] if columns is not None else f"f{feature}"
        if value <= threshold:
            steps.append(PathStep(name, value, LESS, threshold))
            node = int(left)
        else:
            steps.append(PathStep(name, value, MORE, threshold))
            node = int(right)


def replay_path(tree, steps, columns=None):
    """Leaf reached by following recorded steps from the root."""
    node = 0
    for step in steps:
        name = columns[tree.feature[node]] if columns is not None else f"f{tree.feature[node]}"
        if name != step.feature or float(tree.threshold[node]) != step.threshold:
            raise ExplainError(f"Step on {step.feature!r} does not match node {node}")
        node = int(tree.left[node] if step.value <= step.threshold else tree.right[node])
    return node


def extract_paths(model, row):
    """Decision path of every tree of the model."""
    return [extract_path(tree, row, model.columns) for tree in model.trees]


def aggregate_terms(paths, term_filter=is_term):
    """N-gram features on the paths, by number of trees using them.

    Returns:
        list[tuple]: (term, tree count), most frequent first, ties alphabetical.
    """
    counts = Counter()
    for steps in paths:
        counts.update({s.feature for s in steps if term_filter(s.feature)})
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


# Relevance
# ---------------------------------------------------------------------------- #


def surrogate_coefficients(model, row, targets, n_samples=500, seed=0, zero_probability=0.5,
                           kernel_scale=0.75, alpha=1.0, term_filter=is_term):
    """Signed local-surrogate coefficient of each active n-gram of one row.

    'n_samples' copies of the row are drawn (the first is the row itself)
    with each nonzero n-gram count zeroed with probability
    'zero_probability'. The model's probability for each target output is
    regressed on the presence indicators by ridge regression weighted with
    exp(-d²/σ²), d the number of zeroed n-grams and
    σ = kernel_scale·√(active n-grams).

    Args:
        model (EnsembleModel): Fitted model.
        row (np.ndarray): Dense row in model column order.
        targets (list[int]): Output columns of `predict_proba` to explain.

    Returns:
        dict: term -> coefficient; for several targets the coefficient with
            the largest magnitude is kept.
    """
    if n_samples < 10:
        raise ExplainError(f"explain.n_samples: need at least 10, got {n_samples}")
    row = np.asarray(row, dtype=float).ravel()
    active = [j for j, c in enumerate(model.columns) if term_filter(c) and row[j] != 0]
    if not active:
        return {}

    rng = np.random.default_rng(seed)
    presence = rng.random((n_samples, len(active))) >= zero_probability
    presence[0] = True
    samples = np.tile(row, (n_samples, 1))
    samples[:, active] = row[active] * presence

    proba = model.predict_proba(samples)
    distance = len(active) - presence.sum(axis=1)
    sigma = kernel_scale * math.sqrt(len(active))
    weights = np.exp(-(distance ** 2) / sigma ** 2)
    design = presence.astype(float)

    coefficients = {}
    for target in targets:
        surrogate = Ridge(alpha=alpha).fit(design, proba[:, target], sample_weight=weights)
        for j, coef in zip(active, surrogate.coef_):
            term = model.columns[j]
            if term not in coefficients or abs(coef) > abs(coefficients[term]):
                coefficients[term] = float(coef)
    logger.debug(f"Surrogate over {len(active)} active n-grams, {n_samples} samples, σ={sigma:.3f}")
    return coefficients


def perturbation_relevance(model, row, targets, n_samples=500, seed=0, **kwargs):
    """Absolute surrogate coefficient per active n-gram ({} if there is none)."""
    signed = surrogate_coefficients(model, row, targets, n_samples, seed, **kwargs)
    return {term: abs(coef) for term, coef in signed.items()}


def select_top_terms(freq_ordered, relevances, limit=TOP_TERMS):
    """The first 'limit' frequent terms that carry a relevance, by relevance.

    Returns:
        list[tuple]: (term, relevance), highest relevance first.
    """
    chosen = []
    for item in freq_ordered:
        term = item[0] if isinstance(item, tuple) else item
        if term in relevances:
            chosen.append((term, relevances[term]))
            if len(chosen) == limit:
                break
    return sorted(chosen, key=lambda tr: -tr[1])


def predicted_targets(model, proba_row):
    """Output columns behind the model's decision for one probability row."""
    if model.strategy == "mts":
        return [int(np.argmax(proba_row))]
    decided = model.decide(np.asarray(proba_row)[None, :])[0]
    return sorted(model.class_catalog.index(label) for label in decided)


def confidence(model, proba_row):
    """Probability of the decision as a rounded percentage.

    MTS uses the winning class; BTS the mean over the predicted classes.
    """
    targets = predicted_targets(model, proba_row)
    p = float(np.mean([proba_row[t] for t in targets]))
    return int(min(100, max(0, math.floor(100 * p + 0.5))))


# Explanation and rendering
# ---------------------------------------------------------------------------- #


@dataclass
class Explanation:
    sample_id: str
    entities: object
    assignments: tuple
    confidence: int
    top_terms: list = field(default_factory=list)
    paths: list = field(default_factory=list)
    signed_relevances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.confidence <= 100:
            raise ExplainError(f"Confidence out of [0,100]: {self.confidence}")
        if len(self.top_terms) > TOP_TERMS:
            raise ExplainError(f"At most {TOP_TERMS} terms, got {len(self.top_terms)}")


def explain_row(model, row, sample_id, entities, n_samples=500, seed=0, top_terms=TOP_TERMS,
                zero_probability=0.5, kernel_scale=0.75, alpha=1.0):
    """Full explanation of the model's decision on one dense row."""
    row = np.asarray(row, dtype=float).ravel()
    proba = model.predict_proba(row[None, :])[0]
    decided = model.decide(proba[None, :])[0]
    targets = predicted_targets(model, proba)
    paths = extract_paths(model, row)
    signed = surrogate_coefficients(
        model, row, targets, n_samples, seed, zero_probability, kernel_scale, alpha
    )
    relevances = {term: abs(coef) for term, coef in signed.items()}
    return Explanation(
        sample_id=str(sample_id),
        entities=entities,
        assignments=tuple(sorted(decided)),
        confidence=confidence(model, proba),
        top_terms=select_top_terms(aggregate_terms(paths), relevances, top_terms),
        paths=paths,
        signed_relevances=signed,
    )


DOCUMENT_TEMPLATE = (
    "For sample {id} the features' values and model decision are:\n"
    "\n"
    "- Case type: {case_type}\n"
    "- Court: {court}\n"
    "- Decision: {decision}\n"
    "- Decision type: {decision_type}\n"
    "- Instance type: {instance_type}\n"
    "- Jurisdiction: {jurisdiction}\n"
    "- Resolution type: {resolution_type}\n"
    "\n"
    "{assignments}"
    "This decision has a confidence of {pct}\n"
    "\n"
    "The most representative terms (ngrams) and their relevance are:\n"
    "{terms}"
)
ASSIGNMENT_TEMPLATE = "- Substantive order: {order}\n- Law categories: {cat1}, {cat2} y {cat3}\n\n"
TERM_TEMPLATE = "- {term} -- {relevance:.3f}\n"


@dataclass(frozen=True)
class ExplanationTemplate:
    document: str = DOCUMENT_TEMPLATE
    assignment: str = ASSIGNMENT_TEMPLATE
    term: str = TERM_TEMPLATE

    def _fill(self, template, values):
        try:
            return template.format(**values)
        except KeyError as e:
            raise ExplainError(f"Template field {e.args[0]!r} has no value")
        except (IndexError, ValueError) as e:
            raise ExplainError(f"Malformed template: {e}")

    def render(self, explanation):
        entities = explanation.entities
        values = {name: getattr(entities, name) for name in ENTITY_FIELDS}
        values["decision_type"] = DECISION_TYPE_DISPLAY.get(values["decision_type"], values["decision_type"])
        values["instance_type"] = INSTANCE_TYPE_DISPLAY.get(values["instance_type"], values["instance_type"])
        values["id"] = explanation.sample_id
        values["pct"] = explanation.confidence
        values["assignments"] = "".join(
            self._fill(self.assignment, {"order": a.order, "cat1": a.categories[0], "cat2": a.categories[1], "cat3": a.categories[2]})
            for a in explanation.assignments
        )
        values["terms"] = "".join(
            self._fill(self.term, {"term": t, "relevance": r}) for t, r in explanation.top_terms
        )
        return self._fill(self.document, values)


def render_explanation(explanation, template=None):
    return (template or ExplanationTemplate()).render(explanation)


# Graph export
# ---------------------------------------------------------------------------- #


def describe_assignments(assignments):
    """'order; cat1; cat2; cat3', several assignments joined by ' + '."""
    return " + ".join("; ".join((a.order,) + tuple(a.categories)) for a in assignments)


def class_names(model, forest_index=0):
    """Display names of the classes a tree of 'model' predicts."""
    if model.strategy == "mts":
        return [describe_assignments(mts_decode(j + 1, model.mts_catalog)) for j in range(model.mts_catalog.p)]
    label = model.class_catalog[forest_index]
    return ["not " + describe_assignments([label]), describe_assignments([label])]


def export_tree_graph(tree, max_depth=3, columns=None, names=None):
    """DOT text of a tree cut at 'max_depth'.

    Split nodes read "feature ≤ threshold" with "less"/"more" edges; leaves
    and cut nodes show the decoded majority class.
    """
    dot = graphviz.Digraph(name="tree", comment="Decision tree")
    dot.attr("node", shape="box", style="rounded", fontname="helvetica")

    def class_label(node):
        j = int(np.argmax(tree.value[node]))
        return names[j] if names is not None else f"class {j}"

    stack = [0]
    while stack:
        node = stack.pop()
        samples = int(tree.n_node_samples[node])
        is_leaf = tree.left[node] == LEAF
        if is_leaf or tree.depth[node] >= max_depth:
            style = "rounded" if is_leaf else "rounded,dashed"
            dot.node(str(node), f"{class_label(node)}\\nsamples = {samples}", style=style)
            continue
        feature = int(tree.feature[node])
        name = columns[feature] if columns is not None else f"f{feature}"
        dot.node(str(node), f"{name} ≤ {tree.threshold[node]:.3f}\\nsamples = {samples}")
        left, right = int(tree.left[node]), int(tree.right[node])
        dot.edge(str(node), str(left), label=LESS)
        dot.edge(str(node), str(right), label=MORE)
        stack.extend((right, left))
    return dot.source
