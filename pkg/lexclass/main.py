from lexclass.anonymiser import anonymize_corpus
from lexclass.corpus import load_corpus
from lexclass.errors import ConfigError, ExplainError
from lexclass.evaluation import cross_validate, grid_search
from lexclass.explain import class_names, explain_row, export_tree_graph, render_explanation
from lexclass.logger import logger
from lexclass.pipeline import Pipeline, load_pipeline, load_resources, prepare_corpus, save_pipeline
from lexclass.synth import generate_corpus
from lexclass.utils.hash import derive_seed


def load_inputs(config):
    """Corpus named by `paths.corpus` and the lexica of `paths.lexica`."""
    config.check_paths("corpus")
    return load_corpus(config.paths.corpus), load_resources(config.paths.lexica_dir)


def prepare(config, corpus=None, resources=None):
    """Entity detection, anonymisation and text processing of the whole corpus.

    Returns:
        list[PreparedDocument]
    """
    if corpus is None:
        corpus, resources = load_inputs(config)
    elif resources is None:
        resources = load_resources(config.paths.lexica_dir)
    return prepare_corpus(corpus, resources, config)


def anonymize(config):
    """Anonymised copy of the configured corpus.

    Returns:
        tuple: (Corpus, AnonymisationReport)
    """
    corpus, resources = load_inputs(config)
    return anonymize_corpus(corpus, resources.anonymiser, config.anonymiser.threshold)


def featurize(config, prepared=None):
    """Feature matrix of the corpus after both selection stages.

    Returns:
        tuple: (FeatureMatrix, Pipeline) the matrix and the pipeline whose
            feature stages produced it.
    """
    prepared = prepared if prepared is not None else prepare(config)
    pipeline = Pipeline(config)
    matrix, _ = pipeline.fit_features(prepared)
    return matrix, pipeline


def train(config, prepared=None, out=None):
    """Fit the configured pipeline on the whole corpus.

    Args:
        config (PipelineConfig): Run configuration.
        prepared (list[PreparedDocument], optional): Preprocessed corpus.
            Defaults to preprocessing `paths.corpus`.
        out (str, optional): Artifact path. Defaults to `paths.model`; when
            both are unset nothing is written.

    Returns:
        tuple: (Pipeline, str|None) the fitted pipeline and the artifact
            fingerprint.
    """
    prepared = prepared if prepared is not None else prepare(config)
    pipeline = Pipeline(config).fit(prepared)
    out = out or config.paths.model
    digest = save_pipeline(pipeline, out) if out else None
    return pipeline, digest


def evaluate(config, prepared=None):
    """k-fold cross-validation of the configured strategy and model.

    Returns:
        MetricsReport
    """
    prepared = prepared if prepared is not None else prepare(config)
    report = cross_validate(prepared, config)
    logger.info(
        f"{config.model.upper()}-{config.strategy.upper()}: exact match {report.exact_match:.4f}, "
        f"micro P {report.micro_precision:.4f}, HL {report.hamming_loss:.4f}"
    )
    return report


def gridsearch(config, prepared=None, grid=None):
    prepared = prepared if prepared is not None else prepare(config)
    return grid_search(prepared, config, grid)


def _pipeline(config, pipeline=None):
    if pipeline is not None:
        return pipeline
    config.check_paths("model")
    return load_pipeline(config.paths.model)


def explain_sample(config, sample, pipeline=None, corpus=None, resources=None):
    """Explanation of the model's decision on one document.

    Args:
        config (PipelineConfig): Run configuration (`explain` section).
        sample (str|int): Document id, or position in the corpus.
        pipeline (Pipeline, optional): Fitted pipeline. Defaults to loading
            `paths.model`.

    Returns:
        tuple: (str, Explanation) the rendered text and the explanation.
    """
    pipeline = _pipeline(config, pipeline)
    if corpus is None:
        corpus, resources = load_inputs(config)
    elif resources is None:
        resources = load_resources(config.paths.lexica_dir)
    document = corpus.find(sample)
    prepared = prepare_corpus(corpus.subset([corpus.documents.index(document)]), resources, config)[0]

    e = config.explain
    explanation = explain_row(
        pipeline.model,
        pipeline.rows([prepared])[0],
        prepared.id,
        prepared.entities,
        n_samples=e.n_samples,
        seed=derive_seed(config.seed, "explain", prepared.id),
        top_terms=e.top_terms,
        zero_probability=e.zero_probability,
        kernel_scale=e.kernel_scale,
        alpha=e.surrogate_alpha,
    )
    return render_explanation(explanation), explanation


def export_tree(config, tree_index=0, depth=None, pipeline=None):
    """DOT text of one tree of the fitted model.

    Trees are numbered across the model: for BTS, forest j holds trees
    j·n_estimators to (j+1)·n_estimators - 1.
    """
    pipeline = _pipeline(config, pipeline)
    model = pipeline.model
    trees = model.trees
    if not 0 <= tree_index < len(trees):
        raise ExplainError(f"Tree {tree_index} out of range [0,{len(trees) - 1}]")
    depth = config.explain.graph_depth if depth is None else depth
    if depth < 0:
        raise ConfigError(f"--depth: must be >= 0, got {depth}")
    forest_index = tree_index // len(model.forests[0])
    return export_tree_graph(trees[tree_index], depth, model.columns, class_names(model, forest_index))


def synth(config):
    """Synthetic corpus with the `synth` settings and the run seed."""
    s = config.synth
    return generate_corpus(s.n_docs, s.n_classes, s.noise, config.seed, config.paths.lexica)
