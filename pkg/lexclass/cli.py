import argparse
import json
import sys

from lexclass import main
from lexclass.config import MODELS, STRATEGIES, load_config
from lexclass.corpus import serialize_corpus
from lexclass.errors import ConfigError, LexclassError
from lexclass.evaluation import format_report
from lexclass.features import serialize_matrix
from lexclass.logger import logger, set_verbosity
from lexclass.utils import atomic_write

COMMANDS = {
    "preprocess": "Detect entities, anonymise and tokenize every document (JSON lines).",
    "anonymize": "Write the anonymised corpus (JSON lines).",
    "entities": "Write the seven detected entities of every document (JSON lines).",
    "featurize": "Write the selected feature matrix (TSV).",
    "train": "Fit the pipeline on the whole corpus and save it.",
    "evaluate": "Cross-validate the configured strategy and model; write the metrics table.",
    "gridsearch": "Cross-validated search over the configured grid.",
    "explain": "Explain the decision of a fitted pipeline on one document.",
    "export-tree": "Write one tree of a fitted pipeline as Graphviz DOT.",
    "synth": "Generate a synthetic labelled corpus (JSON lines).",
}

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser exiting with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"\nERROR: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _common_arguments():
    common = ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="YAML configuration file. Defaults apply when omitted.")
    common.add_argument("--seed", type=int, help="Seed of every random draw of the run.")
    common.add_argument("--strategy", choices=STRATEGIES, help="Label strategy.")
    common.add_argument("--model", choices=MODELS, help="Tree model variant.")
    common.add_argument("--folds", type=int, help="Cross-validation folds.")
    common.add_argument("--corpus", help="Corpus file (overrides paths.corpus).")
    common.add_argument("--lexica", help="Lexica directory (overrides paths.lexica).")
    common.add_argument("--pipeline", help="Fitted pipeline artifact (overrides paths.model).")
    common.add_argument("-o", "--out", help="Output file. Defaults to standard output.")
    common.add_argument("-v", "--verbose", action="store_true", help="Show 'info' level logs.")
    common.add_argument("--debug", action="store_true", help="Show 'debug' level logs.")
    return common


def get_parser():
    """Return argument parser for command 'lexclass'.

    Returns:
        argparse.ArgumentParser: Parser with one sub-command per pipeline stage.
    """
    parser = ArgumentParser(
        prog="lexclass",
        description="Multi-label classification of legal judgements with explainable tree ensembles.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    common = _common_arguments()
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=ArgumentParser)
    sub = {
        name: commands.add_parser(name, parents=[common], help=text, description=text)
        for name, text in COMMANDS.items()
    }

    sub["explain"].add_argument("--sample", required=True, help="Document id, or position in the corpus.")
    sub["explain"].add_argument("--graph", help="Also write the DOT graph of one tree to this file.")
    for name in ("explain", "export-tree"):
        sub[name].add_argument("--tree", type=int, default=0, help="Tree number across the model.")
        sub[name].add_argument("--depth", type=int, help="Graph depth (defaults to explain.graph_depth).")

    sub["synth"].add_argument("--n-docs", type=int, help="Documents to generate (overrides synth.n_docs).")
    sub["synth"].add_argument("--n-classes", type=int, help="Label sets (overrides synth.n_classes).")
    sub["synth"].add_argument("--noise", type=float, help="Keyword noise rate (overrides synth.noise).")
    return parser


def _overrides(args):
    overrides = {
        "seed": args.seed,
        "strategy": args.strategy,
        "model": args.model,
        "folds": args.folds,
        "paths.corpus": args.corpus,
        "paths.lexica": args.lexica,
        "paths.model": args.pipeline,
    }
    if args.command == "synth":
        overrides.update(
            {"synth.n_docs": args.n_docs, "synth.n_classes": args.n_classes, "synth.noise": args.noise}
        )
    return overrides


def _json_lines(records):
    return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in records)


def _emit(text, out):
    if out:
        atomic_write(out, text)
        logger.info(f"Wrote '{out}'")
    else:
        sys.stdout.write(text)


def run(args):
    """Execute one parsed command."""
    config = load_config(args.config).with_overrides(_overrides(args))
    command = args.command

    if command == "preprocess":
        records = [
            {"id": d.id, "entities": d.entities.to_dict(), "tokens": list(d.tokens.tokens)}
            for d in main.prepare(config)
        ]
        _emit(_json_lines(records), args.out)
    elif command == "anonymize":
        corpus, report = main.anonymize(config)
        logger.info(f"Replacements: {report.counts}")
        _emit(serialize_corpus(corpus), args.out)
    elif command == "entities":
        records = [{"id": d.id, **d.entities.to_dict()} for d in main.prepare(config)]
        _emit(_json_lines(records), args.out)
    elif command == "featurize":
        matrix, pipeline = main.featurize(config)
        if pipeline.spearman.entries:
            logger.info("\n" + pipeline.spearman.format())
        _emit(serialize_matrix(matrix), args.out)
    elif command == "train":
        out = args.out or config.paths.model
        if not out:
            raise ConfigError("paths.model: required for this command (or pass --out)")
        _, digest = main.train(config, out=out)
        print(digest)
    elif command == "evaluate":
        report = main.evaluate(config)
        _emit(format_report([report], config.report.timings), args.out)
    elif command == "gridsearch":
        _emit(main.gridsearch(config).format(), args.out)
    elif command == "explain":
        config.check_paths("model")
        pipeline = main.load_pipeline(config.paths.model)
        text, _ = main.explain_sample(config, args.sample, pipeline)
        _emit(text, args.out)
        if args.graph:
            atomic_write(args.graph, main.export_tree(config, args.tree, args.depth, pipeline))
            logger.info(f"Wrote tree {args.tree} to '{args.graph}'")
    elif command == "export-tree":
        _emit(main.export_tree(config, args.tree, args.depth), args.out)
    elif command == "synth":
        _emit(serialize_corpus(main.synth(config)), args.out or config.paths.output)


def cli(args_list=None):
    """Parse arguments and run the selected command.

    Exit status: 0 success, 1 usage or configuration error, 2 data error,
    3 internal error.
    """
    if args_list is None:
        args_list = sys.argv[1:]
    parser = get_parser()
    args = parser.parse_args(["--help"] if len(args_list) == 0 else args_list)
    if args.command is None:
        parser.print_usage(sys.stderr)
        sys.exit(EXIT_USAGE)

    set_verbosity(args.verbose, args.debug)

    try:
        run(args)
    except ConfigError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)
    except LexclassError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        sys.exit(EXIT_DATA)
    except Exception as e:
        logger.debug("Internal error", exc_info=True)
        print(f"INTERNAL ERROR: {type(e).__name__}: {e}", file=sys.stderr)
        sys.exit(EXIT_INTERNAL)
