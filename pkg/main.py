#!/usr/bin/env python3
"""
dact - Main entry point

Dialog act recognition with context features: corpus parsing, n-gram
featurization, linear SVM training and the context-influence experiments.
"""

import argparse
import logging
import sys
from pathlib import Path

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src import __version__
from src.cli.commands import COMMANDS
from src.config.loader import ConfigLoader, ConfigurationError
from src.config.validator import ValidationError
from src.corpus.io import FORMATS
from src.corpus.models import CorpusError
from src.eval.metrics import ExperimentError
from src.features.ngrams import FeatureConfigError
from src.svm.io import ModelFormatError
from src.svm.solver import SolverError
from src.utils.logger import setup_logging

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

# Runtime failures: exit 1 with a one-line diagnostic
RUNTIME_ERRORS = (
    CorpusError,
    FeatureConfigError,
    SolverError,
    ModelFormatError,
    ExperimentError,
    OSError,
    ValueError,
)

# argparse dest -> config dot path; every config key has a flag
OVERRIDES = {
    "seed": "seed",
    "jobs": "jobs",
    "corpus_root": "corpus.root",
    "corpus": "corpus.paths",
    "format": "corpus.format",
    "variant": "corpus.variant",
    "mapping": "corpus.mapping",
    "speakers": "corpus.target_speakers",
    "markup": "features.markup",
    "ngram_max": "features.ngram_max",
    "cumulative": "features.cumulative",
    "dictionary": "features.dictionary",
    "cost": "solver.cost",
    "stop_tol": "solver.stop_tol",
    "max_epochs": "solver.max_epochs",
    "bias": "solver.bias",
    "kind": "experiment.kind",
    "modes": "experiment.context_modes",
    "n_prev": "experiment.n_prev",
    "folds": "experiment.folds",
    "granularity": "experiment.granularity",
    "output": "output.dir",
    "log_level": "logging.level",
    "log_format": "logging.format",
    "log_file": "logging.file",
}


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags mirroring every configuration key."""
    general = parser.add_argument_group("general")
    general.add_argument("--config", "-c", help="Path to YAML configuration file (default: config.yaml)")
    general.add_argument("--env", help="Path to environment file (default: .env)")
    general.add_argument("--seed", type=int, help="Random seed (required for training and experiments)")
    general.add_argument("--jobs", "-j", type=int, help="Worker threads for folds and classes")
    general.add_argument("--output", "-o", help="Output directory")
    general.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging (DEBUG level)")
    general.add_argument("--log-level", help="Logging level (DEBUG, INFO, WARNING, ERROR)")
    general.add_argument("--log-format", choices=["text", "json"], help="Log output format")
    general.add_argument("--log-file", help="Also log to this rotating file")

    corpus = parser.add_argument_group("corpus")
    corpus.add_argument("--corpus", nargs="+", metavar="PATH", help="Corpus files or directories")
    corpus.add_argument("--corpus-root", help="Directory relative corpus paths are resolved against")
    corpus.add_argument("--format", "-f", choices=FORMATS, help="Corpus format")
    corpus.add_argument("--variant", help="Tag set variant: SWDA44, SWDA43, SWDA42, SWDA41, ISO_TASK")
    corpus.add_argument("--mapping", help="LEGO label mapping file")
    corpus.add_argument("--speakers", nargs="+", metavar="SPEAKER", help="Classify only these speakers' segments")

    features = parser.add_argument_group("features")
    features.add_argument("--markup", choices=["split", "atomic"], help="Transcription markup handling")
    features.add_argument("--ngram-max", type=int, help="Longest n-gram order (1-5)")
    features.add_argument(
        "--cumulative", action=argparse.BooleanOptionalAction, default=None,
        help="Use all orders up to --ngram-max (--no-cumulative: that order only)",
    )
    features.add_argument("--dictionary", choices=["fold", "global"], help="Feature dictionary scope in CV")

    solver = parser.add_argument_group("solver")
    solver.add_argument("--cost", "-C", type=float, help="SVM cost parameter C")
    solver.add_argument("--stop-tol", type=float, help="Coordinate descent stopping tolerance")
    solver.add_argument("--max-epochs", type=int, help="Coordinate descent epoch limit")
    solver.add_argument("--bias", type=float, help="Bias feature value (0 disables the bias)")

    experiment = parser.add_argument_group("experiment")
    experiment.add_argument("--kind", choices=["influence", "cascade"], help="Experiment to run")
    experiment.add_argument("--modes", nargs="+", metavar="MODE", help="Context modes of the grid rows")
    experiment.add_argument("--n-prev", nargs="+", type=int, metavar="N", help="Context sizes of the grid columns")
    experiment.add_argument("--folds", "-k", type=int, help="Number of cross-validation folds")
    experiment.add_argument("--granularity", choices=["dialog", "segment"], help="Fold assignment unit")


def add_cell_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", "-m", default="none", help="Context mode (none, untagged, tagged, labels, labels-all)")
    parser.add_argument("--n", type=int, default=0, help="Number of preceding segments used as context (0-5)")


def create_argument_parser() -> argparse.ArgumentParser:
    """Create and configure argument parser."""

    parser = argparse.ArgumentParser(
        description="dact - dialog act recognition with context features",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Dump a Switchboard corpus in the 42-label variant
  python main.py parse --corpus swda/ --variant SWDA42 --out swda42.tsv

  # Cross-validate dialog act label context of size 1
  python main.py cv --corpus swda42.tsv --format segments --seed 1 --mode labels --n 1

  # Full context-influence grid with 4 worker threads
  python main.py experiment --config config.yaml --seed 1 --jobs 4

  # Train a model and label another corpus with it
  python main.py train --corpus train.tsv --format segments --seed 1 --model model.dlsvm
  python main.py predict --model model.dlsvm --corpus test.tsv --format segments

  # Compare two result grids fold by fold
  python main.py significance results-a/results.csv results-b/results.csv

Environment Variables:
  DACT_CORPUS_ROOT    - Directory relative corpus paths are resolved against
  DACT_SEED           - Random seed
  DACT_JOBS           - Worker threads
  DACT_OUTPUT_DIR     - Output directory
  LOG_LEVEL           - Logging level (DEBUG, INFO, WARNING, ERROR)
  LOG_FORMAT          - Logging format (text, json)
        """,
    )
    parser.add_argument("--version", action="version", version=f"dact {__version__}")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    parse = subparsers.add_parser("parse", help="Parse a corpus and dump it as segment TSV")
    add_config_arguments(parse)
    parse.add_argument("--out", help="Output file (default: stdout)")
    parse.add_argument("--speaker", help="Label distribution of one speaker side only")

    featurize = subparsers.add_parser("featurize", help="Write the sparse feature export")
    add_config_arguments(featurize)
    add_cell_arguments(featurize)

    train = subparsers.add_parser("train", help="Train a model on a whole corpus")
    add_config_arguments(train)
    add_cell_arguments(train)
    train.add_argument("--model", help="Model file (default: <output>/model.dlsvm)")

    predict = subparsers.add_parser("predict", help="Label a corpus with a trained model")
    add_config_arguments(predict)
    predict.add_argument("--model", required=True, help="Model file")
    predict.add_argument("--out", help="Output file (default: stdout)")
    predict.add_argument(
        "--online", action="store_true",
        help="Use the model's own earlier predictions as label context",
    )

    cv = subparsers.add_parser("cv", help="Cross-validate one context setting")
    add_config_arguments(cv)
    add_cell_arguments(cv)

    experiment = subparsers.add_parser("experiment", help="Run the configured experiment grid")
    add_config_arguments(experiment)

    significance = subparsers.add_parser("significance", help="Wilcoxon test between two result CSVs")
    add_config_arguments(significance)
    significance.add_argument("first", help="First result CSV")
    significance.add_argument("second", help="Second result CSV")
    significance.add_argument("--cell", help="Compare a single MODE:N cell")

    return parser


def collect_overrides(args) -> dict:
    """Dot-path overrides for every flag that was given."""
    overrides = {path: getattr(args, dest, None) for dest, path in OVERRIDES.items()}
    if getattr(args, "verbose", False):
        overrides["logging.level"] = "DEBUG"
    return {path: value for path, value in overrides.items() if value is not None}


def main(argv=None) -> int:
    """Main entry point; returns the process exit code."""

    parser = create_argument_parser()
    args = parser.parse_args(argv)

    try:
        config = ConfigLoader(config_path=args.config, env_file=args.env, overrides=collect_overrides(args))
    except (ConfigurationError, ValidationError) as e:
        print(f"❌ Configuration Error: {e}", file=sys.stderr)
        print("Run with --help for more information.", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(
        level=config.get("logging.level", "INFO"),
        format_type=config.get("logging.format", "text"),
        log_file=config.get("logging.file"),
    )
    logger = logging.getLogger(__name__)
    logger.debug(f"dact v{__version__}, configuration from {config.config_path or 'defaults'}")

    try:
        return COMMANDS[args.command](args, config)

    except (ConfigurationError, ValidationError) as e:
        print(f"❌ Configuration Error: {e}", file=sys.stderr)
        return EXIT_USAGE

    except KeyboardInterrupt:
        print("\n👋 Interrupted by user", file=sys.stderr)
        return EXIT_INTERRUPTED

    except RUNTIME_ERRORS as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        if args.verbose:
            import traceback

            traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
