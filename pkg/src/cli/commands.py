"""
Subcommand implementations.

Every command takes the parsed arguments and a ConfigLoader and returns an
exit code. Domain errors propagate to main(), which maps them to exit codes.
"""

import hashlib
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, TextIO, Union

from .. import __version__
from ..config.loader import ConfigLoader, RunConfig, as_list
from ..corpus.io import load_corpus, write_segments
from ..corpus.labels import filter_segments, format_distribution, label_distribution
from ..corpus.models import Corpus
from ..eval.experiment import (
    CASCADE_SUBSETS,
    CascadeResult,
    cascade_experiment,
    cross_validate,
    fit_model,
    influence_experiment,
)
from ..eval.metrics import ExperimentError
from ..eval.prediction import model_meta, predict_corpus, prediction_accuracy
from ..eval.significance import wilcoxon
from ..eval.tables import ResultTable, read_result_csv, write_confusion
from ..features.export import write_dictionary, write_lines, write_sparse
from ..features.vectorizer import ContextMode, SampleBuilder, build_dictionary, check_context
from ..svm.io import load_model, save_model

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _input_files(paths: Sequence[Path]) -> List[Path]:
    files: List[Path] = []
    for path in paths:
        if path.is_dir():
            files.extend(sorted(p for p in path.rglob("*") if p.is_file()))
        else:
            files.append(path)
    return files


def write_manifest(
    output_dir: Path,
    command: str,
    loader: ConfigLoader,
    inputs: Sequence[Path],
    outputs: Sequence[Path],
    extra: Optional[Dict[str, object]] = None,
) -> Path:
    """
    Record what produced `output_dir`: resolved config, version and content
    hashes of every input and output file. No timestamps, sorted keys.
    """
    manifest = {
        "command": command,
        "version": __version__,
        "config": loader.as_dict(),
        "inputs": {str(p): sha256_file(p) for p in _input_files(inputs)},
        "outputs": {
            str(p.relative_to(output_dir)) if p.is_relative_to(output_dir) else str(p): sha256_file(p)
            for p in outputs
        },
    }
    if extra:
        manifest.update(extra)
    path = output_dir / MANIFEST
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, sort_keys=True, indent=2, default=str)
        f.write("\n")
    logger.info(f"Manifest written to {path}")
    return path


@contextmanager
def _open_output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _load_from_loader(loader: ConfigLoader) -> Corpus:
    """Corpus named by the configuration, without requiring a full RunConfig."""
    paths = loader.corpus_paths()
    if not paths:
        raise ExperimentError("No corpus given (pass --corpus or set corpus.paths)")
    return load_corpus(
        paths,
        str(loader.get("corpus.format")).lower(),
        variant=loader.get("corpus.variant"),
        mapping=loader.get("corpus.mapping"),
    )


def load_run_corpus(run: RunConfig) -> Corpus:
    return load_corpus(list(run.corpus_paths), run.corpus_format, variant=run.variant, mapping=run.mapping)


def _mode_and_n(args, default_mode: str = "none") -> tuple:
    mode = ContextMode.parse(getattr(args, "mode", None) or default_mode)
    n_prev = int(getattr(args, "n", None) or 0)
    return check_context(mode, n_prev), n_prev


def cmd_parse(args, loader: ConfigLoader) -> int:
    """Parse a corpus, dump it as segment TSV and print its label distribution."""
    corpus = _load_from_loader(loader)
    with _open_output(args.out) as out:
        write_segments(corpus, out)

    report = sys.stderr if args.out in (None, "-") else sys.stdout
    print(
        f"📄 {len(corpus.dialogs)} dialogs, {len(corpus)} segments, "
        f"{corpus.n_targets} targets ({corpus.variant.value})",
        file=report,
    )
    print(format_distribution(label_distribution(corpus, speaker=args.speaker), corpus.variant), file=report)
    return 0


def cmd_featurize(args, loader: ConfigLoader) -> int:
    """Sparse text export of every target segment, with labels and dictionary."""
    run = RunConfig.from_loader(loader)
    corpus = run.experiment_spec(load_run_corpus(run)).prepared
    mode, n_prev = _mode_and_n(args)

    samples = SampleBuilder(corpus, run.features).build(mode, n_prev)
    dictionary = build_dictionary(samples)
    labels = corpus.present_labels()
    label_of = {label: i for i, label in enumerate(labels)}

    run.output_dir.mkdir(parents=True, exist_ok=True)
    features_path = run.output_dir / "features.txt"
    labels_path = run.output_dir / "labels.txt"
    dictionary_path = run.output_dir / "dictionary.txt"
    with open(features_path, "w", encoding="utf-8", newline="\n") as f:
        count = write_sparse(
            ((label_of[s.label], s.key[0], dictionary.vectorize(s.features)) for s in samples), f
        )
    with open(labels_path, "w", encoding="utf-8", newline="\n") as f:
        write_lines(labels, f)
    with open(dictionary_path, "w", encoding="utf-8", newline="\n") as f:
        write_dictionary(dictionary, f)

    write_manifest(
        run.output_dir,
        "featurize",
        loader,
        run.corpus_paths,
        [features_path, labels_path, dictionary_path],
        extra={"context_mode": mode.name, "n_prev": n_prev},
    )
    print(f"✅ {count} samples, {len(dictionary)} features, {len(labels)} labels -> {run.output_dir}")
    return 0


def cmd_train(args, loader: ConfigLoader) -> int:
    """Train one model on every target segment of the corpus."""
    run = RunConfig.from_loader(loader)
    corpus = run.experiment_spec(load_run_corpus(run)).prepared
    mode, n_prev = _mode_and_n(args)

    samples = SampleBuilder(corpus, run.features).build(mode, n_prev)
    model = fit_model(
        samples,
        corpus.present_labels(),
        run.solver,
        jobs=run.jobs,
        meta=model_meta(corpus, run.features, mode, n_prev),
    )

    model_path = Path(args.model) if args.model else run.output_dir / "model.dlsvm"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, model_path)
    write_manifest(
        model_path.parent,
        "train",
        loader,
        run.corpus_paths,
        [model_path],
        extra={"context_mode": mode.name, "n_prev": n_prev},
    )
    print(f"✅ Model with {model.n_classes} classes, {model.n_features} features -> {model_path}")
    return 0


def cmd_predict(args, loader: ConfigLoader) -> int:
    """Write one `dialog_id<TAB>index<TAB>speaker<TAB>label` line per target segment."""
    model = load_model(args.model)
    corpus = _load_from_loader(loader)
    speakers = loader.get("corpus.target_speakers")
    if speakers:
        corpus = filter_segments(corpus, as_list(speakers))

    predictions = predict_corpus(model, corpus, online=args.online)
    with _open_output(args.out) as out:
        for prediction in predictions:
            segment = prediction.segment
            out.write(f"{segment.dialog_id}\t{segment.index}\t{segment.speaker}\t{prediction.label}\n")

    score = prediction_accuracy(predictions)
    if score is not None:
        print(f"🎯 Accuracy against corpus labels: {100 * score:.2f}%", file=sys.stderr)
    return 0


def _write_confusions(table: ResultTable, output_dir: Path) -> List[Path]:
    directory = output_dir / "confusion"
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for row in table.row_names:
        for n_prev in table.n_prev_values:
            path = directory / f"{row}_{n_prev}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                write_confusion(table.cell(row, n_prev), f)
            written.append(path)
    return written


def _write_table(table: ResultTable, output_dir: Path, title: str) -> List[Path]:
    csv_path = output_dir / "results.csv"
    markdown_path = output_dir / "results.md"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as f:
        table.write_csv(f)
    with open(markdown_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(table.to_markdown(title))
    return [csv_path, markdown_path, *_write_confusions(table, output_dir)]


def cmd_cv(args, loader: ConfigLoader) -> int:
    """Cross-validate a single (context mode, n_prev) cell."""
    run = RunConfig.from_loader(loader)
    spec = run.experiment_spec(load_run_corpus(run))
    mode, n_prev = _mode_and_n(args)

    result = cross_validate(spec, mode, n_prev)
    table = ResultTable(row_names=[mode.name], n_prev_values=[n_prev])
    table.add(mode.name, n_prev, result)

    run.output_dir.mkdir(parents=True, exist_ok=True)
    outputs = _write_table(table, run.output_dir, f"Cross-validation: {mode.name}, n_prev={n_prev}")
    write_manifest(
        run.output_dir, "cv", loader, run.corpus_paths, outputs,
        extra={"context_mode": mode.name, "n_prev": n_prev},
    )
    print(
        f"✅ {mode.name} n_prev={n_prev}: mean {100 * result.mean_accuracy:.2f}%, "
        f"pooled {100 * result.pooled_accuracy:.2f}% over {result.k} folds"
    )
    return 0


def _write_cascade(result: CascadeResult, output_dir: Path) -> List[Path]:
    accuracy_path = output_dir / "label_accuracy.csv"
    with open(accuracy_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("training_subset,accuracy\n")
        for name in CASCADE_SUBSETS:
            f.write(f"{name},{result.label_accuracy[name]!r}\n")

    labels_path = output_dir / "predicted_labels.tsv"
    with open(labels_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("dialog_id\tindex\t" + "\t".join(CASCADE_SUBSETS) + "\n")
        keys = list(result.predicted_labels[CASCADE_SUBSETS[0]])
        for key in keys:
            labels = "\t".join(result.predicted_labels[name][key] for name in CASCADE_SUBSETS)
            f.write(f"{key[0]}\t{key[1]}\t{labels}\n")
    return [accuracy_path, labels_path]


def cmd_experiment(args, loader: ConfigLoader) -> int:
    """Run the configured experiment grid and write its tables."""
    run = RunConfig.from_loader(loader)
    spec = run.experiment_spec(load_run_corpus(run))
    run.output_dir.mkdir(parents=True, exist_ok=True)

    if run.experiment_kind == "cascade":
        result = cascade_experiment(spec)
        outputs = _write_table(result.table, run.output_dir, "Cascaded label context (second half)")
        outputs += _write_cascade(result, run.output_dir)
        for name in CASCADE_SUBSETS:
            print(f"   labels from {name}: {100 * result.label_accuracy[name]:.2f}%")
    else:
        table = influence_experiment(spec)
        outputs = _write_table(table, run.output_dir, "Influence of context")

    write_manifest(run.output_dir, "experiment", loader, run.corpus_paths, outputs)
    print(f"✅ {run.experiment_kind} experiment written to {run.output_dir}")
    return 0


def cmd_significance(args, loader: ConfigLoader) -> int:
    """Signed-rank test of every cell two result CSVs have in common."""
    with open(args.first, encoding="utf-8") as f:
        first = read_result_csv(f)
    with open(args.second, encoding="utf-8") as f:
        second = read_result_csv(f)

    cells = [cell for cell in first if cell in second]
    if args.cell:
        mode, _, n_prev = args.cell.rpartition(":")
        try:
            wanted = (mode, int(n_prev))
        except ValueError:
            raise ExperimentError(f"--cell must look like MODE:N, got '{args.cell}'")
        cells = [cell for cell in cells if cell == wanted]
    if not cells:
        raise ExperimentError("The result files have no cell in common")

    print("mode\tn_prev\tW\tn\tp_value\tmethod")
    for mode, n_prev in cells:
        test = wilcoxon(first[(mode, n_prev)], second[(mode, n_prev)])
        marker = "*" if test.significant else ""
        print(f"{mode}\t{n_prev}\t{test.w:g}\t{test.n_effective}\t{test.p_value:.6g}{marker}\t{test.method}")
    return 0


COMMANDS = {
    "parse": cmd_parse,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "experiment": cmd_experiment,
    "significance": cmd_significance,
}
