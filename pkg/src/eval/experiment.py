"""
Cross-validation and the context-influence and cascaded-label experiments.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..corpus.labels import filter_segments
from ..corpus.models import Corpus
from ..features.dictionary import FeatureDictionary
from ..features.vectorizer import (
    MAX_CONTEXT,
    NO_CONTEXT,
    ContextKind,
    ContextMode,
    FeatureConfig,
    LabelSource,
    Sample,
    SampleBuilder,
    build_dictionary,
    check_context,
)
from ..svm.model import LinearModel, predict_matrix, train_ovr, vectors_to_csr
from ..svm.solver import SolverParams, TrainingProblem
from ..utils.decorators import log_execution_time
from ..utils.logger import create_context_logger
from .folds import FoldAssignment, Granularity, make_folds
from .metrics import CVResult, ExperimentError
from .significance import wilcoxon
from .tables import ResultTable

logger = logging.getLogger(__name__)

DEFAULT_MODES = (
    ContextMode(ContextKind.UNTAGGED),
    ContextMode(ContextKind.TAGGED),
    ContextMode(ContextKind.LABELS),
)
DICTIONARY_SCOPES = ("fold", "global")

CASCADE_SUBSETS = ("second-half", "whole", "first-half")


@dataclass(frozen=True)
class ExperimentSpec:
    """Corpus plus every knob of a cross-validated run."""

    corpus: Corpus
    features: FeatureConfig = field(default_factory=FeatureConfig)
    solver: SolverParams = field(default_factory=SolverParams)
    modes: Tuple[ContextMode, ...] = DEFAULT_MODES
    n_prev_values: Tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    k: int = 10
    seed: int = 0
    granularity: Granularity = Granularity.DIALOG
    target_speakers: Optional[Tuple[str, ...]] = None
    dictionary_scope: str = "fold"
    jobs: int = 1

    def __post_init__(self):
        for n_prev in self.n_prev_values:
            if not 0 <= n_prev <= MAX_CONTEXT:
                raise ExperimentError(f"n_prev must be within 0..{MAX_CONTEXT}, got {n_prev}")
        if self.dictionary_scope not in DICTIONARY_SCOPES:
            raise ExperimentError(
                f"dictionary scope must be one of {', '.join(DICTIONARY_SCOPES)}"
            )
        if self.jobs < 1:
            raise ExperimentError("jobs must be at least 1")

    @cached_property
    def prepared(self) -> Corpus:
        """The corpus with only the target speakers' segments as targets."""
        if self.target_speakers is None:
            return self.corpus
        return filter_segments(self.corpus, self.target_speakers)

    def make_folds(self, corpus: Optional[Corpus] = None) -> FoldAssignment:
        return make_folds(self.prepared if corpus is None else corpus, self.k, self.seed, self.granularity)


def _label_indices(samples: Sequence[Sample], labels: Sequence[str]) -> List[int]:
    index = {label: position for position, label in enumerate(labels)}
    try:
        return [index[sample.label] for sample in samples]
    except KeyError as e:
        raise ExperimentError(f"Label {e} missing from the class list")


def fit_model(
    samples: Sequence[Sample],
    labels: Sequence[str],
    params: SolverParams,
    jobs: int = 1,
    dictionary: Optional[FeatureDictionary] = None,
    meta: Optional[Mapping[str, object]] = None,
) -> LinearModel:
    """Build (or reuse) a dictionary over `samples` and train the OvR model."""
    if not samples:
        raise ExperimentError("Cannot train on an empty training set")
    if dictionary is None:
        dictionary = build_dictionary(samples)
    problem = TrainingProblem.from_vectors(
        [dictionary.vectorize(sample.features) for sample in samples],
        _label_indices(samples, labels),
        n_classes=len(labels),
        n_features=len(dictionary),
    )
    return train_ovr(problem, params, labels=labels, jobs=jobs, dictionary=dictionary, meta=dict(meta or {}))


def predict_samples(model: LinearModel, samples: Sequence[Sample]) -> np.ndarray:
    """Class indices predicted for each sample."""
    if model.dictionary is None:
        raise ExperimentError("Model carries no feature dictionary")
    vectors = [model.dictionary.vectorize(sample.features) for sample in samples]
    return predict_matrix(model, vectors_to_csr(vectors, model.n_features))


@log_execution_time()
def cross_validate(
    spec: ExperimentSpec,
    mode: ContextMode,
    n_prev: int,
    folds: Optional[FoldAssignment] = None,
    context_labels: Optional[Mapping[Tuple[str, int], str]] = None,
    builder: Optional[SampleBuilder] = None,
) -> CVResult:
    """
    k-fold cross-validation of one (context mode, n_prev) cell.

    The dictionary and model of each fold see only that fold's training
    samples; context features come from the full dialog history.

    Raises:
        ExperimentError: a fold with no training or no test samples
    """
    corpus = spec.prepared
    folds = folds if folds is not None else spec.make_folds(corpus)
    builder = builder if builder is not None else SampleBuilder(corpus, spec.features)
    log = create_context_logger(__name__, mode=check_context(mode, n_prev).name, n_prev=n_prev)

    samples = builder.build(mode, n_prev, context_labels=context_labels)
    labels = corpus.present_labels()
    label_of = {label: position for position, label in enumerate(labels)}
    gold = np.asarray([label_of[sample.label] for sample in samples], dtype=np.int64)
    fold_of = np.asarray([folds.fold_of_key(sample.key) for sample in samples], dtype=np.int64)

    shared_dictionary = build_dictionary(samples) if spec.dictionary_scope == "global" else None

    def run_fold(fold: int) -> Tuple[int, np.ndarray, np.ndarray]:
        train = [s for s, f in zip(samples, fold_of) if f != fold]
        test_rows = np.flatnonzero(fold_of == fold)
        if not train:
            raise ExperimentError(f"Fold {fold} leaves no training samples")
        if test_rows.size == 0:
            raise ExperimentError(f"Fold {fold} has no test samples")
        model = fit_model(
            train,
            labels,
            spec.solver,
            jobs=1,
            dictionary=shared_dictionary,
        )
        predicted = predict_samples(model, [samples[i] for i in test_rows])
        log.bind(fold=fold).debug(
            f"fold accuracy {np.mean(predicted == gold[test_rows]):.4f} on {test_rows.size} samples"
        )
        return fold, gold[test_rows], predicted

    if spec.jobs > 1:
        with ThreadPoolExecutor(max_workers=min(spec.jobs, folds.k)) as pool:
            outcomes = list(pool.map(run_fold, range(folds.k)))
    else:
        outcomes = [run_fold(fold) for fold in range(folds.k)]

    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    correct, total = [], []
    for _, fold_gold, fold_predicted in outcomes:
        np.add.at(confusion, (fold_gold, fold_predicted), 1)
        correct.append(int(np.sum(fold_gold == fold_predicted)))
        total.append(int(fold_gold.size))

    result = CVResult(
        labels=tuple(labels),
        fold_correct=tuple(correct),
        fold_total=tuple(total),
        confusion=confusion,
    )
    log.info(
        f"mean accuracy {100 * result.mean_accuracy:.2f}, pooled {100 * result.pooled_accuracy:.2f}"
    )
    return result


def annotate_adjacent(table: ResultTable) -> None:
    """Wilcoxon test of every cell against the same row's previous n_prev cell."""
    for row in table.row_names:
        values = table.n_prev_values
        for previous, current in zip(values, values[1:]):
            table.significance[(row, current)] = wilcoxon(
                table.cell(row, current).per_fold_accuracy,
                table.cell(row, previous).per_fold_accuracy,
            )


@log_execution_time(level=logging.INFO)
def influence_experiment(spec: ExperimentSpec) -> ResultTable:
    """
    Grid over context modes x n_prev with one fold assignment for every cell.

    The n_prev = 0 cell is the no-context run, shared by all modes.
    """
    for mode in spec.modes:
        if mode.kind is ContextKind.LABELS and mode.label_source is LabelSource.PREDICTED:
            raise ExperimentError("Predicted-label context belongs to the cascade experiment")
        if mode.kind is ContextKind.NONE:
            raise ExperimentError("List context modes only; n_prev = 0 is always included")

    corpus = spec.prepared
    folds = spec.make_folds(corpus)
    builder = SampleBuilder(corpus, spec.features)
    table = ResultTable(row_names=[mode.name for mode in spec.modes], n_prev_values=list(spec.n_prev_values))

    baseline: Optional[CVResult] = None
    for mode in spec.modes:
        for n_prev in spec.n_prev_values:
            if n_prev == 0:
                if baseline is None:
                    baseline = cross_validate(spec, NO_CONTEXT, 0, folds=folds, builder=builder)
                table.add(mode.name, 0, baseline)
            else:
                table.add(mode.name, n_prev, cross_validate(spec, mode, n_prev, folds=folds, builder=builder))

    annotate_adjacent(table)
    return table


@dataclass
class CascadeResult:
    """Label accuracies of the no-context models and the second-half CV grid."""

    label_accuracy: Dict[str, float]
    table: ResultTable
    predicted_labels: Dict[str, Dict[Tuple[str, int], str]] = field(default_factory=dict)


def split_halves(corpus: Corpus) -> Tuple[Corpus, Corpus]:
    """First and second half of the dialogs in corpus order."""
    if len(corpus.dialogs) < 2:
        raise ExperimentError("The cascade experiment needs at least 2 dialogs")
    half = len(corpus.dialogs) // 2
    first = [dialog.id for dialog in corpus.dialogs[:half]]
    second = [dialog.id for dialog in corpus.dialogs[half:]]
    return corpus.subset(first), corpus.subset(second)


@log_execution_time(level=logging.INFO)
def cascade_experiment(spec: ExperimentSpec) -> CascadeResult:
    """
    Replace gold context labels with labels from no-context classifiers.

    Three no-context models are trained on the second half, the whole
    corpus and the first half, and label every segment of the second half.
    Cross-validation on the second half then uses each predicted label
    stream as context, next to the manual-label and index-tagged rows.
    """
    corpus = spec.prepared
    first, second = split_halves(corpus)
    labels = corpus.present_labels()
    builder = SampleBuilder(corpus, spec.features)

    training_sets = {
        "second-half": [d.id for d in second.dialogs],
        "whole": [d.id for d in corpus.dialogs],
        "first-half": [d.id for d in first.dialogs],
    }
    second_ids = training_sets["second-half"]
    to_label = builder.build(NO_CONTEXT, 0, dialog_ids=second_ids, targets_only=False)
    target_keys = {segment.key for segment in second.targets()}

    label_accuracy: Dict[str, float] = {}
    predicted_labels: Dict[str, Dict[Tuple[str, int], str]] = {}
    for name in CASCADE_SUBSETS:
        train = builder.build(NO_CONTEXT, 0, dialog_ids=training_sets[name])
        model = fit_model(train, labels, spec.solver, jobs=spec.jobs)
        predicted = predict_samples(model, to_label)
        stream = {sample.key: labels[int(p)] for sample, p in zip(to_label, predicted)}

        scored = [(stream[s.key], s.label) for s in to_label if s.key in target_keys]
        if not scored:
            raise ExperimentError("The second half has no target segments")
        label_accuracy[name] = sum(p == g for p, g in scored) / len(scored)
        predicted_labels[name] = stream
        logger.info(f"No-context labels from '{name}': accuracy {100 * label_accuracy[name]:.2f}")

    second_spec = replace(spec, corpus=second, target_speakers=None)
    folds = second_spec.make_folds()
    second_builder = SampleBuilder(second, spec.features)
    predicted_mode = ContextMode(ContextKind.LABELS, LabelSource.PREDICTED)
    rows = [f"predicted-{name}" for name in CASCADE_SUBSETS] + ["labels", "tagged"]
    table = ResultTable(row_names=rows, n_prev_values=list(spec.n_prev_values))

    baseline = None
    for row in rows:
        for n_prev in spec.n_prev_values:
            if n_prev == 0:
                if baseline is None:
                    baseline = cross_validate(second_spec, NO_CONTEXT, 0, folds=folds, builder=second_builder)
                table.add(row, 0, baseline)
                continue
            if row.startswith("predicted-"):
                result = cross_validate(
                    second_spec,
                    predicted_mode,
                    n_prev,
                    folds=folds,
                    context_labels=predicted_labels[row[len("predicted-"):]],
                    builder=second_builder,
                )
            else:
                result = cross_validate(
                    second_spec, ContextMode.parse(row), n_prev, folds=folds, builder=second_builder
                )
            table.add(row, n_prev, result)

    annotate_adjacent(table)
    return CascadeResult(label_accuracy=label_accuracy, table=table, predicted_labels=predicted_labels)
