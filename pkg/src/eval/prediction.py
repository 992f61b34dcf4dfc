"""
Labelling a corpus with a trained model, with gold or self-predicted context.
"""

import logging
from dataclasses import replace
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

from ..corpus.models import Corpus, Segment
from ..features.vectorizer import (
    NO_CONTEXT,
    ContextKind,
    ContextMode,
    FeatureConfig,
    LabelDimensions,
    LabelSource,
    SampleBuilder,
)
from ..svm.model import LinearModel, predict
from .experiment import predict_samples
from .metrics import ExperimentError

logger = logging.getLogger(__name__)


class Prediction(NamedTuple):
    segment: Segment
    label: str


def model_meta(
    corpus: Corpus, features: FeatureConfig, mode: ContextMode, n_prev: int
) -> Dict[str, Any]:
    """What a model must remember to featurize new dialogs the same way."""
    return {
        "context_mode": mode.name,
        "n_prev": n_prev,
        "features": features.to_dict(),
        "variant": corpus.variant.value,
        "dimensions": list(corpus.dimensions),
    }


def model_context(model: LinearModel) -> Tuple[FeatureConfig, ContextMode, int]:
    try:
        return (
            FeatureConfig.from_dict(model.meta.get("features", {})),
            ContextMode.parse(model.meta.get("context_mode", NO_CONTEXT.name)),
            int(model.meta.get("n_prev", 0)),
        )
    except (TypeError, ValueError) as e:
        raise ExperimentError(f"Model metadata is unusable: {e}")


def check_compatible(model: LinearModel, corpus: Corpus) -> None:
    """
    Raises:
        ExperimentError: explaining why the corpus cannot be labelled by `model`
    """
    if model.dictionary is None:
        raise ExperimentError("Model has no feature dictionary; retrain with this version")

    variant = model.meta.get("variant")
    if variant is not None and variant != corpus.variant.value:
        raise ExperimentError(
            f"Model was trained on a {variant} corpus but the input is {corpus.variant.value}"
        )

    unknown = sorted({s.label for s in corpus.targets()} - set(model.labels))
    if unknown:
        raise ExperimentError(
            f"Corpus labels unknown to the model: {', '.join(unknown)}; "
            f"was it parsed with the same tag set and mapping?"
        )

    _, mode, _ = model_context(model)
    if mode.dimensions is LabelDimensions.ALL:
        expected = list(model.meta.get("dimensions", []))
        if expected != list(corpus.dimensions):
            raise ExperimentError(
                f"Model uses dimensions {expected}, corpus has {list(corpus.dimensions)}"
            )


def predict_corpus(model: LinearModel, corpus: Corpus, online: bool = False) -> List[Prediction]:
    """
    Label every target segment of `corpus`.

    With `online`, label-context models see their own earlier predictions
    for preceding target segments instead of the gold labels; context-only
    segments keep their gold labels.
    """
    check_compatible(model, corpus)
    features, mode, n_prev = model_context(model)
    builder = SampleBuilder(corpus, features)

    if not online or mode.kind is not ContextKind.LABELS or n_prev == 0:
        samples = builder.build(mode, n_prev)
        predicted = predict_samples(model, samples)
        by_key = {segment.key: segment for segment in corpus.targets()}
        return [
            Prediction(by_key[sample.key], model.labels[int(p)])
            for sample, p in zip(samples, predicted)
        ]

    if mode.dimensions is LabelDimensions.ALL:
        raise ExperimentError("Online prediction supports task-dimension label context only")
    cascaded = replace(mode, label_source=LabelSource.PREDICTED)

    predictions: List[Prediction] = []
    for dialog in corpus.dialogs:
        context: Dict[Tuple[str, int], str] = {}
        for position, segment in enumerate(dialog.segments):
            if segment.target:
                history = dialog.segments[max(0, position - n_prev):position][::-1]
                vector = model.dictionary.vectorize(
                    builder.segment_features(segment, history, cascaded, n_prev, context)
                )
                label = model.labels[predict(model, vector)]
                predictions.append(Prediction(segment, label))
                context[segment.key] = label
            else:
                context[segment.key] = segment.label
    logger.debug(f"Labelled {len(predictions)} segments online")
    return predictions


def prediction_accuracy(predictions: List[Prediction]) -> Optional[float]:
    if not predictions:
        return None
    return sum(p.label == p.segment.label for p in predictions) / len(predictions)
