"""
Segment and context feature extraction.

Features are first produced as unbound maps (feature key -> value) and then
bound to ids by a FeatureDictionary. Key families:

    1:okay, 2:<s> okay        n-grams of the segment (and untagged context)
    wh:what, punct:?          indicators of the segment
    2|1:okay                  n-grams of the segment two positions back
    ctx:1:task:sd             label of the previous segment in a dimension
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from ..corpus.models import Corpus, Segment
from .dictionary import FeatureDictionary, SparseVector
from .ngrams import FeatureConfigError, NGramSpec, extract_ngrams
from .tokenizer import MarkupMode, TokenSequence, normalize

logger = logging.getLogger(__name__)

MAX_CONTEXT = 5
PAD = "<pad>"
TASK = "task"
WH_WORDS = frozenset({"who", "whom", "whose", "what", "which", "when", "where", "why", "how"})
PUNCTUATION_MARKS = frozenset({"?", "!", ".", ",", ";", ":"})


class ContextKind(str, Enum):
    NONE = "none"
    UNTAGGED = "untagged"
    TAGGED = "tagged"
    LABELS = "labels"


class LabelSource(str, Enum):
    MANUAL = "manual"
    PREDICTED = "predicted"


class LabelDimensions(str, Enum):
    TASK_ONLY = "task"
    ALL = "all"


@dataclass(frozen=True)
class ContextMode:
    """How preceding segments contribute features."""

    kind: ContextKind = ContextKind.NONE
    label_source: LabelSource = LabelSource.MANUAL
    dimensions: LabelDimensions = LabelDimensions.TASK_ONLY

    @property
    def name(self) -> str:
        """Stable identifier used in result tables: none, tagged, labels-all, ..."""
        if self.kind is not ContextKind.LABELS:
            return self.kind.value
        parts = [self.kind.value]
        if self.label_source is LabelSource.PREDICTED:
            parts.append(self.label_source.value)
        if self.dimensions is LabelDimensions.ALL:
            parts.append(self.dimensions.value)
        return "-".join(parts)

    @classmethod
    def parse(cls, name: str) -> "ContextMode":
        """Inverse of `name`; also accepts 'predicted-labels' style aliases."""
        parts = set(str(name).strip().lower().replace("_", "-").split("-"))
        for kind in ContextKind:
            if kind.value in parts:
                break
        else:
            raise FeatureConfigError(f"Unknown context mode '{name}'")

        source = LabelSource.PREDICTED if "predicted" in parts else LabelSource.MANUAL
        dimensions = LabelDimensions.ALL if "all" in parts else LabelDimensions.TASK_ONLY
        if kind is not ContextKind.LABELS and (len(parts) > 1):
            raise FeatureConfigError(f"Unknown context mode '{name}'")
        return cls(kind, source, dimensions)


NO_CONTEXT = ContextMode()


def check_context(mode: ContextMode, n_prev: int) -> ContextMode:
    """
    Validate a (mode, n_prev) pair and return the effective mode.

    Any mode with n_prev == 0 is the no-context mode.
    """
    if not 0 <= n_prev <= MAX_CONTEXT:
        raise FeatureConfigError(f"n_prev must be within 0..{MAX_CONTEXT}, got {n_prev}")
    if mode.kind is ContextKind.NONE and n_prev > 0:
        raise FeatureConfigError("Context mode 'none' requires n_prev == 0")
    if mode.kind is ContextKind.LABELS and mode.label_source is LabelSource.PREDICTED:
        if mode.dimensions is LabelDimensions.ALL:
            raise FeatureConfigError("Predicted context labels cover the task dimension only")
    return NO_CONTEXT if n_prev == 0 else mode


@dataclass(frozen=True)
class FeatureConfig:
    """Everything that determines the feature keys of a segment."""

    markup: MarkupMode = MarkupMode.SPLIT
    ngrams: NGramSpec = field(default_factory=NGramSpec)
    wh_words: bool = True
    punctuation: bool = True

    def to_dict(self) -> Dict[str, object]:
        return {
            "markup": self.markup.value,
            "ngram_max": self.ngrams.max_n,
            "cumulative": self.ngrams.cumulative,
            "wh_words": self.wh_words,
            "punctuation": self.punctuation,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "FeatureConfig":
        try:
            return cls(
                markup=MarkupMode(data.get("markup", MarkupMode.SPLIT.value)),
                ngrams=NGramSpec(
                    max_n=int(data.get("ngram_max", 2)),
                    cumulative=bool(data.get("cumulative", True)),
                ),
                wh_words=bool(data.get("wh_words", True)),
                punctuation=bool(data.get("punctuation", True)),
            )
        except ValueError as e:
            raise FeatureConfigError(f"Invalid feature configuration: {e}")


def base_features(tokens: TokenSequence, config: FeatureConfig) -> Counter:
    """N-gram counts plus wh-word and punctuation indicators."""
    features = extract_ngrams(tokens, config.ngrams)
    words = set(tokens.words)
    if config.wh_words:
        for word in sorted(words & WH_WORDS):
            features[f"wh:{word}"] = 1
    if config.punctuation:
        for mark in sorted(words & PUNCTUATION_MARKS):
            features[f"punct:{mark}"] = 1
    return features


def base_vector(
    tokens: TokenSequence, dictionary: FeatureDictionary, config: Optional[FeatureConfig] = None
) -> SparseVector:
    return dictionary.vectorize(base_features(tokens, config or FeatureConfig()))


def context_features(
    history: Sequence[TokenSequence],
    mode: ContextMode,
    n_prev: int,
    config: FeatureConfig,
    labels: Optional[Sequence[Mapping[str, str]]] = None,
    dimensions: Sequence[str] = (TASK,),
) -> Counter:
    """
    Unbound context features.

    Args:
        history: token sequences of the preceding segments, most recent first
        labels: per-dimension labels of the same preceding segments (label modes)
        dimensions: label dimensions to emit, for label modes
    """
    mode = check_context(mode, n_prev)
    features: Counter = Counter()
    if mode.kind is ContextKind.NONE:
        return features

    if mode.kind is ContextKind.LABELS:
        labels = labels or ()
        for offset in range(1, n_prev + 1):
            previous = labels[offset - 1] if offset <= len(labels) else None
            for dimension in dimensions:
                label = PAD if previous is None else previous.get(dimension, PAD)
                features[f"ctx:{offset}:{dimension}:{label}"] = 1
        return features

    for offset, tokens in enumerate(history[:n_prev], start=1):
        counts = extract_ngrams(tokens, config.ngrams)
        if mode.kind is ContextKind.UNTAGGED:
            features.update(counts)
        else:
            for key, count in counts.items():
                features[f"{offset}|{key}"] += count
    return features


def context_vector(
    history: Sequence[TokenSequence],
    mode: ContextMode,
    n_prev: int,
    dictionary: FeatureDictionary,
    config: Optional[FeatureConfig] = None,
    labels: Optional[Sequence[Mapping[str, str]]] = None,
    dimensions: Sequence[str] = (TASK,),
) -> SparseVector:
    features = context_features(
        history, mode, n_prev, config or FeatureConfig(), labels=labels, dimensions=dimensions
    )
    return dictionary.vectorize(features)


class Sample(NamedTuple):
    """One classification target with its unbound features."""

    key: Tuple[str, int]
    label: str
    features: Dict[str, float]


def build_dictionary(samples: Iterable[Sample]) -> FeatureDictionary:
    """Frozen dictionary over the samples' keys in first-encounter order."""
    dictionary = FeatureDictionary()
    for sample in samples:
        for key in sample.features:
            dictionary.add(key)
    return dictionary.freeze()


class SampleBuilder:
    """
    Builds the samples of a corpus for any (context mode, n_prev).

    Token sequences and base features are computed once per segment and
    reused across modes and n_prev values.
    """

    def __init__(self, corpus: Corpus, config: Optional[FeatureConfig] = None):
        self.corpus = corpus
        self.config = config or FeatureConfig()
        self._tokens: Dict[Tuple[str, int], TokenSequence] = {}
        self._base: Dict[Tuple[str, int], Counter] = {}

    def tokens(self, segment: Segment) -> TokenSequence:
        key = segment.key
        if key not in self._tokens:
            self._tokens[key] = normalize(segment.raw_text, self.config.markup)
        return self._tokens[key]

    def _base_features(self, segment: Segment) -> Counter:
        key = segment.key
        if key not in self._base:
            self._base[key] = base_features(self.tokens(segment), self.config)
        return self._base[key]

    def dimensions(self, mode: ContextMode) -> Tuple[str, ...]:
        if mode.dimensions is LabelDimensions.ALL:
            return (TASK, *self.corpus.dimensions)
        return (TASK,)

    def _history_labels(
        self,
        history: Sequence[Segment],
        dimensions: Sequence[str],
        context_labels: Optional[Mapping[Tuple[str, int], str]],
    ) -> List[Mapping[str, str]]:
        if context_labels is None:
            return [segment.context_labels(dimensions) for segment in history]
        labels = []
        for segment in history:
            try:
                labels.append({TASK: context_labels[segment.key]})
            except KeyError:
                raise FeatureConfigError(
                    f"No predicted label for segment {segment.dialog_id}:{segment.index}"
                )
        return labels

    def segment_features(
        self,
        segment: Segment,
        history: Sequence[Segment],
        mode: ContextMode,
        n_prev: int,
        context_labels: Optional[Mapping[Tuple[str, int], str]] = None,
    ) -> Dict[str, float]:
        """Features of `segment` given its preceding segments (most recent first)."""
        mode = check_context(mode, n_prev)
        features = Counter(self._base_features(segment))
        if mode.kind is ContextKind.NONE:
            return dict(features)

        history = list(history[:n_prev])
        labels = None
        dimensions: Tuple[str, ...] = (TASK,)
        if mode.kind is ContextKind.LABELS:
            dimensions = self.dimensions(mode)
            predicted = context_labels if mode.label_source is LabelSource.PREDICTED else None
            labels = self._history_labels(history, dimensions, predicted)

        features.update(
            context_features(
                [self.tokens(s) for s in history],
                mode,
                n_prev,
                self.config,
                labels=labels,
                dimensions=dimensions,
            )
        )
        return dict(features)

    def build(
        self,
        mode: ContextMode = NO_CONTEXT,
        n_prev: int = 0,
        context_labels: Optional[Mapping[Tuple[str, int], str]] = None,
        dialog_ids: Optional[Iterable[str]] = None,
        targets_only: bool = True,
    ) -> List[Sample]:
        """
        Samples for every target segment (every segment when `targets_only`
        is false), in corpus order.

        Context is taken from all preceding segments of the dialog, targets
        or not. `context_labels` (segment key -> label) supplies the labels
        of preceding segments in the predicted-label mode.
        """
        effective = check_context(mode, n_prev)
        if (
            effective.kind is ContextKind.LABELS
            and effective.label_source is LabelSource.PREDICTED
            and context_labels is None
        ):
            raise FeatureConfigError("Predicted-label context needs context_labels")

        wanted = None if dialog_ids is None else set(dialog_ids)
        samples: List[Sample] = []
        for dialog in self.corpus.dialogs:
            if wanted is not None and dialog.id not in wanted:
                continue
            segments = dialog.segments
            for position, segment in enumerate(segments):
                if targets_only and not segment.target:
                    continue
                history = segments[max(0, position - n_prev):position][::-1]
                samples.append(
                    Sample(
                        key=segment.key,
                        label=segment.label,
                        features=self.segment_features(
                            segment, history, effective, n_prev, context_labels
                        ),
                    )
                )
        logger.debug(
            f"Built {len(samples)} samples (mode={effective.name}, n_prev={n_prev})"
        )
        return samples

