"""
Uniform dialog/segment model shared by every corpus reader.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple


class CorpusError(Exception):
    """Base class for corpus parsing and transformation errors."""

    pass


class ParseError(CorpusError):
    """Raised when an input line does not follow the expected grammar."""

    def __init__(self, line_number: int, message: str, source: str = "<stream>"):
        self.line_number = line_number
        self.source = source
        super().__init__(f"{source}:{line_number}: {message}")


class EmptyDialogError(CorpusError):
    """Raised when a stream contains no segments."""

    pass


class UnknownLabelError(CorpusError):
    """Raised when a segment label is not part of the declared label set."""

    def __init__(self, labels: Iterable[str], context: str = ""):
        self.labels = sorted(set(labels))
        where = f" ({context})" if context else ""
        super().__init__(f"Unknown labels{where}: {', '.join(self.labels)}")


class MappingError(CorpusError):
    """Raised for invalid label mappings or unmapped labels."""

    pass


class TagsetVariant(str, Enum):
    """Label-set variants; the SWDA ones are ordered from finest to coarsest."""

    SWDA44 = "SWDA44"
    SWDA43 = "SWDA43"
    SWDA42 = "SWDA42"
    SWDA41 = "SWDA41"
    ISO_TASK = "ISO_TASK"

    @property
    def is_switchboard(self) -> bool:
        return self is not TagsetVariant.ISO_TASK

    @classmethod
    def parse(cls, value: str) -> "TagsetVariant":
        """Accept 'SWDA42', 'swda42', '42' or 'iso_task'."""
        text = str(value).strip().upper()
        if text.isdigit():
            text = f"SWDA{text}"
        try:
            return cls(text)
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise CorpusError(f"Unknown tagset variant '{value}' (expected one of {choices})")


@dataclass(frozen=True)
class Segment:
    """One functional segment: the unit of classification."""

    dialog_id: str
    speaker: str
    index: int
    raw_text: str
    label: str
    aux_labels: Mapping[str, str] = field(default_factory=dict)
    # False for context-only segments (other speaker side, no Task function)
    target: bool = True

    @property
    def key(self) -> Tuple[str, int]:
        return (self.dialog_id, self.index)

    def context_labels(self, dimensions: Sequence[str]) -> Dict[str, str]:
        """Labels per dimension; 'task' is the segment label."""
        labels = {}
        for dimension in dimensions:
            if dimension == "task":
                labels[dimension] = self.label
            else:
                labels[dimension] = self.aux_labels.get(dimension, NO_FUNCTION)
        return labels


NO_FUNCTION = "<none>"


@dataclass(frozen=True)
class Dialog:
    """An ordered, non-empty sequence of segments sharing one dialog id."""

    id: str
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise EmptyDialogError(f"Dialog '{self.id}' has no segments")
        for position, segment in enumerate(self.segments):
            if segment.dialog_id != self.id:
                raise CorpusError(
                    f"Segment {position} of dialog '{self.id}' belongs to "
                    f"'{segment.dialog_id}'"
                )
            if segment.index != position:
                raise CorpusError(
                    f"Dialog '{self.id}': segment index {segment.index} at position {position}"
                )

    @classmethod
    def build(cls, dialog_id: str, segments: Iterable[Segment]) -> "Dialog":
        """Create a dialog, renumbering segment indices from 0."""
        renumbered = tuple(
            replace(segment, dialog_id=dialog_id, index=position)
            for position, segment in enumerate(segments)
        )
        return cls(dialog_id, renumbered)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)


@dataclass(frozen=True)
class Corpus:
    """Ordered dialogs plus the label set they are annotated with."""

    dialogs: Tuple[Dialog, ...]
    label_set: Tuple[str, ...]
    variant: TagsetVariant
    dimensions: Tuple[str, ...] = ()

    def __post_init__(self):
        ids = [dialog.id for dialog in self.dialogs]
        duplicates = sorted({d for d in ids if ids.count(d) > 1})
        if duplicates:
            raise CorpusError(f"Duplicate dialog ids: {', '.join(duplicates)}")

        allowed = set(self.label_set)
        unknown = {
            segment.label
            for segment in self.segments()
            if segment.label not in allowed and segment.target
        }
        if unknown:
            raise UnknownLabelError(unknown, context=f"label set of {self.variant.value}")

    def segments(self) -> Iterator[Segment]:
        """All segments in corpus order."""
        for dialog in self.dialogs:
            yield from dialog.segments

    def targets(self) -> Iterator[Segment]:
        """Segments marked as classification targets."""
        return (segment for segment in self.segments() if segment.target)

    def __len__(self) -> int:
        return sum(len(dialog) for dialog in self.dialogs)

    @property
    def n_targets(self) -> int:
        return sum(1 for _ in self.targets())

    def dialog(self, dialog_id: str) -> Dialog:
        for dialog in self.dialogs:
            if dialog.id == dialog_id:
                return dialog
        raise KeyError(dialog_id)

    def subset(self, dialog_ids: Iterable[str]) -> "Corpus":
        """Corpus restricted to the given dialogs, keeping corpus order."""
        wanted = set(dialog_ids)
        return replace(self, dialogs=tuple(d for d in self.dialogs if d.id in wanted))

    def present_labels(self) -> List[str]:
        """Labels of target segments, in label_set order."""
        present = {segment.label for segment in self.targets()}
        return [label for label in self.label_set if label in present]


def build_corpus(
    dialogs: Sequence[Dialog],
    variant: TagsetVariant,
    label_set: Optional[Sequence[str]] = None,
) -> Corpus:
    """
    Assemble a corpus; without an explicit label set the labels of target
    segments are used in first-encounter order.
    """
    if label_set is None:
        seen: Dict[str, None] = {}
        for dialog in dialogs:
            for segment in dialog.segments:
                if segment.target:
                    seen.setdefault(segment.label, None)
        label_set = list(seen)

    dimensions: Dict[str, None] = {}
    for dialog in dialogs:
        for segment in dialog.segments:
            for dimension in segment.aux_labels:
                dimensions.setdefault(dimension, None)

    return Corpus(
        dialogs=tuple(dialogs),
        label_set=tuple(label_set),
        variant=variant,
        dimensions=tuple(dimensions),
    )


@dataclass(frozen=True)
class LabelMapping:
    """Source-label rewrite table; `drop_set` labels are removed from the corpus."""

    entries: Mapping[str, str]
    drop_set: frozenset = frozenset()
    targets: Tuple[str, ...] = ()

    def __post_init__(self):
        overlap = set(self.entries) & set(self.drop_set)
        if overlap:
            raise MappingError(
                f"Labels both mapped and dropped: {', '.join(sorted(overlap))}"
            )
        if self.targets:
            undeclared = set(self.entries.values()) - set(self.targets)
            if undeclared:
                raise MappingError(
                    f"Mapping targets outside the declared label set: "
                    f"{', '.join(sorted(undeclared))}"
                )

    @property
    def target_order(self) -> Tuple[str, ...]:
        """Declared targets, or targets in order of first appearance in entries."""
        if self.targets:
            return self.targets
        return tuple(dict.fromkeys(self.entries.values()))

    @classmethod
    def identity(cls, labels: Iterable[str]) -> "LabelMapping":
        labels = list(labels)
        return cls(entries={label: label for label in labels}, targets=tuple(labels))
