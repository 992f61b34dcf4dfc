"""
Label-level corpus transformations: mapping, distribution, target masks.
"""

import logging
from collections import Counter
from dataclasses import replace
from pathlib import Path
from typing import Collection, Dict, List, NamedTuple, Optional, Union

from .models import (
    NO_FUNCTION,
    Corpus,
    CorpusError,
    Dialog,
    LabelMapping,
    MappingError,
    TagsetVariant,
    build_corpus,
)
from .tagsets import display_name

logger = logging.getLogger(__name__)

DROP = "DROP"
DEFAULT_LEGO_MAPPING = Path(__file__).parent / "data" / "lego_mapping.txt"


class LabelCount(NamedTuple):
    """One row of a label distribution table."""

    label: str
    count: int
    percent: float


def parse_label_mapping(lines, source: str = "<mapping>") -> LabelMapping:
    """
    Parse ``source -> target`` / ``source -> DROP`` lines.

    An optional ``targets: a, b, c`` line declares the target label set.
    """
    entries: Dict[str, str] = {}
    drops = set()
    targets: List[str] = []

    for line_number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if text.lower().startswith("targets:"):
            targets = [t.strip() for t in text.split(":", 1)[1].split(",") if t.strip()]
            continue
        if "->" not in text:
            raise MappingError(f"{source}:{line_number}: expected 'source -> target'")

        label, target = (part.strip() for part in text.split("->", 1))
        if not label or not target:
            raise MappingError(f"{source}:{line_number}: empty label")
        if label in entries or label in drops:
            raise MappingError(f"{source}:{line_number}: '{label}' mapped twice")

        if target == DROP:
            drops.add(label)
        else:
            entries[label] = target

    return LabelMapping(entries=entries, drop_set=frozenset(drops), targets=tuple(targets))


def load_label_mapping(path: Union[str, Path, None] = None) -> LabelMapping:
    """Load a mapping file; without a path the bundled LEGO mapping is used."""
    path = Path(path) if path else DEFAULT_LEGO_MAPPING
    with open(path, encoding="utf-8") as f:
        return parse_label_mapping(f, source=str(path))


def map_labels(corpus: Corpus, mapping: LabelMapping) -> Corpus:
    """
    Rewrite labels through `mapping`, removing segments whose label is dropped.

    Context-only segments are mapped too, so history labels share the
    targets' label space; ``<none>`` passes through unchanged.

    Segment order and dialog boundaries are preserved; dialogs left empty
    are removed. The resulting label set holds the targets actually present,
    in the mapping's target order.

    Raises:
        MappingError: some labels are neither mapped nor dropped
    """
    unmapped = sorted(
        {
            segment.label
            for segment in corpus.segments()
            if segment.label != NO_FUNCTION
            and segment.label not in mapping.entries and segment.label not in mapping.drop_set
        }
    )
    if unmapped:
        raise MappingError(f"Unmapped labels: {', '.join(unmapped)}")

    dialogs: List[Dialog] = []
    dropped = 0
    for dialog in corpus.dialogs:
        kept = []
        for segment in dialog.segments:
            if segment.label == NO_FUNCTION:
                kept.append(segment)
            elif segment.label in mapping.drop_set:
                dropped += 1
            else:
                kept.append(replace(segment, label=mapping.entries[segment.label]))
        if kept:
            dialogs.append(Dialog.build(dialog.id, kept))

    present = {segment.label for dialog in dialogs for segment in dialog.segments if segment.target}
    label_set = [label for label in mapping.target_order if label in present]

    logger.info(f"Mapped labels: {len(label_set)} targets, {dropped} segments dropped")
    return build_corpus(dialogs, corpus.variant, label_set=label_set)


def label_distribution(corpus: Corpus, speaker: Optional[str] = None) -> List[LabelCount]:
    """
    Label counts over target segments (optionally one speaker side only),
    sorted by descending count, ties by label.
    """
    counts = Counter(
        segment.label
        for segment in corpus.targets()
        if speaker is None or segment.speaker == speaker
    )
    total = sum(counts.values())
    rows = [
        LabelCount(label, count, 100.0 * count / total)
        for label, count in counts.items()
    ]
    return sorted(rows, key=lambda row: (-row.count, row.label))


def format_distribution(rows: List[LabelCount], variant: Optional[TagsetVariant] = None) -> str:
    """
    Plain-text table like the corpus description tables.

    Switchboard variants get a Name column from the code table.
    """
    if not rows:
        return "(no segments)"
    named = variant is not None and variant.is_switchboard
    names = [display_name(row.label, variant) if named else "" for row in rows]
    width = max(len("Label"), *(len(row.label) for row in rows))
    name_width = max(len("Name"), *(len(name) for name in names))

    def head(label: str, name: str) -> str:
        if named:
            return f"{label:<{width}}  {name:<{name_width}}  "
        return f"{label:<{width}}  "

    lines = [head("Label", "Name") + f"{'Count':>7}  {'%':>6}"]
    for row, name in zip(rows, names):
        lines.append(head(row.label, name) + f"{row.count:>7}  {row.percent:>6.2f}")
    lines.append(head("Total", "") + f"{sum(r.count for r in rows):>7}")
    return "\n".join(lines)


def filter_segments(corpus: Corpus, speakers: Optional[Collection[str]] = None) -> Corpus:
    """
    Mark only segments of `speakers` as classification targets.

    Every segment stays in the corpus so context features still see the
    other side of the dialog. ``None`` matches every speaker.

    Raises:
        CorpusError: no segment matches
    """
    wanted = None if speakers is None else set(speakers)

    def matches(segment) -> bool:
        return wanted is None or segment.speaker in wanted

    if not any(matches(segment) and segment.target for segment in corpus.segments()):
        raise CorpusError(f"No segments spoken by {sorted(wanted or [])}")

    dialogs = [
        Dialog(
            dialog.id,
            tuple(replace(s, target=s.target and matches(s)) for s in dialog.segments),
        )
        for dialog in corpus.dialogs
    ]
    return replace(corpus, dialogs=tuple(dialogs))
