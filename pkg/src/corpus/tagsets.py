"""
SWBD-DAMSL tag-set variants: 44 → 43 → 42 → 41 labels.

SWDA43 folds "+" (Segment) continuations into the speaker's previous
segment; SWDA42 additionally merges Abandoned and Uninterpretable into one
disruption label; SWDA41 additionally merges the two statement labels.
"""

import logging
from dataclasses import replace
from typing import List, Tuple

from .models import (
    Corpus,
    CorpusError,
    Dialog,
    Segment,
    TagsetVariant,
    UnknownLabelError,
    build_corpus,
)
from .switchboard import code_names, swda44_labels

logger = logging.getLogger(__name__)

CONTINUATION = "+"
ABANDONED = "%-"
UNINTERPRETABLE = "%"
# The merged disruption class reuses the Uninterpretable code
DISRUPTION = UNINTERPRETABLE
STATEMENT_NON_OPINION = "sd"
STATEMENT_OPINION = "sv"
STATEMENT = "s"

_ORDER = {
    TagsetVariant.SWDA44: 0,
    TagsetVariant.SWDA43: 1,
    TagsetVariant.SWDA42: 2,
    TagsetVariant.SWDA41: 3,
}


def variant_labels(variant: TagsetVariant) -> Tuple[str, ...]:
    """Declared label set of a SWDA variant, in code-table order."""
    if not variant.is_switchboard:
        raise CorpusError(f"{variant.value} has no fixed label set")

    labels: List[str] = list(swda44_labels())
    level = _ORDER[variant]
    if level >= 1:
        labels.remove(CONTINUATION)
    if level >= 2:
        labels.remove(ABANDONED)
    if level >= 3:
        position = labels.index(STATEMENT_NON_OPINION)
        labels[position] = STATEMENT
        labels.remove(STATEMENT_OPINION)
    return tuple(labels)


def display_name(code: str, variant: TagsetVariant = TagsetVariant.SWDA44) -> str:
    """Human-readable label name for tables."""
    if variant.is_switchboard:
        level = _ORDER[variant]
        if code == DISRUPTION and level >= 2:
            return "Disruption"
        if code == STATEMENT and level >= 3:
            return "Statement"
    return code_names().get(code, code)


def _merge_continuations(dialog: Dialog, orphan_label: str) -> Tuple[List[Segment], int]:
    """
    Append every "+" segment to the nearest earlier segment of the same
    speaker, possibly across other-speaker segments. Orphans (no earlier
    segment of that speaker) are kept and relabelled.
    """
    merged: List[Segment] = []
    orphans = 0
    for segment in dialog.segments:
        if segment.label != CONTINUATION:
            merged.append(segment)
            continue

        for position in range(len(merged) - 1, -1, -1):
            previous = merged[position]
            if previous.speaker == segment.speaker:
                text = " ".join(t for t in (previous.raw_text, segment.raw_text) if t)
                merged[position] = replace(previous, raw_text=text)
                break
        else:
            merged.append(replace(segment, label=orphan_label))
            orphans += 1
    return merged, orphans


def _relabel(segment: Segment, level: int) -> Segment:
    label = segment.label
    if level >= 2 and label == ABANDONED:
        label = DISRUPTION
    if level >= 3 and label in (STATEMENT_NON_OPINION, STATEMENT_OPINION):
        label = STATEMENT
    return segment if label == segment.label else replace(segment, label=label)


def apply_tagset_variant(corpus: Corpus, variant: TagsetVariant) -> Corpus:
    """
    Transform a SWDA corpus into the requested tag-set variant.

    Applying a variant to a corpus already in that variant returns it
    unchanged; moving from a coarser variant back to a finer one is an error.

    Raises:
        UnknownLabelError: a label outside the 44 short codes
        CorpusError: non-SWDA corpus, or a request to un-merge labels
    """
    if variant is TagsetVariant.ISO_TASK:
        if corpus.variant is TagsetVariant.ISO_TASK:
            return corpus
        raise CorpusError("Cannot convert a Switchboard corpus to ISO_TASK")
    if not corpus.variant.is_switchboard:
        raise CorpusError(f"Cannot apply {variant.value} to a {corpus.variant.value} corpus")

    source_level = _ORDER[corpus.variant]
    target_level = _ORDER[variant]
    if target_level < source_level:
        raise CorpusError(
            f"Cannot refine {corpus.variant.value} back into {variant.value}"
        )
    if target_level == source_level:
        return corpus

    allowed = set(variant_labels(corpus.variant))
    unknown = {s.label for s in corpus.segments() if s.label not in allowed}
    if unknown:
        raise UnknownLabelError(unknown, context=f"input {corpus.variant.value}")

    orphan_label = DISRUPTION
    dialogs: List[Dialog] = []
    total_orphans = 0
    for dialog in corpus.dialogs:
        segments = list(dialog.segments)
        if target_level >= 1:
            segments, orphans = _merge_continuations(dialog, orphan_label)
            total_orphans += orphans
        segments = [_relabel(segment, target_level) for segment in segments]
        dialogs.append(Dialog.build(dialog.id, segments))

    if total_orphans:
        logger.warning(
            f"{total_orphans} continuation segments had no earlier segment by the "
            f"same speaker; relabelled as '{orphan_label}'"
        )

    result = build_corpus(dialogs, variant, label_set=variant_labels(variant))
    logger.debug(
        f"Applied {variant.value}: {len(corpus)} -> {len(result)} segments"
    )
    return result

