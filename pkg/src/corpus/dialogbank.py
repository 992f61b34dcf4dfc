"""
Reader for the simplified DialogBank TSV export.

Header: ``dialog_id  seg_id  speaker  text  task  <dim1>  <dim2> ...`` with
one row per functional segment. The Task function becomes the segment
label; every other non-empty dimension cell goes to ``aux_labels``.
"""

import csv
import logging
from typing import Dict, Iterable, List, Set

from .models import (
    NO_FUNCTION,
    Corpus,
    CorpusError,
    Dialog,
    ParseError,
    Segment,
    TagsetVariant,
    build_corpus,
)

logger = logging.getLogger(__name__)

FIXED_COLUMNS = ("dialog_id", "seg_id", "speaker", "text", "task")


def parse_dialogbank_tsv(stream: Iterable[str], source: str = "<stream>") -> Corpus:
    """
    Parse the simplified DialogBank TSV.

    Segments without a Task function but with some other-dimension function
    are kept as context-only segments labelled ``<none>``.

    Raises:
        ParseError: bad header, short row, or a row with no function at all
        CorpusError: duplicate seg_id inside a dialog
    """
    lines = list(stream)
    if not lines:
        raise ParseError(1, "empty DialogBank table", source=source)

    reader = csv.reader(lines, delimiter="\t", quoting=csv.QUOTE_NONE)
    header = [column.strip() for column in next(reader)]
    if tuple(header[: len(FIXED_COLUMNS)]) != FIXED_COLUMNS:
        raise ParseError(
            1, f"header must start with {' '.join(FIXED_COLUMNS)}", source=source
        )
    dimensions = header[len(FIXED_COLUMNS):]

    by_dialog: Dict[str, List[Segment]] = {}
    seg_ids: Dict[str, Set[str]] = {}

    for row in reader:
        line_number = reader.line_num
        if not any(cell.strip() for cell in row):
            continue
        if len(row) < len(FIXED_COLUMNS):
            raise ParseError(line_number, f"expected at least {len(FIXED_COLUMNS)} columns", source=source)
        row = row + [""] * (len(header) - len(row))

        dialog_id, seg_id, speaker, text, task = (cell.strip() for cell in row[:5])
        aux = {
            dimension: row[len(FIXED_COLUMNS) + offset].strip()
            for offset, dimension in enumerate(dimensions)
            if row[len(FIXED_COLUMNS) + offset].strip()
        }
        if not task and not aux:
            raise ParseError(line_number, f"segment '{seg_id}' has no communicative function", source=source)

        known = seg_ids.setdefault(dialog_id, set())
        if seg_id in known:
            raise CorpusError(f"{source}:{line_number}: duplicate seg_id '{seg_id}' in dialog '{dialog_id}'")
        known.add(seg_id)

        by_dialog.setdefault(dialog_id, []).append(
            Segment(
                dialog_id=dialog_id,
                speaker=speaker,
                index=0,
                raw_text=text,
                label=task or NO_FUNCTION,
                aux_labels=aux,
                target=bool(task),
            )
        )

    dialogs = [Dialog.build(dialog_id, segments) for dialog_id, segments in by_dialog.items()]
    if not dialogs:
        raise ParseError(2, "no segments", source=source)

    corpus = build_corpus(dialogs, TagsetVariant.ISO_TASK)
    # Keep the declared dimension order of the header, not first use
    corpus = Corpus(
        dialogs=corpus.dialogs,
        label_set=corpus.label_set,
        variant=corpus.variant,
        dimensions=tuple(dimensions),
    )
    logger.info(
        f"Loaded DialogBank table {source}: {len(dialogs)} dialogs, {len(corpus)} segments"
    )
    return corpus
