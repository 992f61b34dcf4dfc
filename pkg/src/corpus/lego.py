"""
Reader for LEGO (Let's Go bus information) dialog exports.

Expected header: ``call_id,turn_index,side,transcript,da_label`` (comma or tab
separated) with an optional ``sub_index`` column for system turns that
contain several utterances.
"""

import csv
import logging
from typing import Dict, Iterable, List, Tuple

from .models import Corpus, CorpusError, Dialog, ParseError, Segment, TagsetVariant, build_corpus

logger = logging.getLogger(__name__)

SIDES = ("System", "User")
REQUIRED_COLUMNS = ("call_id", "turn_index", "side", "transcript", "da_label")


def _sniff_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def parse_lego(stream: Iterable[str], source: str = "<stream>") -> Corpus:
    """
    Parse a LEGO table into a corpus, one dialog per call.

    System transcripts keep their casing and punctuation; user transcripts
    (uppercase ASR output) are stored verbatim as well.

    Raises:
        ParseError: missing columns, bad turn index, unknown side value
        CorpusError: duplicate (call_id, turn_index, sub_index)
    """
    lines = list(stream)
    if not lines:
        raise ParseError(1, "empty LEGO table", source=source)

    reader = csv.DictReader(lines, delimiter=_sniff_delimiter(lines[0]))
    missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ParseError(1, f"missing columns: {', '.join(missing)}", source=source)
    has_sub_index = "sub_index" in (reader.fieldnames or [])

    rows: Dict[str, List[Tuple[int, int, int, Segment]]] = {}
    seen = set()
    occurrences: Dict[Tuple[str, int], int] = {}

    for row_number, row in enumerate(reader):
        line_number = reader.line_num
        call_id = row["call_id"].strip()
        side = row["side"].strip()
        if side not in SIDES:
            raise ParseError(
                line_number, f"unknown side '{side}' (expected System or User)", source=source
            )

        try:
            turn_index = int(row["turn_index"])
        except (TypeError, ValueError):
            raise ParseError(line_number, f"bad turn_index '{row['turn_index']}'", source=source)

        if has_sub_index and (row.get("sub_index") or "").strip():
            sub_index = int(row["sub_index"])
        else:
            sub_index = occurrences.get((call_id, turn_index), 0)
        occurrences[(call_id, turn_index)] = sub_index + 1

        key = (call_id, turn_index, sub_index)
        if key in seen:
            raise CorpusError(
                f"{source}:{line_number}: duplicate utterance "
                f"(call {call_id}, turn {turn_index}, sub-index {sub_index})"
            )
        seen.add(key)

        segment = Segment(
            dialog_id=call_id,
            speaker=side,
            index=0,
            raw_text=row["transcript"] or "",
            label=(row["da_label"] or "").strip(),
        )
        rows.setdefault(call_id, []).append((turn_index, sub_index, row_number, segment))

    dialogs = []
    for call_id, entries in rows.items():
        entries.sort(key=lambda entry: entry[:3])
        dialogs.append(Dialog.build(call_id, (entry[3] for entry in entries)))

    corpus = build_corpus(dialogs, TagsetVariant.ISO_TASK)
    logger.info(
        f"Loaded LEGO table {source}: {len(dialogs)} calls, {len(corpus)} utterances"
    )
    return corpus
