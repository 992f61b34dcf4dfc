"""
Reader for Switchboard Dialog Act Corpus transcripts (`.utt` line format).

Each utterance line looks like::

    sd          B.2 utt1: I think it usually does. /

Markup characters in the text ({F uh, }, [ ... + ... ], -/, <laughter>) are
kept verbatim; the tokenizer decides how to treat them.
"""

import logging
import re
from dataclasses import replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from .models import (
    Corpus,
    Dialog,
    EmptyDialogError,
    ParseError,
    Segment,
    TagsetVariant,
    build_corpus,
)

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"

_UTTERANCE_LINE = re.compile(
    r"^(?P<label>\S+)\s+(?P<speaker>[A-Za-z]+)\.(?P<turn>\d+)\s+utt(?P<utt>\d+):(?:\s+(?P<text>.*?))?\s*$"
)
_HEADER_RULE = re.compile(r"^=+\s*$")


@lru_cache(maxsize=1)
def swda_code_table() -> Tuple[Tuple[str, str], ...]:
    """(code, display name) pairs of the 44-label clustering, in table order."""
    pairs = []
    with open(DATA_DIR / "swda_labels.tsv", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            code, name = line.split("\t", 1)
            pairs.append((code, name))
    return tuple(pairs)


def swda44_labels() -> Tuple[str, ...]:
    return tuple(code for code, _ in swda_code_table())


def cluster_act_tag(raw_tag: str) -> str:
    """
    Collapse a raw SWBD-DAMSL tag combination into one of the 44 short codes.

    Only the first tag of a multi-tag annotation is kept. The function is
    idempotent on the short codes themselves.
    """
    tag = re.split(r"\s*[,;]\s*", raw_tag.strip())[0]

    if tag in ("qy^d", "qw^d", "b^m"):
        return tag
    if tag == "nn^e":
        return "ng"
    if tag == "ny^e":
        return "na"

    tag = re.sub(r"(.)\^.*", r"\1", tag)
    tag = re.sub(r"[()@*]", "", tag)

    if tag in ("qr", "qy"):
        return "qy"
    if tag in ("fe", "ba"):
        return "ba"
    if tag in ("oo", "co", "cc"):
        return "oo_co_cc"
    if tag in ("fx", "sv"):
        return "sv"
    if tag in ("aap", "am"):
        return "aap_am"
    if tag in ("arp", "nd"):
        return "arp_nd"
    if tag in ("fo", "o", "fw", '"', "by", "bc"):
        return 'fo_o_fw_"_by_bc'
    return tag


def parse_switchboard(
    stream: Iterable[str], dialog_id: str, source: str = "<stream>"
) -> Dialog:
    """
    Parse utterance lines into a Dialog, one Segment per line in file order.

    Blank lines and lines starting with '#' are skipped. When the stream has
    a header block terminated by a line of '=' characters (as distributed
    transcripts do), everything up to that rule is skipped.

    Raises:
        ParseError: malformed utterance line (carries the 1-based line number)
        EmptyDialogError: no utterance lines at all
    """
    lines = list(stream)
    start = 0
    for position, line in enumerate(lines):
        if _HEADER_RULE.match(line.strip()):
            start = position + 1
            break

    segments: List[Segment] = []
    for line_number, line in enumerate(lines[start:], start=start + 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue

        match = _UTTERANCE_LINE.match(stripped)
        if match is None:
            raise ParseError(
                line_number,
                "expected '<label> <speaker>.<turn> utt<k>: <text>'",
                source=source,
            )

        segments.append(
            Segment(
                dialog_id=dialog_id,
                speaker=match.group("speaker"),
                index=len(segments),
                raw_text=match.group("text") or "",
                label=match.group("label"),
            )
        )

    if not segments:
        raise EmptyDialogError(f"{source}: no utterances found")

    return Dialog(dialog_id, tuple(segments))


def cluster_dialog(dialog: Dialog) -> Dialog:
    """Rewrite raw tag combinations of a dialog into 44-label short codes."""
    return Dialog(
        dialog.id,
        tuple(replace(s, label=cluster_act_tag(s.label)) for s in dialog.segments),
    )


def load_switchboard(
    paths: Sequence[Union[str, Path]], cluster_tags: bool = True
) -> Corpus:
    """
    Read `.utt` files (or directories containing them) into a SWDA44 corpus.

    The dialog id is the file stem; files are read in sorted path order so
    corpus order (and therefore fold assignment) does not depend on the
    filesystem.
    """
    files: List[Path] = []
    for path in map(Path, paths):
        if path.is_dir():
            files.extend(sorted(path.rglob("*.utt")))
        else:
            files.append(path)

    dialogs: List[Dialog] = []
    for file_path in files:
        with open(file_path, encoding="utf-8") as f:
            dialog = parse_switchboard(f, file_path.stem, source=str(file_path))
        dialogs.append(cluster_dialog(dialog) if cluster_tags else dialog)

    logger.info(
        f"Loaded {len(dialogs)} Switchboard dialogs "
        f"({sum(len(d) for d in dialogs)} segments)"
    )
    return build_corpus(dialogs, TagsetVariant.SWDA44, label_set=swda44_labels())


def code_names() -> Dict[str, str]:
    return dict(swda_code_table())
