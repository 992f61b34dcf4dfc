"""
Uniform segment TSV: the normalized dump written by ``main.py parse``.

    #variant	SWDA42
    #labels	sd	b	...
    #dimensions	autoFeedback	turnManagement
    dialog_id	index	speaker	label	target	aux	text
    sw2005	0	A	sd	1		Okay. /

``aux`` holds ``dimension=function`` pairs joined by ``|``.
"""

from pathlib import Path
from typing import Dict, Iterable, List, TextIO, Union

from .dialogbank import parse_dialogbank_tsv
from .labels import load_label_mapping, map_labels
from .lego import parse_lego
from .models import Corpus, Dialog, ParseError, Segment, TagsetVariant
from .switchboard import load_switchboard
from .tagsets import apply_tagset_variant

COLUMNS = ("dialog_id", "index", "speaker", "label", "target", "aux", "text")
FORMATS = ("switchboard", "lego", "dialogbank", "segments")


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ")


def write_segments(corpus: Corpus, out: TextIO) -> None:
    out.write(f"#variant\t{corpus.variant.value}\n")
    out.write("#labels\t" + "\t".join(corpus.label_set) + "\n")
    out.write("#dimensions\t" + "\t".join(corpus.dimensions) + "\n")
    out.write("\t".join(COLUMNS) + "\n")
    for segment in corpus.segments():
        aux = "|".join(f"{dim}={label}" for dim, label in segment.aux_labels.items())
        out.write(
            "\t".join(
                [
                    segment.dialog_id,
                    str(segment.index),
                    segment.speaker,
                    segment.label,
                    "1" if segment.target else "0",
                    _clean(aux),
                    _clean(segment.raw_text),
                ]
            )
            + "\n"
        )


def read_segments(stream: Iterable[str], source: str = "<segments>") -> Corpus:
    """Inverse of `write_segments`."""
    variant = TagsetVariant.ISO_TASK
    label_set: List[str] = []
    dimensions: List[str] = []
    by_dialog: Dict[str, List[Segment]] = {}
    header_seen = False

    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if line.startswith("#variant\t"):
            variant = TagsetVariant.parse(line.split("\t", 1)[1])
            continue
        if line.startswith("#labels"):
            label_set = [label for label in line.split("\t")[1:] if label]
            continue
        if line.startswith("#dimensions"):
            dimensions = [dim for dim in line.split("\t")[1:] if dim]
            continue
        if not line.strip():
            continue
        if not header_seen:
            if tuple(line.split("\t")) != COLUMNS:
                raise ParseError(line_number, "missing segment header", source=source)
            header_seen = True
            continue

        cells = line.split("\t")
        if len(cells) != len(COLUMNS):
            raise ParseError(line_number, f"expected {len(COLUMNS)} columns", source=source)
        dialog_id, index, speaker, label, target, aux, text = cells
        aux_labels = dict(pair.split("=", 1) for pair in aux.split("|") if pair)
        by_dialog.setdefault(dialog_id, []).append(
            Segment(
                dialog_id=dialog_id,
                speaker=speaker,
                index=int(index),
                raw_text=text,
                label=label,
                aux_labels=aux_labels,
                target=target == "1",
            )
        )

    dialogs = tuple(Dialog(dialog_id, tuple(segments)) for dialog_id, segments in by_dialog.items())
    return Corpus(
        dialogs=dialogs,
        label_set=tuple(label_set),
        variant=variant,
        dimensions=tuple(dimensions),
    )


def load_corpus(
    paths: List[Union[str, Path]],
    corpus_format: str,
    variant: Union[str, TagsetVariant, None] = None,
    mapping: Union[str, Path, None] = None,
) -> Corpus:
    """
    Load a corpus in any supported format and bring it to `variant`.

    LEGO tables are always passed through a label mapping (the bundled
    one when `mapping` is not given).
    """
    if corpus_format not in FORMATS:
        raise ValueError(f"Unknown corpus format '{corpus_format}'")

    if corpus_format == "switchboard":
        corpus = load_switchboard(paths)
    else:
        if len(paths) != 1:
            raise ValueError(f"Format '{corpus_format}' takes exactly one file")
        path = Path(paths[0])
        with open(path, encoding="utf-8") as f:
            if corpus_format == "lego":
                corpus = map_labels(parse_lego(f, source=str(path)), load_label_mapping(mapping))
            elif corpus_format == "dialogbank":
                corpus = parse_dialogbank_tsv(f, source=str(path))
            else:
                corpus = read_segments(f, source=str(path))

    if variant is not None:
        corpus = apply_tagset_variant(corpus, TagsetVariant.parse(str(getattr(variant, "value", variant))))
    return corpus
