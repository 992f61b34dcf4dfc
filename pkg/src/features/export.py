"""
Sparse text export of vectorized samples.

One sample per line, ``label qid:dialog-id f1:v1 f2:v2 ...``. Labels are
1-based class numbers (line n of labels.txt); feature ids are 1-based
(line n of dictionary.txt) and ascending.
"""

from typing import Iterable, Sequence, TextIO, Tuple

from .dictionary import FeatureDictionary, SparseVector


def format_value(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def format_sample(label_number: int, qid: str, vector: SparseVector) -> str:
    pairs = " ".join(f"{i + 1}:{format_value(v)}" for i, v in vector)
    return f"{label_number} qid:{qid} {pairs}".rstrip()


def write_sparse(
    rows: Iterable[Tuple[int, str, SparseVector]],
    out: TextIO,
) -> int:
    """Write (class index, dialog id, vector) rows; returns the row count."""
    count = 0
    for class_index, qid, vector in rows:
        out.write(format_sample(class_index + 1, qid, vector) + "\n")
        count += 1
    return count


def write_lines(items: Sequence[str], out: TextIO) -> None:
    for item in items:
        out.write(f"{item}\n")


def write_dictionary(dictionary: FeatureDictionary, out: TextIO) -> None:
    write_lines(dictionary.keys(), out)
