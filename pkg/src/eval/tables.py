"""
Result grids and their CSV / markdown renderings.
"""

import csv
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, TextIO, Tuple

from .metrics import CVResult, ExperimentError
from .significance import ALPHA, SignificanceResult

CSV_HEADER = ("mode", "n_prev", "fold", "accuracy")


@dataclass
class ResultTable:
    """CV results keyed by (row name, n_prev), plus adjacent-cell significance."""

    row_names: List[str]
    n_prev_values: List[int]
    cells: Dict[Tuple[str, int], CVResult] = field(default_factory=dict)
    # (row, n) -> test of cell n against the cell before it in the same row
    significance: Dict[Tuple[str, int], SignificanceResult] = field(default_factory=dict)

    def add(self, row: str, n_prev: int, result: CVResult) -> None:
        if row not in self.row_names or n_prev not in self.n_prev_values:
            raise ExperimentError(f"Cell ({row}, {n_prev}) is outside the table grid")
        self.cells[(row, n_prev)] = result

    def cell(self, row: str, n_prev: int) -> CVResult:
        try:
            return self.cells[(row, n_prev)]
        except KeyError:
            raise ExperimentError(f"Missing cell ({row}, {n_prev})")

    @property
    def complete(self) -> bool:
        return all((row, n) in self.cells for row in self.row_names for n in self.n_prev_values)

    def __len__(self) -> int:
        return len(self.cells)

    def write_csv(self, out: TextIO) -> None:
        """One line per (row, n_prev, fold) in grid order."""
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.row_names:
            for n_prev in self.n_prev_values:
                for fold, value in enumerate(self.cell(row, n_prev).per_fold_accuracy):
                    writer.writerow((row, n_prev, fold, repr(float(value))))

    def _markdown_grid(self, value_of, marked: bool) -> List[str]:
        header = "| Context | " + " | ".join(str(n) for n in self.n_prev_values) + " |"
        rule = "|---|" + "---:|" * len(self.n_prev_values)
        lines = [header, rule]
        for row in self.row_names:
            cells = []
            for n_prev in self.n_prev_values:
                text = f"{100 * value_of(self.cell(row, n_prev)):.2f}"
                test = self.significance.get((row, n_prev))
                if marked and test is not None and test.significant:
                    text += "*"
                cells.append(text)
            lines.append(f"| {row} | " + " | ".join(cells) + " |")
        return lines

    def to_markdown(self, title: Optional[str] = None) -> str:
        lines: List[str] = []
        if title:
            lines += [f"## {title}", ""]
        lines += ["Mean accuracy (%) over folds, by number of preceding segments.", ""]
        lines += self._markdown_grid(lambda result: result.mean_accuracy, marked=True)
        lines += [
            "",
            f"`*` significant difference from the cell to its left "
            f"(Wilcoxon signed-rank test, p < {ALPHA}).",
            "",
            "Pooled accuracy (%) over all folds.",
            "",
        ]
        lines += self._markdown_grid(lambda result: result.pooled_accuracy, marked=False)
        return "\n".join(lines) + "\n"


def read_result_csv(stream: Iterable[str]) -> Dict[Tuple[str, int], List[float]]:
    """Per-fold accuracies of every cell of a result CSV, in fold order."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ExperimentError(f"Result CSV must start with '{','.join(CSV_HEADER)}'")

    folds: Dict[Tuple[str, int], Dict[int, float]] = {}
    for line_number, record in enumerate(reader, start=2):
        if not record:
            continue
        try:
            mode, n_prev, fold, value = record
            folds.setdefault((mode, int(n_prev)), {})[int(fold)] = float(value)
        except ValueError:
            raise ExperimentError(f"Bad result CSV line {line_number}: {','.join(record)}")
    return {cell: [values[f] for f in sorted(values)] for cell, values in folds.items()}


def write_confusion(result: CVResult, out: TextIO) -> None:
    """Confusion matrix CSV: rows gold labels, columns predicted labels."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["gold\\predicted", *result.labels])
    for label, row in zip(result.labels, result.confusion):
        writer.writerow([label, *(int(count) for count in row)])
