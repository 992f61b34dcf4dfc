"""
Seeded k-fold assignment over dialogs or segments.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, List, Sequence, Tuple

import numpy as np

from ..corpus.models import Corpus
from .metrics import ExperimentError

logger = logging.getLogger(__name__)


class FoldError(ExperimentError):
    """Raised for impossible fold requests."""

    pass


class Granularity(str, Enum):
    DIALOG = "dialog"
    SEGMENT = "segment"


@dataclass(frozen=True)
class FoldAssignment:
    """Unit (dialog id or segment key) to fold index."""

    k: int
    assignment: Dict[Hashable, int]
    granularity: Granularity
    seed: int

    def fold_of_key(self, key: Tuple[str, int]) -> int:
        if self.granularity is Granularity.DIALOG:
            return self.assignment[key[0]]
        return self.assignment[key]

    def sizes(self) -> List[int]:
        sizes = [0] * self.k
        for fold in self.assignment.values():
            sizes[fold] += 1
        return sizes

    def units(self, fold: int) -> List[Hashable]:
        return [unit for unit, f in self.assignment.items() if f == fold]


def make_folds(
    corpus: Corpus,
    k: int = 10,
    seed: int = 0,
    granularity: Granularity = Granularity.DIALOG,
) -> FoldAssignment:
    """
    Shuffle the units with `seed`, then deal them round-robin into k folds.

    Raises:
        FoldError: k < 2 or more folds than units
    """
    granularity = Granularity(granularity)
    if granularity is Granularity.DIALOG:
        units: Sequence[Hashable] = [dialog.id for dialog in corpus.dialogs]
    else:
        units = [segment.key for segment in corpus.targets()]

    if k < 2:
        raise FoldError(f"Need at least 2 folds, got {k}")
    if k > len(units):
        raise FoldError(f"Cannot make {k} folds from {len(units)} {granularity.value} units")

    order = np.random.default_rng(seed).permutation(len(units))
    assignment = {units[int(unit)]: position % k for position, unit in enumerate(order)}
    logger.debug(f"Assigned {len(units)} {granularity.value} units to {k} folds (seed={seed})")
    return FoldAssignment(k=k, assignment=assignment, granularity=granularity, seed=seed)
