"""
Word n-gram counting.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Tuple

from .tokenizer import TokenSequence

MAX_ORDER = 5


class FeatureConfigError(Exception):
    """Raised for invalid feature or context configuration."""

    pass


@dataclass(frozen=True)
class NGramSpec:
    """N-gram orders to extract: 1..max_n when cumulative, else max_n only."""

    max_n: int = 2
    cumulative: bool = True

    def __post_init__(self):
        if not 1 <= self.max_n <= MAX_ORDER:
            raise FeatureConfigError(f"n-gram order must be within 1..{MAX_ORDER}, got {self.max_n}")

    @property
    def orders(self) -> Tuple[int, ...]:
        if self.cumulative:
            return tuple(range(1, self.max_n + 1))
        return (self.max_n,)


def ngram_key(order: int, window) -> str:
    return f"{order}:{' '.join(window)}"


def extract_ngrams(tokens: TokenSequence, spec: NGramSpec) -> Counter:
    """Count every contiguous window of each included order, sentinels included."""
    sequence = tokens.tokens
    counts: Counter = Counter()
    for order in spec.orders:
        for start in range(len(sequence) - order + 1):
            counts[ngram_key(order, sequence[start:start + order])] += 1
    return counts
