"""
Feature-key dictionary and sparse vectors.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from .ngrams import FeatureConfigError


@dataclass(frozen=True)
class SparseVector:
    """Sorted (feature id, value) pairs with unique ids and positive values."""

    ids: Tuple[int, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.ids) != len(self.values):
            raise ValueError("ids and values differ in length")
        for previous, current in zip(self.ids, self.ids[1:]):
            if current <= previous:
                raise ValueError("SparseVector ids must be strictly increasing")
        if any(not value > 0 for value in self.values):
            raise ValueError("SparseVector values must be positive")

    @classmethod
    def from_counts(cls, counts: Mapping[int, float]) -> "SparseVector":
        items = sorted((i, float(v)) for i, v in counts.items() if v)
        return cls(tuple(i for i, _ in items), tuple(v for _, v in items))

    def to_dict(self) -> Dict[int, float]:
        return dict(zip(self.ids, self.values))

    def __add__(self, other: "SparseVector") -> "SparseVector":
        merged = self.to_dict()
        for i, v in zip(other.ids, other.values):
            merged[i] = merged.get(i, 0.0) + v
        return SparseVector.from_counts(merged)

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        return iter(zip(self.ids, self.values))


class FeatureDictionary:
    """
    Feature key to dense id map.

    Ids are assigned in insertion order, 0..size-1. Once frozen the
    dictionary never grows and unknown keys are skipped when vectorizing.
    """

    def __init__(self, keys: Optional[Iterable[str]] = None):
        self._ids: Dict[str, int] = {}
        self._frozen = False
        for key in keys or ():
            self.add(key)

    @classmethod
    def from_keys(cls, keys: Iterable[str]) -> "FeatureDictionary":
        """Frozen dictionary with ids in the given key order."""
        return cls(keys).freeze()

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "FeatureDictionary":
        self._frozen = True
        return self

    def add(self, key: str) -> int:
        if key in self._ids:
            return self._ids[key]
        if self._frozen:
            raise FeatureConfigError(f"Cannot add '{key}' to a frozen dictionary")
        self._ids[key] = len(self._ids)
        return self._ids[key]

    def get(self, key: str) -> Optional[int]:
        return self._ids.get(key)

    def keys(self) -> List[str]:
        """Keys in id order."""
        return list(self._ids)

    def vectorize(self, features: Mapping[str, float]) -> SparseVector:
        """Bind a feature map to ids; keys not in the dictionary are dropped."""
        bound: Dict[int, float] = {}
        for key, value in features.items():
            feature_id = self._ids.get(key)
            if feature_id is not None:
                bound[feature_id] = bound.get(feature_id, 0.0) + value
        return SparseVector.from_counts(bound)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, key: str) -> bool:
        return key in self._ids

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureDictionary):
            return NotImplemented
        return self.keys() == other.keys()

    def __repr__(self) -> str:
        return f"FeatureDictionary(size={len(self)}, frozen={self._frozen})"
