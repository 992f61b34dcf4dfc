"""
One-vs-rest multi-class linear model.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from ..features.dictionary import FeatureDictionary, SparseVector
from ..utils.decorators import log_execution_time
from .solver import SolverError, SolverParams, TrainingProblem, train_binary

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearModel:
    """
    Per-class weight rows over the features plus a trailing bias weight.

    `weights` is read-only; label order is the class index order.
    """

    weights: np.ndarray
    labels: Tuple[str, ...]
    params: SolverParams = field(default_factory=SolverParams)
    dictionary: Optional[FeatureDictionary] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != len(self.labels):
            raise SolverError(
                f"Weight matrix of shape {weights.shape} does not fit {len(self.labels)} labels"
            )
        if not np.all(np.isfinite(weights)):
            raise SolverError("Model weights must be finite")
        if self.dictionary is not None and len(self.dictionary) != weights.shape[1] - 1:
            raise SolverError(
                f"Dictionary has {len(self.dictionary)} features, weights have {weights.shape[1] - 1}"
            )
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1

    @property
    def bias(self) -> float:
        return self.params.bias


def _class_row(
    problem: TrainingProblem, class_index: int, params: SolverParams, label: str
) -> np.ndarray:
    targets = np.where(problem.labels == class_index, 1.0, -1.0)
    if not np.any(targets > 0):
        return np.zeros(problem.n_features + 1)
    try:
        solution = train_binary(problem, targets, params)
    except SolverError as e:
        raise SolverError(f"class '{label}': {e}")
    logger.debug(f"class '{label}': {solution.epochs} epochs, converged={solution.converged}")
    return solution.w


@log_execution_time()
def train_ovr(
    problem: TrainingProblem,
    params: SolverParams,
    labels: Optional[Sequence[str]] = None,
    jobs: int = 1,
    dictionary: Optional[FeatureDictionary] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> LinearModel:
    """
    Train one binary SVM per class (that class +1, the rest -1).

    Classes with no training sample get an all-zero row. Subproblems run on
    up to `jobs` threads; rows are assembled by class index.
    """
    if labels is None:
        labels = [str(c) for c in range(problem.n_classes)]
    if len(labels) != problem.n_classes:
        raise SolverError(f"{len(labels)} label names for {problem.n_classes} classes")

    def run(class_index: int) -> np.ndarray:
        return _class_row(problem, class_index, params, labels[class_index])

    workers = max(1, min(int(jobs), problem.n_classes))
    if workers == 1:
        rows = [run(c) for c in range(problem.n_classes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, range(problem.n_classes)))

    logger.info(
        f"Trained {problem.n_classes} one-vs-rest classifiers on "
        f"{problem.n_samples} samples x {problem.n_features} features"
    )
    return LinearModel(
        weights=np.vstack(rows),
        labels=tuple(labels),
        params=params,
        dictionary=dictionary,
        meta=dict(meta or {}),
    )


def decision_values(model: LinearModel, x: SparseVector) -> np.ndarray:
    """w_c . x + bias_weight_c * bias for every class c."""
    ids = np.asarray(x.ids, dtype=np.int64)
    if ids.size and ids[-1] >= model.n_features:
        raise SolverError(
            f"Feature id {int(ids[-1])} outside the model's {model.n_features} features"
        )
    values = np.asarray(x.values, dtype=np.float64)
    return model.weights[:, ids] @ values + model.weights[:, -1] * model.bias


def predict(model: LinearModel, x: SparseVector) -> int:
    """Argmax of the decision values; ties go to the lowest class index."""
    return int(np.argmax(decision_values(model, x)))


def decision_matrix(model: LinearModel, X: sparse.spmatrix) -> np.ndarray:
    """Decision values for every row of a CSR matrix, shape (n, n_classes)."""
    if X.shape[1] != model.n_features:
        raise SolverError(
            f"Matrix has {X.shape[1]} features, model expects {model.n_features}"
        )
    scores = X @ model.weights[:, :-1].T
    return np.asarray(scores) + model.weights[:, -1] * model.bias


def predict_matrix(model: LinearModel, X: sparse.spmatrix) -> np.ndarray:
    return np.argmax(decision_matrix(model, X), axis=1)


def vectors_to_csr(vectors: Sequence[SparseVector], n_features: int) -> sparse.csr_matrix:
    indptr: List[int] = [0]
    indices: List[int] = []
    data: List[float] = []
    for vector in vectors:
        indices.extend(vector.ids)
        data.extend(vector.values)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(vectors), n_features),
    )
