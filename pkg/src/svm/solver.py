"""
Dual coordinate descent for L2-regularized hinge-loss linear SVMs.

Solves

    max_a  sum(a) - 1/2 ||sum_i a_i y_i x_i||^2    s.t.  0 <= a_i <= C

one multiplier at a time, keeping w = sum_i a_i y_i x_i up to date. The bias
is an extra constant feature of value `bias` appended to every sample.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence

import numpy as np
from numba import njit
from scipy import sparse

from ..features.dictionary import SparseVector

logger = logging.getLogger(__name__)


class SolverError(Exception):
    """Raised for invalid training problems or a diverging solve."""

    pass


@dataclass(frozen=True)
class SolverParams:
    """Coordinate-descent settings."""

    cost: float = 0.1
    stop_tol: float = 0.01
    max_epochs: int = 1000
    seed: int = 0
    bias: float = 1.0

    def __post_init__(self):
        if not self.cost > 0:
            raise SolverError(f"cost must be positive, got {self.cost}")
        if not self.stop_tol > 0:
            raise SolverError(f"stop_tol must be positive, got {self.stop_tol}")
        if self.max_epochs < 1:
            raise SolverError(f"max_epochs must be at least 1, got {self.max_epochs}")
        if self.bias < 0:
            raise SolverError(f"bias must be non-negative, got {self.bias}")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, float]) -> "SolverParams":
        return cls(
            cost=float(data.get("cost", 0.1)),
            stop_tol=float(data.get("stop_tol", 0.01)),
            max_epochs=int(data.get("max_epochs", 1000)),
            seed=int(data.get("seed", 0)),
            bias=float(data.get("bias", 1.0)),
        )


class TrainingProblem:
    """Samples in CSR layout plus class indices."""

    def __init__(
        self,
        indptr: np.ndarray,
        indices: np.ndarray,
        data: np.ndarray,
        labels: np.ndarray,
        n_classes: int,
        n_features: int,
    ):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        self.n_classes = int(n_classes)
        self.n_features = int(n_features)
        self._validate()

    @classmethod
    def from_vectors(
        cls,
        vectors: Sequence[SparseVector],
        labels: Sequence[int],
        n_classes: int,
        n_features: int,
    ) -> "TrainingProblem":
        if len(vectors) != len(labels):
            raise SolverError(f"{len(vectors)} samples but {len(labels)} labels")
        indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
        for row, vector in enumerate(vectors):
            indptr[row + 1] = indptr[row] + len(vector)
        indices = np.fromiter(
            (i for vector in vectors for i in vector.ids), dtype=np.int64, count=int(indptr[-1])
        )
        data = np.fromiter(
            (v for vector in vectors for v in vector.values), dtype=np.float64, count=int(indptr[-1])
        )
        return cls(indptr, indices, data, np.asarray(labels, dtype=np.int64), n_classes, n_features)

    def _validate(self) -> None:
        if self.indptr.shape[0] != self.labels.shape[0] + 1:
            raise SolverError("CSR row pointer does not match the number of labels")
        if self.n_classes < 1:
            raise SolverError("A training problem needs at least one class")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise SolverError(f"Class indices must be within 0..{self.n_classes - 1}")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.n_features):
            raise SolverError(f"Feature ids must be within 0..{self.n_features - 1}")
        if not np.all(np.isfinite(self.data)):
            raise SolverError("Non-finite feature value in training data")

    @property
    def n_samples(self) -> int:
        return int(self.labels.shape[0])

    def to_csr(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (self.data, self.indices, self.indptr), shape=(self.n_samples, self.n_features)
        )

    def subset(self, rows: Sequence[int]) -> "TrainingProblem":
        matrix = self.to_csr()[np.asarray(rows, dtype=np.int64)]
        return TrainingProblem(
            matrix.indptr, matrix.indices, matrix.data,
            self.labels[np.asarray(rows, dtype=np.int64)],
            self.n_classes, self.n_features,
        )


@dataclass(frozen=True)
class BinarySolution:
    """Result of one binary solve; `w` has n_features + 1 entries (bias last)."""

    w: np.ndarray
    alpha: np.ndarray
    epochs: int
    converged: bool
    objective: Optional[np.ndarray] = None


@njit(cache=True, nogil=True)
def _dual_cd(indptr, indices, data, y, n_features, cost, bias, stop_tol, max_epochs, seed, track):
    m = y.shape[0]
    w = np.zeros(n_features + 1)
    alpha = np.zeros(m)
    objective = np.zeros(max_epochs)

    sq_norms = np.empty(m)
    for i in range(m):
        total = bias * bias
        for k in range(indptr[i], indptr[i + 1]):
            total += data[k] * data[k]
        sq_norms[i] = total

    np.random.seed(seed)
    epochs = 0
    converged = False
    for epoch in range(max_epochs):
        order = np.random.permutation(m)
        max_violation = 0.0
        for t in range(m):
            i = order[t]
            yi = y[i]

            wx = w[n_features] * bias
            for k in range(indptr[i], indptr[i + 1]):
                wx += w[indices[k]] * data[k]
            gradient = yi * wx - 1.0

            a = alpha[i]
            if a == 0.0:
                projected = min(gradient, 0.0)
            elif a == cost:
                projected = max(gradient, 0.0)
            else:
                projected = gradient
            if abs(projected) > max_violation:
                max_violation = abs(projected)
            if projected == 0.0:
                continue

            if sq_norms[i] > 0.0:
                updated = min(max(a - gradient / sq_norms[i], 0.0), cost)
            else:
                updated = cost
            step = (updated - a) * yi
            alpha[i] = updated
            for k in range(indptr[i], indptr[i + 1]):
                w[indices[k]] += step * data[k]
            w[n_features] += step * bias

        epochs = epoch + 1
        if track:
            objective[epoch] = alpha.sum() - 0.5 * (w * w).sum()
        if max_violation < stop_tol:
            converged = True
            break

    return w, alpha, epochs, converged, objective[:epochs]


def train_binary(
    problem: TrainingProblem,
    targets: np.ndarray,
    params: SolverParams,
    track_objective: bool = False,
) -> BinarySolution:
    """
    Solve one binary problem; `targets` holds +1/-1 per sample.

    Raises:
        SolverError: empty problem, bad targets, or non-finite result
    """
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if problem.n_samples == 0:
        raise SolverError("Cannot train on an empty problem")
    if targets.shape[0] != problem.n_samples or not np.all(np.abs(targets) == 1.0):
        raise SolverError("Binary targets must be +1/-1, one per sample")

    w, alpha, epochs, converged, objective = _dual_cd(
        problem.indptr,
        problem.indices,
        problem.data,
        targets,
        problem.n_features,
        float(params.cost),
        float(params.bias),
        float(params.stop_tol),
        int(params.max_epochs),
        int(params.seed),
        bool(track_objective),
    )
    if not np.all(np.isfinite(w)):
        raise SolverError("Coordinate descent produced non-finite weights")
    if not converged:
        logger.warning(
            f"Coordinate descent stopped after {epochs} epochs without reaching "
            f"stop_tol={params.stop_tol}"
        )
    return BinarySolution(
        w=w,
        alpha=alpha,
        epochs=int(epochs),
        converged=bool(converged),
        objective=objective if track_objective else None,
    )

