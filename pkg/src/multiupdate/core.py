"""Shared domain types, loss functions, and linear prediction.

Conventions used throughout the package:

- Binary labels are plain ints in {-1, +1}; multiclass labels ints in [0, K).
- Feature indices are 1-based in dataset files and 0-based everywhere in
  memory; the parser does the shift exactly once.
- A binary prediction is correct iff y * score > 0 — a score of exactly 0
  counts as a mistake, so a zero-initialized model's first prediction is
  always wrong.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


class SparseVector:
    """An instance's features as parallel (index, value) arrays.

    Indices are 0-based, strictly increasing; explicit zeros are dropped at
    construction so the stored entries are exactly the nonzero support.
    """

    __slots__ = ("indices", "values", "_sq_norm")

    def __init__(self, indices, values):
        idx = np.asarray(indices, dtype=np.int64)
        val = np.asarray(values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if idx.size:
            if idx.min() < 0:
                raise ValueError("feature indices must be >= 0")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("feature indices must be strictly increasing")
        keep = val != 0.0
        if not keep.all():
            idx = idx[keep]
            val = val[keep]
        self.indices = idx
        self.values = val
        self._sq_norm = float(val @ val)

    def squared_norm(self) -> float:
        return self._sq_norm

    def norm(self) -> float:
        return math.sqrt(self._sq_norm)

    @property
    def max_index(self) -> int:
        """Largest 0-based index, or -1 for an all-zero vector."""
        return int(self.indices[-1]) if self.indices.size else -1

    def nnz(self) -> int:
        return int(self.indices.size)

    def pairs(self):
        """Entries as (index, value) tuples, 0-based."""
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def __repr__(self):
        inside = ", ".join(f"{i}:{v:g}" for i, v in self.pairs())
        return f"SparseVector({{{inside}}})"

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.indices.tobytes(), self.values.tobytes()))


def predict_linear(w: np.ndarray, x: SparseVector) -> float:
    """Sparse dot product <w, x>; the score's sign is the predicted binary label."""
    if x.max_index >= len(w):
        raise DimensionMismatchError(
            f"feature index {x.max_index} out of range for dimension {len(w)}"
        )
    if not x.indices.size:
        return 0.0
    return float(w[x.indices] @ x.values)


def hinge_loss(y: int, score: float) -> float:
    """max(0, 1 - y*score): zero only with correct sign and margin >= 1."""
    return max(0.0, 1.0 - y * score)


def logistic_loss(y: int, score: float) -> float:
    """log(1 + exp(-y*score)), overflow-safe for any finite score.

    For z = y*score below -30 the direct exp would overflow; the identity
    log(1 + e^-z) = -z + log(1 + e^z) gives the asymptotically linear branch
    with no accuracy loss.
    """
    z = y * score
    if z < -30.0:
        return -z + math.log1p(math.exp(z))
    return math.log1p(math.exp(-z))


def squared_loss(targets, predictions) -> float:
    """Mean squared difference between targets and predictions."""
    t = np.asarray(targets, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("targets and predictions must be 1-d and equal length")
    if t.size == 0:
        raise ValueError("squared_loss needs at least one pair")
    d = t - p
    return float(d @ d) / t.size


@dataclass
class UpdateInfo:
    """Record of one predict/maybe-update cycle.

    delta_sq_norm is the squared L2 change of the learner's audited vector
    (w, mu, v, or W depending on the kind) and must be 0 when nothing fired;
    mispredicted reflects the cycle's own pre-update prediction.
    """

    loss: float
    triggered: bool
    delta_sq_norm: float = 0.0
    tau: float = 0.0
    mispredicted: bool = False

    def __post_init__(self):
        if not self.triggered and (self.delta_sq_norm != 0.0 or self.tau != 0.0):
            raise ValueError("untriggered cycle must report zero delta and tau")


PASSIVE_EPS = 1e-15
"""Below this squared norm an instance is treated as all-zero and skipped."""
