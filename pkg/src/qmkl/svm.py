"""Soft-margin SVM on precomputed kernel matrices.

The dual problem

    maximize  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij
    subject   0 <= a_i <= C,  sum_i a_i y_i = 0

is solved by sequential minimal optimization with maximal-violating-pair
working-set selection and lowest-index tie-breaking, which makes training
deterministic for a given Gram matrix.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernels import GramMatrix

_SV_THRESHOLD = 1e-10


@dataclass(frozen=True)
class SvmConfig:
    box_c: float = 1.0
    tol: float = 1e-3
    fit_bias: bool = True
    max_iter: int | None = None

    def __post_init__(self):
        if self.box_c <= 0.0:
            raise ValueError("box constraint C must be positive")
        if self.tol <= 0.0:
            raise ValueError("KKT tolerance must be positive")


@dataclass(frozen=True)
class TrainedModel:
    """Decision-function weights f(x) = sum_i beta_i k(x_i, x) + bias."""

    beta: np.ndarray
    bias: float
    support_indices: tuple
    box_c: float
    training_ref: str = ""
    duals: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float).copy()
        b.flags.writeable = False
        object.__setattr__(self, "beta", b)
        if self.duals is not None:
            d = np.asarray(self.duals, dtype=float).copy()
            d.flags.writeable = False
            object.__setattr__(self, "duals", d)


def _gram_values(gram) -> np.ndarray:
    if isinstance(gram, GramMatrix):
        return gram.values
    return np.asarray(gram, dtype=float)


def train(
    gram,
    labels,
    box_c: float = 1.0,
    tol: float = 1e-3,
    *,
    fit_bias: bool = True,
    max_iter: int | None = None,
    training_ref: str = "",
) -> TrainedModel:
    """Train by SMO on a precomputed kernel matrix.

    ``labels`` must contain both classes. A Gram matrix that reveals negative
    curvature beyond -1e-6 along a working direction triggers a warning (shot
    noise can do this) but training proceeds with the step clipped to a bound.
    """
    k = _gram_values(gram)
    y = np.asarray(labels, dtype=float)
    n = y.size
    if k.shape != (n, n):
        raise ValueError(f"gram shape {k.shape} does not match {n} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.all(y == y[0]):
        raise ValueError("degenerate labels: both classes must be present")
    if box_c <= 0.0:
        raise ValueError("box constraint C must be positive")
    if max_iter is None:
        max_iter = max(20_000, 200 * n)

    q = (y[:, None] * y[None, :]) * k
    a = np.zeros(n)
    grad = -np.ones(n)  # gradient of (1/2) a^T Q a - sum(a)
    warned_indefinite = False
    m_val = np.inf
    big_val = -np.inf

    for _ in range(max_iter):
        neg_yg = -y * grad
        up = ((y > 0) & (a < box_c - 1e-12)) | ((y < 0) & (a > 1e-12))
        low = ((y > 0) & (a > 1e-12)) | ((y < 0) & (a < box_c - 1e-12))
        if not up.any() or not low.any():
            m_val = -np.inf if not up.any() else np.max(neg_yg[up])
            big_val = np.inf if not low.any() else np.min(neg_yg[low])
            break
        up_scores = np.where(up, neg_yg, -np.inf)
        low_scores = np.where(low, neg_yg, np.inf)
        i = int(np.argmax(up_scores))  # first maximal violator: lowest index on ties
        j = int(np.argmin(low_scores))
        m_val = up_scores[i]
        big_val = low_scores[j]
        if m_val - big_val <= tol:
            break

        quad = k[i, i] + k[j, j] - 2.0 * k[i, j]
        if quad <= 0.0:
            if quad < -1e-6 and not warned_indefinite:
                warnings.warn(
                    f"kernel matrix is not positive semidefinite (curvature {quad:.3e}); "
                    "continuing with clipped steps",
                    stacklevel=2,
                )
                warned_indefinite = True
            quad = 1e-12
        step = (m_val - big_val) / quad
        limit_i = (box_c - a[i]) if y[i] > 0 else a[i]
        limit_j = a[j] if y[j] > 0 else (box_c - a[j])
        step = max(0.0, min(step, limit_i, limit_j))
        delta_i = y[i] * step
        delta_j = -y[j] * step
        a[i] = min(max(a[i] + delta_i, 0.0), box_c)
        a[j] = min(max(a[j] + delta_j, 0.0), box_c)
        grad += q[:, i] * delta_i + q[:, j] * delta_j

    if fit_bias:
        free = (a > _SV_THRESHOLD) & (a < box_c - _SV_THRESHOLD)
        neg_yg = -y * grad
        if free.any():
            bias = float(np.mean(neg_yg[free]))
        elif np.isfinite(m_val) and np.isfinite(big_val):
            bias = float((m_val + big_val) / 2.0)
        else:
            bias = 0.0
    else:
        bias = 0.0

    support = a > _SV_THRESHOLD
    beta = np.where(support, a * y, 0.0)
    return TrainedModel(
        beta=beta,
        bias=bias,
        support_indices=tuple(int(i) for i in np.flatnonzero(support)),
        box_c=box_c,
        training_ref=training_ref,
        duals=np.where(support, a, 0.0),
    )


def decide(model: TrainedModel, cross) -> np.ndarray:
    """Decision values for the columns of a train-by-new kernel table."""
    cross = np.asarray(cross, dtype=float)
    if cross.ndim == 1:
        cross = cross[:, None]
    if cross.shape[0] != model.beta.size:
        raise ValueError(
            f"kernel table has {cross.shape[0]} rows but the model was trained on {model.beta.size} points"
        )
    return model.beta @ cross + model.bias


def zero_one_risk(predictions, labels) -> float:
    """Fraction of sign mismatches; sign(0) counts as +1."""
    predictions = np.asarray(predictions, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if predictions.size == 0:
        raise ValueError("cannot score an empty prediction vector")
    if predictions.shape != labels.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {labels.shape}")
    predicted_labels = np.where(predictions >= 0.0, 1.0, -1.0)
    return float(np.mean(predicted_labels != labels))


def accuracy(predictions, labels) -> float:
    return 1.0 - zero_one_risk(predictions, labels)


def dual_objective(gram, labels, duals) -> float:
    """Value of the dual objective sum(a) - 1/2 a^T (yy^T * K) a."""
    k = _gram_values(gram)
    y = np.asarray(labels, dtype=float)
    a = np.asarray(duals, dtype=float)
    ay = a * y
    return float(a.sum() - 0.5 * ay @ k @ ay)


def save_model_json(model: TrainedModel, path) -> None:
    payload = {
        "beta": [float(b) for b in model.beta],
        "bias": model.bias,
        "support_indices": list(model.support_indices),
        "box_c": model.box_c,
        "training_ref": model.training_ref,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model_json(path) -> TrainedModel:
    with open(path) as fh:
        payload = json.load(fh)
    return TrainedModel(
        beta=np.array(payload["beta"], dtype=float),
        bias=float(payload["bias"]),
        support_indices=tuple(int(i) for i in payload["support_indices"]),
        box_c=float(payload["box_c"]),
        training_ref=payload.get("training_ref", ""),
    )
