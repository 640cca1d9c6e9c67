"""Constrained derivative-free minimization of training risk over kernel weights.

Weight vectors live on probability simplices (they are populations of a
diagonal density matrix). Each simplex is optimized through its first
``dim - 1`` coordinates with the last entry as remainder, under non-negativity
inequality constraints, using the COBYLA linear-approximation trust-region
method; the trust radius shrinks from ``initial_step`` down to ``final_step``.
Points handed to the objective and returned to callers are clipped to the
simplex and renormalized.

Training the base learner anew inside every objective evaluation realizes the
alternation between base-learner weights and kernel weights implicitly: each
step in weight space is answered by a full re-optimization of the SVM duals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .kernels import GramMatrix
from .svm import SvmConfig, decide, train, zero_one_risk

_NONFINITE_PENALTY = 1e12


@dataclass(frozen=True)
class SimplexPoint:
    """A probability vector: non-negative entries summing to one."""

    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        if w.ndim != 1 or w.size < 1:
            raise ValueError("simplex point must be a non-empty vector")
        if w.min() < -1e-10:
            raise ValueError(f"simplex point has negative entry {w.min()!r}")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"simplex point sums to {w.sum()!r}, not 1")
        w = np.clip(w, 0.0, None)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.weights.size

    @classmethod
    def uniform(cls, dim: int) -> "SimplexPoint":
        return cls(np.full(dim, 1.0 / dim))

    @classmethod
    def one_hot(cls, dim: int, index: int) -> "SimplexPoint":
        w = np.zeros(dim)
        w[index] = 1.0
        return cls(w)

    @classmethod
    def project(cls, raw) -> "SimplexPoint":
        """Clip negatives to zero and renormalize."""
        w = np.clip(np.asarray(raw, dtype=float), 0.0, None)
        total = w.sum()
        if total <= 0.0:
            raise ValueError("cannot project a vector with no positive mass onto the simplex")
        return cls(w / total)


@dataclass(frozen=True)
class OptimizerConfig:
    initial_step: float
    max_evals: int = 500
    final_step: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.final_step < self.initial_step:
            raise ValueError("need 0 < final_step < initial_step")
        if self.max_evals < 0:
            raise ValueError("max_evals must be >= 0")


class _BudgetExhausted(Exception):
    pass


class _Recorder:
    """Wraps the objective: projects iterates, counts and logs evaluations."""

    def __init__(self, objective, unpack, max_evals, trace):
        self.objective = objective
        self.unpack = unpack
        self.max_evals = max_evals
        self.trace = trace
        self.count = 0
        self.best_value = math.inf
        self.best_points = None
        self.best_extra = None

    def __call__(self, z):
        if self.count >= self.max_evals:
            raise _BudgetExhausted
        points, extra = self.unpack(z)
        value = float(self.objective(points, extra))
        if not math.isfinite(value):
            value = _NONFINITE_PENALTY
        index = self.count
        self.count += 1
        if value < self.best_value:
            self.best_value = value
            self.best_points = points
            self.best_extra = extra
        if self.trace is not None:
            self.trace(index, np.concatenate([p.weights for p in points]), value)
        return value


def minimize_on_simplices(
    objective,
    dims,
    config: OptimizerConfig,
    starts=None,
    extra_dims: int = 0,
    extra_start=None,
    trace=None,
):
    """Minimize over a product of probability simplices plus free angle coordinates.

    ``objective(points, extra)`` receives one :class:`SimplexPoint` per simplex
    and an ndarray of the unconstrained extra coordinates. Returns
    ``(points, extra, best_value, eval_count)`` for the best feasible iterate;
    with a zero evaluation budget the start point is returned untouched and
    ``best_value`` is NaN.
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 2 for d in dims):
        raise ValueError("each simplex needs dimension >= 2")
    if starts is None:
        starts = [SimplexPoint.uniform(d) for d in dims]
    starts = list(starts)
    if len(starts) != len(dims) or any(s.dim != d for s, d in zip(starts, dims)):
        raise ValueError("start points must match the simplex dimensions")
    extra_start = np.zeros(extra_dims) if extra_start is None else np.asarray(extra_start, float)
    if extra_start.size != extra_dims:
        raise ValueError(f"expected {extra_dims} extra coordinates, got {extra_start.size}")

    n_free = sum(d - 1 for d in dims)

    def unpack(z):
        points = []
        pos = 0
        for d in dims:
            head = np.asarray(z[pos : pos + d - 1], dtype=float)
            pos += d - 1
            raw = np.append(head, 1.0 - head.sum())
            points.append(SimplexPoint.project(raw))
        extra = np.asarray(z[pos : pos + extra_dims], dtype=float).copy()
        return points, extra

    if config.max_evals == 0:
        return list(starts), extra_start.copy(), math.nan, 0

    z0 = np.concatenate([s.weights[:-1] for s in starts] + [extra_start])

    constraints = []
    pos = 0
    for d in dims:
        lo, hi = pos, pos + d - 1
        for k in range(lo, hi):
            constraints.append({"type": "ineq", "fun": (lambda z, k=k: z[k])})
        constraints.append(
            {"type": "ineq", "fun": (lambda z, lo=lo, hi=hi: 1.0 - np.sum(z[lo:hi]))}
        )
        pos = hi

    recorder = _Recorder(objective, unpack, config.max_evals, trace)
    try:
        _scipy_minimize(
            recorder,
            z0,
            method="COBYLA",
            constraints=constraints,
            tol=config.final_step,
            options={"rhobeg": config.initial_step, "maxiter": config.max_evals},
        )
    except _BudgetExhausted:
        pass

    if recorder.best_points is None:  # pragma: no cover - budget >= 1 always evaluates z0
        return list(starts), extra_start.copy(), math.nan, recorder.count
    return recorder.best_points, recorder.best_extra, recorder.best_value, recorder.count


def minimize_on_simplex(objective, dim: int, config: OptimizerConfig, start=None, trace=None):
    """Single-simplex convenience wrapper; returns (point, best_value, eval_count)."""
    starts = None if start is None else [start]
    points, _, value, count = minimize_on_simplices(
        lambda pts, _extra: objective(pts[0]),
        [dim],
        config,
        starts=starts,
        trace=trace,
    )
    return points[0], value, count


def _hinge_risk(decision_values, labels) -> float:
    margins = 1.0 - np.asarray(labels, float) * np.asarray(decision_values, float)
    return float(np.mean(np.maximum(margins, 0.0)))


def alternating_fit(
    train_gram_builder,
    labels,
    subset_indices,
    svm_config: SvmConfig,
    opt_config: OptimizerConfig,
    num_weights: int,
    start: SimplexPoint | None = None,
    loss: str = "zero_one",
    trace_path=None,
):
    """Optimize kernel weights on a training subset, then train on everything.

    Each objective evaluation builds the full training Gram at the candidate
    weights, trains a fresh SVM on the ``subset_indices`` block, and scores
    that same block. After the weight search, a final SVM is trained on the
    full training Gram at the best weights found.
    """
    labels = np.asarray(labels, dtype=float)
    subset = np.asarray(subset_indices, dtype=int)
    if subset.size == 0:
        raise ValueError("weight optimization needs a non-empty training subset")
    if subset.min() < 0 or subset.max() >= labels.size:
        raise ValueError("subset indices out of range")
    if loss not in ("zero_one", "hinge"):
        raise ValueError(f"loss must be 'zero_one' or 'hinge', got {loss!r}")
    sub_labels = labels[subset]

    def objective(point: SimplexPoint) -> float:
        g = train_gram_builder(point)
        values = g.values if isinstance(g, GramMatrix) else np.asarray(g, float)
        sub = values[np.ix_(subset, subset)]
        model = train(
            sub,
            sub_labels,
            box_c=svm_config.box_c,
            tol=svm_config.tol,
            fit_bias=svm_config.fit_bias,
            max_iter=svm_config.max_iter,
        )
        scores = decide(model, sub)
        if loss == "hinge":
            return _hinge_risk(scores, sub_labels)
        return zero_one_risk(scores, sub_labels)

    trace = None
    trace_file = None
    if trace_path is not None:
        trace_file = open(trace_path, "w", newline="")
        writer = csv.writer(trace_file)
        writer.writerow(["eval_index"] + [f"w{m}" for m in range(num_weights)] + ["risk"])

        def trace(index, weights, value):
            writer.writerow([index] + [repr(float(w)) for w in weights] + [repr(value)])

    try:
        best, _, _ = minimize_on_simplex(
            objective,
            num_weights,
            opt_config,
            start=start or SimplexPoint.uniform(num_weights),
            trace=trace,
        )
    finally:
        if trace_file is not None:
            trace_file.close()

    g = train_gram_builder(best)
    values = g.values if isinstance(g, GramMatrix) else np.asarray(g, float)
    final_model = train(
        values,
        labels,
        box_c=svm_config.box_c,
        tol=svm_config.tol,
        fit_bias=svm_config.fit_bias,
        max_iter=svm_config.max_iter,
    )
    return best, final_model
