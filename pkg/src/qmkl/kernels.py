"""Kernel machines built from combined quantum kernels.

A kernel machine is described by a :class:`KernelSpec`: a partition of the
register into independent sub-registers, an encoding pattern and depth per
partition, optional tunable rotation angles, and one diagonal mixed state per
partition whose weights act as kernel-combination weights. The kernel value
fed to the SVM is the real part of the product of per-partition normalized
traces; the imaginary part is available for diagnostics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .dqc1 import derive_seed, exact_kernel_trace, shot_estimate_trace
from .encoding import EncodingPattern, KernelParameters, feature_unitary, parameterized_feature_unitary
from .quantum import DiagonalMixedState

VARIANTS = ("sqkl", "fixed-qmkl", "qmkl", "multiplicative", "additive-multiplicative")


@dataclass(frozen=True)
class EstimationMode:
    """How kernel traces are evaluated: analytically or from simulated shots."""

    kind: str = "exact"
    shots: int = 0
    master_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "shots"):
            raise ValueError(f"estimation kind must be 'exact' or 'shots', got {self.kind!r}")
        if self.kind == "shots" and self.shots < 2:
            raise ValueError("shot estimation needs at least 2 shots")

    @classmethod
    def exact(cls) -> "EstimationMode":
        return cls("exact")

    @classmethod
    def with_shots(cls, shots: int, master_seed: int) -> "EstimationMode":
        return cls("shots", shots, master_seed)

    @classmethod
    def from_config_str(cls, text: str, master_seed: int = 0) -> "EstimationMode":
        text = text.strip().lower()
        if text == "exact":
            return cls.exact()
        if text.startswith("shots:"):
            return cls.with_shots(int(text.split(":", 1)[1]), master_seed)
        raise ValueError(f"estimation mode must be 'exact' or 'shots:<count>', got {text!r}")

    def to_config_str(self) -> str:
        return "exact" if self.kind == "exact" else f"shots:{self.shots}"


def _is_uniform(weights: np.ndarray) -> bool:
    return bool(np.allclose(weights, 1.0 / weights.size, atol=1e-12))


@dataclass(frozen=True)
class KernelSpec:
    """Full description of one kernel machine."""

    partition_sizes: tuple
    patterns: tuple  # one EncodingPattern per partition
    depth: int
    state_weights: tuple  # one DiagonalMixedState per partition
    params: tuple = ()  # one KernelParameters or None per partition
    estimation: EstimationMode = field(default_factory=EstimationMode.exact)
    variant: str = "qmkl"
    restricted_state: bool = False

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.partition_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("partition sizes must be positive")
        object.__setattr__(self, "partition_sizes", sizes)
        if not self.params:
            object.__setattr__(self, "params", (None,) * len(sizes))
        if len(self.patterns) != len(sizes) or len(self.state_weights) != len(sizes) or len(
            self.params
        ) != len(sizes):
            raise ValueError("patterns, state_weights, and params must have one entry per partition")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        for size, pattern, state, theta in zip(
            sizes, self.patterns, self.state_weights, self.params
        ):
            if pattern.num_qubits != size:
                raise ValueError(f"pattern spans {pattern.num_qubits} qubits, partition has {size}")
            if state.num_qubits != size:
                raise ValueError(f"state spans {state.num_qubits} qubits, partition has {size}")
            if theta is not None and theta.depth != self.depth:
                raise ValueError(f"expected {self.depth} angle vectors, got {theta.depth}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        self._check_variant()

    def _check_variant(self):
        p = len(self.partition_sizes)
        unparameterized = all(t is None for t in self.params)
        if self.variant == "sqkl":
            ok = (
                p == 1
                and unparameterized
                and self.state_weights[0].weights[0] == 1.0
                and self.state_weights[0].is_pure
            )
            if not ok:
                raise ValueError("sqkl requires a single partition, pure |0...0> state, no parameters")
        elif self.variant == "fixed-qmkl":
            if not (p == 1 and unparameterized and _is_uniform(self.state_weights[0].weights)):
                raise ValueError("fixed-qmkl requires a single partition with uniform state weights")
        elif self.variant == "qmkl":
            if not (p == 1 and unparameterized):
                raise ValueError("qmkl requires a single partition and no rotation parameters")
        elif self.variant == "multiplicative":
            if p < 2 or not all(s.is_pure for s in self.state_weights):
                raise ValueError("multiplicative requires >= 2 partitions, each in a pure state")
        # additive-multiplicative: any partition count, free weights

    @property
    def num_qubits(self) -> int:
        return sum(self.partition_sizes)

    @property
    def num_partitions(self) -> int:
        return len(self.partition_sizes)

    def feature_slices(self):
        """Per-partition feature index ranges; partition 1 takes the first features."""
        out = []
        start = 0
        for size in self.partition_sizes:
            out.append(slice(start, start + size))
            start += size
        return out

    # -- constructors -------------------------------------------------------

    @classmethod
    def sqkl(cls, num_qubits, depth, pattern=None, estimation=None):
        pattern = pattern or EncodingPattern.default(num_qubits)
        return cls(
            (num_qubits,),
            (pattern,),
            depth,
            (DiagonalMixedState.pure(num_qubits, 0),),
            estimation=estimation or EstimationMode.exact(),
            variant="sqkl",
        )

    @classmethod
    def fixed_qmkl(cls, num_qubits, depth, pattern=None, estimation=None):
        pattern = pattern or EncodingPattern.default(num_qubits)
        return cls(
            (num_qubits,),
            (pattern,),
            depth,
            (DiagonalMixedState.fully_mixed(num_qubits),),
            estimation=estimation or EstimationMode.exact(),
            variant="fixed-qmkl",
        )

    @classmethod
    def qmkl(cls, num_qubits, depth, weights, pattern=None, estimation=None, restricted=False):
        pattern = pattern or EncodingPattern.default(num_qubits)
        state = (
            weights
            if isinstance(weights, DiagonalMixedState)
            else DiagonalMixedState(num_qubits, np.asarray(weights, float))
        )
        return cls(
            (num_qubits,),
            (pattern,),
            depth,
            (state,),
            estimation=estimation or EstimationMode.exact(),
            variant="qmkl",
            restricted_state=restricted,
        )

    @classmethod
    def multiplicative(cls, partition_sizes, depth, patterns=None, params=None, estimation=None):
        sizes = tuple(partition_sizes)
        patterns = patterns or tuple(EncodingPattern.default(s) for s in sizes)
        states = tuple(DiagonalMixedState.pure(s, 0) for s in sizes)
        return cls(
            sizes,
            patterns,
            depth,
            states,
            params=params or (None,) * len(sizes),
            estimation=estimation or EstimationMode.exact(),
            variant="multiplicative",
        )

    @classmethod
    def additive_multiplicative(
        cls, partition_sizes, depth, states, patterns=None, params=None, estimation=None
    ):
        sizes = tuple(partition_sizes)
        patterns = patterns or tuple(EncodingPattern.default(s) for s in sizes)
        return cls(
            sizes,
            patterns,
            depth,
            tuple(states),
            params=params or (None,) * len(sizes),
            estimation=estimation or EstimationMode.exact(),
            variant="additive-multiplicative",
        )


def spec_to_config_dict(spec: KernelSpec) -> dict:
    """JSON-able description of a kernel spec, matching the experiment config."""
    return {
        "variant": spec.variant,
        "partition_sizes": list(spec.partition_sizes),
        "patterns": [p.to_config_str() for p in spec.patterns],
        "depth": spec.depth,
        "state_weights": [[float(w) for w in s.weights] for s in spec.state_weights],
        "params": [
            None if t is None else {"axis": t.axis, "angles": [list(v) for v in t.angles]}
            for t in spec.params
        ],
        "estimation": spec.estimation.to_config_str(),
        "master_seed": spec.estimation.master_seed,
        "restricted_state": spec.restricted_state,
    }


def spec_from_config_dict(d: dict) -> KernelSpec:
    sizes = tuple(int(s) for s in d["partition_sizes"])
    patterns = tuple(
        EncodingPattern.from_config_str(text, size) for text, size in zip(d["patterns"], sizes)
    )
    states = tuple(
        DiagonalMixedState(size, np.asarray(w, float)) for size, w in zip(sizes, d["state_weights"])
    )
    params = tuple(
        None if t is None else KernelParameters(tuple(tuple(v) for v in t["angles"]), t["axis"])
        for t in d.get("params", [None] * len(sizes))
    )
    return KernelSpec(
        sizes,
        patterns,
        int(d["depth"]),
        states,
        params=params,
        estimation=EstimationMode.from_config_str(
            d.get("estimation", "exact"), int(d.get("master_seed", 0))
        ),
        variant=d.get("variant", "qmkl"),
        restricted_state=bool(d.get("restricted_state", False)),
    )


def _partition_unitary(x_part, spec: KernelSpec, p: int) -> np.ndarray:
    theta = spec.params[p]
    if theta is None:
        return feature_unitary(x_part, spec.patterns[p], spec.depth)
    return parameterized_feature_unitary(x_part, theta, spec.patterns[p], spec.depth)


def kernel_trace(x_i, x_j, spec: KernelSpec, seed: int | None = None) -> complex:
    """Complex combined kernel: product of per-partition normalized traces."""
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if x_i.shape != (spec.num_qubits,) or x_j.shape != (spec.num_qubits,):
        raise ValueError(f"feature vectors must have length {spec.num_qubits}")
    entry_seed = spec.estimation.master_seed if seed is None else seed
    product = complex(1.0)
    for p, sl in enumerate(spec.feature_slices()):
        u_left = _partition_unitary(x_i[sl], spec, p)
        u_right = _partition_unitary(x_j[sl], spec, p)
        if spec.estimation.kind == "exact":
            t_p = exact_kernel_trace(spec.state_weights[p], u_left, u_right)
        else:
            t_p = shot_estimate_trace(
                spec.state_weights[p],
                u_left,
                u_right,
                spec.estimation.shots,
                derive_seed(entry_seed, "partition", p),
            ).value
        product *= t_p
    return product


def kernel_value(x_i, x_j, spec: KernelSpec, seed: int | None = None) -> float:
    """Real kernel value: Re of the combined trace."""
    return float(kernel_trace(x_i, x_j, spec, seed=seed).real)


@dataclass(frozen=True)
class Provenance:
    kind: str  # "exact" | "shots"
    shots: int = 0
    master_seed: int = 0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "shots": self.shots, "master_seed": self.master_seed}

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        return cls(d["kind"], int(d.get("shots", 0)), int(d.get("master_seed", 0)))


@dataclass(frozen=True)
class GramMatrix:
    """Real symmetric matrix of kernel values with estimation provenance."""

    values: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"gram matrix must be square, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


def _partition_unitaries_for_rows(x_rows: np.ndarray, spec: KernelSpec, p: int, sl) -> np.ndarray:
    return np.stack([_partition_unitary(row[sl], spec, p) for row in x_rows])


def _exact_trace_table(u_rows: np.ndarray, u_cols: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Pairwise traces sum_m w_m <col_m(U_i), col_m(U_j)> for two stacks of unitaries."""
    return np.einsum(
        "iam,jam,m->ij", u_rows.conj(), u_cols, weights.astype(complex), optimize=True
    )


def gram(x_rows, spec: KernelSpec) -> GramMatrix:
    """Gram matrix over a dataset; upper triangle evaluated, then mirrored."""
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=float))
    if x_rows.shape[1] != spec.num_qubits:
        raise ValueError(f"feature rows must have length {spec.num_qubits}")
    n = x_rows.shape[0]
    if spec.estimation.kind == "exact":
        table = np.ones((n, n), dtype=complex)
        for p, sl in enumerate(spec.feature_slices()):
            u = _partition_unitaries_for_rows(x_rows, spec, p, sl)
            table *= _exact_trace_table(u, u, spec.state_weights[p].weights)
        values = table.real.copy()
        iu = np.triu_indices(n, k=1)
        values[iu[1], iu[0]] = values[iu]  # mirror: exact symmetry by construction
    else:
        values = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                entry_seed = derive_seed(spec.estimation.master_seed, i, j)
                values[i, j] = kernel_value(x_rows[i], x_rows[j], spec, seed=entry_seed)
                values[j, i] = values[i, j]
    return GramMatrix(
        values,
        Provenance(spec.estimation.kind, spec.estimation.shots, spec.estimation.master_seed),
    )


def gram_cross(x_train, x_new, spec: KernelSpec) -> np.ndarray:
    """Rectangular kernel table: entry (i, j) = k(x_train[i], x_new[j])."""
    x_train = np.atleast_2d(np.asarray(x_train, dtype=float))
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    if x_train.shape[1] != spec.num_qubits or x_new.shape[1] != spec.num_qubits:
        raise ValueError(f"feature rows must have length {spec.num_qubits}")
    if spec.estimation.kind == "exact":
        table = np.ones((x_train.shape[0], x_new.shape[0]), dtype=complex)
        for p, sl in enumerate(spec.feature_slices()):
            u_rows = _partition_unitaries_for_rows(x_train, spec, p, sl)
            u_cols = _partition_unitaries_for_rows(x_new, spec, p, sl)
            table *= _exact_trace_table(u_rows, u_cols, spec.state_weights[p].weights)
        return table.real.copy()
    values = np.zeros((x_train.shape[0], x_new.shape[0]))
    for i in range(x_train.shape[0]):
        for j in range(x_new.shape[0]):
            # tagged so cross entries never reuse square-gram entry seeds
            entry_seed = derive_seed(spec.estimation.master_seed, "cross", i, j)
            values[i, j] = kernel_value(x_train[i], x_new[j], spec, seed=entry_seed)
    return values


def basis_kernel_stack(x_rows, spec: KernelSpec) -> np.ndarray:
    """Per-basis-state kernel tables K_m[i, j] = Re <state m via x_i | state m via x_j>.

    Only defined for single-partition specs in exact mode. Any weight vector w
    then gives the combined Gram as ``stack @ w``, which is what makes weight
    optimization cheap: the stack does not depend on the weights.
    """
    if spec.num_partitions != 1:
        raise ValueError("basis kernel stacks require a single partition")
    if spec.estimation.kind != "exact":
        raise ValueError("basis kernel stacks are an exact-mode construction")
    x_rows = np.atleast_2d(np.asarray(x_rows, dtype=float))
    u = _partition_unitaries_for_rows(x_rows, spec, 0, slice(0, spec.num_qubits))
    stack = np.einsum("iam,jam->ijm", u.conj(), u, optimize=True).real.copy()
    iu = np.triu_indices(x_rows.shape[0], k=1)
    stack[iu[1], iu[0], :] = stack[iu[0], iu[1], :]
    return stack


def cross_basis_kernel_stack(x_train, x_new, spec: KernelSpec) -> np.ndarray:
    """Rectangular analogue of :func:`basis_kernel_stack`."""
    if spec.num_partitions != 1:
        raise ValueError("basis kernel stacks require a single partition")
    if spec.estimation.kind != "exact":
        raise ValueError("basis kernel stacks are an exact-mode construction")
    x_train = np.atleast_2d(np.asarray(x_train, dtype=float))
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    sl = slice(0, spec.num_qubits)
    u_rows = _partition_unitaries_for_rows(x_train, spec, 0, sl)
    u_cols = _partition_unitaries_for_rows(x_new, spec, 0, sl)
    return np.einsum("iam,jam->ijm", u_rows.conj(), u_cols, optimize=True).real.copy()


def combine_stack(stack: np.ndarray, weights) -> np.ndarray:
    """Weighted combination sum_m w_m K_m of a basis kernel stack."""
    w = np.asarray(weights, dtype=float)
    if stack.shape[-1] != w.size:
        raise ValueError(f"stack carries {stack.shape[-1]} basis kernels, got {w.size} weights")
    return stack @ w


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    tolerance: float
    passed: bool
    warning_only: bool


def validate_psd(g: GramMatrix, tol: float = 1e-8) -> PsdReport:
    """Check positive semidefiniteness up to -tol.

    Shot-estimated matrices only warn: sampling noise can push eigenvalues
    below zero without indicating a bug.
    """
    min_eig = float(np.linalg.eigvalsh(g.values).min())
    return PsdReport(
        min_eigenvalue=min_eig,
        tolerance=tol,
        passed=bool(min_eig >= -tol),
        warning_only=g.provenance.kind == "shots",
    )


# -- serialization ----------------------------------------------------------


def save_gram_csv(g: GramMatrix, path) -> None:
    """Plain numeric CSV, one row per line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in g.values:
            writer.writerow([repr(float(v)) for v in row])


def save_gram_json(g: GramMatrix, path) -> None:
    """JSON envelope carrying the values plus provenance."""
    payload = {
        "n_rows": g.n_rows,
        "provenance": g.provenance.to_dict(),
        "values": [[float(v) for v in row] for row in g.values],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_gram_json(path) -> GramMatrix:
    with open(path) as fh:
        payload = json.load(fh)
    return GramMatrix(np.array(payload["values"], dtype=float), Provenance.from_dict(payload["provenance"]))
