"""Data-encoding unitaries.

A feature vector of angles is injected through diagonal phase blocks
``V(x) = exp(i sum_C g_C(x) prod_{k in C} Z_k)`` interleaved with Hadamard
layers, optionally with a tunable single-qubit rotation layer per repetition.
Subsets ``C`` index qubits 1..n; singletons contribute the bare feature
``g_{u}(x) = x_u`` and larger subsets the product ``g_C(x) = prod (pi - x_u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum import HADAMARD, PAULI_X, PAULI_Y, hadamard_layer, identity, kron_all

ROTATION_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class EncodingPattern:
    """Which qubit subsets receive a phase term.

    Every singleton must be present; subsets hold 1-based qubit indices.
    """

    num_qubits: int
    subsets: tuple

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        norm = []
        for subset in self.subsets:
            s = tuple(sorted(set(int(k) for k in subset)))
            if not s:
                raise ValueError("encoding subsets must be non-empty")
            if s[0] < 1 or s[-1] > self.num_qubits:
                raise ValueError(f"subset {s} out of range for {self.num_qubits} qubits")
            norm.append(s)
        if len(set(norm)) != len(norm):
            raise ValueError("duplicate encoding subsets")
        present = {s[0] for s in norm if len(s) == 1}
        if present != set(range(1, self.num_qubits + 1)):
            raise ValueError("all singleton subsets {1}..{n} must be present")
        object.__setattr__(self, "subsets", tuple(norm))

    @classmethod
    def default(cls, num_qubits: int) -> "EncodingPattern":
        """Singletons plus nearest-neighbour pairs on a linear chain."""
        subsets = [(k,) for k in range(1, num_qubits + 1)]
        subsets += [(k, k + 1) for k in range(1, num_qubits)]
        return cls(num_qubits, tuple(subsets))

    def to_config_str(self) -> str:
        return ";".join(",".join(str(k) for k in s) for s in self.subsets)

    @classmethod
    def from_config_str(cls, text: str, num_qubits: int) -> "EncodingPattern":
        if text.strip().lower() == "default":
            return cls.default(num_qubits)
        subsets = tuple(
            tuple(int(k) for k in chunk.split(",")) for chunk in text.split(";") if chunk.strip()
        )
        return cls(num_qubits, subsets)


def encoding_term(subset, x) -> float:
    """Phase coefficient g_C(x) for one subset."""
    if len(subset) == 1:
        return float(x[subset[0] - 1])
    prod = 1.0
    for k in subset:
        prod *= math.pi - float(x[k - 1])
    return prod


def phase_vector(x, pattern: EncodingPattern) -> np.ndarray:
    """Diagonal phases: entry m is sum_C g_C(x) * prod_{k in C} (-1)^bit_k(m)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != pattern.num_qubits:
        raise ValueError(
            f"expected {pattern.num_qubits} features, got shape {x.shape}"
        )
    dim = 1 << pattern.num_qubits
    indices = np.arange(dim, dtype=np.uint32)
    phases = np.zeros(dim)
    for subset in pattern.subsets:
        mask = 0
        for k in subset:
            mask |= 1 << (k - 1)
        parity = np.bitwise_count(indices & np.uint32(mask)) & 1
        phases += encoding_term(subset, x) * (1.0 - 2.0 * parity)
    return phases


def encoding_block(x, pattern: EncodingPattern) -> np.ndarray:
    """Diagonal unitary injecting one copy of the features."""
    return np.diag(np.exp(1j * phase_vector(x, pattern)))


@dataclass(frozen=True)
class KernelParameters:
    """Tunable rotation angles, one vector per encoding-block repetition.

    ``angles[d][k]`` rotates qubit k+1 in repetition d+1 about ``axis``.
    """

    angles: tuple
    axis: str = "z"

    def __post_init__(self):
        if self.axis not in ROTATION_AXES:
            raise ValueError(f"rotation axis must be one of {ROTATION_AXES}, got {self.axis!r}")
        norm = tuple(tuple(float(a) for a in vec) for vec in self.angles)
        if any(len(vec) != len(norm[0]) for vec in norm):
            raise ValueError("all per-repetition angle vectors must have equal length")
        object.__setattr__(self, "angles", norm)

    @property
    def depth(self) -> int:
        return len(self.angles)

    @classmethod
    def zeros(cls, num_qubits: int, depth: int, axis: str = "z") -> "KernelParameters":
        return cls(tuple((0.0,) * num_qubits for _ in range(depth)), axis)


def _single_qubit_rotation(theta: float, axis: str) -> np.ndarray:
    """exp(i * theta * W) for W a Pauli operator."""
    if axis == "z":
        return np.diag(np.array([np.exp(1j * theta), np.exp(-1j * theta)]))
    w = PAULI_X if axis == "x" else PAULI_Y
    return math.cos(theta) * np.eye(2, dtype=complex) + 1j * math.sin(theta) * w


def rotation_layer(angles, axis: str = "z") -> np.ndarray:
    """Tensor product of per-qubit rotations; qubit 1 is least significant."""
    factors = [_single_qubit_rotation(float(t), axis) for t in angles]
    return kron_all(factors[::-1])


def parameterized_feature_unitary(
    x, theta: KernelParameters, pattern: EncodingPattern, depth: int
) -> np.ndarray:
    """Product of ``depth`` blocks, each = phase block * rotation layer * Hadamards."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if theta.depth != depth:
        raise ValueError(f"expected {depth} angle vectors, got {theta.depth}")
    for vec in theta.angles:
        if len(vec) != pattern.num_qubits:
            raise ValueError(
                f"angle vectors must have one entry per qubit ({pattern.num_qubits}), got {len(vec)}"
            )
    v = encoding_block(x, pattern)
    h = hadamard_layer(pattern.num_qubits) if pattern.num_qubits > 1 else HADAMARD.copy()
    u = identity(pattern.num_qubits)
    for d in range(depth):
        block = v @ (rotation_layer(theta.angles[d], theta.axis) @ h)
        u = block @ u
    return u


def feature_unitary(x, pattern: EncodingPattern, depth: int) -> np.ndarray:
    """Unparameterized encoding: identical phase-block/Hadamard pair, repeated.

    Exactly the zero-angle case of :func:`parameterized_feature_unitary`, so
    switching the tunable rotations off reproduces this bit for bit.
    """
    return parameterized_feature_unitary(
        x, KernelParameters.zeros(pattern.num_qubits, depth), pattern, depth
    )
