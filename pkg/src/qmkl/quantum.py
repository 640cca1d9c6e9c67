"""Dense complex linear algebra for few-qubit registers.

Operators are plain ``complex128`` ndarrays. Qubit 1 is the least significant
bit of the basis index, so tensor factors written left to right occupy most-
to least-significant positions (the ``numpy.kron`` convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

MAX_QUBITS = 10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def num_qubits_of(dim: int) -> int:
    """Return n such that dim = 2**n, rejecting non-powers of two."""
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


def as_operator(matrix) -> np.ndarray:
    """Validate and return a square power-of-two complex matrix."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"operator must be square, got shape {m.shape}")
    num_qubits_of(m.shape[0])
    return m


def identity(num_qubits: int) -> np.ndarray:
    return np.eye(1 << num_qubits, dtype=complex)


def kron(a, b, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Tensor product with the first factor on the most-significant qubits."""
    a = as_operator(a)
    b = as_operator(b)
    total = num_qubits_of(a.shape[0]) + num_qubits_of(b.shape[0])
    if total > max_qubits:
        raise ValueError(
            f"tensor product spans {total} qubits, exceeding the {max_qubits}-qubit capacity"
        )
    return np.kron(a, b)


def kron_all(factors, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Left-to-right tensor product of a sequence of operators."""
    factors = list(factors)
    if not factors:
        raise ValueError("need at least one tensor factor")
    return reduce(lambda x, y: kron(x, y, max_qubits=max_qubits), factors)


def hadamard_layer(num_qubits: int) -> np.ndarray:
    return kron_all([HADAMARD] * num_qubits)


def apply_to_basis(u, m: int) -> np.ndarray:
    """Apply an operator to the computational basis state |m>.

    Equal to column m of the operator; unit norm whenever the operator is
    unitary.
    """
    u = as_operator(u)
    if not 0 <= m < u.shape[0]:
        raise IndexError(f"basis index {m} out of range for dimension {u.shape[0]}")
    return u[:, m].copy()


@dataclass(frozen=True)
class DiagonalMixedState:
    """Mixed state diagonal in the computational basis.

    ``weights[m]`` is the population of basis state ``|m>``; weights are
    non-negative and sum to one within 1e-12.
    """

    num_qubits: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        if w.ndim != 1 or w.size != (1 << self.num_qubits):
            raise ValueError(
                f"expected {1 << self.num_qubits} weights for {self.num_qubits} qubits, got {w.size}"
            )
        if w.min() < 0.0:
            raise ValueError("state weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"state weights must sum to 1, got {w.sum()!r}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def is_pure(self) -> bool:
        return bool(np.count_nonzero(self.weights == 1.0) == 1)

    @classmethod
    def pure(cls, num_qubits: int, basis_index: int = 0) -> "DiagonalMixedState":
        dim = 1 << num_qubits
        if not 0 <= basis_index < dim:
            raise IndexError(f"basis index {basis_index} out of range for {num_qubits} qubits")
        w = np.zeros(dim)
        w[basis_index] = 1.0
        return cls(num_qubits, w)

    @classmethod
    def fully_mixed(cls, num_qubits: int) -> "DiagonalMixedState":
        dim = 1 << num_qubits
        return cls(num_qubits, np.full(dim, 1.0 / dim))

    @classmethod
    def product(cls, excited_probs) -> "DiagonalMixedState":
        """Per-qubit product state: qubit k is |1> with probability excited_probs[k-1].

        The restricted family whose free-parameter count grows linearly with
        the register size.
        """
        p = np.asarray(excited_probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("need one excitation probability per qubit")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("excitation probabilities must lie in [0, 1]")
        n = p.size
        w = np.ones(1)
        for k in range(n - 1, -1, -1):  # qubit n first: most significant
            w = np.kron(np.array([1.0 - p[k], p[k]]), w)
        # renormalize away accumulated rounding
        w = w / w.sum()
        return cls(n, w)

    @classmethod
    def tensor(cls, *states: "DiagonalMixedState") -> "DiagonalMixedState":
        """Compose partition states; the first argument is most significant."""
        if not states:
            raise ValueError("need at least one state")
        w = reduce(np.kron, [s.weights for s in states])
        n = sum(s.num_qubits for s in states)
        return cls(n, w / w.sum())


def trace_against_state(rho: DiagonalMixedState, u) -> complex:
    """Weighted diagonal sum sum_m w[m] * u[m, m]; equals tr(rho @ u)."""
    u = as_operator(u)
    if u.shape[0] != rho.dim:
        raise ValueError(f"operator dimension {u.shape[0]} does not match state dimension {rho.dim}")
    return complex(np.dot(rho.weights, np.diagonal(u)))
