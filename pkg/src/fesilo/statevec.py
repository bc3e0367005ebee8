"""Dense state-vector engine.

Amplitudes are stored in a flat complex array of length ``2**n``. Qubit 0 is
the most significant bit of the basis index, so ``|q0 q1 ... q_{n-1}>`` maps to
``int("q0q1...", 2)``. Reshaping the array to ``(2,) * n`` in C order puts
qubit ``k`` on axis ``k``, which is how every operator here is applied.

This module is the brute-force reference for the FES-subspace code and is
deliberately simple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError

#: Dense states above this many qubits are refused. Raise it if you have the memory.
MAX_QUBITS = 14

#: Default tolerance for symmetry and normalization predicates.
DEFAULT_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure n-qubit state as a dense amplitude array (not necessarily normalized)."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidStateError(f"qubit count must be a positive integer, got {self.n!r}")
        if self.n > MAX_QUBITS:
            raise InvalidStateError(
                f"dense states are capped at {MAX_QUBITS} qubits (got {self.n}); "
                "adjust fesilo.statevec.MAX_QUBITS to go higher"
            )
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.n:
            raise DimensionMismatchError(
                f"expected {1 << self.n} amplitudes for n={self.n}, got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        n = amps.shape[0].bit_length() - 1
        if n < 1 or amps.shape[0] != 1 << n:
            raise DimensionMismatchError(f"length {amps.shape[0]} is not a power of two >= 2")
        return cls(n, amps)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        """Computational basis ket, e.g. ``StateVector.basis("011")``."""
        if not bits or set(bits) - {"0", "1"}:
            raise InvalidStateError(f"not a bitstring: {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def product(cls, single: np.ndarray, n: int) -> "StateVector":
        """The n-fold tensor power of a single-qubit vector."""
        single = np.asarray(single, dtype=complex).reshape(2)
        amps = np.ones(1, dtype=complex)
        for _ in range(n):
            amps = np.kron(amps, single)
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0 or not np.isfinite(nrm):
            raise InvalidStateError("cannot normalize a zero or non-finite vector")
        return StateVector(self.n, self.amps / nrm)

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) < tol

    def scaled(self, alpha: complex) -> "StateVector":
        return StateVector(self.n, alpha * self.amps)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same_n(self, other)
        return StateVector(self.n, self.amps + other.amps)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_same_n(self, other)
        return StateVector(self.n, self.amps - other.amps)

    def tensor(self) -> np.ndarray:
        """Amplitudes viewed as an ``(2,)*n`` array, axis k = qubit k."""
        return self.amps.reshape((2,) * self.n)


def as_operator(op) -> np.ndarray:
    """Validate and return a 2x2 complex matrix."""
    mat = np.asarray(op, dtype=complex)
    if mat.shape != (2, 2):
        raise DimensionMismatchError(f"local operator must be 2x2, got shape {mat.shape}")
    return mat


def is_invertible(op, tol: float = 1e-14) -> bool:
    return abs(np.linalg.det(as_operator(op))) > tol


def _check_same_n(a: StateVector, b: StateVector) -> None:
    if a.n != b.n:
        raise DimensionMismatchError(f"qubit counts differ: {a.n} vs {b.n}")


def apply_local(op, state: StateVector) -> StateVector:
    """Return ``op^{(x)n} |state>`` without forming the 2^n x 2^n matrix.

    Costs ``O(n 2^n)``. The result is not renormalized and singular operators
    are accepted.
    """
    mat = as_operator(op)
    psi = state.tensor()
    for axis in range(state.n):
        # contract the operator's column index with qubit `axis`, then put the
        # new index back where it came from
        psi = np.moveaxis(np.tensordot(mat, psi, axes=([1], [axis])), 0, axis)
    return StateVector(state.n, psi.reshape(-1))


def apply_exchange(i: int, j: int, state: StateVector) -> StateVector:
    """Swap qubits ``i`` and ``j``."""
    for k in (i, j):
        if not 0 <= k < state.n:
            raise IndexError(f"qubit index {k} out of range for n={state.n}")
    if i == j:
        return state
    return StateVector(state.n, np.swapaxes(state.tensor(), i, j).reshape(-1))


def apply_flip(state: StateVector) -> StateVector:
    """``X^{(x)n}``: reverses the amplitude array (every bit complemented)."""
    return StateVector(state.n, state.amps[::-1])


def is_exchange_symmetric(state: StateVector, tol: float = DEFAULT_TOL) -> bool:
    # adjacent transpositions generate S_n
    for k in range(state.n - 1):
        if np.linalg.norm(apply_exchange(k, k + 1, state).amps - state.amps) >= tol:
            return False
    return True


def is_fes(state: StateVector, tol: float = DEFAULT_TOL) -> bool:
    """True if the state is invariant under the global flip and all qubit exchanges."""
    if np.linalg.norm(apply_flip(state).amps - state.amps) >= tol:
        return False
    return is_exchange_symmetric(state, tol)


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    _check_same_n(a, b)
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner(a, b)) ** 2


def expectation_local(op, state: StateVector) -> complex:
    """``<state| op^{(x)n} |state>``."""
    return inner(state, apply_local(op, state))
