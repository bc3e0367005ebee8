"""Dicke states, the eigenstates psi_pq and the even-q FES basis.

An FES state of n qubits is a combination of the ``n//2 + 1`` states
``psi_pq = H^{(x)n} S(n, p)`` with ``q = n - p`` even. A :class:`FesVector`
stores those coefficients ordered by q ascending, so index ``i`` carries
``q = 2 i`` and ``p = n - 2 i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, NotFesError
from .statevec import DEFAULT_TOL, H, StateVector, apply_local


class BasisIndex(NamedTuple):
    """Number of ``|+>`` (p) and ``|->`` (q) factors of an eigenstate."""

    p: int
    q: int

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def entangled(self) -> bool:
        # psi_n0 and psi_0n are product states, everything else is entangled
        return self.p * self.q != 0

    @property
    def label(self) -> str:
        return f"{self.p}_{self.q}"

    def __str__(self) -> str:
        return f"psi_{self.p},{self.q}"


def fes_dimension(n: int) -> int:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return n // 2 + 1


def fes_indices(n: int) -> list[BasisIndex]:
    """Basis labels in FesVector order (q = 0, 2, 4, ...)."""
    return [BasisIndex(n - q, q) for q in range(0, 2 * (n // 2) + 1, 2)]


def slot(idx: BasisIndex) -> int:
    """Position of an even-q basis label inside a FesVector."""
    if idx.p < 0 or idx.q < 0 or idx.q % 2:
        raise ValueError(f"{idx} is not an FES basis label")
    return idx.q // 2


def degeneracy(p: int, q: int) -> int:
    """Degeneracy ``(p+q)! / (p! q!)`` of the eigenvalue lambda_pq."""
    if p < 0 or q < 0:
        raise ValueError(f"p and q must be non-negative, got ({p}, {q})")
    return comb(p + q, p)


def dicke(n: int, k: int) -> StateVector:
    """Normalized Dicke state with exactly ``k`` zeros among ``n`` qubits."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n and n >= 1, got n={n}, k={k}")
    amps = np.zeros(1 << n, dtype=complex)
    amp = 1.0 / np.sqrt(comb(n, k))
    for ones in combinations(range(n), n - k):
        amps[sum(1 << (n - 1 - i) for i in ones)] = amp
    return StateVector(n, amps)


@lru_cache(maxsize=256)
def _psi_pq_amps(p: int, q: int) -> np.ndarray:
    amps = apply_local(H, dicke(p + q, p)).amps.copy()
    amps.setflags(write=False)
    return amps


def psi_pq(p: int, q: int) -> StateVector:
    """Eigenstate of ``M(t)^{(x)n}`` with p ``|+>`` and q ``|->`` factors, symmetrized."""
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError(f"invalid eigenstate label ({p}, {q})")
    return StateVector(p + q, _psi_pq_amps(p, q))


@lru_cache(maxsize=64)
def fes_basis_matrix(n: int) -> np.ndarray:
    """Columns are the dense even-q eigenstates in FesVector order. Read-only."""
    mat = np.column_stack([_psi_pq_amps(i.p, i.q) for i in fes_indices(n)])
    mat.setflags(write=False)
    return mat


def fix_phase(coeffs: np.ndarray) -> np.ndarray:
    """Rotate so the first coefficient of largest magnitude is real and positive."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if not coeffs.size:
        return coeffs.copy()
    mags = np.abs(coeffs)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-12))[0])
    if mags[k] == 0.0:
        return coeffs.copy()
    return coeffs * (abs(coeffs[k]) / coeffs[k])


@dataclass(frozen=True, eq=False)
class FesVector:
    """Coefficients of an n-qubit FES state in the even-q eigenbasis."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise InvalidStateError(f"qubit count must be >= 1, got {self.n}")
        coeffs = np.array(self.coeffs, dtype=complex).reshape(-1)
        if coeffs.shape[0] != fes_dimension(self.n):
            raise DimensionMismatchError(
                f"n={self.n} needs {fes_dimension(self.n)} coefficients, got {coeffs.shape[0]}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InvalidStateError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_coeffs(cls, coeffs, n: int, normalize: bool = True) -> "FesVector":
        vec = cls(n, coeffs)
        return vec.normalized() if normalize else vec

    @classmethod
    def basis_state(cls, n: int, idx: BasisIndex) -> "FesVector":
        if idx.n != n:
            raise ValueError(f"{idx} does not belong to n={n}")
        coeffs = np.zeros(fes_dimension(n), dtype=complex)
        coeffs[slot(idx)] = 1.0
        return cls(n, coeffs)

    @property
    def indices(self) -> list[BasisIndex]:
        return fes_indices(self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "FesVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise InvalidStateError("cannot normalize the zero vector")
        return FesVector(self.n, self.coeffs / nrm)

    def coeff(self, idx: BasisIndex) -> complex:
        return complex(self.coeffs[slot(idx)])

    def phase_fixed(self) -> "FesVector":
        return FesVector(self.n, fix_phase(self.coeffs))

    def weights(self) -> np.ndarray:
        """``|c_pq|^2`` in FesVector order."""
        return np.abs(self.coeffs) ** 2


def embed(v: FesVector) -> StateVector:
    """Dense state ``sum_pq c_pq psi_pq``."""
    return StateVector(v.n, fes_basis_matrix(v.n) @ v.coeffs)


def expand(state: StateVector, tol: float = DEFAULT_TOL) -> FesVector:
    """Project a dense FES state onto the even-q basis.

    Raises :class:`NotFesError` if the part of ``state`` outside the even-q span
    has norm ``tol`` or more.
    """
    basis = fes_basis_matrix(state.n)
    coeffs = basis.conj().T @ state.amps
    residual = np.linalg.norm(state.amps - basis @ coeffs)
    if residual >= tol:
        raise NotFesError(f"state has a component of norm {residual:.3e} outside the FES subspace")
    return FesVector(state.n, coeffs)
