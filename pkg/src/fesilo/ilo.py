"""FES invertible local operations and the curves they generate.

Every FES ILO is, up to a scalar, ``M(t) = f(t) [[1, t], [t, 1]]`` with
``t**2 != 1``. ``M(t)`` is diagonal in the ``|+>, |->`` basis with eigenvalues
``f (1 + t)`` and ``f (1 - t)``, so on the even-q basis the n-fold product acts
as the diagonal matrix ``lambda_pq = f**n (1+t)**p (1-t)**q``. Everything below
works with that diagonal form; the dense routes exist for cross-checking.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidStateError
from .fes_basis import BasisIndex, FesVector, fes_indices, slot
from .statevec import X, StateVector, apply_local, expectation_local

#: |t - 1| and |t + 1| must both exceed this.
SINGULAR_TOL = 1e-12


class FPolicy(str, enum.Enum):
    """How the scalar prefactor f(t) of M(t) is chosen."""

    UNIT = "unit"
    # f = 1/(1+|t|): largest eigenvalue of M^dagger M is exactly 1, so
    # (M^dagger M)^{(x)n} <= I and the branch probability is a real probability
    POVM_MAX = "povm_max"


def check_parameter(t: complex) -> None:
    if not np.isfinite(t):
        raise DomainError(f"curve parameter must be finite, got {t!r}")
    if abs(t - 1) <= SINGULAR_TOL or abs(t + 1) <= SINGULAR_TOL:
        raise DomainError(f"t = {t!r} is within {SINGULAR_TOL:g} of +-1, where M(t) is singular")


@dataclass(frozen=True)
class IloParams:
    t: complex
    f_policy: FPolicy = FPolicy.UNIT

    def __post_init__(self):
        check_parameter(self.t)
        object.__setattr__(self, "f_policy", FPolicy(self.f_policy))
        t = complex(self.t) if isinstance(self.t, complex) else float(self.t)
        if isinstance(t, complex) and t.imag == 0:
            t = t.real
        object.__setattr__(self, "t", t)

    @property
    def f(self) -> float:
        if self.f_policy is FPolicy.UNIT:
            return 1.0
        return 1.0 / (1.0 + abs(self.t))

    @property
    def is_real(self) -> bool:
        return not isinstance(self.t, complex)

    def real_t(self) -> float:
        if not self.is_real:
            raise DomainError(f"curves need a real parameter, got t = {self.t!r}")
        return float(self.t)


def _params(t_or_params, f_policy=FPolicy.UNIT) -> IloParams:
    if isinstance(t_or_params, IloParams):
        return t_or_params
    return IloParams(t_or_params, f_policy)


def m_of_t(params: IloParams) -> np.ndarray:
    """The 2x2 operator ``f(t) [[1, t], [t, 1]]``."""
    params = _params(params)
    t = params.t
    return params.f * np.array([[1, t], [t, 1]], dtype=complex)


def antidiagonal_equivalent(s: float, f_policy: FPolicy = FPolicy.UNIT) -> np.ndarray:
    """``f [[s, 1], [1, s]] = X M(s)``, the ``a = 0`` branch of the FES normal form.

    Since ``X^{(x)n}`` fixes FES states, this operator traces the same curve as ``M(s)``.
    """
    return X @ m_of_t(IloParams(s, f_policy))


def compose_parameter(t1: float, t2: float) -> float:
    """Parameter of ``M(t1) M(t2)``, which is proportional to ``M((t1+t2)/(1+t1 t2))``."""
    denom = 1 + t1 * t2
    if denom == 0:
        raise DomainError(f"M({t1}) M({t2}) is proportional to X; no finite composed parameter")
    return (t1 + t2) / denom


def lambda_pq(p: int, q: int, params: IloParams) -> complex:
    """Eigenvalue of ``M(t)^{(x)n}`` on psi_pq. Complex t is accepted here."""
    if p < 0 or q < 0 or p + q < 1:
        raise ValueError(f"invalid eigenstate label ({p}, {q})")
    params = _params(params)
    t = params.t
    return complex(params.f ** (p + q) * (1 + t) ** p * (1 - t) ** q)


def _log_gains(n: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    """log|(1+t)^p (1-t)^q| and its sign, per FesVector slot."""
    idx = fes_indices(n)
    p = np.array([i.p for i in idx])
    q = np.array([i.q for i in idx])
    a, b = 1.0 + t, 1.0 - t
    logmag = p * np.log(abs(a)) + q * np.log(abs(b))
    sign = np.where((a < 0) & (p % 2 == 1), -1.0, 1.0)  # q is even, so (1-t)^q > 0
    return logmag, sign


def evolve(v: FesVector, params: IloParams) -> FesVector:
    """Normalized ``M(t)^{(x)n} v``; independent of the f policy."""
    t = _params(params).real_t()
    logmag, sign = _log_gains(v.n, t)
    live = np.abs(v.coeffs) > 0
    if not live.any():
        raise InvalidStateError("cannot evolve the zero vector")
    # shift logs so the largest surviving term is O(1): no overflow for large n
    scale = np.exp(logmag - logmag[live].max())
    out = v.coeffs * sign * scale
    nrm = np.linalg.norm(out)
    if nrm == 0.0:
        raise InvalidStateError("evolved vector vanished")
    return FesVector(v.n, out / nrm)


def success_probability(v: FesVector, params: IloParams) -> float:
    """``<v| (M^dagger M)^{(x)n} |v>`` evaluated in the shared eigenbasis."""
    params = _params(params)
    t = params.real_t()
    logmag, _ = _log_gains(v.n, t)
    log_f = np.log(params.f)
    w = v.weights()
    live = w > 0
    terms = np.zeros_like(w)
    terms[live] = w[live] * np.exp(2.0 * (logmag[live] + v.n * log_f))
    return float(terms.sum())


def dense_probability(state: StateVector, op) -> float:
    """``<state| (op^dagger op)^{(x)n} |state>`` on the dense vector."""
    op = np.asarray(op, dtype=complex)
    return float(expectation_local(op.conj().T @ op, state).real)


def evolve_dense(state: StateVector, op) -> StateVector:
    return apply_local(op, state).normalized()


@dataclass(frozen=True, eq=False)
class CurveSample:
    t: float
    state: FesVector
    probability: float
    target_fidelities: dict[BasisIndex, float] = field(default_factory=dict)


def curve_point(
    v: FesVector, t: float, f_policy: FPolicy, targets: Sequence[BasisIndex] = ()
) -> CurveSample:
    params = IloParams(t, f_policy)
    state = evolve(v, params)
    fids = {idx: float(abs(state.coeffs[slot(idx)]) ** 2) for idx in targets}
    return CurveSample(float(t), state, success_probability(v, params), fids)


def curve_trace(
    v: FesVector,
    t_grid: Sequence[float],
    f_policy: FPolicy = FPolicy.POVM_MAX,
    targets: Sequence[BasisIndex] = (),
    workers: int = 1,
) -> list[CurveSample]:
    """Sample the ILO curve through ``v`` at each grid point, preserving grid order.

    Fidelities are reported against the even-q eigenstates named in ``targets``.
    """
    for t in t_grid:
        check_parameter(t)
    targets = [BasisIndex(*idx) for idx in targets]
    valid = set(fes_indices(v.n))
    for idx in targets:
        if idx not in valid:
            raise ValueError(f"{idx} is not an FES basis state for n={v.n}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda t: curve_point(v, t, f_policy, targets), t_grid))
    return [curve_point(v, t, f_policy, targets) for t in t_grid]
