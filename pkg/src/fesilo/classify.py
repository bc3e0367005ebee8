"""Equivalence-class analysis of FES states.

Along the curve ``c_pq (1+t)^p (1-t)^q`` the term with the largest p wins as
t -> 1 and the one with the smallest p wins as t -> -1. So the closure of a
curve adds exactly two eigenstates, and any other eigenstate in the support
stays a finite distance away. When an entangled eigenstate is reached at an
end, the unnormalized vector vanishes there and so does the success
probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InvalidStateError
from .fes_basis import (
    BasisIndex,
    FesVector,
    dicke,
    fes_indices,
    slot,
)
from .ilo import FPolicy, IloParams, evolve, success_probability
from .statevec import (
    DEFAULT_TOL,
    H,
    X,
    StateVector,
    apply_local,
    is_exchange_symmetric,
)

#: |c_pq| above this counts as support.
SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class ClassReport:
    n: int
    is_eigenstate: bool
    support: tuple[BasisIndex, ...]
    p_max: int
    p_min: int
    endpoint_plus: BasisIndex
    endpoint_minus: BasisIndex
    # eigenstates in the closure of the curve (its t -> +-1 limits)
    neighbors: tuple[BasisIndex, ...]
    # the entangled subset of `neighbors`; reaching these has vanishing probability
    reachable_boundaries: tuple[BasisIndex, ...]
    # entangled eigenstates strictly between p_min and p_max: never on the curve
    interior_unreachable: tuple[BasisIndex, ...] = field(default=())

    def to_dict(self) -> dict:
        def lab(idx: BasisIndex) -> dict:
            return {"p": idx.p, "q": idx.q, "entangled": idx.entangled}

        return {
            "n": self.n,
            "is_eigenstate": self.is_eigenstate,
            "support": [lab(i) for i in self.support],
            "p_max": self.p_max,
            "p_min": self.p_min,
            "endpoint_plus": lab(self.endpoint_plus),
            "endpoint_minus": lab(self.endpoint_minus),
            "neighbors": [lab(i) for i in self.neighbors],
            "reachable_boundaries": [lab(i) for i in self.reachable_boundaries],
            "interior_unreachable": [lab(i) for i in self.interior_unreachable],
        }


def classify(v: FesVector, tol: float = SUPPORT_TOL) -> ClassReport:
    """Describe the equivalence class of ``v`` and the eigenstates bordering it."""
    support = tuple(idx for idx, c in zip(v.indices, v.coeffs) if abs(c) > tol)
    if not support:
        raise InvalidStateError(f"no coefficient exceeds the support threshold {tol:g}")
    plus = max(support, key=lambda i: i.p)
    minus = min(support, key=lambda i: i.p)
    if len(support) == 1:
        # an eigenstate of every FES ILO: its class is the single point {v}
        return ClassReport(v.n, True, support, plus.p, minus.p, plus, minus, (), (), ())
    neighbors = (plus, minus)
    interior = tuple(
        idx for idx in fes_indices(v.n) if idx.entangled and minus.p < idx.p < plus.p
    )
    return ClassReport(
        n=v.n,
        is_eigenstate=False,
        support=support,
        p_max=plus.p,
        p_min=minus.p,
        endpoint_plus=plus,
        endpoint_minus=minus,
        neighbors=neighbors,
        reachable_boundaries=tuple(i for i in neighbors if i.entangled),
        interior_unreachable=interior,
    )


@dataclass(frozen=True)
class StabilitySample:
    epsilon: float
    t: float
    infidelity: float
    probability: float


def stability_sweep(
    v: FesVector,
    target: BasisIndex,
    eps_grid: Sequence[float],
    f_policy: FPolicy = FPolicy.POVM_MAX,
    tol: float = SUPPORT_TOL,
) -> list[StabilitySample]:
    """Approach a curve endpoint: sample ``t = +-(1 - eps)`` for each eps.

    ``target`` must be the largest-p (approached from t -> 1) or smallest-p
    (t -> -1) support member of ``v``.
    """
    target = BasisIndex(*target)
    report = classify(v, tol)
    if target == report.endpoint_plus:
        sign = 1.0
    elif target == report.endpoint_minus:
        sign = -1.0
    else:
        raise ValueError(
            f"{target} is not an endpoint of this curve; endpoints are "
            f"{report.endpoint_plus} (t -> 1) and {report.endpoint_minus} (t -> -1)"
        )
    k = slot(target)
    samples = []
    for eps in eps_grid:
        if not 0.0 < eps < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {eps}")
        t = sign * (1.0 - eps)
        params = IloParams(t, f_policy)
        w = evolve(v, params).weights()
        # sum the other weights instead of 1 - F so tiny infidelities survive
        infid = float(np.delete(w, k).sum() / w.sum())
        samples.append(StabilitySample(float(eps), t, infid, success_probability(v, params)))
    return samples


def log_eps_grid(start_exp: float = -1, stop_exp: float = -6, per_decade: int = 5) -> np.ndarray:
    """``10**start_exp .. 10**stop_exp`` with ``per_decade`` points per decade."""
    count = int(round(abs(stop_exp - start_exp) * per_decade)) + 1
    return np.logspace(start_exp, stop_exp, count)


def closest_approach(v: FesVector, target: BasisIndex, n_grid: int = 10_000) -> float:
    """Smallest infidelity to ``target`` over a uniform grid of t in (-1, 1).

    t and 1/t give the same FES state, so (-1, 1) covers the whole curve.
    """
    ts = np.linspace(-1.0, 1.0, n_grid + 2)[1:-1]
    k = slot(BasisIndex(*target))
    best = np.inf
    for t in ts:
        w = evolve(v, IloParams(float(t))).weights()
        best = min(best, float(np.delete(w, k).sum() / w.sum()))
    return best


def ghz3_probability_closed_form(t: float, f: float) -> float:
    """``|f|^6 [(1 + t^2)^3 + 8 t^3]`` for three-qubit GHZ."""
    return abs(f) ** 6 * ((1 + t * t) ** 3 + 8 * t**3)


# four qubits


def build_g(a: complex, b: complex, c: complex, d: complex) -> StateVector:
    """Unnormalized four-qubit family member ``G_abcd``."""
    if a == b == c == d == 0:
        raise InvalidStateError("G_abcd is the zero vector when a = b = c = d = 0")
    amps = np.zeros(16, dtype=complex)
    for bits, val in (
        (("0000", "1111"), (a + d) / 2),
        (("0011", "1100"), (a - d) / 2),
        (("0101", "1010"), (b + c) / 2),
        (("0110", "1001"), (b - c) / 2),
    ):
        for s in bits:
            amps[int(s, 2)] = val
    return StateVector(4, amps)


def g_mu(a: complex, d: complex) -> complex:
    """Canonical-form parameter of ``G_{a, a-d, 0, d}``."""
    if a + d == 0:
        raise DomainError("mu is undefined when a + d = 0")
    return math.sqrt(3) * (a - d) / (a + d)


@dataclass(frozen=True)
class FourQubitG:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def fes_member(cls, a: complex, d: complex) -> "FourQubitG":
        return cls(a, a - d, 0, d)

    @property
    def is_fes_member(self) -> bool:
        return self.c == 0 and self.b == self.a - self.d

    @property
    def mu(self) -> complex:
        if not self.is_fes_member:
            raise ValueError("mu is defined only for b = a - d, c = 0")
        return g_mu(self.a, self.d)

    def state(self) -> StateVector:
        return build_g(self.a, self.b, self.c, self.d)


def canonical_four(mu: complex) -> StateVector:
    """``(GHZ_4 + mu D_4^(2)) / sqrt(1 + |mu|^2)``; infinite ``mu`` gives ``D_4^(2)``."""
    if math.isinf(abs(mu)):
        return dicke(4, 2)
    ghz = named_state("GHZ", 4).amps
    return StateVector(4, (ghz + mu * dicke(4, 2).amps) / math.sqrt(1 + abs(mu) ** 2))


# closest symmetric product state

GOLDEN = (math.sqrt(5) - 1) / 2


class ProductFit(NamedTuple):
    theta: float
    overlap_sq: float
    degenerate: bool
    n: int

    def product_state(self) -> StateVector:
        return StateVector.product([math.cos(self.theta), math.sin(self.theta)], self.n)


def _weight_sums(state: StateVector) -> np.ndarray:
    """Sum of amplitudes over bitstrings with w ones, for w = 0..n."""
    idx = np.arange(1 << state.n)
    ones = np.zeros_like(idx)
    for k in range(state.n):
        ones += (idx >> k) & 1
    return np.bincount(ones, weights=state.amps.real, minlength=state.n + 1) + 1j * np.bincount(
        ones, weights=state.amps.imag, minlength=state.n + 1
    )


def _overlap_sq(sums: np.ndarray, theta) -> np.ndarray:
    n = sums.shape[0] - 1
    theta = np.asarray(theta, dtype=float)[..., None]
    w = np.arange(n + 1)
    amp = (np.cos(theta) ** (n - w) * np.sin(theta) ** w) @ sums
    return np.abs(amp) ** 2


def _fourier(sums: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact Fourier series of the overlap, a degree-n polynomial in exp(2i theta)."""
    n = sums.shape[0] - 1
    m = 2 * n + 1
    samples = _overlap_sq(sums, np.arange(m) * math.pi / m)
    return np.fft.fft(samples) / m, 2.0 * np.fft.fftfreq(m, d=1.0 / m)


def _derivs(coef: np.ndarray, freq: np.ndarray, theta: float) -> tuple[float, float]:
    phase = coef * np.exp(1j * freq * theta)
    return float(np.sum(1j * freq * phase).real), float(np.sum(-(freq**2) * phase).real)


def golden_section_max(f, lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Maximize a unimodal function on [lo, hi] by golden-section search."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def closest_symmetric_product(
    state: StateVector,
    grid_size: int = 4096,
    refine_tol: float = 1e-12,
    tie_tol: float = 1e-9,
) -> ProductFit:
    """Maximize ``|<(cos t|0> + sin t|1>)^{(x)n} | state>|^2`` over t in [0, pi).

    Dense grid scan, golden-section refinement around the best grid point,
    then Newton steps on the exact derivative (float function values stop
    resolving the peak near 1e-8 in theta). Ties go to the smallest theta;
    ``degenerate`` flags another grid peak within ``tie_tol`` of the best.
    """
    if not is_exchange_symmetric(state, DEFAULT_TOL):
        raise InvalidStateError("closest_symmetric_product needs a permutation-symmetric state")
    if grid_size < 3:
        raise ValueError("grid_size must be at least 3")
    sums = _weight_sums(state)
    h = math.pi / grid_size
    grid = np.arange(grid_size) * h
    vals = _overlap_sq(sums, grid)
    top = float(vals.max())
    # peaks of the periodic grid within tie_tol of the top; the smallest theta wins
    left, right = np.roll(vals, 1), np.roll(vals, -1)
    peaks = np.flatnonzero((vals >= left) & (vals >= right) & (vals >= top - tie_tol))
    best = int(peaks[0])
    fmax = float(vals[best])
    far = np.minimum(np.abs(peaks - best), grid_size - np.abs(peaks - best)) > 1
    degenerate = bool(far.any())

    coef, freq = _fourier(sums)
    theta0 = grid[best]
    d1, _ = _derivs(coef, freq, theta0)
    if abs(d1) <= refine_tol:
        theta = theta0
    else:
        lo, hi = theta0 - h, theta0 + h
        theta = golden_section_max(lambda x: float(_overlap_sq(sums, x)), lo, hi, refine_tol)
        for _ in range(50):
            d1, d2 = _derivs(coef, freq, theta)
            if d2 >= 0:
                break
            step = d1 / d2
            if not lo <= theta - step <= hi:
                break
            theta -= step
            if abs(step) <= refine_tol:
                break
        # keep the grid point unless the polished point is at least as high
        # (to rounding) and flatter
        if _overlap_sq(sums, theta) < fmax - 1e-13 or abs(_derivs(coef, freq, theta)[0]) > abs(d1):
            theta = theta0
    theta = math.fmod(theta, math.pi)
    if theta < 0:
        theta += math.pi
    if math.pi - theta <= refine_tol:
        theta = 0.0  # same point under the period pi
    return ProductFit(theta, float(_overlap_sq(sums, theta)), degenerate, state.n)


# odd/even correspondence


def odd_even_map(v: FesVector, t: float) -> FesVector:
    """Map an odd-n (n = 2m+1) FES vector to its n = 2m partner.

    Each coefficient is multiplied by the common factor ``1 + t`` and the
    result renormalized, so the geometry is preserved while the success
    probabilities of the two problems differ by ``|f (1+t)|^2``.
    """
    if v.n % 2 == 0 or v.n < 3:
        raise ValueError(f"odd_even_map needs odd n >= 3, got n = {v.n}")
    if abs(1 + t) <= 1e-12:
        raise DomainError("the odd-even correspondence degenerates at t = -1")
    return FesVector(v.n - 1, v.coeffs * (1 + t)).normalized()


def even_odd_map(v: FesVector, t: float) -> FesVector:
    """Inverse of :func:`odd_even_map`: n = 2m -> n = 2m+1."""
    if v.n % 2:
        raise ValueError(f"even_odd_map needs even n, got n = {v.n}")
    if abs(1 + t) <= 1e-12:
        raise DomainError("the odd-even correspondence degenerates at t = -1")
    return FesVector(v.n + 1, v.coeffs / (1 + t)).normalized()


# named states


def named_state(name: str, n: int) -> StateVector:
    """GHZ (any n), W and W_fes (n = 3 only), S = |+...+> (any n)."""
    key = name.strip().lower()
    if key == "ghz":
        amps = np.zeros(1 << n, dtype=complex)
        amps[0] = amps[-1] = 1 / math.sqrt(2)
        return StateVector(n, amps)
    if key == "s":
        return StateVector.product(np.array([1, 1]) / math.sqrt(2), n)
    if key in ("w", "w_fes"):
        if n != 3:
            raise ValueError(f"{name} is defined for n = 3 only, got n = {n}")
        w = dicke(3, 2)  # |100> + |010> + |001>: two zeros
        # (H X)^{(x)3} W = H^{(x)3} S(3, 1) = psi_12
        return w if key == "w" else apply_local(H @ X, w)
    raise ValueError(f"unknown state name {name!r}; expected GHZ, W, W_fes or S")


NAMED_STATES = ("GHZ", "W", "W_fes", "S")


__all__ = [
    "SUPPORT_TOL",
    "ClassReport",
    "FourQubitG",
    "NAMED_STATES",
    "ProductFit",
    "StabilitySample",
    "build_g",
    "canonical_four",
    "classify",
    "closest_approach",
    "closest_symmetric_product",
    "even_odd_map",
    "g_mu",
    "ghz3_probability_closed_form",
    "golden_section_max",
    "log_eps_grid",
    "named_state",
    "odd_even_map",
    "stability_sweep",
]
