"""Brute-force reference computations.

Nothing here calls the routines it is used to check: operators are built as
explicit 2^n x 2^n Kronecker products, eigenstates as literal sums of
|+>/|-> product vectors, and overlaps by direct bitstring enumeration.
"""

from __future__ import annotations

from itertools import combinations

import mpmath
import numpy as np

PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
MINUS = np.array([1.0, -1.0]) / np.sqrt(2)


def kron_all(vectors) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, v)
    return out


def kron_power(op, n: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, op)
    return out


def symmetric_sum_psi(p: int, q: int) -> np.ndarray:
    """Normalized sum of every product of p |+> and q |-> factors."""
    n = p + q
    total = np.zeros(1 << n, dtype=complex)
    for minus_at in combinations(range(n), q):
        total += kron_all(MINUS if k in minus_at else PLUS for k in range(n))
    return total / np.linalg.norm(total)


def dense_expectation(amps: np.ndarray, op, n: int) -> complex:
    """<psi| op^{(x)n} |psi> with the full matrix."""
    return complex(np.vdot(amps, kron_power(op, n) @ amps))


def product_overlaps(amps: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """|<(cos t|0> + sin t|1>)^{(x)n}|psi>|^2 for every t, by enumerating bitstrings."""
    n = int(np.log2(len(amps)))
    ones = np.array([bin(b).count("1") for b in range(1 << n)])
    c, s = np.cos(thetas)[:, None], np.sin(thetas)[:, None]
    mat = c ** (n - ones) * s**ones
    return np.abs(mat @ amps) ** 2


def central_difference_mp(amps: np.ndarray, theta: float, h: str = "1e-20", dps: int = 60) -> float:
    """Central-difference derivative of the product overlap at theta, in high precision."""
    n = int(np.log2(len(amps)))
    with mpmath.workdps(dps):
        vals = [mpmath.mpc(complex(a)) for a in amps]
        ones = [bin(b).count("1") for b in range(1 << n)]

        def f(x):
            c, s = mpmath.cos(x), mpmath.sin(x)
            amp = mpmath.fsum(c ** (n - k) * s**k * a for k, a in zip(ones, vals))
            return abs(amp) ** 2

        th, hh = mpmath.mpf(theta), mpmath.mpf(h)
        return float((f(th + hh) - f(th - hh)) / (2 * hh))


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over global phases of ||a - e^{i phi} b||."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))


def random_fes_coeffs(rng: np.random.Generator, n: int, real: bool = False) -> np.ndarray:
    d = n // 2 + 1
    c = rng.normal(size=d) + (0 if real else 1j * rng.normal(size=d))
    return c / np.linalg.norm(c)
