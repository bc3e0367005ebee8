import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fesilo.classify import named_state
from fesilo.errors import DomainError
from fesilo.fes_basis import BasisIndex, FesVector, embed, expand, fes_indices, fix_phase, psi_pq
from fesilo.ilo import (
    FPolicy,
    IloParams,
    antidiagonal_equivalent,
    compose_parameter,
    curve_trace,
    dense_probability,
    evolve,
    evolve_dense,
    lambda_pq,
    m_of_t,
    success_probability,
)
from fesilo.statevec import X, apply_local

from .oracles import dense_expectation, phase_aligned_distance, random_fes_coeffs

GHZ3 = FesVector(3, [0.5, np.sqrt(3) / 2])
UNIT, POVM = FPolicy.UNIT, FPolicy.POVM_MAX


def test_m_of_t_examples():
    assert np.allclose(m_of_t(IloParams(0.0, UNIT)), np.eye(2))
    assert np.allclose(m_of_t(IloParams(0.5, POVM)), (2 / 3) * np.array([[1, 0.5], [0.5, 1]]))


@pytest.mark.parametrize("t", [1.0, -1.0, 1 + 1e-13, -1 - 5e-13])
def test_singular_parameter_rejected(t):
    with pytest.raises(DomainError):
        IloParams(t)


def test_near_singular_allowed():
    IloParams(1 - 1e-9)


def test_lambda_examples():
    assert lambda_pq(1, 2, IloParams(0.0)) == pytest.approx(1.0)
    assert lambda_pq(1, 2, IloParams(0.5)) == pytest.approx(1.5 * 0.25)
    for f_policy in (UNIT, POVM):
        assert abs(lambda_pq(3, 0, IloParams(-1 + 1e-9, f_policy))) < 1e-26


def test_lambda_accepts_complex_t():
    t = 0.3 + 0.4j
    assert lambda_pq(2, 2, IloParams(t)) == pytest.approx((1 + t) ** 2 * (1 - t) ** 2)


def test_curve_needs_real_t():
    with pytest.raises(DomainError):
        evolve(GHZ3, IloParams(0.3 + 0.1j))


def test_evolve_identity_at_zero():
    rng = np.random.default_rng(3)
    v = FesVector(6, random_fes_coeffs(rng, 6))
    assert np.allclose(evolve(v, IloParams(0.0)).coeffs, v.coeffs, atol=1e-15)


def test_ghz3_limits():
    plus_end = evolve(GHZ3, IloParams(1 - 1e-6)).coeffs
    minus_end = evolve(GHZ3, IloParams(-1 + 1e-6)).coeffs
    assert np.allclose(plus_end, [1, 0], atol=1e-11)
    assert np.allclose(minus_end, [0, 1], atol=1e-11)


def test_success_probability_examples():
    rng = np.random.default_rng(4)
    v = FesVector(5, random_fes_coeffs(rng, 5))
    assert success_probability(v, IloParams(0.0, POVM)) == pytest.approx(1.0, abs=1e-15)
    # (1 + 0.25)^3 + 8 * 0.125
    assert success_probability(GHZ3, IloParams(0.5, UNIT)) == pytest.approx(2.953125, abs=1e-12)
    assert success_probability(GHZ3, IloParams(0.5, POVM)) == pytest.approx(2.953125 * (2 / 3) ** 6, abs=1e-12)


def test_ghz3_probability_matches_explicit_kron():
    ghz = named_state("GHZ", 3).amps
    for t in (-0.9, -0.3, 0.5, 2.5):
        for policy in (UNIT, POVM):
            m = m_of_t(IloParams(t, policy))
            expect = dense_expectation(ghz, m.conj().T @ m, 3).real
            assert success_probability(GHZ3, IloParams(t, policy)) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_spectral_probability_matches_dense(n):
    rng = np.random.default_rng(20 + n)
    for _ in range(4):
        v = FesVector(n, random_fes_coeffs(rng, n))
        t = float(rng.uniform(-0.98, 0.98))
        for policy in (UNIT, POVM):
            params = IloParams(t, policy)
            dense = dense_probability(embed(v), m_of_t(params))
            assert abs(success_probability(v, params) - dense) < 1e-10 * max(1.0, dense)


@pytest.mark.parametrize("n", range(2, 11))
def test_eigen_relation(n):
    rng = np.random.default_rng(40 + n)
    ts = list(rng.uniform(-0.99, 0.99, 16)) + [1.5, -1.5, 3.0, -3.0]
    for t in ts:
        params = IloParams(float(t), POVM)
        m = m_of_t(params)
        for idx in fes_indices(n):
            psi = psi_pq(idx.p, idx.q)
            resid = apply_local(m, psi).amps - lambda_pq(idx.p, idx.q, params) * psi.amps
            assert np.linalg.norm(resid) < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.floats(-0.95, 0.95))
def test_f_policy_does_not_change_geometry(n, seed, t):
    v = FesVector(n, random_fes_coeffs(np.random.default_rng(seed), n))
    a, b = evolve(v, IloParams(t, UNIT)), evolve(v, IloParams(t, POVM))
    assert np.array_equal(a.coeffs, b.coeffs)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_composition_law(n, seed, t1, t2):
    t3 = compose_parameter(t1, t2)
    assume(abs(abs(t3) - 1) > 1e-6)
    # M(t1) M(t2) = (1 + t1 t2) M(t3)
    assert np.allclose(m_of_t(IloParams(t1)) @ m_of_t(IloParams(t2)), (1 + t1 * t2) * m_of_t(IloParams(t3)), atol=1e-14)
    v = FesVector(n, random_fes_coeffs(np.random.default_rng(seed), n))
    twice = evolve(evolve(v, IloParams(t1)), IloParams(t2))
    once = evolve(v, IloParams(t3))
    assert phase_aligned_distance(twice.coeffs, once.coeffs) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 6, 9])
def test_povm_max_probability_at_most_one(n):
    rng = np.random.default_rng(60 + n)
    top = FesVector.basis_state(n, BasisIndex(n, 0))
    for t in (0.2, 0.7, 0.99, 4.0):
        assert success_probability(top, IloParams(t, POVM)) == pytest.approx(1.0, abs=1e-12)
        for _ in range(5):
            v = FesVector(n, random_fes_coeffs(rng, n))
            assert success_probability(v, IloParams(t, POVM)) < 1.0
        # for t < 0 the top eigenvalue belongs to psi_0n, which is FES only for even n
        bottom = FesVector.basis_state(n, fes_indices(n)[-1])
        p_bottom = success_probability(bottom, IloParams(-t, POVM))
        if n % 2 == 0:
            assert p_bottom == pytest.approx(1.0, abs=1e-12)
        else:
            assert p_bottom < 1.0
        v = FesVector(n, random_fes_coeffs(rng, n))
        assert success_probability(v, IloParams(-t, POVM)) < 1.0


def test_curve_trace_ghz3():
    grid = np.linspace(-0.99, 0.99, 199)
    samples = curve_trace(GHZ3, grid, POVM, [BasisIndex(3, 0), BasisIndex(1, 2)])
    assert [s.t for s in samples] == list(grid)
    first, last = samples[0], samples[-1]
    assert first.target_fidelities[BasisIndex(1, 2)] > 1 - 1e-9
    assert first.probability < 1e-4
    assert last.target_fidelities[BasisIndex(3, 0)] > 1 - 1e-8
    assert last.probability > 0.2
    probs = [s.probability for s in samples[:50]]
    assert all(a < b for a, b in zip(probs, probs[1:]))


def test_curve_trace_eigenstate_is_fixed():
    v = FesVector.basis_state(5, BasisIndex(3, 2))
    for s in curve_trace(v, np.linspace(-3, 3, 41), UNIT):
        assert phase_aligned_distance(s.state.coeffs, v.coeffs) < 1e-14


def test_curve_trace_four_qubit_endpoints():
    v = FesVector(4, [0.3, 0.8, np.sqrt(1 - 0.73)])
    samples = curve_trace(v, [-1 + 1e-5, 1 - 1e-5], POVM, fes_indices(4))
    assert samples[0].target_fidelities[BasisIndex(0, 4)] > 1 - 1e-9
    assert samples[1].target_fidelities[BasisIndex(4, 0)] > 1 - 1e-9


def test_curve_trace_rejects_singular_grid():
    with pytest.raises(DomainError):
        curve_trace(GHZ3, [0.0, 1.0])


def test_curve_trace_rejects_odd_q_target():
    with pytest.raises(ValueError):
        curve_trace(GHZ3, [0.0], targets=[BasisIndex(2, 1)])


def test_curve_trace_workers_preserve_order():
    rng = np.random.default_rng(8)
    v = FesVector(8, random_fes_coeffs(rng, 8))
    grid = np.linspace(-0.9, 0.9, 57)
    serial = curve_trace(v, grid, POVM, workers=1)
    threaded = curve_trace(v, grid, POVM, workers=4)
    assert [s.t for s in threaded] == [s.t for s in serial]
    for a, b in zip(serial, threaded):
        assert np.array_equal(a.state.coeffs, b.state.coeffs) and a.probability == b.probability


def test_antidiagonal_examples():
    assert np.allclose(antidiagonal_equivalent(0.0), X)
    assert np.allclose(antidiagonal_equivalent(0.0, POVM), X)
    ghz = named_state("GHZ", 3)
    assert np.allclose(apply_local(antidiagonal_equivalent(0.0), ghz).amps, ghz.amps)
    assert np.allclose(antidiagonal_equivalent(0.4, POVM), (1 / 1.4) * np.array([[0.4, 1], [1, 0.4]]))


@pytest.mark.parametrize("n", range(2, 9))
def test_antidiagonal_branch_traces_same_curve(n):
    rng = np.random.default_rng(70 + n)
    v = FesVector(n, random_fes_coeffs(rng, n))
    for s in (0.3, -0.6, 2.0):
        anti = expand(evolve_dense(embed(v), antidiagonal_equivalent(s)))
        diag = evolve(v, IloParams(s))
        assert np.linalg.norm(fix_phase(anti.coeffs) - fix_phase(diag.coeffs)) < 1e-10


def test_large_n_does_not_overflow():
    v = FesVector(200, np.ones(101) / np.sqrt(101))
    for t in (-1 + 1e-9, 1 - 1e-9, 0.5, 50.0):
        out = evolve(v, IloParams(t))
        assert np.all(np.isfinite(out.coeffs)) and abs(out.norm() - 1) < 1e-12
    assert np.isfinite(success_probability(v, IloParams(0.5, POVM)))
